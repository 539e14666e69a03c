#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hcfsim/constellation.hpp"
#include "hcfsim/scenario.hpp"

namespace hcfsim {

/// Prices every channel of a scenario: link budget -> GMI (per-format
/// monotone tables from Monte-Carlo knots) -> code rate -> data rates.
class Pipeline {
public:
    explicit Pipeline(Scenario scenario);

    const Scenario& scenario() const { return scenario_; }

    /// Fit per-band trx SNR to the band GMI targets and the global NGMI gap
    /// to the decoded total (when the scenario carries calibration targets).
    void calibrate();

    std::vector<ChannelResult> evaluate() const;
    std::vector<ChannelSnr> evaluate_snr() const;

    /// Bidirectional GMI throughput of one band, all other config fixed.
    double band_gmi_bps(const std::string& band, double trx_override_db) const;

    const std::vector<Constellation>& formats() const { return formats_; }
    const GmiTable& table(int bits) const;

private:
    std::vector<ChannelResult> price(const std::vector<ChannelSnr>& rows,
                                     const FecModel& fec) const;

    Scenario scenario_;
    std::vector<Constellation> formats_; // ascending cardinality
    std::map<int, GmiTable> tables_;     // keyed by bits
};

struct AggregateReport {
    // band -> {gmi_fw, gmi_bw, decoded_fw, decoded_bw} in bit/s
    struct Cell {
        double gmi_fw = 0, gmi_bw = 0, decoded_fw = 0, decoded_bw = 0;
    };
    std::map<std::string, Cell> bands;
    Cell total;
    int channels = 0, excluded = 0;
};

AggregateReport aggregate_report(const std::vector<ChannelResult>& results);

struct RunResult {
    std::vector<ChannelResult> results;
    AggregateReport aggregate;
    std::filesystem::path results_csv, breakdown_csv, aggregate_json, manifest_json;
};

/// Full evaluation with file outputs. Reruns with the same scenario and seed
/// are byte-identical for any jobs count.
RunResult run(Pipeline& pipeline, const std::filesystem::path& out_dir);

struct CompareCell {
    std::string name;
    double actual = 0, reference = 0, rel_error = 0, tolerance = 0;
    bool pass = false;
};

struct CompareReport {
    std::vector<CompareCell> cells;
    bool all_pass = true;
};

/// Aggregate JSON versus a reference table (per-band and per-direction GMI
/// and decoded totals, Tb/s).
CompareReport compare(const std::filesystem::path& aggregate_json,
                      const std::filesystem::path& reference_json);

/// Shortest-of-%.6g float formatting via std::to_chars; locale-independent,
/// used for every numeric CSV field.
std::string format_g6(double value);

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

} // namespace hcfsim
