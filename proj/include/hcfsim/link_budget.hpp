#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcfsim/channel_plan.hpp"
#include "hcfsim/fiber_model.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

enum class Direction { FW, BW };

inline const char* to_string(Direction d) { return d == Direction::FW ? "FW" : "BW"; }

struct AmplifierSpec {
    std::string band;
    double noise_figure_db = 5.0;
    double max_output_power_dbm = 20.0;
    // gain mode is fixed-output-power; with gain >> 1 the ASE term is
    // referred to the amplifier input and the actual gain drops out.
};

/// Per-channel SNR decomposition. All entries in dB; the total is the
/// inverse-linear sum of the components.
struct SnrBreakdown {
    double snr_trx_db = kInfDb;
    double snr_ase_db = kInfDb;
    double snr_rb_db = kInfDb;
    double snr_leak_db = kInfDb;
    double snr_total_db = kInfDb;
};

struct LinkConfig {
    std::map<std::string, AmplifierSpec> amplifiers; // keyed by band name
    std::map<std::string, double> trx_snr_db;        // back-to-back SNR per band
    double circulator_directivity_db = 50.0;
    double extras_loss_db = 4.0; // lumped coupler + circulator insertion loss
    double noise_bandwidth_hz = 0.0; // 0 -> symbol rate
    std::optional<double> nonlinear_snr_db; // optional what-if penalty term
    RbColumn rb_column = RbColumn::Hcf;
};

struct DirectionalScenario {
    const ChannelPlan* plan = nullptr;
    const FiberProfile* fiber = nullptr;
    LinkConfig link;
    Direction direction = Direction::FW;
    bool bidirectional = true;
};

struct ChannelSnr {
    int channel_id = 0;
    Direction direction = Direction::FW;
    SnrBreakdown snr;
    bool excluded = false;
};

/// Flat-launch per-channel power: band total minus 10 log10(channel count).
double per_channel_launch_power_dbm(const BandSpec& band, Direction direction);

/// Receiver-preamplifier ASE-limited SNR (gain >> 1): P / (h nu NF B).
double ase_snr_db(double rx_power_dbm, double nf_db, double photon_energy_j,
                  double noise_bandwidth_hz);

/// Near-end crosstalk leaking through the circulator port 1->3 path.
double leakage_interference_dbm(double tx_power_same_port_dbm, double directivity_db);

/// Inverse-linear SNR combination of finite and infinite terms.
double combine_snrs_db(std::span<const double> snrs_db);

SnrBreakdown evaluate_channel(const DirectionalScenario& scenario, int channel_id);

/// SNR penalty of bi-directional operation versus the same channel with the
/// backscatter and leakage terms switched off.
double bidi_penalty_db(const DirectionalScenario& scenario, int channel_id);

/// Both directions of a bidi scenario (or FW only for uni-di). Excluded
/// channels are flagged, not dropped. Parallel and serial execution produce
/// identical results.
std::vector<ChannelSnr> evaluate_scenario(const DirectionalScenario& fw,
                                          const DirectionalScenario& bw);
std::vector<ChannelSnr> evaluate_scenario_serial(const DirectionalScenario& fw,
                                                 const DirectionalScenario& bw);

struct CalibrationOutcome {
    std::map<std::string, double> trx_snr_db;
    bool at_boundary = false; // a band needed trx -> infinity
};

/// Fit the per-band transceiver SNR so a band metric matches its target, by
/// monotone bisection to 0.5 % relative. The metric is the band mean SNR by
/// default; throughput-mode callers supply their own evaluator.
using BandMetric = std::function<double(const std::string& band, double trx_snr_db)>;

CalibrationOutcome calibrate_trx_snr(const DirectionalScenario& fw, const DirectionalScenario& bw,
                                     const std::map<std::string, double>& band_mean_snr_targets_db);

CalibrationOutcome calibrate_trx_metric(std::span<const std::string> bands,
                                        const std::map<std::string, double>& targets,
                                        const BandMetric& metric, double rel_tol = 5e-3);

} // namespace hcfsim
