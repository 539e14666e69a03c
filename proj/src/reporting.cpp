#include "hcfsim/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hcfsim/errors.hpp"
#include "hcfsim/rng.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

using nlohmann::json;

std::string format_g6(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

Pipeline::Pipeline(Scenario scenario) : scenario_(std::move(scenario)) {
    for (const auto& [card, file] : scenario_.constellation_files)
        formats_.push_back(Constellation::load_csv(file));
    std::sort(formats_.begin(), formats_.end(),
              [](const Constellation& a, const Constellation& b) { return a.size() < b.size(); });
    std::vector<double> knots;
    for (double s = scenario_.gmi.knot_min_db; s <= scenario_.gmi.knot_max_db + 1e-9;
         s += scenario_.gmi.knot_step_db)
        knots.push_back(s);
    for (const auto& c : formats_) {
        tables_.emplace(c.bits(),
                        GmiTable::build(c, knots, scenario_.gmi.samples,
                                        derive_seed(scenario_.seed, 0x7461626cull,
                                                    static_cast<std::uint64_t>(c.bits()))));
    }
}

const GmiTable& Pipeline::table(int bits) const {
    auto it = tables_.find(bits);
    if (it == tables_.end())
        throw Error(ErrorKind::NotFound, "no GMI table for m=" + std::to_string(bits));
    return it->second;
}

std::vector<ChannelSnr> Pipeline::evaluate_snr() const {
    const DirectionalScenario fw = directional(scenario_, Direction::FW);
    DirectionalScenario bw = directional(scenario_, Direction::BW);
    if (scenario_.mode == Mode::Unidi) {
        // FW only; backscatter/leak terms stay at the +inf sentinel.
        return evaluate_scenario(fw, fw);
    }
    return evaluate_scenario(fw, bw);
}

std::vector<ChannelResult> Pipeline::price(const std::vector<ChannelSnr>& rows,
                                           const FecModel& fec) const {
    std::vector<ChannelResult> out(rows.size());
    const double symbol_rate = scenario_.plan.symbol_rate_baud();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const Channel& ch = scenario_.plan.channel(row.channel_id);
        ChannelResult r;
        r.channel_id = row.channel_id;
        r.direction = row.direction;
        r.band = scenario_.plan.bands()[static_cast<std::size_t>(ch.band_index)].name;
        r.frequency_hz = ch.center_frequency_hz;
        r.snr_total_db = row.snr.snr_total_db;
        r.excluded = row.excluded;

        // Decoded-rate-maximizing format; ties go to the lower cardinality.
        double best_net = -1.0, best_gmi = 0.0, best_rate = 0.0;
        int best_bits = 0;
        for (const auto& c : formats_) {
            const double gmi = table(c.bits()).gmi_at(row.snr.snr_total_db);
            const double rate = max_code_rate(ngmi(gmi, c.bits()), fec);
            const double net = rate * c.bits();
            if (net > best_net + 1e-12) {
                best_net = net;
                best_bits = c.bits();
                best_gmi = gmi;
                best_rate = rate;
            }
        }
        r.format_cardinality = 1 << best_bits;
        r.code_rate = best_rate;
        if (!r.excluded) {
            r.gmi_rate_bps = gmi_data_rate_bps(symbol_rate, best_gmi, scenario_.pilot_overhead);
            r.decoded_rate_bps =
                decoded_data_rate_bps(symbol_rate, best_bits, best_rate, scenario_.pilot_overhead);
        }
        out[i] = r;
    }
    return out;
}

std::vector<ChannelResult> Pipeline::evaluate() const {
    return price(evaluate_snr(), scenario_.fec);
}

double Pipeline::band_gmi_bps(const std::string& band, double trx_override_db) const {
    Scenario sc = scenario_; // cheap relative to the table builds, which are reused
    sc.link.trx_snr_db[band] = trx_override_db;
    const DirectionalScenario fw = directional(sc, Direction::FW);
    const DirectionalScenario bw = directional(sc, Direction::BW);
    auto rows = evaluate_scenario_serial(fw, sc.mode == Mode::Unidi ? fw : bw);
    double total = 0.0;
    for (const auto& row : rows) {
        if (row.excluded) continue;
        const Channel& ch = sc.plan.channel(row.channel_id);
        if (sc.plan.bands()[static_cast<std::size_t>(ch.band_index)].name != band) continue;
        double best_net = -1.0, best_gmi = 0.0;
        for (const auto& c : formats_) {
            const double gmi = table(c.bits()).gmi_at(row.snr.snr_total_db);
            const double rate = max_code_rate(ngmi(gmi, c.bits()), sc.fec);
            const double net = rate * c.bits();
            if (net > best_net + 1e-12) {
                best_net = net;
                best_gmi = gmi;
            }
        }
        total += gmi_data_rate_bps(sc.plan.symbol_rate_baud(), best_gmi, sc.pilot_overhead);
    }
    return total;
}

void Pipeline::calibrate() {
    if (!scenario_.calibration) return;
    const CalibrationSpec& cal = *scenario_.calibration;
    std::vector<std::string> bands;
    for (const auto& b : scenario_.plan.bands()) bands.push_back(b.name);

    for (int pass = 0; pass < cal.passes; ++pass) {
        // Per-band trx against the bidirectional band GMI totals.
        std::map<std::string, double> targets;
        for (const auto& [band, tbps] : cal.band_gmi_tbps) targets[band] = tbps * 1e12;
        auto outcome = calibrate_trx_metric(
            bands, targets,
            [this](const std::string& band, double trx) { return band_gmi_bps(band, trx); },
            2e-3);
        for (const auto& [band, trx] : outcome.trx_snr_db) scenario_.link.trx_snr_db[band] = trx;

        // Global NGMI gap against the decoded grand total (monotone
        // decreasing in the gap).
        if (cal.decoded_total_tbps) {
            const double target = *cal.decoded_total_tbps * 1e12;
            const auto rows = evaluate_snr();
            auto decoded_total = [&](double gap) {
                FecModel fec = scenario_.fec;
                fec.ngmi_gap = gap;
                double total = 0.0;
                for (const auto& r : price(rows, fec)) total += r.decoded_rate_bps;
                return total;
            };
            double lo = 0.0, hi = 0.40;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (decoded_total(mid) > target)
                    lo = mid;
                else
                    hi = mid;
            }
            scenario_.fec.ngmi_gap = 0.5 * (lo + hi);
        }
    }
}

AggregateReport aggregate_report(const std::vector<ChannelResult>& results) {
    AggregateReport rep;
    for (const auto& r : results) {
        ++rep.channels;
        if (r.excluded) {
            ++rep.excluded;
            rep.bands[r.band]; // band still appears in the table
            continue;
        }
        auto& cell = rep.bands[r.band];
        auto& tot = rep.total;
        if (r.direction == Direction::FW) {
            cell.gmi_fw += r.gmi_rate_bps;
            cell.decoded_fw += r.decoded_rate_bps;
            tot.gmi_fw += r.gmi_rate_bps;
            tot.decoded_fw += r.decoded_rate_bps;
        } else {
            cell.gmi_bw += r.gmi_rate_bps;
            cell.decoded_bw += r.decoded_rate_bps;
            tot.gmi_bw += r.gmi_rate_bps;
            tot.decoded_bw += r.decoded_rate_bps;
        }
    }
    return rep;
}

namespace {

json aggregate_to_json(const AggregateReport& rep, const Scenario& sc) {
    json bands = json::object();
    // Report bands in plan order (ascending frequency), not map order.
    for (const auto& band : sc.plan.bands()) {
        auto it = rep.bands.find(band.name);
        if (it == rep.bands.end()) continue;
        const auto& c = it->second;
        bands[band.name] = {
            {"gmi_tbps_fw", c.gmi_fw / 1e12},
            {"gmi_tbps_bw", c.gmi_bw / 1e12},
            {"gmi_tbps_total", (c.gmi_fw + c.gmi_bw) / 1e12},
            {"decoded_tbps_fw", c.decoded_fw / 1e12},
            {"decoded_tbps_bw", c.decoded_bw / 1e12},
            {"decoded_tbps_total", (c.decoded_fw + c.decoded_bw) / 1e12},
        };
    }
    return json{
        {"bands", bands},
        {"directions",
         {{"FW",
           {{"gmi_tbps", rep.total.gmi_fw / 1e12}, {"decoded_tbps", rep.total.decoded_fw / 1e12}}},
          {"BW",
           {{"gmi_tbps", rep.total.gmi_bw / 1e12},
            {"decoded_tbps", rep.total.decoded_bw / 1e12}}}}},
        {"grand_total",
         {{"gmi_tbps", (rep.total.gmi_fw + rep.total.gmi_bw) / 1e12},
          {"decoded_tbps", (rep.total.decoded_fw + rep.total.decoded_bw) / 1e12}}},
        {"channels", rep.channels},
        {"excluded", rep.excluded},
    };
}

} // namespace

RunResult run(Pipeline& pipeline, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    pipeline.calibrate();
    const Scenario& sc = pipeline.scenario();

    RunResult rr;
    const auto snr_rows = pipeline.evaluate_snr();
    rr.results = pipeline.evaluate();
    rr.aggregate = aggregate_report(rr.results);

    // Per-channel CSV, ordered FW by channel id then BW.
    rr.results_csv = out_dir / "results.csv";
    {
        std::ofstream out(rr.results_csv, std::ios::binary);
        out << "channel_id,direction,band,freq_hz,snr_db,format,code_rate,gmi_gbps,decoded_gbps,"
               "excluded\n";
        for (const auto& r : rr.results) {
            out << r.channel_id << ',' << to_string(r.direction) << ',' << r.band << ','
                << format_g6(r.frequency_hz) << ',' << format_g6(r.snr_total_db) << ','
                << r.format_cardinality << ',' << format_g6(r.code_rate) << ','
                << format_g6(r.gmi_rate_bps / 1e9) << ',' << format_g6(r.decoded_rate_bps / 1e9)
                << ',' << (r.excluded ? 1 : 0) << '\n';
        }
    }

    rr.breakdown_csv = out_dir / "snr_breakdown.csv";
    {
        std::ofstream out(rr.breakdown_csv, std::ios::binary);
        out << "channel_id,direction,snr_trx_db,snr_ase_db,snr_rb_db,snr_leak_db,snr_total_db\n";
        for (const auto& r : snr_rows) {
            out << r.channel_id << ',' << to_string(r.direction) << ','
                << format_g6(r.snr.snr_trx_db) << ',' << format_g6(r.snr.snr_ase_db) << ','
                << format_g6(r.snr.snr_rb_db) << ',' << format_g6(r.snr.snr_leak_db) << ','
                << format_g6(r.snr.snr_total_db) << '\n';
        }
    }

    rr.aggregate_json = out_dir / "aggregate.json";
    {
        std::ofstream out(rr.aggregate_json, std::ios::binary);
        out << aggregate_to_json(rr.aggregate, sc).dump(2) << '\n';
    }

    rr.manifest_json = out_dir / "manifest.json";
    {
        json fitted = json::object();
        for (const auto& [band, trx] : sc.link.trx_snr_db) fitted[band] = trx;
        std::string config_digest;
        for (const auto& [band, trx] : sc.link.trx_snr_db)
            config_digest += band + "=" + format_g6(trx) + ";";
        config_digest += "gap=" + format_g6(sc.fec.ngmi_gap);
        config_digest += ";seed=" + std::to_string(sc.seed);
        config_digest += ";mode=" + std::string(sc.mode == Mode::Bidi ? "bidi" : "unidi");
        json manifest = {
            {"version", "hcfsim 0.1.0"},
            {"seed", sc.seed},
            {"mode", sc.mode == Mode::Bidi ? "bidi" : "unidi"},
            {"channels", sc.plan.channel_count()},
            {"config_hash", hex64(fnv1a64(config_digest))},
            {"trx_snr_db", fitted},
            {"ngmi_gap", sc.fec.ngmi_gap},
            {"results_csv_fnv64", hex64(fnv1a64_file(rr.results_csv))},
            {"breakdown_csv_fnv64", hex64(fnv1a64_file(rr.breakdown_csv))},
            {"aggregate_json_fnv64", hex64(fnv1a64_file(rr.aggregate_json))},
        };
        std::ofstream out(rr.manifest_json, std::ios::binary);
        out << manifest.dump(2) << '\n';
    }
    return rr;
}

CompareReport compare(const std::filesystem::path& aggregate_path,
                      const std::filesystem::path& reference_path) {
    auto load = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw Error(ErrorKind::IoError, "cannot open " + p.string());
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ConfigError, p.string() + ": " + e.what());
        }
        return j;
    };
    const json actual = load(aggregate_path);
    const json ref = load(reference_path);

    const double gmi_tol = ref.contains("tolerances")
                               ? ref["tolerances"].value("gmi_rel", 0.02)
                               : 0.02;
    const double dec_tol = ref.contains("tolerances")
                               ? ref["tolerances"].value("decoded_rel", 0.03)
                               : 0.03;

    CompareReport rep;
    auto check = [&rep](const std::string& name, double act, double refv, double tol) {
        CompareCell cell;
        cell.name = name;
        cell.actual = act;
        cell.reference = refv;
        cell.tolerance = tol;
        cell.rel_error = refv != 0.0 ? std::abs(act - refv) / std::abs(refv) : std::abs(act);
        cell.pass = cell.rel_error <= tol;
        if (!cell.pass) rep.all_pass = false;
        rep.cells.push_back(cell);
    };

    if (!ref.contains("bands") || !actual.contains("bands"))
        throw Error(ErrorKind::ConfigError, "both tables need a 'bands' section");
    for (const auto& [band, cells] : ref["bands"].items()) {
        if (!actual["bands"].contains(band))
            throw Error(ErrorKind::ConfigError, "band " + band + " missing from results");
        if (cells.contains("gmi_tbps"))
            check(band + ".gmi", actual["bands"][band].value("gmi_tbps_total", 0.0),
                  cells["gmi_tbps"].get<double>(), gmi_tol);
        if (cells.contains("decoded_tbps"))
            check(band + ".decoded", actual["bands"][band].value("decoded_tbps_total", 0.0),
                  cells["decoded_tbps"].get<double>(), dec_tol);
    }
    for (const auto& [band, cells] : actual["bands"].items()) {
        if (!ref["bands"].contains(band))
            throw Error(ErrorKind::ConfigError, "band " + band + " missing from reference");
        (void)cells;
    }
    if (ref.contains("directions")) {
        for (const auto& [dir, cells] : ref["directions"].items()) {
            if (cells.contains("gmi_tbps"))
                check(dir + ".gmi", actual["directions"][dir].value("gmi_tbps", 0.0),
                      cells["gmi_tbps"].get<double>(), gmi_tol);
            if (cells.contains("decoded_tbps"))
                check(dir + ".decoded", actual["directions"][dir].value("decoded_tbps", 0.0),
                      cells["decoded_tbps"].get<double>(), dec_tol);
        }
    }
    return rep;
}

} // namespace hcfsim
