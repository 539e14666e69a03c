#include "hcfsim/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hcfsim/errors.hpp"

namespace hcfsim {

using nlohmann::json;

namespace {

class Collector {
public:
    void add(const std::string& path, const std::string& what) {
        errors_.push_back(path + ": " + what);
    }
    bool ok() const { return errors_.empty(); }
    std::string message() const {
        std::string all = std::to_string(errors_.size()) + " validation error(s)";
        for (const auto& e : errors_) all += "\n  - " + e;
        return all;
    }

private:
    std::vector<std::string> errors_;
};

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback, Collector& errs,
         const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        errs.add(path + "." + key, e.what());
        return fallback;
    }
}

template <typename T>
std::optional<T> require(const json& j, const std::string& key, Collector& errs,
                         const std::string& path) {
    if (!j.contains(key)) {
        errs.add(path + "." + key, "missing");
        return std::nullopt;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        errs.add(path + "." + key, e.what());
        return std::nullopt;
    }
}

} // namespace

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    Collector errs;
    Scenario sc;

    // --- plan ---
    std::vector<BandSpec> bands;
    double grid = 0, symbol_rate = 0, guard = 0, rolloff = 0;
    std::vector<int> excluded;
    if (!j.contains("plan")) {
        errs.add("plan", "missing");
    } else {
        const json& p = j["plan"];
        grid = require<double>(p, "grid_spacing_hz", errs, "plan").value_or(0);
        symbol_rate = require<double>(p, "symbol_rate_baud", errs, "plan").value_or(0);
        guard = get_or<double>(p, "guard_band_hz", 0.0, errs, "plan");
        rolloff = get_or<double>(p, "rolloff", 0.0, errs, "plan");
        excluded = get_or<std::vector<int>>(p, "excluded_channels", {}, errs, "plan");
        if (!p.contains("bands") || !p["bands"].is_array() || p["bands"].empty()) {
            errs.add("plan.bands", "missing or empty");
        } else {
            int idx = 0;
            for (const auto& bj : p["bands"]) {
                const std::string bp = "plan.bands[" + std::to_string(idx++) + "]";
                BandSpec b;
                b.name = require<std::string>(bj, "name", errs, bp).value_or("");
                b.start_frequency_hz =
                    require<double>(bj, "start_frequency_hz", errs, bp).value_or(0);
                b.bandwidth_hz = require<double>(bj, "bandwidth_hz", errs, bp).value_or(0);
                b.channel_count = require<int>(bj, "channel_count", errs, bp).value_or(0);
                b.launch_power_fw_dbm =
                    require<double>(bj, "launch_power_fw_dbm", errs, bp).value_or(0);
                b.launch_power_bw_dbm =
                    require<double>(bj, "launch_power_bw_dbm", errs, bp).value_or(0);
                bands.push_back(std::move(b));
            }
        }
    }

    // --- fiber ---
    double length_km = 0;
    std::vector<std::pair<double, double>> att_curve;
    std::map<std::string, RbCoefficient> rb;
    std::vector<GasLine> gas;
    if (!j.contains("fiber")) {
        errs.add("fiber", "missing");
    } else {
        const json& f = j["fiber"];
        length_km = require<double>(f, "length_km", errs, "fiber").value_or(0);
        if (length_km < 0) errs.add("fiber.length_km", "must be non-negative");
        auto att_file = require<std::string>(f, "attenuation_file", errs, "fiber");
        auto rb_file = require<std::string>(f, "rb_file", errs, "fiber");
        auto gas_file = get_or<std::string>(f, "gas_lines_file", "", errs, "fiber");
        try {
            if (att_file) att_curve = load_attenuation_csv(base / *att_file);
        } catch (const Error& e) {
            errs.add("fiber.attenuation_file", e.what());
        }
        try {
            if (rb_file) rb = load_rb_csv(base / *rb_file);
        } catch (const Error& e) {
            errs.add("fiber.rb_file", e.what());
        }
        try {
            if (!gas_file.empty()) gas = load_gas_lines_csv(base / gas_file);
        } catch (const Error& e) {
            errs.add("fiber.gas_lines_file", e.what());
        }
        const std::string col = get_or<std::string>(f, "rb_column", "hcf", errs, "fiber");
        if (col == "hcf")
            sc.link.rb_column = RbColumn::Hcf;
        else if (col == "smf")
            sc.link.rb_column = RbColumn::Smf;
        else
            errs.add("fiber.rb_column", "must be 'hcf' or 'smf'");
    }

    // --- link budget ---
    if (!j.contains("amplifiers")) {
        errs.add("amplifiers", "missing");
    } else {
        for (const auto& [band, aj] : j["amplifiers"].items()) {
            AmplifierSpec a;
            a.band = band;
            a.noise_figure_db =
                get_or<double>(aj, "noise_figure_db", 5.0, errs, "amplifiers." + band);
            a.max_output_power_dbm =
                get_or<double>(aj, "max_output_power_dbm", 20.0, errs, "amplifiers." + band);
            if (a.noise_figure_db < 3.0)
                sc.warnings.push_back("amplifiers." + band +
                                      ": noise figure below 3 dB (quantum-limit territory)");
            sc.link.amplifiers[band] = a;
        }
    }
    if (!j.contains("trx_snr")) {
        errs.add("trx_snr", "missing");
    } else {
        for (const auto& [band, v] : j["trx_snr"].items()) {
            if (v.is_number())
                sc.link.trx_snr_db[band] = v.get<double>();
            else
                errs.add("trx_snr." + band, "must be a number");
        }
    }
    sc.link.circulator_directivity_db =
        get_or<double>(j, "circulator_directivity_db", 50.0, errs, "");
    if (sc.link.circulator_directivity_db <= 0)
        errs.add("circulator_directivity_db", "must be positive");
    sc.link.extras_loss_db = get_or<double>(j, "extras_loss_db", 4.0, errs, "");
    if (j.contains("nonlinear_snr_db"))
        sc.link.nonlinear_snr_db = get_or<double>(j, "nonlinear_snr_db", kInfDb, errs, "");

    // --- fec ---
    if (j.contains("fec")) {
        const json& f = j["fec"];
        sc.fec.rate_granularity = get_or<double>(f, "rate_granularity", 0.01, errs, "fec");
        sc.fec.min_rate = get_or<double>(f, "min_rate", 0.50, errs, "fec");
        sc.fec.max_rate = get_or<double>(f, "max_rate", 0.95, errs, "fec");
        sc.fec.ngmi_gap = get_or<double>(f, "ngmi_gap", 0.02, errs, "fec");
        if (sc.fec.min_rate <= 0 || sc.fec.min_rate > sc.fec.max_rate || sc.fec.max_rate >= 1 ||
            sc.fec.rate_granularity <= 0 || sc.fec.ngmi_gap < 0)
            errs.add("fec", "rates must satisfy 0 < min <= max < 1, granularity > 0, gap >= 0");
    }
    sc.pilot_overhead = get_or<double>(j, "pilot_overhead", 0.04, errs, "");
    if (sc.pilot_overhead < 0 || sc.pilot_overhead >= 1)
        errs.add("pilot_overhead", "must be in [0, 1)");

    // --- constellations ---
    if (!j.contains("constellations")) {
        errs.add("constellations", "missing");
    } else {
        for (const auto& [card, file] : j["constellations"].items()) {
            int m = 0;
            try {
                m = std::stoi(card);
            } catch (const std::exception&) {
                errs.add("constellations." + card, "key must be a cardinality");
                continue;
            }
            const auto p2 = base / file.get<std::string>();
            if (!std::filesystem::exists(p2))
                errs.add("constellations." + card, "file not found: " + p2.string());
            else
                sc.constellation_files[m] = p2;
        }
    }

    if (j.contains("gmi")) {
        const json& g = j["gmi"];
        sc.gmi.samples = get_or<std::int64_t>(g, "samples", 100000, errs, "gmi");
        sc.gmi.knot_min_db = get_or<double>(g, "knot_min_db", 0.0, errs, "gmi");
        sc.gmi.knot_max_db = get_or<double>(g, "knot_max_db", 30.0, errs, "gmi");
        sc.gmi.knot_step_db = get_or<double>(g, "knot_step_db", 1.0, errs, "gmi");
        if (sc.gmi.samples < 1000) errs.add("gmi.samples", "must be >= 1000");
        if (sc.gmi.knot_step_db <= 0 || sc.gmi.knot_max_db <= sc.gmi.knot_min_db)
            errs.add("gmi", "bad knot range");
    }

    if (j.contains("calibration")) {
        const json& c = j["calibration"];
        CalibrationSpec cal;
        if (c.contains("band_gmi_tbps"))
            for (const auto& [band, v] : c["band_gmi_tbps"].items())
                cal.band_gmi_tbps[band] = v.get<double>();
        if (c.contains("decoded_total_tbps"))
            cal.decoded_total_tbps = c["decoded_total_tbps"].get<double>();
        cal.passes = get_or<int>(c, "passes", 2, errs, "calibration");
        sc.calibration = std::move(cal);
    }

    sc.seed = get_or<std::uint64_t>(j, "seed", 1, errs, "");
    const std::string mode = get_or<std::string>(j, "mode", "bidi", errs, "");
    if (mode == "bidi")
        sc.mode = Mode::Bidi;
    else if (mode == "unidi")
        sc.mode = Mode::Unidi;
    else
        errs.add("mode", "must be 'bidi' or 'unidi'");

    // --- construction + cross-checks; keep collecting so one report carries
    // every problem ---
    bool plan_ok = false, fiber_ok = false;
    if (!bands.empty() && grid > 0) {
        try {
            sc.plan = build_plan(bands, grid, symbol_rate, guard, rolloff, excluded);
            plan_ok = true;
        } catch (const Error& e) {
            errs.add("plan", e.what());
        }
    }
    if (att_curve.size() >= 2 && length_km >= 0) {
        try {
            sc.fiber = FiberProfile(length_km, att_curve, rb, gas);
            fiber_ok = true;
        } catch (const Error& e) {
            errs.add("fiber", e.what());
        }
    }
    if (plan_ok) {
        for (const auto& band : sc.plan.bands()) {
            if (!sc.link.amplifiers.count(band.name))
                errs.add("amplifiers." + band.name, "missing for band in plan");
            if (!sc.link.trx_snr_db.count(band.name))
                errs.add("trx_snr." + band.name, "missing for band in plan");
            if (fiber_ok && !sc.fiber.rb_coefficients().count(band.name))
                errs.add("fiber.rb_file", "no backscatter row for band " + band.name);
            auto amp = sc.link.amplifiers.find(band.name);
            if (amp != sc.link.amplifiers.end()) {
                const double launch = std::max(band.launch_power_fw_dbm, band.launch_power_bw_dbm);
                if (launch > amp->second.max_output_power_dbm + 1e-9)
                    sc.warnings.push_back("plan.bands." + band.name +
                                          ": band launch power exceeds amplifier max output");
            }
            // every channel wavelength must be inside the attenuation samples
            if (fiber_ok) {
                try {
                    const auto& chs = sc.plan.channels();
                    for (const auto& ch : chs) {
                        if (ch.band_index ==
                            static_cast<int>(&band - sc.plan.bands().data())) {
                            sc.fiber.attenuation_at(wavelength_nm_from_hz(ch.center_frequency_hz));
                        }
                    }
                } catch (const Error& e) {
                    errs.add("fiber.attenuation_file",
                             std::string("band ") + band.name + " not covered: " + e.what());
                }
            }
        }
        if (sc.calibration) {
            for (const auto& band : sc.plan.bands())
                if (!sc.calibration->band_gmi_tbps.count(band.name))
                    errs.add("calibration.band_gmi_tbps." + band.name, "missing target");
        }
    }

    if (!errs.ok()) throw Error(ErrorKind::ConfigError, path.string() + ": " + errs.message());
    return sc;
}

DirectionalScenario directional(const Scenario& sc, Direction direction) {
    DirectionalScenario d;
    d.plan = &sc.plan;
    d.fiber = &sc.fiber;
    d.link = sc.link;
    d.direction = direction;
    d.bidirectional = sc.mode == Mode::Bidi;
    return d;
}

} // namespace hcfsim
