// hcfsim: desk-scale simulator for a 42.5 THz OESCL-band bi-directional
// hollow-core-fibre link: channel plan, link budget with Rayleigh-backscatter
// penalties, GMI/decoded throughput, and a pilot-based waveform chain.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcfsim/errors.hpp"
#include "hcfsim/parallel.hpp"
#include "hcfsim/reporting.hpp"
#include "hcfsim/rng.hpp"
#include "hcfsim/shaping.hpp"
#include "hcfsim/waveform.hpp"

using namespace hcfsim;
using nlohmann::json;

namespace {

int cmd_plan(const std::string& scenario_path) {
    const Scenario sc = load_scenario(scenario_path);
    std::cout << "bands:\n";
    for (const auto& b : sc.plan.bands()) {
        std::cout << "  " << b.name << ": " << b.channel_count << " channels, "
                  << format_g6(b.bandwidth_hz / 1e12) << " THz, start "
                  << format_g6(b.start_frequency_hz / 1e12) << " THz, launch "
                  << format_g6(b.launch_power_fw_dbm) << "/" << format_g6(b.launch_power_bw_dbm)
                  << " dBm\n";
    }
    std::cout << "total: " << sc.plan.channel_count() << " channels, "
              << format_g6(sc.plan.total_bandwidth_hz() / 1e12) << " THz, "
              << sc.plan.excluded_channels().size() << " excluded\n";
    for (const auto& w : sc.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::uint64_t seed_override, bool has_seed, const std::string& mode) {
    Scenario sc = load_scenario(scenario_path);
    if (has_seed) sc.seed = seed_override;
    if (mode == "bidi") sc.mode = Mode::Bidi;
    if (mode == "unidi") sc.mode = Mode::Unidi;
    Pipeline pipeline(std::move(sc));
    const RunResult rr = run(pipeline, out_dir);
    std::cout << "wrote " << rr.results_csv.string() << "\n";
    const auto& t = rr.aggregate.total;
    std::cout << "GMI totals: FW " << format_g6(t.gmi_fw / 1e12) << " + BW "
              << format_g6(t.gmi_bw / 1e12) << " Tb/s\n";
    std::cout << "decoded:    FW " << format_g6(t.decoded_fw / 1e12) << " + BW "
              << format_g6(t.decoded_bw / 1e12) << " Tb/s\n";
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& out_path) {
    // Per-channel SNR and Bi-Di penalty sweep (uni-di minus bi-di totals).
    Scenario sc = load_scenario(scenario_path);
    const DirectionalScenario fw = directional(sc, Direction::FW);
    const DirectionalScenario bw = directional(sc, Direction::BW);
    auto bidi_rows = evaluate_scenario(fw, bw);

    DirectionalScenario fw_uni = fw, bw_uni = bw;
    fw_uni.bidirectional = false;
    bw_uni.bidirectional = false;
    std::vector<ChannelSnr> uni_rows(bidi_rows.size());
    {
        auto fw_only = evaluate_scenario(fw_uni, fw_uni);
        auto bw_only = evaluate_scenario(bw_uni, bw_uni);
        std::copy(fw_only.begin(), fw_only.end(), uni_rows.begin());
        std::copy(bw_only.begin(), bw_only.end(),
                  uni_rows.begin() + static_cast<std::ptrdiff_t>(fw_only.size()));
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + out_path);
    out << "channel_id,direction,band,freq_hz,snr_unidi_db,snr_bidi_db,penalty_db,excluded\n";
    for (std::size_t i = 0; i < bidi_rows.size(); ++i) {
        const auto& b = bidi_rows[i];
        const auto& u = uni_rows[i];
        const Channel& ch = sc.plan.channel(b.channel_id);
        out << b.channel_id << ',' << to_string(b.direction) << ','
            << sc.plan.bands()[static_cast<std::size_t>(ch.band_index)].name << ','
            << format_g6(ch.center_frequency_hz) << ',' << format_g6(u.snr.snr_total_db) << ','
            << format_g6(b.snr.snr_total_db) << ','
            << format_g6(u.snr.snr_total_db - b.snr.snr_total_db) << ',' << (b.excluded ? 1 : 0)
            << '\n';
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_gmi(const std::string& constellation_file, const std::vector<double>& snrs,
            std::int64_t samples, std::uint64_t seed, const std::string& out_path) {
    const Constellation c = Constellation::load_csv(constellation_file);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + out_path);
    out << "snr_db,gmi_bits,ngmi,std_error,n_samples\n";
    for (double snr : snrs) {
        const GmiEstimate est = gmi_monte_carlo(c, snr, samples, seed);
        out << format_g6(snr) << ',' << format_g6(est.gmi) << ','
            << format_g6(ngmi(est, c.bits())) << ',' << format_g6(est.std_error) << ','
            << est.n_samples << '\n';
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_waveform(const std::string& config_path, const std::string& constellation_file,
                 std::uint64_t seed, const std::string& out_path) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + config_path);
    json j;
    in >> j;

    DspConfig cfg;
    cfg.samples_per_symbol = j.value("samples_per_symbol", cfg.samples_per_symbol);
    cfg.rrc_rolloff = j.value("rrc_rolloff", cfg.rrc_rolloff);
    cfg.rrc_span = j.value("rrc_span", cfg.rrc_span);
    cfg.pilot_ratio = j.value("pilot_ratio", cfg.pilot_ratio);
    cfg.mimo_taps = j.value("mimo_taps", cfg.mimo_taps);
    cfg.mimo_step = j.value("mimo_step", cfg.mimo_step);
    cfg.cpr_window = j.value("cpr_window", cfg.cpr_window);
    cfg.gla_enabled = j.value("gla_enabled", cfg.gla_enabled);
    cfg.n_symbols = j.value("n_symbols", cfg.n_symbols);
    cfg.symbol_rate_baud = j.value("symbol_rate_baud", cfg.symbol_rate_baud);

    ImpairmentSpec spec;
    if (j.contains("impairments")) {
        const json& imp = j["impairments"];
        if (imp.contains("snr_awgn_db")) spec.snr_awgn_db = imp["snr_awgn_db"].get<double>();
        spec.laser_linewidth_hz = imp.value("laser_linewidth_hz", 0.0);
        spec.polarization_rotation_rad = imp.value("polarization_rotation_rad", 0.0);
        spec.frequency_offset_hz = imp.value("frequency_offset_hz", 0.0);
        if (imp.contains("gla_lines"))
            for (const auto& lj : imp["gla_lines"])
                spec.gla_lines.push_back(GasLine{lj.value("center_offset_hz", 0.0),
                                                 lj.value("fwhm_hz", 1e9),
                                                 lj.value("peak_loss_db", 0.0)});
    }
    const int n_traces = j.value("n_traces", 5);

    const Constellation c = Constellation::load_csv(constellation_file);
    const Measurement m = measure_channel(cfg, spec, c, n_traces, seed);

    json traces = json::array();
    for (const auto& t : m.traces)
        traces.push_back({{"snr_db", t.snr_db},
                          {"diverged", t.diverged},
                          {"mse_trace", t.mse_trace}});
    json out_j = {{"snr_db", m.snr_db}, {"gmi_bits", m.gmi}, {"traces", traces}};
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + out_path);
    out << out_j.dump(2) << '\n';
    std::cout << "measured SNR " << format_g6(m.snr_db) << " dB, GMI " << format_g6(m.gmi)
              << " bits\n";
    return 0;
}

int cmd_shape(int bits, double target_snr_db, int iterations, double step, std::uint64_t seed,
              const std::string& out_path) {
    const ShapingResult res = optimize_shaping(bits, target_snr_db, iterations, step, seed);
    std::string meta = "generated by: hcfsim shape --m " + std::to_string(bits) +
                       " --target-snr-db " + format_g6(target_snr_db) + " --iterations " +
                       std::to_string(iterations) + " --step " + format_g6(step) + " --seed " +
                       std::to_string(seed) + "\n" + "sample-average GMI at " +
                       format_g6(target_snr_db) + " dB: square " + format_g6(res.gmi_baseline) +
                       " -> shaped " + format_g6(res.gmi_shaped);
    res.constellation.save_csv(out_path, meta);
    std::cout << (res.improved ? "improved" : "no improvement (baseline returned)") << ": GMI "
              << format_g6(res.gmi_baseline) << " -> " << format_g6(res.gmi_shaped) << "\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_compare(const std::string& aggregate_path, const std::string& reference_path) {
    const CompareReport rep = compare(aggregate_path, reference_path);
    for (const auto& c : rep.cells) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << format_g6(c.actual)
                  << " vs " << format_g6(c.reference) << " (rel err "
                  << format_g6(c.rel_error * 100) << " %, tol " << format_g6(c.tolerance * 100)
                  << " %)\n";
    }
    return rep.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"42.5 THz OESCL bi-directional HCF link simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // --jobs may be given after any subcommand

    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads (0 = default)");

    std::string scenario, out = "out", out_file;
    std::uint64_t seed = 1;
    std::string mode;

    auto* plan = app.add_subcommand("plan", "validate and summarize the channel plan");
    plan->add_option("--scenario", scenario)->required();

    auto* sim = app.add_subcommand("simulate", "full link evaluation with file outputs");
    sim->add_option("--scenario", scenario)->required();
    sim->add_option("--out", out);
    bool has_seed = false;
    sim->add_option("--seed", seed)->each([&](const std::string&) { has_seed = true; });
    sim->add_option("--mode", mode)->check(CLI::IsMember({"bidi", "unidi"}));

    auto* sweep = app.add_subcommand("sweep", "per-channel SNR and Bi-Di penalty sweep");
    sweep->add_option("--scenario", scenario)->required();
    sweep->add_option("--out", out_file)->default_val("sweep.csv");

    auto* gmi_cmd = app.add_subcommand("gmi", "Monte-Carlo GMI of a constellation file");
    std::string constellation_file;
    std::vector<double> snr_list;
    std::int64_t samples = 100000;
    gmi_cmd->add_option("--constellation", constellation_file)->required();
    gmi_cmd->add_option("--snr-db", snr_list, "SNR points (dB)")->required()->expected(-1);
    gmi_cmd->add_option("--samples", samples);
    gmi_cmd->add_option("--seed", seed);
    gmi_cmd->add_option("--out", out_file)->default_val("gmi.csv");

    auto* wf = app.add_subcommand("waveform", "single-channel waveform chain measurement");
    std::string wf_config;
    wf->add_option("--config", wf_config)->required();
    wf->add_option("--constellation", constellation_file)->required();
    wf->add_option("--seed", seed);
    wf->add_option("--out", out_file)->default_val("waveform.json");

    auto* shape = app.add_subcommand("shape", "GMI-maximizing constellation shaping");
    int bits = 4, iterations = 300;
    double target_snr = 6.0, step = 0.05;
    shape->add_option("--m", bits, "bits per symbol (4, 6, 8, 10)");
    shape->add_option("--target-snr-db", target_snr);
    shape->add_option("--iterations", iterations);
    shape->add_option("--step", step);
    shape->add_option("--seed", seed);
    shape->add_option("--out", out_file)->default_val("shaped.csv");

    auto* cmp = app.add_subcommand("compare", "aggregate results versus a reference table");
    std::string reference;
    cmp->add_option("--aggregate", out_file)->required();
    cmp->add_option("--reference", reference)->required();

    CLI11_PARSE(app, argc, argv);
    set_jobs(jobs);

    try {
        if (plan->parsed()) return cmd_plan(scenario);
        if (sim->parsed()) return cmd_simulate(scenario, out, seed, has_seed, mode);
        if (sweep->parsed()) return cmd_sweep(scenario, out_file);
        if (gmi_cmd->parsed()) return cmd_gmi(constellation_file, snr_list, samples, seed, out_file);
        if (wf->parsed()) return cmd_waveform(wf_config, constellation_file, seed, out_file);
        if (shape->parsed()) return cmd_shape(bits, target_snr, iterations, step, seed, out_file);
        if (cmp->parsed()) return cmd_compare(out_file, reference);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::IoError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
