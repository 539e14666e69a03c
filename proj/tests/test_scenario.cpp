#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hcfsim/errors.hpp"
#include "hcfsim/parallel.hpp"
#include "hcfsim/reporting.hpp"

using namespace hcfsim;

namespace {

const std::filesystem::path kData = HCFSIM_DATA_DIR;

std::filesystem::path write_tmp(const std::string& name, const std::string& body) {
    const auto dir = std::filesystem::temp_directory_path() / "hcfsim_scenario_tests";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

/// Small two-band scenario (fast): references the bundled data files.
std::string small_scenario_json(const std::string& extra = "") {
    return std::string(R"({
  "plan": {
    "grid_spacing_hz": 33333333333.333332,
    "symbol_rate_baud": 32e9,
    "guard_band_hz": 1.33e9,
    "rolloff": 0.01,
    "bands": [
      { "name": "C", "start_frequency_hz": 191.60e12, "bandwidth_hz": 0.5e12, "channel_count": 15, "launch_power_fw_dbm": 11.0, "launch_power_bw_dbm": 11.8 },
      { "name": "O", "start_frequency_hz": 220.50e12, "bandwidth_hz": 1.0e12, "channel_count": 30, "launch_power_fw_dbm": 8.9, "launch_power_bw_dbm": 9.3 }
    ],
    "excluded_channels": [2]
  },
  "fiber": {
    "length_km": 60.0,
    "attenuation_file": ")" + (kData / "hcf_attenuation.csv").string() + R"(",
    "rb_file": ")" + (kData / "rb_coefficients.csv").string() + R"(",
    "rb_column": "hcf",
    "gas_lines_file": ")" + (kData / "gas_lines.csv").string() + R"("
  },
  "amplifiers": {
    "C": { "noise_figure_db": 5.0, "max_output_power_dbm": 23.0 },
    "O": { "noise_figure_db": 4.5, "max_output_power_dbm": 20.0 }
  },
  "trx_snr": { "C": 21.0, "O": 18.0 },
  "circulator_directivity_db": 50.0,
  "extras_loss_db": 3.5,
  "fec": { "rate_granularity": 0.01, "min_rate": 0.50, "max_rate": 0.95, "ngmi_gap": 0.02 },
  "pilot_overhead": 0.04,
  "constellations": {
    "16": ")" + (kData / "constellations/gs16.csv").string() + R"(",
    "64": ")" + (kData / "constellations/gs64.csv").string() + R"("
  },
  "gmi": { "samples": 20000, "knot_min_db": 0.0, "knot_max_db": 26.0, "knot_step_db": 2.0 },
  "seed": 7,
  "mode": "bidi")" + extra + "\n}\n");
}

} // namespace

TEST_CASE("bundled OESCL scenario loads with 1275 channels") {
    const Scenario sc = load_scenario(kData / "scenario_oescl60.json");
    CHECK(sc.plan.channel_count() == 1275);
    CHECK(sc.plan.excluded_channels().size() == 9);
    CHECK(sc.mode == Mode::Bidi);
    CHECK(sc.constellation_files.size() == 4);
    CHECK(sc.warnings.empty());
}

TEST_CASE("validation reports every error with field paths") {
    // break two independent things: a renamed amplifier key (so band C has
    // none) and a negative span length
    std::string body = small_scenario_json();
    body.replace(body.find("\"length_km\": 60.0"), 17, "\"length_km\": -5.0");
    body.replace(body.find("\"C\": { \"noise_figure_db\": 5.0"), 4, "\"Z\":");
    const auto path = write_tmp("broken.json", body);
    try {
        load_scenario(path);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        const std::string msg = e.what();
        CHECK(msg.find("amplifiers.C") != std::string::npos);
        CHECK(msg.find("length_km") != std::string::npos);
    }
}

TEST_CASE("launch power above amplifier max is a warning, not an error") {
    std::string body = small_scenario_json();
    body.replace(body.find("\"launch_power_fw_dbm\": 11.0"), 27, "\"launch_power_fw_dbm\": 23.5");
    body.replace(body.find("\"launch_power_bw_dbm\": 11.8"), 27, "\"launch_power_bw_dbm\": 23.9");
    const Scenario sc = load_scenario(write_tmp("hot.json", body));
    REQUIRE(!sc.warnings.empty());
    CHECK(sc.warnings[0].find("exceeds amplifier") != std::string::npos);
}

TEST_CASE("run: outputs, aggregates, excluded channels zeroed") {
    const auto path = write_tmp("small.json", small_scenario_json());
    Pipeline pipeline(load_scenario(path));
    const auto out_dir = std::filesystem::temp_directory_path() / "hcfsim_run_small";
    const RunResult rr = run(pipeline, out_dir);

    CHECK(rr.results.size() == 2 * 45);
    CHECK(std::filesystem::exists(rr.results_csv));
    CHECK(std::filesystem::exists(rr.breakdown_csv));
    CHECK(std::filesystem::exists(rr.aggregate_json));
    CHECK(std::filesystem::exists(rr.manifest_json));

    int excluded = 0;
    for (const auto& r : rr.results) {
        if (r.excluded) {
            ++excluded;
            CHECK(r.gmi_rate_bps == 0.0);
            CHECK(r.decoded_rate_bps == 0.0);
        } else {
            CHECK(r.decoded_rate_bps <= r.gmi_rate_bps + 1e-3);
        }
    }
    CHECK(excluded == 2);

    // band sums equal direction sums equal the grand total
    const auto& agg = rr.aggregate;
    double band_gmi = 0.0;
    for (const auto& [band, cell] : agg.bands) band_gmi += cell.gmi_fw + cell.gmi_bw;
    CHECK(band_gmi == doctest::Approx(agg.total.gmi_fw + agg.total.gmi_bw).epsilon(1e-9));
}

TEST_CASE("unidi mode: FW rows only, interference columns at the inf sentinel") {
    const auto path = write_tmp("unidi.json",
                                small_scenario_json(",\n  \"_unused\": 0"));
    Scenario sc = load_scenario(path);
    sc.mode = Mode::Unidi;
    Pipeline pipeline(std::move(sc));
    const auto rows = pipeline.evaluate_snr();
    CHECK(rows.size() == 45);
    for (const auto& r : rows) {
        CHECK(r.direction == Direction::FW);
        CHECK(std::isinf(r.snr.snr_rb_db));
        CHECK(std::isinf(r.snr.snr_leak_db));
    }
    const auto out_dir = std::filesystem::temp_directory_path() / "hcfsim_run_unidi";
    const RunResult rr = run(pipeline, out_dir);
    std::ifstream csv(rr.breakdown_csv);
    std::string line;
    std::getline(csv, line); // header
    std::getline(csv, line);
    CHECK(line.find(",inf,inf,") != std::string::npos);
}

TEST_CASE("empty plan produces empty outputs") {
    Scenario sc = load_scenario(write_tmp("small2.json", small_scenario_json()));
    sc.plan = ChannelPlan();
    Pipeline pipeline(std::move(sc));
    const auto out_dir = std::filesystem::temp_directory_path() / "hcfsim_run_empty";
    const RunResult rr = run(pipeline, out_dir);
    CHECK(rr.results.empty());
    CHECK(rr.aggregate.total.gmi_fw == 0.0);
}

TEST_CASE("reruns are byte-identical for any jobs count") {
    const auto path = write_tmp("det.json", small_scenario_json());
    const auto dir_a = std::filesystem::temp_directory_path() / "hcfsim_det_a";
    const auto dir_b = std::filesystem::temp_directory_path() / "hcfsim_det_b";

    set_jobs(1);
    Pipeline pa(load_scenario(path));
    const RunResult ra = run(pa, dir_a);
    set_jobs(2);
    Pipeline pb(load_scenario(path));
    const RunResult rb = run(pb, dir_b);
    set_jobs(0);

    CHECK(fnv1a64_file(ra.results_csv) == fnv1a64_file(rb.results_csv));
    CHECK(fnv1a64_file(ra.breakdown_csv) == fnv1a64_file(rb.breakdown_csv));
    CHECK(fnv1a64_file(ra.aggregate_json) == fnv1a64_file(rb.aggregate_json));
    CHECK(fnv1a64_file(ra.manifest_json) == fnv1a64_file(rb.manifest_json));
}

TEST_CASE("compare: pass, cell failure, band mismatch") {
    const auto agg = write_tmp("agg.json", R"({
      "bands": {"O": {"gmi_tbps_total": 100.0, "decoded_tbps_total": 94.0}},
      "directions": {"FW": {"gmi_tbps": 50.0, "decoded_tbps": 47.0},
                     "BW": {"gmi_tbps": 50.0, "decoded_tbps": 47.0}}
    })");
    const auto ref_ok = write_tmp("ref_ok.json", R"({
      "bands": {"O": {"gmi_tbps": 100.0, "decoded_tbps": 94.0}},
      "directions": {"FW": {"gmi_tbps": 50.0}, "BW": {"gmi_tbps": 50.0}},
      "tolerances": {"gmi_rel": 0.02, "decoded_rel": 0.03}
    })");
    const CompareReport ok = compare(agg, ref_ok);
    CHECK(ok.all_pass);
    CHECK(ok.cells.size() == 4);

    // O-band GMI off by 5 % with a 2 % tolerance: that cell fails by name
    const auto ref_off = write_tmp("ref_off.json", R"({
      "bands": {"O": {"gmi_tbps": 105.0}},
      "tolerances": {"gmi_rel": 0.02, "decoded_rel": 0.03}
    })");
    const CompareReport off = compare(agg, ref_off);
    CHECK(!off.all_pass);
    REQUIRE(off.cells.size() == 1);
    CHECK(off.cells[0].name == "O.gmi");
    CHECK(!off.cells[0].pass);

    const auto ref_band = write_tmp("ref_band.json", R"({
      "bands": {"E": {"gmi_tbps": 100.0}}
    })");
    CHECK_THROWS_AS(compare(agg, ref_band), Error);
}

TEST_CASE("six-significant-digit formatting is stable") {
    CHECK(format_g6(0.0) == "0");
    CHECK(format_g6(123456789.0) == "1.23457e+08");
    CHECK(format_g6(-2.5) == "-2.5");
    CHECK(format_g6(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_g6(1e11 / 3.0) == "3.33333e+10");
}
