#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hcfsim/errors.hpp"
#include "hcfsim/link_budget.hpp"
#include "oracles.hpp"

using namespace hcfsim;

namespace {

constexpr double kGrid = 1e11 / 3.0;

struct Fixture {
    ChannelPlan plan;
    FiberProfile fiber;
    DirectionalScenario fw, bw;

    explicit Fixture(double beta_hcf = -56.0, double trx = 25.0)
        : plan(build_plan({{"O", 220.50e12, 16.6e12, 498, 15.1, 15.5}}, kGrid, 32e9, 1.33e9,
                          0.01)),
          fiber(60.0, {{1200.0, 0.294}, {1400.0, 0.294}}, {{"O", {beta_hcf, -36.0}}}) {
        fw.plan = &plan;
        fw.fiber = &fiber;
        fw.link.amplifiers["O"] = AmplifierSpec{"O", 4.5, 20.0};
        fw.link.trx_snr_db["O"] = trx;
        fw.link.extras_loss_db = 3.5;
        fw.direction = Direction::FW;
        bw = fw;
        bw.direction = Direction::BW;
    }
};

} // namespace

TEST_CASE("per-channel launch power") {
    const BandSpec o{"O", 220.50e12, 16.6e12, 498, 15.1, 15.5};
    CHECK(per_channel_launch_power_dbm(o, Direction::BW) ==
          doctest::Approx(-11.4723).epsilon(1e-4));
    const BandSpec c{"C", 191.60e12, 4.5e12, 135, 20.9, 21.7};
    CHECK(per_channel_launch_power_dbm(c, Direction::FW) ==
          doctest::Approx(-0.4033).epsilon(1e-3));
    const BandSpec single{"X", 200e12, kGrid, 1, 10.0, 10.0};
    CHECK(per_channel_launch_power_dbm(single, Direction::FW) == doctest::Approx(10.0));
}

TEST_CASE("receiver preamplifier ASE SNR") {
    const double hnu = photon_energy_j(frequency_hz_from_nm(1310.0));
    // constant-folding oracle with h = 6.62607e-34 J s
    CHECK(ase_snr_db(-26.5, 5.0, hnu, 32e9) == doctest::Approx(21.64).epsilon(1e-3));
    // doubling the receive power adds 3.01 dB
    CHECK(ase_snr_db(-23.49, 5.0, hnu, 32e9) - ase_snr_db(-26.5, 5.0, hnu, 32e9) ==
          doctest::Approx(3.01).epsilon(1e-3));
    // +3 dB noise figure costs exactly 3 dB
    CHECK(ase_snr_db(-26.5, 8.0, hnu, 32e9) - ase_snr_db(-26.5, 5.0, hnu, 32e9) ==
          doctest::Approx(-3.0).epsilon(1e-9));
    CHECK_THROWS_AS(ase_snr_db(-26.5, 5.0, hnu, 0.0), Error);
}

TEST_CASE("circulator leakage") {
    CHECK(leakage_interference_dbm(-11.5, 50.0) == doctest::Approx(-61.5));
    CHECK(leakage_interference_dbm(-0.4, 50.0) == doctest::Approx(-50.4));
    CHECK(leakage_interference_dbm(-11.5, kInfDb) == -kInfDb);
    CHECK_THROWS_AS(leakage_interference_dbm(-11.5, -5.0), Error);
}

TEST_CASE("inverse-linear SNR combination") {
    const double both20[] = {20.0, 20.0};
    CHECK(combine_snrs_db(both20) == doctest::Approx(16.9897).epsilon(1e-5));
    const double with_rb[] = {20.0, 31.6};
    CHECK(combine_snrs_db(with_rb) == doctest::Approx(19.7095).epsilon(1e-4));
    CHECK(20.0 - combine_snrs_db(with_rb) == doctest::Approx(0.29).epsilon(2e-2));
    const double single[] = {21.6, kInfDb};
    CHECK(combine_snrs_db(single) == doctest::Approx(21.6));

    // permutation invariance and strict decrease when adding a finite term
    const double abc[] = {18.0, 23.0, 27.5};
    const double cba[] = {27.5, 23.0, 18.0};
    CHECK(combine_snrs_db(abc) == combine_snrs_db(cba));
    const double ab[] = {18.0, 23.0};
    CHECK(combine_snrs_db(abc) < combine_snrs_db(ab));
    // agrees with an independently written fold
    CHECK(combine_snrs_db(abc) == doctest::Approx(oracles::invsum_db({18.0, 23.0, 27.5})));
}

TEST_CASE("evaluate_channel: totals and exclusion") {
    Fixture fx;
    const SnrBreakdown r = evaluate_channel(fx.fw, 100);
    CHECK(r.snr_total_db ==
          doctest::Approx(oracles::invsum_db(
              {r.snr_trx_db, r.snr_ase_db, r.snr_rb_db, r.snr_leak_db})));
    CHECK(r.snr_total_db <= std::min({r.snr_trx_db, r.snr_ase_db, r.snr_rb_db, r.snr_leak_db}));

    ChannelPlan excl = build_plan({{"O", 220.50e12, 16.6e12, 498, 15.1, 15.5}}, kGrid, 32e9,
                                  1.33e9, 0.01, {100});
    DirectionalScenario sc = fx.fw;
    sc.plan = &excl;
    CHECK_THROWS_AS(evaluate_channel(sc, 100), Error);
    DirectionalScenario missing = fx.fw;
    missing.link.trx_snr_db.clear();
    CHECK_THROWS_AS(evaluate_channel(missing, 100), Error);
}

TEST_CASE("uni-di mode keeps interference at the +inf sentinel") {
    Fixture fx;
    fx.fw.bidirectional = false;
    const SnrBreakdown r = evaluate_channel(fx.fw, 100);
    CHECK(std::isinf(r.snr_rb_db));
    CHECK(std::isinf(r.snr_leak_db));
    CHECK(r.snr_total_db == doctest::Approx(oracles::invsum_db({r.snr_trx_db, r.snr_ase_db})));
}

TEST_CASE("bidi penalty: zero without interference, small for HCF, fatal for SMF") {
    Fixture fx;
    // beta -> -inf and directivity -> inf remove the penalty entirely
    Fixture clean;
    clean.fiber = FiberProfile(60.0, {{1200.0, 0.294}, {1400.0, 0.294}},
                               {{"O", {-kInfDb, -36.0}}});
    clean.fw.fiber = &clean.fiber;
    clean.fw.link.circulator_directivity_db = kInfDb;
    CHECK(bidi_penalty_db(clean.fw, 100) == doctest::Approx(0.0).epsilon(1e-12));

    const double hcf_penalty = bidi_penalty_db(fx.fw, 100);
    CHECK(hcf_penalty >= 0.0);
    CHECK(hcf_penalty < 0.32); // measured bound for the O-band with HCF defaults

    // silica backscatter at -42 dB/km makes same-wavelength Bi-Di unusable
    Fixture smf(-56.0);
    smf.fiber = FiberProfile(60.0, {{1200.0, 0.294}, {1400.0, 0.294}},
                             {{"O", {-42.0, -22.0}}});
    smf.fw.fiber = &smf.fiber;
    CHECK(bidi_penalty_db(smf.fw, 100) > 2.0);
}

TEST_CASE("penalty shrinks as both interference terms are relaxed") {
    Fixture fx;
    double prev = bidi_penalty_db(fx.fw, 100);
    for (double extra_dir : {10.0, 20.0, 30.0}) {
        DirectionalScenario sc = fx.fw;
        sc.link.circulator_directivity_db = 50.0 + extra_dir;
        Fixture relax(-56.0 - extra_dir);
        relax.fw.link.circulator_directivity_db = 50.0 + extra_dir;
        const double p = bidi_penalty_db(relax.fw, 100);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("longer span never raises the total SNR") {
    double prev = kInfDb;
    for (double len : {20.0, 40.0, 60.0, 80.0}) {
        Fixture fx;
        fx.fiber = FiberProfile(len, {{1200.0, 0.294}, {1400.0, 0.294}},
                                {{"O", {-56.0, -36.0}}});
        fx.fw.fiber = &fx.fiber;
        const double t = evaluate_channel(fx.fw, 100).snr_total_db;
        CHECK(t <= prev);
        prev = t;
    }
}

TEST_CASE("evaluate_scenario: counts, exclusion flags, parallel == serial") {
    ChannelPlan plan = build_plan({{"O", 220.50e12, 16.6e12, 498, 15.1, 15.5},
                                   {"E", 204.70e12, 8.6e12, 258, 14.8, 15.4}},
                                  kGrid, 32e9, 1.33e9, 0.01, {0, 1, 2, 755});
    FiberProfile fiber(60.0, {{1200.0, 0.294}, {1500.0, 0.270}},
                       {{"O", {-56.0, -36.0}}, {"E", {-56.0, -36.0}}});
    DirectionalScenario fw;
    fw.plan = &plan;
    fw.fiber = &fiber;
    fw.link.amplifiers["O"] = AmplifierSpec{"O", 4.5, 20.0};
    fw.link.amplifiers["E"] = AmplifierSpec{"E", 4.5, 20.0};
    fw.link.trx_snr_db["O"] = 19.0;
    fw.link.trx_snr_db["E"] = 17.0;
    DirectionalScenario bw = fw;
    bw.direction = Direction::BW;

    const auto rows = evaluate_scenario(fw, bw);
    CHECK(rows.size() == 2 * 756);
    int excluded = 0;
    for (const auto& r : rows) excluded += r.excluded ? 1 : 0;
    CHECK(excluded == 8); // 4 channels x 2 directions, flagged not dropped

    const auto serial = evaluate_scenario_serial(fw, bw);
    REQUIRE(serial.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].channel_id == serial[i].channel_id);
        CHECK(rows[i].snr.snr_total_db == serial[i].snr.snr_total_db); // bit-identical
    }

    // BW sees the higher launch, so its SNR is the better of the two
    CHECK(rows[756 + 100].snr.snr_total_db > rows[100].snr.snr_total_db);
}

TEST_CASE("trx calibration: round trip, offset targets, infeasible boundary") {
    Fixture fx(-56.0, 18.0);
    // ground truth 18 dB: recover it from the band mean SNR it produces
    auto rows = evaluate_scenario_serial(fx.fw, fx.bw);
    double mean = 0.0;
    int n = 0;
    for (const auto& r : rows)
        if (r.direction == Direction::FW || true) {
            mean += r.snr.snr_total_db;
            ++n;
        }
    mean /= n;
    auto fitted = calibrate_trx_snr(fx.fw, fx.bw, {{"O", mean}});
    CHECK(fitted.trx_snr_db.at("O") == doctest::Approx(18.0).epsilon(1e-3));
    CHECK(!fitted.at_boundary);

    // target above the non-transceiver asymptote is infeasible and names it
    try {
        calibrate_trx_snr(fx.fw, fx.bw, {{"O", mean + 10.0}});
        FAIL("expected CalibrationInfeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CalibrationInfeasible);
    }

    // two bands with equal non-trx terms and targets 4 dB apart come back
    // with trx terms about 4 dB apart (trx-dominated regime)
    ChannelPlan two = build_plan({{"A", 220.50e12, 16.6e12, 498, 15.1, 15.5},
                                  {"B", 204.70e12, 8.6e12, 258, 15.1, 15.5}},
                                 kGrid, 32e9, 1.33e9, 0.01);
    FiberProfile fiber(60.0, {{1200.0, 0.294}, {1500.0, 0.294}},
                       {{"A", {-56.0, -36.0}}, {"B", {-56.0, -36.0}}});
    DirectionalScenario fw;
    fw.plan = &two;
    fw.fiber = &fiber;
    for (const char* b : {"A", "B"}) {
        fw.link.amplifiers[b] = AmplifierSpec{b, 4.5, 20.0};
        fw.link.trx_snr_db[b] = 15.0;
    }
    DirectionalScenario bw = fw;
    bw.direction = Direction::BW;
    auto out = calibrate_trx_snr(fw, bw, {{"A", 9.0}, {"B", 13.0}});
    CHECK(out.trx_snr_db.at("B") - out.trx_snr_db.at("A") == doctest::Approx(4.0).epsilon(0.1));
}
