#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hcfsim/errors.hpp"
#include "hcfsim/fiber_model.hpp"
#include "hcfsim/units.hpp"
#include "oracles.hpp"

using namespace hcfsim;

namespace {

FiberProfile toy_profile(double a0 = 0.20, double a1 = 0.30,
                         std::vector<GasLine> lines = {}) {
    return FiberProfile(60.0, {{1300.0, a0}, {1500.0, a1}},
                        {{"X", {-56.0, -36.0}}}, std::move(lines));
}

FiberProfile bundled_profile() {
    return FiberProfile(60.0, load_attenuation_csv(HCFSIM_DATA_DIR "/hcf_attenuation.csv"),
                        load_rb_csv(HCFSIM_DATA_DIR "/rb_coefficients.csv"),
                        load_gas_lines_csv(HCFSIM_DATA_DIR "/gas_lines.csv"));
}

} // namespace

TEST_CASE("attenuation interpolation") {
    const FiberProfile p = toy_profile();
    CHECK(p.attenuation_at(1300.0) == doctest::Approx(0.20));
    CHECK(p.attenuation_at(1500.0) == doctest::Approx(0.30));
    CHECK(p.attenuation_at(1400.0) == doctest::Approx(0.25)); // linear midpoint
    CHECK_THROWS_AS(p.attenuation_at(1200.0), Error);
    CHECK_THROWS_AS(p.attenuation_at(1600.0), Error);
}

TEST_CASE("attenuation curve validation") {
    CHECK_THROWS_AS(FiberProfile(60.0, {{1300.0, 0.2}, {1300.0, 0.3}}, {}), Error);
    CHECK_THROWS_AS(FiberProfile(60.0, {{1300.0, 0.0}, {1400.0, 0.3}}, {}), Error);
    CHECK_THROWS_AS(FiberProfile(60.0, {{1300.0, 0.2}, {1400.0, 1.1}}, {}), Error);
    // HCF backscatter must sit >= 20 dB below the SMF reference
    CHECK_THROWS_AS(FiberProfile(60.0, {{1300.0, 0.2}, {1400.0, 0.3}},
                                 {{"X", {-50.0, -36.0}}}),
                    Error);
}

TEST_CASE("bundled curve: O-band about 0.06 dB/km above 1550 nm") {
    const FiberProfile p = bundled_profile();
    CHECK(p.attenuation_at(1310.0) - p.attenuation_at(1550.0) ==
          doctest::Approx(0.06).epsilon(0.05));
}

TEST_CASE("link loss arithmetic") {
    const FiberProfile p = toy_profile(0.25, 0.25);
    CHECK(p.link_loss_db(1400.0) == doctest::Approx(15.0)); // 0.25 x 60
    // 0.2333 dB/km x 60 km = 14.0 dB, the bottom of the measured range
    const FiberProfile q = toy_profile(0.2333333333333, 0.2333333333333);
    CHECK(q.link_loss_db(1400.0) == doctest::Approx(14.0).epsilon(1e-6));
    // channel centered on a gas line adds the peak loss
    const double f = frequency_hz_from_nm(1400.0);
    const FiberProfile g = toy_profile(0.25, 0.25, {{f, 5e9, 3.0}});
    CHECK(g.link_loss_db(1400.0) == doctest::Approx(18.0).epsilon(1e-9));
}

TEST_CASE("effective backscatter length") {
    CHECK(effective_backscatter_length_km(0.0, 60.0) == doctest::Approx(60.0));
    CHECK(effective_backscatter_length_km(0.5, 0.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(effective_backscatter_length_km(-0.1, 60.0), Error);
    CHECK_THROWS_AS(effective_backscatter_length_km(0.1, -60.0), Error);

    // numeric integration oracle (trapezoid, 1e6 steps)
    const double closed = effective_backscatter_length_km(0.25, 60.0);
    const double numeric = oracles::trapezoid_backscatter_km(0.25, 60.0);
    CHECK(closed == doctest::Approx(8.68).epsilon(2e-3));
    CHECK(std::abs(closed - numeric) / numeric < 1e-6);
}

TEST_CASE("backscatter length properties") {
    double prev = 1e9;
    for (double a : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        const double le = effective_backscatter_length_km(a, 60.0);
        CHECK(le < prev); // monotone decreasing in alpha
        prev = le;
        const double bound = std::min(60.0, 1.0 / (2.0 * db_per_km_to_nat(a)));
        CHECK(le <= bound + 1e-12);
    }
}

TEST_CASE("backscattered interference power") {
    // closed form against the numeric kernel
    const double power = rb_interference_power_dbm(-11.5, -56.0, 0.25, 60.0);
    CHECK(power == doctest::Approx(-58.1).epsilon(1e-3));
    const double numeric =
        -11.5 - 56.0 + lin_to_db(oracles::trapezoid_backscatter_km(0.25, 60.0));
    CHECK(power == doctest::Approx(numeric).epsilon(1e-7));
    // SMF beta is 14 dB hotter
    CHECK(rb_interference_power_dbm(-11.5, -42.0, 0.25, 60.0) - power ==
          doctest::Approx(14.0).epsilon(1e-9));
    // no scattering limit
    CHECK(rb_interference_power_dbm(-11.5, -kInfDb, 0.25, 60.0) == -kInfDb);
}

TEST_CASE("backscatter power monotonicity") {
    const double base = rb_interference_power_dbm(-10.0, -56.0, 0.25, 60.0);
    CHECK(rb_interference_power_dbm(-9.0, -56.0, 0.25, 60.0) > base);
    CHECK(rb_interference_power_dbm(-10.0, -55.0, 0.25, 60.0) > base);
    CHECK(rb_interference_power_dbm(-10.0, -56.0, 0.30, 60.0) < base);
}

TEST_CASE("gas absorption response") {
    CHECK(gas_absorption_response_db({}, 200e12, 40e9, 16) ==
          std::vector<double>(16, 0.0));
    CHECK_THROWS_AS(gas_absorption_response_db({}, 200e12, 40e9, 1), Error);

    // narrow line centered in the channel peaks at peak_loss in the center bin
    const GasLine line{200e12, 0.5e9, 2.5};
    const auto resp = gas_absorption_response_db({&line, 1}, 200e12, 40e9, 129);
    CHECK(resp[64] == doctest::Approx(2.5));
    for (double v : resp) CHECK(v <= 2.5 + 1e-12);

    // line centered 10 FWHM outside the channel: Lorentzian tail bound
    const GasLine far{200e12 + 20e9 + 10 * 1e9, 1e9, 2.5};
    const auto tail = gas_absorption_response_db({&far, 1}, 200e12, 40e9, 1001);
    double max_in_band = 0.0;
    for (double v : tail) max_in_band = std::max(max_in_band, v);
    CHECK(max_in_band < 2.5 / 100.0);
    // analytic check of the bound: 1/(1+(2*10)^2) = 1/401
    CHECK(max_in_band == doctest::Approx(2.5 / 401.0).epsilon(1e-2));
}

TEST_CASE("bundled profile: link loss within 14-19 dB away from gas lines") {
    const FiberProfile p = bundled_profile();
    constexpr double kGrid = 1e11 / 3.0;
    const struct {
        double f0;
        int count;
    } bands[] = {{185.10e12, 159}, {191.60e12, 135}, {196.15e12, 225},
                 {204.70e12, 258}, {220.50e12, 498}};
    int in_range = 0, total = 0;
    for (const auto& b : bands) {
        for (int i = 0; i < b.count; ++i) {
            const double f = b.f0 + (i + 0.5) * kGrid;
            if (gas_loss_db_at(p.gas_lines(), f) >= 0.05) continue; // on a line
            ++total;
            const double loss = p.link_loss_db(wavelength_nm_from_hz(f));
            if (loss >= 14.0 && loss <= 19.0) ++in_range;
        }
    }
    CHECK(total > 1200);
    CHECK(static_cast<double>(in_range) / total >= 0.99);
}

TEST_CASE("bundled profile: HCF/SMF backscatter gap at least 20 dB per band") {
    const FiberProfile p = bundled_profile();
    for (const auto& [band, rb] : p.rb_coefficients()) {
        CAPTURE(band);
        CHECK(rb.smf_db_per_km - rb.hcf_db_per_km >= 20.0);
    }
}
