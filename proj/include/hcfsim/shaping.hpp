#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hcfsim/constellation.hpp"
#include "hcfsim/rate_adaptation.hpp"

namespace hcfsim {

struct ShapingResult {
    Constellation constellation;
    bool improved = false;   // false: baseline returned (NoImprovement)
    double gmi_baseline = 0.0; // sample-average estimates at the target SNR
    double gmi_shaped = 0.0;
};

/// Gradient ascent on the sample-average GMI over a fixed noise realization,
/// starting from Gray-labeled square QAM with labels frozen and the energy
/// renormalized after every step. Deterministic given the seed.
ShapingResult optimize_shaping(int bits, double target_snr_db, int iterations, double step,
                               std::uint64_t seed);

/// Decoded-rate-maximizing format choice; ties go to the lower cardinality.
/// Returns the winning constellation and its net bits per 2D (m x code rate).
std::pair<const Constellation*, double> select_best_format(
    double snr_db, std::span<const Constellation> formats, const FecModel& fec,
    std::uint64_t seed, std::int64_t gmi_samples = 100000);

namespace detail {

/// Sample-average GMI and its gradient w.r.t. the points (pathwise through
/// y = x_tx + n). Exposed for the finite-difference gradient check.
double gmi_saa(std::span<const std::complex<double>> points,
               std::span<const std::uint32_t> labels, int bits, double noise_var,
               std::span<const std::uint32_t> tx_indices,
               std::span<const std::complex<double>> noise,
               std::vector<std::complex<double>>* gradient);

} // namespace detail

} // namespace hcfsim
