// Test-side oracles, independent of the library implementation paths they
// check: brute-force quadrature for GMI, numeric integration for the
// backscatter kernel. Deliberately straightforward; no pruning or batching.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oracles {

/// GMI of bit-metric decoding with the matched Gaussian metric, by uniform
/// 2D grid integration over the received plane. snr is linear Es/N0 with the
/// constellation at unit mean energy.
inline double quad_gmi(std::span<const std::complex<double>> points,
                       std::span<const std::uint32_t> labels, int m, double snr_db,
                       int ngrid = 2001, double span_sigmas = 6.0) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double s2 = 1.0 / snr;           // total complex noise variance
    const double sd = std::sqrt(s2 / 2.0); // per real dimension
    double rmax = 0.0;
    for (const auto& p : points) rmax = std::max(rmax, std::abs(p));
    const double extent = rmax + span_sigmas * sd * std::sqrt(2.0);
    const double h = 2.0 * extent / (ngrid - 1);
    const std::size_t card = points.size();

    double total = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : total) schedule(static)
#endif
    for (int iy = 0; iy < ngrid; ++iy) {
        std::vector<double> w(card);
        const double yr = -extent + h * iy;
        for (int ix = 0; ix < ngrid; ++ix) {
            const std::complex<double> y(yr, -extent + h * ix);
            double s_all = 0.0;
            double s_bit[2][16] = {};
            for (std::size_t p = 0; p < card; ++p) {
                w[p] = std::exp(-std::norm(y - points[p]) / s2);
                s_all += w[p];
                for (int i = 0; i < m; ++i) s_bit[(labels[p] >> i) & 1u][i] += w[p];
            }
            if (s_all <= 0.0) continue;
            // sum over transmitted symbols of p(y|x)/M * sum_i log2(S/S_bi)
            double acc = 0.0;
            for (std::size_t t = 0; t < card; ++t) {
                double li = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double sb = s_bit[(labels[t] >> i) & 1u][i];
                    if (sb > 0.0) li += std::log2(s_all / sb);
                }
                acc += w[t] * li;
            }
            total += acc;
        }
    }
    const double pi = 3.14159265358979323846;
    total *= h * h / (pi * s2 * static_cast<double>(card));
    return static_cast<double>(m) - total;
}

/// Trapezoid integration of exp(-2 a z) over [0, L], a in dB/km.
inline double trapezoid_backscatter_km(double alpha_db_per_km, double length_km,
                                       std::int64_t steps = 1000000) {
    const double a = alpha_db_per_km * std::log(10.0) / 10.0;
    const double h = length_km / static_cast<double>(steps);
    double sum = 0.5 * (1.0 + std::exp(-2.0 * a * length_km));
    for (std::int64_t i = 1; i < steps; ++i)
        sum += std::exp(-2.0 * a * h * static_cast<double>(i));
    return sum * h;
}

/// Inverse-linear combination in dB, written independently of the library.
inline double invsum_db(std::initializer_list<double> dbs) {
    double inv = 0.0;
    for (double d : dbs) inv += std::pow(10.0, -d / 10.0);
    return 10.0 * std::log10(1.0 / inv);
}

} // namespace oracles
