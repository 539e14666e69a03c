#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hcfsim {

/// Labeled 2D point set with unit average energy. Labels are a bijection onto
/// {0,1}^m; geometry may be arbitrary (square QAM or geometrically shaped).
class Constellation {
public:
    Constellation() = default;

    /// Validates labels, renormalizes the points to unit mean energy.
    static Constellation from_points(std::vector<std::complex<double>> points,
                                     std::vector<std::uint32_t> labels);

    /// Gray-labeled square QAM for even m (2, 4, 6, 8, 10).
    static Constellation gray_square_qam(int bits);

    /// CSV rows: label_bits, i, q. label_bits is the binary string.
    static Constellation load_csv(const std::filesystem::path& path);
    void save_csv(const std::filesystem::path& path, const std::string& header_comment = "") const;

    int bits() const { return bits_; }
    std::size_t size() const { return points_.size(); }
    std::span<const std::complex<double>> points() const { return points_; }
    std::span<const std::uint32_t> labels() const { return labels_; }
    std::uint32_t label(std::size_t index) const { return labels_[index]; }

private:
    std::vector<std::complex<double>> points_;
    std::vector<std::uint32_t> labels_;
    int bits_ = 0;
};

struct GmiEstimate {
    double gmi = 0.0;       // bits per 2D symbol
    double std_error = 0.0; // from batch variance
    std::int64_t n_samples = 0;
    double snr_db = 0.0;
};

/// Monte-Carlo GMI of bit-metric decoding over AWGN with the matched Gaussian
/// metric. Deterministic given the seed, for any thread count; sample count is
/// rounded up to whole batches.
GmiEstimate gmi_monte_carlo(const Constellation& c, double snr_db, std::int64_t n_samples,
                            std::uint64_t seed);

/// Plain single-loop reference implementation (kept for tests and the
/// kernel benchmark; same estimator up to summation order).
GmiEstimate gmi_monte_carlo_serial(const Constellation& c, double snr_db,
                                   std::int64_t n_samples, std::uint64_t seed);

/// Normalized GMI: 1 - (m - gmi)/m, clamped to [0, 1].
double ngmi(const GmiEstimate& estimate, int bits);
double ngmi(double gmi, int bits);

/// Monotone interpolation of GMI versus SNR built from Monte-Carlo knots;
/// lets wideband runs price every channel from a handful of estimates.
class GmiTable {
public:
    static GmiTable build(const Constellation& c, std::span<const double> knots_snr_db,
                          std::int64_t samples_per_knot, std::uint64_t seed);

    double gmi_at(double snr_db) const; // clamped to the knot range
    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::vector<double> x_, y_, slope_;
};

} // namespace hcfsim
