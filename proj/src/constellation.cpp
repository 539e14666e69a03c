#include "hcfsim/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hcfsim/errors.hpp"
#include "hcfsim/parallel.hpp"
#include "hcfsim/rng.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

namespace {

int bits_for_size(std::size_t n) {
    int m = 0;
    while ((std::size_t{1} << m) < n) ++m;
    if ((std::size_t{1} << m) != n)
        throw Error(ErrorKind::BadCardinality,
                    std::to_string(n) + " points is not a power of two");
    return m;
}

} // namespace

Constellation Constellation::from_points(std::vector<std::complex<double>> points,
                                         std::vector<std::uint32_t> labels) {
    if (points.empty() || points.size() != labels.size())
        throw Error(ErrorKind::BadCardinality, "points/labels size mismatch");
    Constellation c;
    c.bits_ = bits_for_size(points.size());
    std::set<std::uint32_t> seen;
    for (std::uint32_t label : labels) {
        if (label >= points.size())
            throw Error(ErrorKind::BadLabeling, "label " + std::to_string(label) + " out of range");
        if (!seen.insert(label).second)
            throw Error(ErrorKind::BadLabeling, "duplicate label " + std::to_string(label));
    }
    double energy = 0.0;
    for (const auto& p : points) energy += std::norm(p);
    energy /= static_cast<double>(points.size());
    if (energy <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "constellation has zero energy");
    const double scale = 1.0 / std::sqrt(energy);
    for (auto& p : points) p *= scale;
    c.points_ = std::move(points);
    c.labels_ = std::move(labels);
    return c;
}

Constellation Constellation::gray_square_qam(int bits) {
    if (bits < 2 || bits % 2 != 0)
        throw Error(ErrorKind::BadCardinality, "square QAM needs even bits >= 2");
    const int k = bits / 2;
    const int n = 1 << k;
    std::vector<std::complex<double>> points;
    std::vector<std::uint32_t> labels;
    points.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int q = 0; q < n; ++q) {
            points.emplace_back(2.0 * i - (n - 1), 2.0 * q - (n - 1));
            const auto gray = [](int v) { return static_cast<std::uint32_t>(v ^ (v >> 1)); };
            labels.push_back((gray(i) << k) | gray(q));
        }
    }
    return from_points(std::move(points), std::move(labels));
}

Constellation Constellation::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<std::complex<double>> points;
    std::vector<std::uint32_t> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        if (trimmed.rfind("label_bits", 0) == 0) continue; // header
        std::stringstream ss(trimmed);
        std::string bits_str, i_str, q_str;
        if (!std::getline(ss, bits_str, ',') || !std::getline(ss, i_str, ',') ||
            !std::getline(ss, q_str, ','))
            throw Error(ErrorKind::IoError, path.string() + ": expected label_bits,i,q");
        bits_str.erase(0, bits_str.find_first_not_of(" \t"));
        bits_str.erase(bits_str.find_last_not_of(" \t") + 1);
        std::uint32_t label = 0;
        for (char b : bits_str) {
            if (b != '0' && b != '1')
                throw Error(ErrorKind::IoError,
                            path.string() + ": bad label bits '" + bits_str + "'");
            label = (label << 1) | static_cast<std::uint32_t>(b - '0');
        }
        points.emplace_back(std::stod(i_str), std::stod(q_str));
        labels.push_back(label);
    }
    return from_points(std::move(points), std::move(labels));
}

void Constellation::save_csv(const std::filesystem::path& path,
                             const std::string& header_comment) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    if (!header_comment.empty()) {
        std::stringstream ss(header_comment);
        std::string l;
        while (std::getline(ss, l)) out << "# " << l << "\n";
    }
    out << "label_bits,i,q\n";
    char buf[96];
    for (std::size_t idx = 0; idx < points_.size(); ++idx) {
        std::string bits;
        for (int b = bits_ - 1; b >= 0; --b)
            bits.push_back(((labels_[idx] >> b) & 1u) ? '1' : '0');
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", bits.c_str(), points_[idx].real(),
                      points_[idx].imag());
        out << buf;
    }
}

namespace {

constexpr std::int64_t kBatch = 4096;
// Metric terms more than 46 nats below the leading one change the sums by
// less than 1e-20 relative and are skipped.
constexpr double kExpCut = 46.0;

/// One batch of the estimator. Returns the batch mean of per-sample GMI.
double gmi_batch(const Constellation& c, double noise_var, std::uint64_t seed,
                 std::vector<double>& d2_scratch) {
    Rng rng(seed);
    const auto points = c.points();
    const auto labels = c.labels();
    const std::size_t card = points.size();
    const int m = c.bits();
    const double inv_nv = 1.0 / noise_var;
    double sum = 0.0;
    for (std::int64_t k = 0; k < kBatch; ++k) {
        const std::size_t t = rng.next_index(card);
        const std::complex<double> y = points[t] + rng.next_complex_gaussian(noise_var);
        double dmin = kInfDb;
        for (std::size_t p = 0; p < card; ++p) {
            const double d2 = std::norm(y - points[p]);
            d2_scratch[p] = d2;
            dmin = std::min(dmin, d2);
        }
        double s_all = 0.0;
        double s_bit[2][16] = {};
        const std::uint32_t tx_label = labels[t];
        for (std::size_t p = 0; p < card; ++p) {
            const double e = (d2_scratch[p] - dmin) * inv_nv;
            if (e > kExpCut) continue;
            const double w = std::exp(-e);
            s_all += w;
            const std::uint32_t lbl = labels[p];
            for (int i = 0; i < m; ++i) s_bit[(lbl >> i) & 1u][i] += w;
        }
        double sample = static_cast<double>(m);
        for (int i = 0; i < m; ++i) {
            const double s_tx = s_bit[(tx_label >> i) & 1u][i];
            sample -= std::log2(s_all / s_tx);
        }
        sum += sample;
    }
    return sum / static_cast<double>(kBatch);
}

GmiEstimate gmi_impl(const Constellation& c, double snr_db, std::int64_t n_samples,
                     std::uint64_t seed, bool parallel) {
    if (n_samples < 1)
        throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
    if (!std::isfinite(snr_db))
        throw Error(ErrorKind::InvalidArgument, "snr must be finite");
    const double noise_var = 1.0 / db_to_lin(snr_db);
    const std::int64_t n_batches = (n_samples + kBatch - 1) / kBatch;
    std::vector<double> batch_means(static_cast<std::size_t>(n_batches));
    if (parallel) {
        parallel_for(static_cast<std::size_t>(n_batches), [&](std::size_t b) {
            std::vector<double> scratch(c.size());
            batch_means[b] = gmi_batch(c, noise_var, derive_seed(seed, 0x6d69, b), scratch);
        });
    } else {
        std::vector<double> scratch(c.size());
        for (std::int64_t b = 0; b < n_batches; ++b)
            batch_means[static_cast<std::size_t>(b)] =
                gmi_batch(c, noise_var, derive_seed(seed, 0x6d69, static_cast<std::uint64_t>(b)),
                          scratch);
    }
    double mean = 0.0;
    for (double v : batch_means) mean += v;
    mean /= static_cast<double>(n_batches);
    double var = 0.0;
    for (double v : batch_means) var += (v - mean) * (v - mean);
    double se = 0.0;
    if (n_batches > 1)
        se = std::sqrt(var / (static_cast<double>(n_batches) *
                              static_cast<double>(n_batches - 1)));
    GmiEstimate est;
    est.gmi = std::clamp(mean, 0.0, static_cast<double>(c.bits()));
    est.std_error = se;
    est.n_samples = n_batches * kBatch;
    est.snr_db = snr_db;
    return est;
}

} // namespace

GmiEstimate gmi_monte_carlo(const Constellation& c, double snr_db, std::int64_t n_samples,
                            std::uint64_t seed) {
    return gmi_impl(c, snr_db, n_samples, seed, true);
}

GmiEstimate gmi_monte_carlo_serial(const Constellation& c, double snr_db,
                                   std::int64_t n_samples, std::uint64_t seed) {
    return gmi_impl(c, snr_db, n_samples, seed, false);
}

double ngmi(double gmi, int bits) {
    const double m = static_cast<double>(bits);
    return std::clamp(1.0 - (m - gmi) / m, 0.0, 1.0);
}

double ngmi(const GmiEstimate& estimate, int bits) { return ngmi(estimate.gmi, bits); }

GmiTable GmiTable::build(const Constellation& c, std::span<const double> knots_snr_db,
                         std::int64_t samples_per_knot, std::uint64_t seed) {
    if (knots_snr_db.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "need >= 2 knots");
    GmiTable t;
    t.x_.assign(knots_snr_db.begin(), knots_snr_db.end());
    if (!std::is_sorted(t.x_.begin(), t.x_.end()))
        throw Error(ErrorKind::InvalidArgument, "knots must be ascending");
    t.y_.resize(t.x_.size());
    parallel_for(t.x_.size(), [&](std::size_t i) {
        t.y_[i] = gmi_monte_carlo_serial(c, t.x_[i], samples_per_knot,
                                         derive_seed(seed, 0x6b6e6f74, i))
                      .gmi;
    });
    // Monte-Carlo jitter can break monotonicity near saturation; an isotonic
    // pass keeps the interpolant (and any bisection on it) well behaved.
    for (std::size_t i = 1; i < t.y_.size(); ++i) t.y_[i] = std::max(t.y_[i], t.y_[i - 1]);

    // Fritsch-Carlson monotone cubic slopes.
    const std::size_t n = t.x_.size();
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        d[i] = (t.y_[i + 1] - t.y_[i]) / (t.x_[i + 1] - t.x_[i]);
    t.slope_.resize(n);
    t.slope_[0] = d[0];
    t.slope_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        t.slope_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            t.slope_[i] = t.slope_[i + 1] = 0.0;
            continue;
        }
        const double a = t.slope_[i] / d[i];
        const double b = t.slope_[i + 1] / d[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            t.slope_[i] = tau * a * d[i];
            t.slope_[i + 1] = tau * b * d[i];
        }
    }
    return t;
}

double GmiTable::gmi_at(double snr_db) const {
    if (snr_db <= x_.front()) return y_.front();
    if (snr_db >= x_.back()) return y_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), snr_db);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (snr_db - x_[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

} // namespace hcfsim
