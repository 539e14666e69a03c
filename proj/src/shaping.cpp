#include "hcfsim/shaping.hpp"

#include <algorithm>
#include <cmath>

#include "hcfsim/errors.hpp"
#include "hcfsim/rng.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

namespace detail {

double gmi_saa(std::span<const std::complex<double>> points,
               std::span<const std::uint32_t> labels, int bits, double noise_var,
               std::span<const std::uint32_t> tx_indices,
               std::span<const std::complex<double>> noise,
               std::vector<std::complex<double>>* gradient) {
    const std::size_t card = points.size();
    const std::size_t n = tx_indices.size();
    const double inv_nv = 1.0 / noise_var;
    const double inv_ln2 = 1.0 / std::log(2.0);
    if (gradient) gradient->assign(card, {0.0, 0.0});

    std::vector<double> w(card), coef(card);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint32_t t = tx_indices[k];
        const std::complex<double> y = points[t] + noise[k];
        double dmin = kInfDb;
        for (std::size_t p = 0; p < card; ++p) {
            const double d2 = std::norm(y - points[p]);
            w[p] = d2;
            dmin = std::min(dmin, d2);
        }
        double s_all = 0.0;
        double s_bit[2][16] = {};
        for (std::size_t p = 0; p < card; ++p) {
            const double e = (w[p] - dmin) * inv_nv;
            w[p] = e > 46.0 ? 0.0 : std::exp(-e); // below double precision of the sums
            if (w[p] == 0.0) continue;
            s_all += w[p];
            for (int i = 0; i < bits; ++i) s_bit[(labels[p] >> i) & 1u][i] += w[p];
        }
        double sample = static_cast<double>(bits);
        for (int i = 0; i < bits; ++i)
            sample -= std::log2(s_all / s_bit[(labels[t] >> i) & 1u][i]);
        total += sample;

        if (gradient) {
            // coef[p] = sum_i 1[bit_i(p)=bit_i(t)]/S_i - m/S, the sensitivity
            // of the sample to w_p.
            double inv_sb[16];
            for (int i = 0; i < bits; ++i) inv_sb[i] = 1.0 / s_bit[(labels[t] >> i) & 1u][i];
            const double m_over_s = static_cast<double>(bits) / s_all;
            std::complex<double> path_sum{0.0, 0.0};
            for (std::size_t p = 0; p < card; ++p) {
                if (w[p] == 0.0) continue;
                double cp = -m_over_s;
                for (int i = 0; i < bits; ++i)
                    if (((labels[p] ^ labels[t]) >> i & 1u) == 0) cp += inv_sb[i];
                const std::complex<double> dir =
                    cp * w[p] * (2.0 * inv_nv) * inv_ln2 * (y - points[p]);
                (*gradient)[p] += dir;
                path_sum += dir;
            }
            // y moves with the transmitted point, so its contribution is the
            // negated sum of the direct terms.
            (*gradient)[t] -= path_sum;
        }
    }
    if (gradient)
        for (auto& g : *gradient) g /= static_cast<double>(n);
    return total / static_cast<double>(n);
}

} // namespace detail

ShapingResult optimize_shaping(int bits, double target_snr_db, int iterations, double step,
                               std::uint64_t seed) {
    if (bits != 4 && bits != 6 && bits != 8 && bits != 10)
        throw Error(ErrorKind::InvalidArgument, "bits must be one of {4, 6, 8, 10}");
    if (iterations < 0 || step < 0.0)
        throw Error(ErrorKind::InvalidArgument, "iterations and step must be non-negative");

    const Constellation baseline = Constellation::gray_square_qam(bits);
    const double noise_var = 1.0 / db_to_lin(target_snr_db);

    // Fixed sample set (common random numbers): the objective is a smooth
    // deterministic function of the points.
    const std::size_t n_samples = 50000;
    Rng rng(derive_seed(seed, 0x73686170, static_cast<std::uint64_t>(bits)));
    std::vector<std::uint32_t> tx(n_samples);
    std::vector<std::complex<double>> noise(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        tx[k] = static_cast<std::uint32_t>(rng.next_index(baseline.size()));
        noise[k] = rng.next_complex_gaussian(noise_var);
    }

    std::vector<std::complex<double>> pts(baseline.points().begin(), baseline.points().end());
    const std::vector<std::uint32_t> labels(baseline.labels().begin(), baseline.labels().end());

    std::vector<std::complex<double>> grad;
    std::vector<std::complex<double>> best_pts = pts;
    double best_j = detail::gmi_saa(pts, labels, bits, noise_var, tx, noise, nullptr);
    const double baseline_j = best_j;

    for (int it = 0; it < iterations && step > 0.0; ++it) {
        const double j = detail::gmi_saa(pts, labels, bits, noise_var, tx, noise, &grad);
        if (j > best_j) {
            best_j = j;
            best_pts = pts;
        }
        double energy = 0.0;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            pts[p] += step * grad[p];
            energy += std::norm(pts[p]);
        }
        const double scale = 1.0 / std::sqrt(energy / static_cast<double>(pts.size()));
        for (auto& p : pts) p *= scale;
    }
    // Score the final iterate as well; the loop recorded pre-step values.
    const double final_j = detail::gmi_saa(pts, labels, bits, noise_var, tx, noise, nullptr);
    if (final_j > best_j) {
        best_j = final_j;
        best_pts = pts;
    }

    ShapingResult out;
    out.gmi_baseline = baseline_j;
    out.gmi_shaped = best_j;
    out.improved = best_j > baseline_j;
    out.constellation = out.improved
                            ? Constellation::from_points(std::move(best_pts),
                                                         std::vector<std::uint32_t>(labels))
                            : baseline;
    return out;
}

std::pair<const Constellation*, double> select_best_format(
    double snr_db, std::span<const Constellation> formats, const FecModel& fec,
    std::uint64_t seed, std::int64_t gmi_samples) {
    if (formats.empty())
        throw Error(ErrorKind::InvalidArgument, "formats list is empty");
    const Constellation* best = nullptr;
    double best_net = -1.0;
    for (const auto& c : formats) {
        const GmiEstimate est = gmi_monte_carlo(
            c, snr_db, gmi_samples, derive_seed(seed, 0x73656c, static_cast<std::uint64_t>(c.bits())));
        const double rate = max_code_rate(ngmi(est, c.bits()), fec);
        const double net = static_cast<double>(c.bits()) * rate;
        const bool wins =
            best == nullptr || net > best_net + 1e-12 ||
            (std::abs(net - best_net) <= 1e-12 && c.size() < best->size());
        if (wins) {
            best = &c;
            best_net = net;
        }
    }
    return {best, best_net};
}

} // namespace hcfsim
