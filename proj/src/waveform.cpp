#include "hcfsim/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hcfsim/errors.hpp"
#include "hcfsim/fft.hpp"
#include "hcfsim/parallel.hpp"
#include "hcfsim/rng.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

namespace {

void validate(const DspConfig& cfg) {
    if (cfg.samples_per_symbol < 2)
        throw Error(ErrorKind::InvalidArgument, "samples_per_symbol must be >= 2");
    if (cfg.pilot_ratio <= 0.0 || cfg.pilot_ratio >= 1.0)
        throw Error(ErrorKind::InvalidArgument, "pilot_ratio must be in (0, 1)");
    if (cfg.mimo_taps < 1 || cfg.mimo_taps > 163 || cfg.mimo_taps % 2 == 0)
        throw Error(ErrorKind::InvalidArgument, "mimo_taps must be odd and <= 163");
    if (cfg.cpr_window < 1 || cfg.cpr_window > 46)
        throw Error(ErrorKind::InvalidArgument, "cpr_window must be in [1, 46]");
    if (cfg.n_symbols < static_cast<int>(std::lround(1.0 / cfg.pilot_ratio)))
        throw Error(ErrorKind::InvalidArgument, "n_symbols must cover one pilot period");
}

/// "same"-length convolution with the group delay removed.
std::vector<std::complex<double>> convolve_same(const std::vector<std::complex<double>>& x,
                                                const std::vector<double>& h) {
    const std::size_t n = x.size();
    const std::size_t nh = h.size();
    const std::size_t delay = (nh - 1) / 2;
    std::vector<std::complex<double>> out(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc{0.0, 0.0};
        const std::size_t jlo = (i + delay >= n - 1) ? i + delay - (n - 1) : 0;
        const std::size_t jhi = std::min(nh - 1, i + delay);
        for (std::size_t j = jlo; j <= jhi; ++j) acc += h[j] * x[i + delay - j];
        out[i] = acc;
    }
    return out;
}

double mean_power(const std::vector<std::complex<double>>& v) {
    double p = 0.0;
    for (const auto& s : v) p += std::norm(s);
    return v.empty() ? 0.0 : p / static_cast<double>(v.size());
}

} // namespace

std::vector<double> rrc_taps(double rolloff, int span_symbols, int samples_per_symbol) {
    if (rolloff <= 0.0 || rolloff > 1.0)
        throw Error(ErrorKind::InvalidArgument, "rolloff must be in (0, 1]");
    if (span_symbols < 2 || samples_per_symbol < 1)
        throw Error(ErrorKind::InvalidArgument, "degenerate RRC span/sps");
    const int n = span_symbols * samples_per_symbol + 1;
    std::vector<double> h(static_cast<std::size_t>(n));
    const double b = rolloff;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i - (n - 1) / 2) / samples_per_symbol;
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - b + 4.0 * b / std::numbers::pi;
        } else if (std::abs(std::abs(4.0 * b * t) - 1.0) < 1e-9) {
            v = b / std::sqrt(2.0) *
                ((1.0 + 2.0 / std::numbers::pi) * std::sin(std::numbers::pi / (4.0 * b)) +
                 (1.0 - 2.0 / std::numbers::pi) * std::cos(std::numbers::pi / (4.0 * b)));
        } else {
            const double pt = std::numbers::pi * t;
            v = (std::sin(pt * (1.0 - b)) + 4.0 * b * t * std::cos(pt * (1.0 + b))) /
                (pt * (1.0 - 16.0 * b * b * t * t));
        }
        h[static_cast<std::size_t>(i)] = v;
    }
    double energy = 0.0;
    for (double v : h) energy += v * v;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= scale;
    return h;
}

Frame generate_frame(const Constellation& c, const DspConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    Frame frame;
    frame.pilot_stride = static_cast<int>(std::lround(1.0 / cfg.pilot_ratio));
    const std::size_t n = static_cast<std::size_t>(cfg.n_symbols);
    frame.sym_x.resize(n);
    frame.sym_y.resize(n);

    // Pilots are a fixed QPSK sequence independent of the payload seed; the
    // two polarizations carry distinct sequences so the 2x2 response stays
    // identifiable from pilots alone.
    Rng pilot_rng(0x50494c4f54ull);
    Rng payload_rng(derive_seed(seed, 0x7061796cull));
    const auto points = c.points();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k % static_cast<std::size_t>(frame.pilot_stride) == 0) {
            frame.pilot_positions.push_back(k);
            const auto qpsk = [&](std::uint64_t bits) {
                return std::complex<double>((bits & 1u) ? inv_sqrt2 : -inv_sqrt2,
                                            (bits & 2u) ? inv_sqrt2 : -inv_sqrt2);
            };
            const std::uint64_t r = pilot_rng.next_u64();
            frame.sym_x[k] = qpsk(r);
            frame.sym_y[k] = qpsk(r >> 2);
        } else {
            frame.sym_x[k] = points[payload_rng.next_index(points.size())];
            frame.sym_y[k] = points[payload_rng.next_index(points.size())];
        }
    }
    return frame;
}

DualPolWave modulate(const Frame& frame, const DspConfig& cfg) {
    const auto taps = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span, cfg.samples_per_symbol);
    const std::size_t sps = static_cast<std::size_t>(cfg.samples_per_symbol);
    DualPolWave wave;
    wave.sample_rate_hz = cfg.sample_rate_hz();
    wave.samples_per_symbol = cfg.samples_per_symbol;
    auto shape = [&](const std::vector<std::complex<double>>& sym) {
        std::vector<std::complex<double>> up(sym.size() * sps, {0.0, 0.0});
        for (std::size_t k = 0; k < sym.size(); ++k) up[k * sps] = sym[k];
        return convolve_same(up, taps);
    };
    wave.x = shape(frame.sym_x);
    wave.y = shape(frame.sym_y);
    return wave;
}

DualPolWave matched_filter(const DualPolWave& wave, const DspConfig& cfg) {
    const auto taps = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span, cfg.samples_per_symbol);
    DualPolWave out = wave;
    out.x = convolve_same(wave.x, taps);
    out.y = convolve_same(wave.y, taps);
    return out;
}

std::vector<double> gla_response_for_fft(std::span<const GasLine> baseband_lines,
                                         double sample_rate_hz, std::size_t n_fft) {
    std::vector<double> resp(n_fft, 0.0);
    for (std::size_t k = 0; k < n_fft; ++k) {
        const double f = (k < n_fft / 2 ? static_cast<double>(k)
                                        : static_cast<double>(k) - static_cast<double>(n_fft)) *
                         sample_rate_hz / static_cast<double>(n_fft);
        resp[k] = gas_loss_db_at(baseband_lines, f);
    }
    return resp;
}

DualPolWave apply_impairments(const DualPolWave& wave, const ImpairmentSpec& spec,
                              std::uint64_t seed) {
    if (spec.laser_linewidth_hz < 0.0 || !std::isfinite(spec.frequency_offset_hz) ||
        !std::isfinite(spec.polarization_rotation_rad))
        throw Error(ErrorKind::InvalidArgument, "bad impairment spec");
    DualPolWave out = wave;
    const std::size_t n = out.x.size();

    if (!spec.gla_lines.empty()) {
        const std::size_t nfft = next_pow2(n);
        const auto resp = gla_response_for_fft(spec.gla_lines, wave.sample_rate_hz, nfft);
        for (auto* pol : {&out.x, &out.y}) {
            std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
            std::copy(pol->begin(), pol->end(), buf.begin());
            fft(buf, false);
            for (std::size_t k = 0; k < nfft; ++k)
                buf[k] *= std::pow(10.0, -resp[k] / 20.0);
            fft(buf, true);
            pol->assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
        }
    }

    if (spec.polarization_rotation_rad != 0.0) {
        const double ct = std::cos(spec.polarization_rotation_rad);
        const double st = std::sin(spec.polarization_rotation_rad);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = out.x[i], y = out.y[i];
            out.x[i] = ct * x + st * y;
            out.y[i] = -st * x + ct * y;
        }
    }

    if (spec.frequency_offset_hz != 0.0) {
        const double w = 2.0 * std::numbers::pi * spec.frequency_offset_hz / wave.sample_rate_hz;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> rot(std::cos(w * static_cast<double>(i)),
                                           std::sin(w * static_cast<double>(i)));
            out.x[i] *= rot;
            out.y[i] *= rot;
        }
    }

    if (spec.laser_linewidth_hz > 0.0) {
        // Wiener phase walk, common to both polarizations (one laser pair).
        Rng rng(derive_seed(seed, 0x70686173ull));
        const double inc_var =
            2.0 * std::numbers::pi * spec.laser_linewidth_hz / wave.sample_rate_hz;
        const double sd = std::sqrt(inc_var);
        double phi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            phi += sd * rng.next_gaussian();
            const std::complex<double> rot(std::cos(phi), std::sin(phi));
            out.x[i] *= rot;
            out.y[i] *= rot;
        }
    }

    if (std::isfinite(spec.snr_awgn_db)) {
        // snr_awgn is the per-symbol (Es/N0) SNR: the noise variance is set
        // against the power in one symbol period so the symbol-rate EVM after
        // matched filtering reads snr_awgn. The raw waveform power ratio then
        // reads snr_awgn - 10 log10(sps).
        Rng rng(derive_seed(seed, 0x6177676eull));
        const double snr = db_to_lin(spec.snr_awgn_db);
        for (auto* pol : {&out.x, &out.y}) {
            const double var = mean_power(*pol) * out.samples_per_symbol / snr;
            for (auto& s : *pol) s += rng.next_complex_gaussian(var);
        }
    }
    return out;
}

EqualizeResult mimo_equalize(const DualPolWave& rx, const Frame& frame, const Constellation& c,
                             const DspConfig& cfg) {
    validate(cfg);
    const int taps = cfg.mimo_taps;
    const int center = (taps - 1) / 2;
    const std::size_t sps = static_cast<std::size_t>(rx.samples_per_symbol);
    const std::size_t n_sym = frame.sym_x.size();
    const std::size_t n_samp = rx.x.size();

    std::vector<std::complex<double>> wxx(taps), wxy(taps), wyx(taps), wyy(taps);
    wxx[static_cast<std::size_t>(center)] = 1.0;
    wyy[static_cast<std::size_t>(center)] = 1.0;

    const double input_power = 0.5 * (mean_power(rx.x) + mean_power(rx.y));
    const auto points = c.points();

    EqualizeResult out;
    out.x.resize(n_sym);
    out.y.resize(n_sym);

    constexpr std::size_t kBlock = 256;
    double block_err = 0.0;
    std::size_t block_count = 0;
    int bad_blocks = 0;

    std::vector<std::complex<double>> ux(static_cast<std::size_t>(taps)),
        uy(static_cast<std::size_t>(taps));

    for (std::size_t k = 0; k < n_sym; ++k) {
        const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(k * sps) - center;
        double win_power = 0.0;
        for (int j = 0; j < taps; ++j) {
            const std::ptrdiff_t idx = base + j;
            const bool ok = idx >= 0 && idx < static_cast<std::ptrdiff_t>(n_samp);
            ux[static_cast<std::size_t>(j)] = ok ? rx.x[static_cast<std::size_t>(idx)] : 0.0;
            uy[static_cast<std::size_t>(j)] = ok ? rx.y[static_cast<std::size_t>(idx)] : 0.0;
            win_power += std::norm(ux[static_cast<std::size_t>(j)]) +
                         std::norm(uy[static_cast<std::size_t>(j)]);
        }
        std::complex<double> ox{0.0, 0.0}, oy{0.0, 0.0};
        for (int j = 0; j < taps; ++j) {
            ox += wxx[static_cast<std::size_t>(j)] * ux[static_cast<std::size_t>(j)] +
                  wxy[static_cast<std::size_t>(j)] * uy[static_cast<std::size_t>(j)];
            oy += wyx[static_cast<std::size_t>(j)] * ux[static_cast<std::size_t>(j)] +
                  wyy[static_cast<std::size_t>(j)] * uy[static_cast<std::size_t>(j)];
        }
        out.x[k] = ox;
        out.y[k] = oy;

        const bool training = k < n_sym / 4;
        const bool pilot = frame.is_pilot(k);
        std::complex<double> dx, dy;
        if (pilot) {
            dx = frame.sym_x[k];
            dy = frame.sym_y[k];
        } else {
            // decision-directed: nearest constellation point
            auto decide = [&](std::complex<double> v) {
                std::size_t best = 0;
                double bd = kInfDb;
                for (std::size_t p = 0; p < points.size(); ++p) {
                    const double d = std::norm(v - points[p]);
                    if (d < bd) {
                        bd = d;
                        best = p;
                    }
                }
                return points[best];
            };
            dx = decide(ox);
            dy = decide(oy);
        }
        const std::complex<double> ex = dx - ox;
        const std::complex<double> ey = dy - oy;

        // Training phase: pilot-directed updates only, full step. Tracking
        // phase: pilot + decision-directed updates, annealed in two steps so
        // the steady-state misadjustment stays well under the noise floor.
        if (pilot || !training) {
            const double mu = training ? cfg.mimo_step
                              : (k < n_sym / 2) ? cfg.mimo_step / 16.0
                                                : cfg.mimo_step / 64.0;
            const double g = mu / (1e-12 + win_power);
            for (int j = 0; j < taps; ++j) {
                const auto cux = std::conj(ux[static_cast<std::size_t>(j)]);
                const auto cuy = std::conj(uy[static_cast<std::size_t>(j)]);
                wxx[static_cast<std::size_t>(j)] += g * ex * cux;
                wxy[static_cast<std::size_t>(j)] += g * ex * cuy;
                wyx[static_cast<std::size_t>(j)] += g * ey * cux;
                wyy[static_cast<std::size_t>(j)] += g * ey * cuy;
            }
        }

        // Learning curve from the symbols that drive updates (payload
        // decisions are meaningless before training has converged).
        if (pilot || !training) {
            block_err += 0.5 * (std::norm(ex) + std::norm(ey));
            ++block_count;
        }
        if (block_count == kBlock || (k + 1 == n_sym && block_count > 0)) {
            const double mse = block_err / static_cast<double>(block_count);
            out.mse_trace.push_back(mse);
            bad_blocks = (mse > input_power) ? bad_blocks + 1 : 0;
            if (bad_blocks >= 3)
                throw Error(ErrorKind::EqualizerDiverged,
                            "block MSE above input power for 3 consecutive blocks");
            block_err = 0.0;
            block_count = 0;
        }
    }
    return out;
}

double estimate_frequency_offset_hz(const std::vector<std::complex<double>>& x,
                                    const std::vector<std::complex<double>>& y,
                                    const Frame& frame, double symbol_rate_baud) {
    const auto& pilots = frame.pilot_positions;
    if (pilots.size() < 2) return 0.0;
    // Per pilot, the 2x2 pilot correlation is (static mixing) x e^{j phi}.
    // Each entry's increment sum is coherent only where the mixing entry is
    // strong; weighting by its own magnitude keeps the estimate unbiased for
    // any rotation angle without letting dead entries inject noise.
    std::complex<double> acc_e[4] = {};
    std::complex<double> prev[4] = {};
    for (std::size_t p = 0; p < pilots.size(); ++p) {
        const std::size_t k = pilots[p];
        const std::complex<double> cur[4] = {
            x[k] * std::conj(frame.sym_x[k]), x[k] * std::conj(frame.sym_y[k]),
            y[k] * std::conj(frame.sym_x[k]), y[k] * std::conj(frame.sym_y[k])};
        if (p > 0)
            for (int e = 0; e < 4; ++e) acc_e[e] += cur[e] * std::conj(prev[e]);
        for (int e = 0; e < 4; ++e) prev[e] = cur[e];
    }
    std::complex<double> acc{0.0, 0.0};
    for (const auto& a : acc_e) acc += a * std::abs(a);
    const double dphi = std::arg(acc); // per pilot stride
    const double stride = static_cast<double>(pilots[1] - pilots[0]);
    return dphi / (2.0 * std::numbers::pi * stride) * symbol_rate_baud;
}

void carrier_phase_recovery(std::vector<std::complex<double>>& x,
                            std::vector<std::complex<double>>& y, const Frame& frame,
                            int window) {
    if (window < 1) throw Error(ErrorKind::InvalidArgument, "cpr window must be >= 1");
    const auto& pilots = frame.pilot_positions;
    if (pilots.empty()) return;
    const std::size_t np = pilots.size();

    // Per-pilot phasors, jointly across polarizations (common laser phase).
    std::vector<std::complex<double>> raw(np);
    for (std::size_t p = 0; p < np; ++p) {
        const std::size_t k = pilots[p];
        raw[p] = x[k] * std::conj(frame.sym_x[k]) + y[k] * std::conj(frame.sym_y[k]);
    }
    // Sliding phasor average over `window` pilots.
    std::vector<double> theta(np);
    const int half = window / 2;
    for (std::size_t p = 0; p < np; ++p) {
        const std::size_t lo = p > static_cast<std::size_t>(half) ? p - half : 0;
        const std::size_t hi = std::min(np - 1, lo + static_cast<std::size_t>(window) - 1);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t q = lo; q <= hi; ++q) acc += raw[q];
        theta[p] = std::arg(acc);
    }
    // Linear interpolation between pilot estimates; wrap-safe increments.
    const std::size_t n = x.size();
    auto phase_at = [&](std::size_t k) {
        if (k <= pilots.front()) return theta.front();
        if (k >= pilots.back()) return theta.back();
        const auto it = std::upper_bound(pilots.begin(), pilots.end(), k);
        const std::size_t p = static_cast<std::size_t>(it - pilots.begin()) - 1;
        double d = theta[p + 1] - theta[p];
        while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
        while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
        const double frac = static_cast<double>(k - pilots[p]) /
                            static_cast<double>(pilots[p + 1] - pilots[p]);
        return theta[p] + frac * d;
    };
    for (std::size_t k = 0; k < n; ++k) {
        const double th = phase_at(k);
        const std::complex<double> rot(std::cos(th), -std::sin(th));
        x[k] *= rot;
        y[k] *= rot;
    }
}

DualPolWave gla_compensate(const DualPolWave& wave, std::span<const double> response_db,
                           double regularization) {
    if (regularization < 0.0)
        throw Error(ErrorKind::InvalidArgument, "regularization must be >= 0");
    bool flat = true;
    for (double r : response_db)
        if (std::abs(r) > 1e-12) {
            flat = false;
            break;
        }
    if (flat) return wave; // strict no-op: bit-identical to the input

    const std::size_t nfft = response_db.size();
    if (nfft == 0 || (nfft & (nfft - 1)) != 0 || nfft < wave.x.size())
        throw Error(ErrorKind::InvalidArgument,
                    "response length must be a power of two covering the waveform");

    // Gain-anchored regularized inverse: with h normalized to unit maximum,
    // W = (h + reg) / (h^2 + reg). Matches the MMSE inverse for small reg and
    // tends to the identity as reg grows.
    double hmax = 0.0;
    std::vector<double> w(nfft);
    for (std::size_t k = 0; k < nfft; ++k) {
        w[k] = std::pow(10.0, -response_db[k] / 20.0);
        hmax = std::max(hmax, w[k]);
    }
    for (std::size_t k = 0; k < nfft; ++k) {
        const double h = w[k] / hmax;
        w[k] = (h + regularization) / (h * h + regularization);
    }

    DualPolWave out = wave;
    const std::size_t n = wave.x.size();
    for (auto* pol : {&out.x, &out.y}) {
        std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
        std::copy(pol->begin(), pol->end(), buf.begin());
        fft(buf, false);
        for (std::size_t k = 0; k < nfft; ++k) buf[k] *= w[k];
        fft(buf, true);
        pol->assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return out;
}

namespace {

TraceResult run_chain_impl(const DspConfig& cfg, const ImpairmentSpec& spec,
                           const Constellation& c, std::uint64_t frame_seed,
                           std::uint64_t impairment_seed) {
    validate(cfg);
    const Frame frame = generate_frame(c, cfg, derive_seed(frame_seed, 0x6672616dull, 0));
    const DualPolWave tx = modulate(frame, cfg);
    DualPolWave rx = apply_impairments(tx, spec, impairment_seed);

    if (cfg.gla_enabled && !spec.gla_lines.empty()) {
        const std::size_t nfft = next_pow2(rx.x.size());
        const auto resp = gla_response_for_fft(spec.gla_lines, rx.sample_rate_hz, nfft);
        const double reg =
            std::isfinite(spec.snr_awgn_db) ? 1.0 / db_to_lin(spec.snr_awgn_db) : 0.0;
        rx = gla_compensate(rx, resp, reg);
    }

    rx = matched_filter(rx, cfg);

    // Coarse frequency-offset removal from pilot phasor increments, before
    // the equalizer; CPR then only tracks the residual phase walk.
    {
        std::vector<std::complex<double>> px(frame.sym_x.size()), py(frame.sym_y.size());
        const std::size_t sps = static_cast<std::size_t>(rx.samples_per_symbol);
        for (std::size_t k = 0; k < px.size(); ++k) {
            px[k] = rx.x[k * sps];
            py[k] = rx.y[k * sps];
        }
        // Estimates below a couple of MHz are within the estimator's own
        // noise under polarization mixing, and the equalizer + CPR absorb
        // ramps of that size anyway; only large offsets get derotated here.
        const double foff = estimate_frequency_offset_hz(px, py, frame, cfg.symbol_rate_baud);
        if (std::abs(foff) > 2e6) {
            const double w = 2.0 * std::numbers::pi * foff / rx.sample_rate_hz;
            for (std::size_t i = 0; i < rx.x.size(); ++i) {
                const std::complex<double> rot(std::cos(w * static_cast<double>(i)),
                                               -std::sin(w * static_cast<double>(i)));
                rx.x[i] *= rot;
                rx.y[i] *= rot;
            }
        }
    }

    TraceResult trace;
    EqualizeResult eq;
    try {
        eq = mimo_equalize(rx, frame, c, cfg);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::EqualizerDiverged) throw;
        trace.diverged = true;
        trace.snr_db = -kInfDb;
        return trace;
    }
    trace.mse_trace = eq.mse_trace;

    // Fine offset pass on the equalized symbols (the coarse pre-equalizer
    // estimate is noisy under polarization mixing), then phase recovery.
    {
        const double residual = estimate_frequency_offset_hz(eq.x, eq.y, frame,
                                                             cfg.symbol_rate_baud);
        if (std::abs(residual) > 10.0) {
            const double w = 2.0 * std::numbers::pi * residual / cfg.symbol_rate_baud;
            for (std::size_t k = 0; k < eq.x.size(); ++k) {
                const std::complex<double> rot(std::cos(w * static_cast<double>(k)),
                                               -std::sin(w * static_cast<double>(k)));
                eq.x[k] *= rot;
                eq.y[k] *= rot;
            }
        }
    }
    carrier_phase_recovery(eq.x, eq.y, frame, cfg.cpr_window);

    // Data-aided SNR over payload symbols. The head discard covers the
    // pilot-only training phase plus a settling margin; the tail discard
    // covers the matched-filter edge. A least-squares complex gain per
    // polarization is divided out first: the decision-directed equalizer
    // converges to the MMSE (shrunk) scaling, which would otherwise read
    // optimistic at low SNR.
    const std::size_t n = frame.sym_x.size();
    const std::size_t head = std::min(n / 4 + 2048, n / 2);
    const std::size_t tail = 256;
    std::complex<double> gx{0.0, 0.0}, gy{0.0, 0.0};
    double ex2 = 0.0, ey2 = 0.0;
    for (std::size_t k = head; k + tail < n; ++k) {
        if (frame.is_pilot(k)) continue;
        gx += eq.x[k] * std::conj(frame.sym_x[k]);
        gy += eq.y[k] * std::conj(frame.sym_y[k]);
        ex2 += std::norm(frame.sym_x[k]);
        ey2 += std::norm(frame.sym_y[k]);
    }
    if (ex2 > 0.0) gx /= ex2;
    if (ey2 > 0.0) gy /= ey2;
    if (std::abs(gx) < 1e-9) gx = 1.0;
    if (std::abs(gy) < 1e-9) gy = 1.0;
    double sig = 0.0, err = 0.0;
    for (std::size_t k = head; k + tail < n; ++k) {
        if (frame.is_pilot(k)) continue;
        sig += std::norm(frame.sym_x[k]) + std::norm(frame.sym_y[k]);
        err += std::norm(eq.x[k] / gx - frame.sym_x[k]) +
               std::norm(eq.y[k] / gy - frame.sym_y[k]);
    }
    trace.snr_db = err > 0.0 ? lin_to_db(sig / err) : kInfDb;
    return trace;
}

} // namespace

TraceResult run_chain_once(const DspConfig& cfg, const ImpairmentSpec& spec,
                           const Constellation& c, std::uint64_t seed) {
    return run_chain_impl(cfg, spec, c, seed, seed);
}

Measurement measure_channel(const DspConfig& cfg, const ImpairmentSpec& spec,
                            const Constellation& c, int n_traces, std::uint64_t seed) {
    if (n_traces < 3)
        throw Error(ErrorKind::InvalidArgument, "need at least 3 traces");
    Measurement m;
    m.traces.resize(static_cast<std::size_t>(n_traces));
    // The payload frame is a function of the master seed only; trace seeds
    // (seed + index) vary the channel realization.
    parallel_for(static_cast<std::size_t>(n_traces), [&](std::size_t t) {
        m.traces[t] = run_chain_impl(cfg, spec, c, seed, seed + t);
    });
    std::vector<std::pair<double, std::size_t>> valid;
    for (std::size_t t = 0; t < m.traces.size(); ++t)
        if (!m.traces[t].diverged) valid.push_back({m.traces[t].snr_db, t});
    if (valid.size() < 3)
        throw Error(ErrorKind::MeasurementFailed,
                    "only " + std::to_string(valid.size()) + " valid traces");
    std::sort(valid.begin(), valid.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) sum += valid[i].first;
    m.snr_db = sum / 3.0;
    m.gmi = gmi_monte_carlo(c, m.snr_db, 100000, derive_seed(seed, 0x676d69ull)).gmi;
    return m;
}

} // namespace hcfsim
