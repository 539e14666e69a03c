#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hcfsim/constellation.hpp"
#include "hcfsim/fiber_model.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

/// Receiver-DSP and frame parameters for the single-channel waveform chain.
struct DspConfig {
    int samples_per_symbol = 2;
    double rrc_rolloff = 0.01;
    int rrc_span = 256;      // symbols; 1 % roll-off needs a long tail
    double pilot_ratio = 0.04;
    int mimo_taps = 15;      // odd, <= 163
    double mimo_step = 0.5;  // normalized (NLMS) adaptation gain, < 2 for stability
    int cpr_window = 16;     // pilot symbols, <= 46
    bool gla_enabled = false;
    int n_symbols = 1 << 16;
    double symbol_rate_baud = 32e9;

    double sample_rate_hz() const { return symbol_rate_baud * samples_per_symbol; }
};

/// Channel impairments, applied in order: gas-line response, polarization
/// rotation, frequency offset, Wiener phase noise, AWGN.
struct ImpairmentSpec {
    double snr_awgn_db = kInfDb;
    double laser_linewidth_hz = 0.0;
    double polarization_rotation_rad = 0.0;
    double frequency_offset_hz = 0.0;
    std::vector<GasLine> gla_lines; // centers are baseband offsets in Hz
};

struct Frame {
    std::vector<std::complex<double>> sym_x, sym_y; // symbol-rate, pilots included
    std::vector<std::size_t> pilot_positions;       // ascending
    int pilot_stride = 0;

    bool is_pilot(std::size_t k) const {
        return pilot_stride > 0 && k % static_cast<std::size_t>(pilot_stride) == 0;
    }
};

struct DualPolWave {
    std::vector<std::complex<double>> x, y;
    double sample_rate_hz = 0.0;
    int samples_per_symbol = 1;
};

/// Unit-energy root-raised-cosine taps, length span*sps + 1 (odd).
std::vector<double> rrc_taps(double rolloff, int span_symbols, int samples_per_symbol);

/// Dual-polarization frame: fixed QPSK pilots every round(1/pilot_ratio)
/// symbols, payload i.i.d. uniform over the constellation.
Frame generate_frame(const Constellation& c, const DspConfig& cfg, std::uint64_t seed);

/// Upsample + RRC pulse shaping.
DualPolWave modulate(const Frame& frame, const DspConfig& cfg);

DualPolWave apply_impairments(const DualPolWave& wave, const ImpairmentSpec& spec,
                              std::uint64_t seed);

/// Matched RRC filter at the oversampled rate.
DualPolWave matched_filter(const DualPolWave& wave, const DspConfig& cfg);

struct EqualizeResult {
    std::vector<std::complex<double>> x, y; // symbol rate
    std::vector<double> mse_trace;          // per 256-symbol block
};

/// 2x2 fractionally-spaced normalized LMS: pilot-directed updates only while
/// training (first quarter of the frame), then pilot + decision-directed at a
/// reduced step. Throws EqualizerDiverged when the block MSE exceeds the
/// input power three blocks in a row.
EqualizeResult mimo_equalize(const DualPolWave& rx, const Frame& frame, const Constellation& c,
                             const DspConfig& cfg);

/// Static frequency offset estimate from the phasor increment between
/// consecutive pilots; unambiguous up to +/- symbol_rate / (2 stride).
double estimate_frequency_offset_hz(const std::vector<std::complex<double>>& x,
                                    const std::vector<std::complex<double>>& y,
                                    const Frame& frame, double symbol_rate_baud);

/// Pilot-aided carrier phase recovery: phasor average over `window` pilots,
/// linear interpolation between pilots, conjugate rotation applied in place.
void carrier_phase_recovery(std::vector<std::complex<double>>& x,
                            std::vector<std::complex<double>>& y, const Frame& frame,
                            int window);

/// Regularized zero-phase spectral inverse W = H*/(|H|^2 + reg), gain
/// normalized so a flat response is passed through unchanged. Exact no-op
/// (bit-identical) when the response is flat 0 dB.
DualPolWave gla_compensate(const DualPolWave& wave, std::span<const double> response_db,
                           double regularization);

/// Lorentzian loss response sampled on the FFT grid of an n-point transform
/// at the waveform sample rate (bin 0 = DC, standard FFT order).
std::vector<double> gla_response_for_fft(std::span<const GasLine> baseband_lines,
                                         double sample_rate_hz, std::size_t n_fft);

struct TraceResult {
    double snr_db = 0.0;
    bool diverged = false;
    std::vector<double> mse_trace;
};

struct Measurement {
    double snr_db = 0.0; // mean of the best three traces
    double gmi = 0.0;    // at that SNR
    std::vector<TraceResult> traces;
};

/// Full chain, n_traces independently seeded runs (seed + trace index),
/// best-3 averaging. Throws MeasurementFailed with < 3 valid traces.
Measurement measure_channel(const DspConfig& cfg, const ImpairmentSpec& spec,
                            const Constellation& c, int n_traces, std::uint64_t seed);

/// Single run of the chain; exposed for stage-by-stage diagnostics.
TraceResult run_chain_once(const DspConfig& cfg, const ImpairmentSpec& spec,
                           const Constellation& c, std::uint64_t seed);

} // namespace hcfsim
