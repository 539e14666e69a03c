#include "hcfsim/link_budget.hpp"

#include <algorithm>
#include <cmath>

#include "hcfsim/errors.hpp"
#include "hcfsim/parallel.hpp"

namespace hcfsim {

double per_channel_launch_power_dbm(const BandSpec& band, Direction direction) {
    const double total =
        direction == Direction::FW ? band.launch_power_fw_dbm : band.launch_power_bw_dbm;
    return total - lin_to_db(static_cast<double>(band.channel_count));
}

double ase_snr_db(double rx_power_dbm, double nf_db, double photon_energy_j,
                  double noise_bandwidth_hz) {
    if (noise_bandwidth_hz <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "noise bandwidth must be positive");
    const double noise_w = photon_energy_j * db_to_lin(nf_db) * noise_bandwidth_hz;
    return lin_to_db(dbm_to_watt(rx_power_dbm) / noise_w);
}

double leakage_interference_dbm(double tx_power_same_port_dbm, double directivity_db) {
    if (directivity_db <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "directivity must be positive");
    return tx_power_same_port_dbm - directivity_db;
}

double combine_snrs_db(std::span<const double> snrs_db) {
    double inv = 0.0;
    for (double s : snrs_db) {
        if (std::isinf(s) && s > 0) continue;
        inv += 1.0 / db_to_lin(s);
    }
    return inv == 0.0 ? kInfDb : lin_to_db(1.0 / inv);
}

namespace {

struct BandContext {
    const BandSpec* band;
    const AmplifierSpec* amp;
    double trx_snr_db;
};

BandContext band_context(const DirectionalScenario& sc, int band_index) {
    const auto& band = sc.plan->bands()[static_cast<std::size_t>(band_index)];
    auto amp_it = sc.link.amplifiers.find(band.name);
    if (amp_it == sc.link.amplifiers.end())
        throw Error(ErrorKind::ConfigError, "amplifiers." + band.name + " missing");
    auto trx_it = sc.link.trx_snr_db.find(band.name);
    if (trx_it == sc.link.trx_snr_db.end())
        throw Error(ErrorKind::ConfigError, "trx_snr." + band.name + " missing");
    return {&band, &amp_it->second, trx_it->second};
}

/// Core budget, exclusion not checked (evaluate_scenario flags exclusions
/// itself and still reports the breakdown for diagnostics).
SnrBreakdown evaluate_channel_unchecked(const DirectionalScenario& sc, int channel_id) {
    const Channel& ch = sc.plan->channel(channel_id);
    const BandContext ctx = band_context(sc, ch.band_index);
    const double wl_nm = wavelength_nm_from_hz(ch.center_frequency_hz);
    const double extras = sc.link.extras_loss_db;

    const double launch = per_channel_launch_power_dbm(*ctx.band, sc.direction);
    const Direction counter_dir = sc.direction == Direction::FW ? Direction::BW : Direction::FW;
    const double counter_launch = per_channel_launch_power_dbm(*ctx.band, counter_dir);

    const double fibre_loss = sc.fiber->link_loss_db(wl_nm);
    const double rx_signal = launch - fibre_loss - extras;

    const double bandwidth = sc.link.noise_bandwidth_hz > 0.0 ? sc.link.noise_bandwidth_hz
                                                              : sc.plan->symbol_rate_baud();

    SnrBreakdown out;
    out.snr_trx_db = ctx.trx_snr_db;
    out.snr_ase_db = ase_snr_db(rx_signal, ctx.amp->noise_figure_db,
                                photon_energy_j(ch.center_frequency_hz), bandwidth);

    if (sc.bidirectional) {
        // Both interference paths traverse the same lumped coupler/circulator
        // losses as the signal, so they are referred to the receiver plane by
        // the same extras offset.
        const double alpha = sc.fiber->attenuation_at(wl_nm);
        const double beta = sc.fiber->rb_db_per_km(ctx.band->name, sc.link.rb_column);
        const double rb = rb_interference_power_dbm(counter_launch - extras, beta, alpha,
                                                    sc.fiber->length_km());
        const double leak =
            leakage_interference_dbm(counter_launch - extras, sc.link.circulator_directivity_db);
        out.snr_rb_db = rx_signal - rb;
        out.snr_leak_db = rx_signal - leak;
    }

    double terms[5] = {out.snr_trx_db, out.snr_ase_db, out.snr_rb_db, out.snr_leak_db,
                       sc.link.nonlinear_snr_db.value_or(kInfDb)};
    out.snr_total_db = combine_snrs_db(terms);
    return out;
}

} // namespace

SnrBreakdown evaluate_channel(const DirectionalScenario& sc, int channel_id) {
    if (sc.plan == nullptr || sc.fiber == nullptr)
        throw Error(ErrorKind::ConfigError, "scenario missing plan or fiber profile");
    if (sc.plan->is_excluded(channel_id))
        throw Error(ErrorKind::ExcludedChannel, "channel " + std::to_string(channel_id));
    return evaluate_channel_unchecked(sc, channel_id);
}

double bidi_penalty_db(const DirectionalScenario& sc, int channel_id) {
    DirectionalScenario uni = sc;
    uni.bidirectional = false;
    DirectionalScenario bidi = sc;
    bidi.bidirectional = true;
    const double up = evaluate_channel(uni, channel_id).snr_total_db;
    const double bp = evaluate_channel(bidi, channel_id).snr_total_db;
    return up - bp;
}

namespace {

std::vector<ChannelSnr> evaluate_scenario_impl(const DirectionalScenario& fw,
                                               const DirectionalScenario& bw, bool parallel) {
    if (fw.plan == nullptr || fw.fiber == nullptr)
        throw Error(ErrorKind::ConfigError, "scenario missing plan or fiber profile");
    const bool bidi = fw.bidirectional;
    if (bidi) {
        if (bw.plan != fw.plan &&
            (bw.plan == nullptr || bw.plan->channel_count() != fw.plan->channel_count()))
            throw Error(ErrorKind::ConfigError, "FW and BW plans differ");
    }
    const std::size_t n = fw.plan->channel_count();
    const std::size_t total = bidi ? 2 * n : n;
    std::vector<ChannelSnr> out(total);
    auto eval_one = [&](std::size_t idx) {
        const bool is_bw = idx >= n;
        const DirectionalScenario& sc = is_bw ? bw : fw;
        const int ch = static_cast<int>(is_bw ? idx - n : idx);
        ChannelSnr r;
        r.channel_id = ch;
        r.direction = sc.direction;
        r.excluded = sc.plan->is_excluded(ch);
        r.snr = evaluate_channel_unchecked(sc, ch);
        out[idx] = r;
    };
    if (parallel)
        parallel_for(total, eval_one);
    else
        for (std::size_t i = 0; i < total; ++i) eval_one(i);
    // Merge order: all FW by channel id, then all BW.
    return out;
}

} // namespace

std::vector<ChannelSnr> evaluate_scenario(const DirectionalScenario& fw,
                                          const DirectionalScenario& bw) {
    return evaluate_scenario_impl(fw, bw, true);
}

std::vector<ChannelSnr> evaluate_scenario_serial(const DirectionalScenario& fw,
                                                 const DirectionalScenario& bw) {
    return evaluate_scenario_impl(fw, bw, false);
}

CalibrationOutcome calibrate_trx_metric(std::span<const std::string> bands,
                                        const std::map<std::string, double>& targets,
                                        const BandMetric& metric, double rel_tol) {
    constexpr double kTrxLo = -20.0;
    constexpr double kTrxHi = 60.0; // treated as "effectively infinite"
    CalibrationOutcome out;
    for (const auto& band : bands) {
        auto it = targets.find(band);
        if (it == targets.end())
            throw Error(ErrorKind::ConfigError, "no calibration target for band " + band);
        const double target = it->second;
        const double hi_val = metric(band, kTrxHi);
        if (target > hi_val * (1.0 + rel_tol)) {
            throw Error(ErrorKind::CalibrationInfeasible,
                        "band " + band + ": target " + std::to_string(target) +
                            " above reachable " + std::to_string(hi_val) +
                            " (limited by the non-transceiver terms)");
        }
        // Bisect to bracket exhaustion; the metric is monotone in trx, so the
        // fitted value lands well inside the relative tolerance.
        double lo = kTrxLo, hi = kTrxHi;
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (metric(band, mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        const double fitted = 0.5 * (lo + hi);
        if (fitted > kTrxHi - 0.5) out.at_boundary = true;
        out.trx_snr_db[band] = fitted;
    }
    return out;
}

CalibrationOutcome calibrate_trx_snr(const DirectionalScenario& fw, const DirectionalScenario& bw,
                                     const std::map<std::string, double>& targets) {
    std::vector<std::string> bands;
    for (const auto& band : fw.plan->bands()) bands.push_back(band.name);
    auto metric = [&](const std::string& band, double trx_db) {
        DirectionalScenario f = fw, b = bw;
        f.link.trx_snr_db[band] = trx_db;
        b.link.trx_snr_db[band] = trx_db;
        auto rows = evaluate_scenario_serial(f, b);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : rows) {
            const auto& ch = fw.plan->channel(r.channel_id);
            if (fw.plan->bands()[static_cast<std::size_t>(ch.band_index)].name != band) continue;
            if (r.excluded) continue;
            sum += r.snr.snr_total_db;
            ++count;
        }
        return count > 0 ? sum / static_cast<double>(count) : -kInfDb;
    };
    return calibrate_trx_metric(bands, targets, metric);
}

} // namespace hcfsim
