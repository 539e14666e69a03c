#include "hcfsim/channel_plan.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hcfsim/errors.hpp"

namespace hcfsim {

ChannelPlan::ChannelPlan(std::vector<BandSpec> bands, double grid_spacing_hz,
                         double symbol_rate_baud, double guard_band_hz, double rolloff,
                         std::vector<int> excluded_channels)
    : bands_(std::move(bands)),
      excluded_(std::move(excluded_channels)),
      grid_spacing_hz_(grid_spacing_hz),
      symbol_rate_baud_(symbol_rate_baud),
      guard_band_hz_(guard_band_hz),
      rolloff_(rolloff) {
    if (grid_spacing_hz_ <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
    if (symbol_rate_baud_ < 0.0 || rolloff_ < 0.0 || guard_band_hz_ < 0.0)
        throw Error(ErrorKind::InvalidArgument, "negative plan parameter");
    // Occupied bandwidth must fit in one grid slot; guard accounting beyond
    // that is not enforced (the grid is the authority on channel spacing).
    if (symbol_rate_baud_ * (1.0 + rolloff_) > grid_spacing_hz_ * (1.0 + 1e-12))
        throw Error(ErrorKind::PlanInconsistent,
                    "symbol rate x (1+rolloff) exceeds grid spacing");

    std::sort(bands_.begin(), bands_.end(),
              [](const BandSpec& a, const BandSpec& b) {
                  return a.start_frequency_hz < b.start_frequency_hz;
              });

    double prev_end = -1.0;
    std::string prev_name;
    for (const auto& band : bands_) {
        if (band.channel_count < 1)
            throw Error(ErrorKind::InvalidArgument,
                        "band " + band.name + ": channel_count must be >= 1");
        const double slots = band.bandwidth_hz / grid_spacing_hz_;
        if (std::abs(slots - band.channel_count) > 1.0 + 1e-9)
            throw Error(ErrorKind::PlanInconsistent,
                        "band " + band.name +
                            ": channel_count disagrees with bandwidth/grid by more than one slot");
        if (std::abs(band.launch_power_fw_dbm - band.launch_power_bw_dbm) >= 1.0)
            throw Error(ErrorKind::InvalidArgument,
                        "band " + band.name + ": FW/BW launch powers differ by >= 1 dB");
        const double occupied_end =
            band.start_frequency_hz + band.channel_count * grid_spacing_hz_;
        if (band.start_frequency_hz < prev_end - 1e-3)
            throw Error(ErrorKind::PlanOverlap,
                        "bands " + prev_name + " and " + band.name + " overlap");
        prev_end = occupied_end;
        prev_name = band.name;
    }

    std::size_t total = 0;
    for (const auto& band : bands_) total += static_cast<std::size_t>(band.channel_count);
    channels_.reserve(total);
    int id = 0;
    for (int b = 0; b < static_cast<int>(bands_.size()); ++b) {
        const auto& band = bands_[static_cast<std::size_t>(b)];
        for (int i = 0; i < band.channel_count; ++i) {
            Channel ch;
            ch.id = id++;
            ch.band_index = b;
            ch.index_in_band = i;
            ch.center_frequency_hz = band.start_frequency_hz + (i + 0.5) * grid_spacing_hz_;
            channels_.push_back(ch);
        }
    }

    std::set<int> seen;
    for (int ex : excluded_) {
        if (ex < 0 || ex >= static_cast<int>(channels_.size()))
            throw Error(ErrorKind::NotFound,
                        "excluded channel " + std::to_string(ex) + " not in plan");
        if (!seen.insert(ex).second)
            throw Error(ErrorKind::InvalidArgument,
                        "excluded channel " + std::to_string(ex) + " listed twice");
    }
    std::sort(excluded_.begin(), excluded_.end());
}

const Channel& ChannelPlan::channel(int channel_id) const {
    if (channel_id < 0 || channel_id >= static_cast<int>(channels_.size()))
        throw Error(ErrorKind::NotFound, "channel " + std::to_string(channel_id));
    return channels_[static_cast<std::size_t>(channel_id)];
}

double ChannelPlan::channel_frequency(int channel_id) const {
    return channel(channel_id).center_frequency_hz;
}

bool ChannelPlan::is_excluded(int channel_id) const {
    return std::binary_search(excluded_.begin(), excluded_.end(), channel_id);
}

std::array<int, 3> ChannelPlan::sliding_test_band(int cut_id) const {
    const Channel& cut = channel(cut_id);
    const auto& band = bands_[static_cast<std::size_t>(cut.band_index)];
    const int band_first = cut.id - cut.index_in_band;
    const int band_last = band_first + band.channel_count - 1;
    int lo = cut_id - 1;
    if (lo < band_first) lo = band_first;
    if (lo + 2 > band_last) lo = std::max(band_first, band_last - 2);
    // Bands with fewer than 3 channels repeat the nearest neighbours.
    std::array<int, 3> out{};
    for (int k = 0; k < 3; ++k) out[static_cast<std::size_t>(k)] = std::min(lo + k, band_last);
    return out;
}

double ChannelPlan::total_bandwidth_hz() const {
    double sum = 0.0;
    for (const auto& band : bands_) sum += band.bandwidth_hz;
    return sum;
}

ChannelPlan build_plan(std::vector<BandSpec> bands, double grid_spacing_hz,
                       double symbol_rate_baud, double guard_band_hz, double rolloff,
                       std::vector<int> excluded_channels) {
    return ChannelPlan(std::move(bands), grid_spacing_hz, symbol_rate_baud, guard_band_hz,
                       rolloff, std::move(excluded_channels));
}

} // namespace hcfsim
