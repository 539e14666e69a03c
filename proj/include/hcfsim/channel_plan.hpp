#pragma once

#include <array>
#include <string>
#include <vector>

namespace hcfsim {

/// One amplifier band (O/E/S/C/L) of the WDM plan. Launch powers are band
/// totals in dBm, one per propagation direction.
struct BandSpec {
    std::string name;
    double start_frequency_hz = 0.0; // low-frequency (long-wavelength) band edge
    double bandwidth_hz = 0.0;
    int channel_count = 0;
    double launch_power_fw_dbm = 0.0;
    double launch_power_bw_dbm = 0.0;
};

struct Channel {
    int id = 0;            // global, ascending in frequency
    int band_index = 0;
    int index_in_band = 0;
    double center_frequency_hz = 0.0;
};

class ChannelPlan {
public:
    ChannelPlan() = default;
    ChannelPlan(std::vector<BandSpec> bands, double grid_spacing_hz, double symbol_rate_baud,
                double guard_band_hz, double rolloff, std::vector<int> excluded_channels = {});

    const std::vector<BandSpec>& bands() const { return bands_; }
    const std::vector<Channel>& channels() const { return channels_; }
    const std::vector<int>& excluded_channels() const { return excluded_; }

    std::size_t channel_count() const { return channels_.size(); }
    const Channel& channel(int channel_id) const;      // NotFound on bad id
    double channel_frequency(int channel_id) const;
    bool is_excluded(int channel_id) const;

    /// The 3-channel sliding test band {cut-1, cut, cut+1}, clipped to stay
    /// inside the cut channel's band (amplifiers are per-band).
    std::array<int, 3> sliding_test_band(int cut_id) const;

    double grid_spacing_hz() const { return grid_spacing_hz_; }
    double symbol_rate_baud() const { return symbol_rate_baud_; }
    double guard_band_hz() const { return guard_band_hz_; }
    double rolloff() const { return rolloff_; }
    double total_bandwidth_hz() const;

private:
    std::vector<BandSpec> bands_;
    std::vector<Channel> channels_;
    std::vector<int> excluded_;
    double grid_spacing_hz_ = 0.0;
    double symbol_rate_baud_ = 0.0;
    double guard_band_hz_ = 0.0;
    double rolloff_ = 0.0;
};

ChannelPlan build_plan(std::vector<BandSpec> bands, double grid_spacing_hz,
                       double symbol_rate_baud, double guard_band_hz = 0.0,
                       double rolloff = 0.0, std::vector<int> excluded_channels = {});

} // namespace hcfsim
