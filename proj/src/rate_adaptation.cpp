#include "hcfsim/rate_adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hcfsim/errors.hpp"

namespace hcfsim {

double max_code_rate(double ngmi_value, const FecModel& fec) {
    if (ngmi_value < 0.0 || ngmi_value > 1.0)
        throw Error(ErrorKind::InvalidArgument, "ngmi must be in [0, 1]");
    if (fec.min_rate <= 0.0 || fec.min_rate > fec.max_rate || fec.max_rate >= 1.0 ||
        fec.rate_granularity <= 0.0 || fec.ngmi_gap < 0.0)
        throw Error(ErrorKind::InvalidArgument, "bad FEC model parameters");
    const double ceiling = std::min(ngmi_value - fec.ngmi_gap, fec.max_rate);
    if (ceiling < fec.min_rate - 1e-12) return 0.0;
    const double steps = std::floor((ceiling - fec.min_rate) / fec.rate_granularity + 1e-9);
    return fec.min_rate + steps * fec.rate_granularity;
}

double gmi_data_rate_bps(double symbol_rate_baud, double gmi_2d_bits, double pilot_overhead) {
    if (pilot_overhead < 0.0 || pilot_overhead >= 1.0)
        throw Error(ErrorKind::InvalidArgument, "pilot overhead must be in [0, 1)");
    return 2.0 * symbol_rate_baud * gmi_2d_bits * (1.0 - pilot_overhead);
}

double decoded_data_rate_bps(double symbol_rate_baud, int bits, double code_rate,
                             double pilot_overhead) {
    if (pilot_overhead < 0.0 || pilot_overhead >= 1.0)
        throw Error(ErrorKind::InvalidArgument, "pilot overhead must be in [0, 1)");
    return 2.0 * symbol_rate_baud * bits * code_rate * (1.0 - pilot_overhead);
}

std::vector<ThroughputRow> aggregate(std::span<const ChannelResult> results, Grouping grouping) {
    std::set<std::pair<int, int>> seen;
    for (const auto& r : results) {
        if (!seen.insert({r.channel_id, static_cast<int>(r.direction)}).second)
            throw Error(ErrorKind::ConfigError,
                        "duplicate (channel, direction) in results; mixed scenarios?");
    }
    std::vector<ThroughputRow> rows;
    auto row_for = [&rows](const std::string& key) -> ThroughputRow& {
        for (auto& r : rows)
            if (r.key == key) return r;
        rows.push_back(ThroughputRow{key, 0.0, 0.0, 0});
        return rows.back();
    };
    for (const auto& r : results) {
        std::string key;
        switch (grouping) {
            case Grouping::Band: key = r.band; break;
            case Grouping::Direction: key = to_string(r.direction); break;
            case Grouping::Total: key = "total"; break;
        }
        auto& row = row_for(key);
        if (!r.excluded) {
            row.gmi_bps += r.gmi_rate_bps;
            row.decoded_bps += r.decoded_rate_bps;
            ++row.channels;
        }
    }
    return rows;
}

} // namespace hcfsim
