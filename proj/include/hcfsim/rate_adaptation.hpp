#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "hcfsim/link_budget.hpp"

namespace hcfsim {

/// Threshold abstraction of adaptive-rate FEC with punctured code rates on a
/// fixed grid: rate R is decodable iff NGMI >= R + ngmi_gap.
struct FecModel {
    double rate_granularity = 0.01;
    double min_rate = 0.50;
    double max_rate = 0.95;
    double ngmi_gap = 0.02;
};

/// Largest grid rate decodable at this NGMI; 0 when even min_rate fails.
double max_code_rate(double ngmi_value, const FecModel& fec);

/// 2 polarizations x symbol rate x bits, after pilot overhead.
double gmi_data_rate_bps(double symbol_rate_baud, double gmi_2d_bits, double pilot_overhead);
double decoded_data_rate_bps(double symbol_rate_baud, int bits, double code_rate,
                             double pilot_overhead);

struct ChannelResult {
    int channel_id = 0;
    Direction direction = Direction::FW;
    std::string band;
    double frequency_hz = 0.0;
    double snr_total_db = 0.0;
    int format_cardinality = 0;
    double code_rate = 0.0;
    double gmi_rate_bps = 0.0;
    double decoded_rate_bps = 0.0;
    bool excluded = false;
};

enum class Grouping { Band, Direction, Total };

struct ThroughputRow {
    std::string key; // band name, direction name, or "total"
    double gmi_bps = 0.0;
    double decoded_bps = 0.0;
    int channels = 0;
};

/// Deterministic fold over non-excluded channels. Row order: bands by name
/// order of first appearance, directions FW then BW, single total row.
std::vector<ThroughputRow> aggregate(std::span<const ChannelResult> results, Grouping grouping);

} // namespace hcfsim
