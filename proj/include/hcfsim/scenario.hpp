#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcfsim/channel_plan.hpp"
#include "hcfsim/fiber_model.hpp"
#include "hcfsim/link_budget.hpp"
#include "hcfsim/rate_adaptation.hpp"

namespace hcfsim {

enum class Mode { Bidi, Unidi };

struct GmiSettings {
    std::int64_t samples = 100000;
    double knot_min_db = 0.0;
    double knot_max_db = 30.0;
    double knot_step_db = 1.0;
};

struct CalibrationSpec {
    std::map<std::string, double> band_gmi_tbps; // bidirectional band totals
    std::optional<double> decoded_total_tbps;    // grand bidirectional total
    int passes = 2;
};

/// Fully resolved run configuration: plan, fibre data, link budget knobs,
/// FEC model, constellation files and seeds.
struct Scenario {
    ChannelPlan plan;
    FiberProfile fiber;
    LinkConfig link;
    FecModel fec;
    double pilot_overhead = 0.04;
    std::map<int, std::filesystem::path> constellation_files; // cardinality -> file
    GmiSettings gmi;
    std::optional<CalibrationSpec> calibration;
    std::uint64_t seed = 1;
    Mode mode = Mode::Bidi;
    std::vector<std::string> warnings; // non-fatal validation notes
};

/// Parse + validate. Throws ConfigError whose message lists every problem
/// found (field paths included), not just the first.
Scenario load_scenario(const std::filesystem::path& path);

DirectionalScenario directional(const Scenario& sc, Direction direction);

} // namespace hcfsim
