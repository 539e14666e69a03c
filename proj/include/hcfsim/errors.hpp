#pragma once

#include <stdexcept>
#include <string>

namespace hcfsim {

enum class ErrorKind {
    PlanOverlap,
    PlanInconsistent,
    NotFound,
    OutOfRange,
    InvalidArgument,
    BadLabeling,
    BadCardinality,
    ExcludedChannel,
    ConfigError,
    CalibrationInfeasible,
    EqualizerDiverged,
    MeasurementFailed,
    IoError,
};

const char* to_string(ErrorKind kind);

/// All library errors carry a kind so callers can dispatch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::PlanOverlap: return "PlanOverlap";
        case ErrorKind::PlanInconsistent: return "PlanInconsistent";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::BadLabeling: return "BadLabeling";
        case ErrorKind::BadCardinality: return "BadCardinality";
        case ErrorKind::ExcludedChannel: return "ExcludedChannel";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::CalibrationInfeasible: return "CalibrationInfeasible";
        case ErrorKind::EqualizerDiverged: return "EqualizerDiverged";
        case ErrorKind::MeasurementFailed: return "MeasurementFailed";
        case ErrorKind::IoError: return "IoError";
    }
    return "Error";
}

} // namespace hcfsim
