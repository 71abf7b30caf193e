#pragma once

#include <stdexcept>
#include <string>

namespace plume {

/// Invalid user-supplied configuration (scenario file, CLI flags, parameter ranges).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Inputs that violate an operation's preconditions (ranges, dimensions, coverage).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Optimizer diverged or produced a non-finite loss.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Metric undefined for the given sample set (e.g. zero variance in the truths).
struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace plume
