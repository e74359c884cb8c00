#pragma once

#include <stdexcept>
#include <string>

namespace nuqd {

/// Invalid configuration or parameters: rejected before any computation runs.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Failure during a run (step-size violation, t_max exceeded, state underflow).
class RunError : public std::runtime_error {
public:
    explicit RunError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A run that hit its time budget before the measured event occurred.
class TimeBudgetExceeded : public RunError {
public:
    TimeBudgetExceeded(const std::string& msg, double final_value)
        : RunError(msg), final_value(final_value) {}
    double final_value; // last observable value before giving up
};

/// Filesystem failure while writing or reading artifacts.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nuqd
