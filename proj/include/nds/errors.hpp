#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nds {

/// Raised when a trajectory component exceeds the divergence bound.
/// Carries the step index at which the bound was first exceeded.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::int64_t step, double magnitude)
        : std::runtime_error("trajectory diverged at step " + std::to_string(step) +
                             " (|component| = " + std::to_string(magnitude) + ")"),
          step_(step) {}

    [[nodiscard]] std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

/// Configuration / domain error. Carries the offending key and, for file
/// input, the 1-based line number.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, int line, const std::string& what)
        : std::runtime_error(line > 0
                                 ? "line " + std::to_string(line) + ": " + what
                                 : what),
          key_(std::move(key)), line_(line) {}

    [[nodiscard]] const std::string& key() const { return key_; }
    [[nodiscard]] int line() const { return line_; }

private:
    std::string key_;
    int line_;
};

/// Raised by the reconstruction experiment when the forcing run never
/// reaches a stabilized verdict.
class ReconstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nds
