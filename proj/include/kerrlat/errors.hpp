#pragma once
#include <stdexcept>
#include <string>

namespace kerrlat {

// Invalid configuration / CLI input. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure during integration (NaN/Inf, covariance positivity loss,
// integrator blow-up). Carries enough context to locate the failing trajectory.
// CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kerrlat
