#pragma once

#include <stdexcept>
#include <string>

namespace adapsne {

/// Bad or contradictory run configuration (unknown key, malformed value,
/// out-of-range parameter supplied by the user). CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid input data or a violated operation precondition. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during optimization (NaN objective, diverged embedding).
/// CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace adapsne
