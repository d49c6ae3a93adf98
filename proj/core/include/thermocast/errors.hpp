#pragma once

#include <stdexcept>
#include <string>

namespace thermocast {

// Bad configuration: mismatched shapes/specs, malformed files, missing
// checkpoints. Maps to process exit code 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or insufficient data: empty catalogs, too few valid pixels,
// non-finite values produced by an operator. Maps to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse by the caller (backward on a non-scalar, wrong tensor rank).
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace thermocast
