#pragma once

#include <stdexcept>
#include <string>

namespace v2x {

inline constexpr const char* kVersion = "0.1.0";

/// Bad configuration file or invalid parameter combination (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Required checkpoint or input file missing (CLI exit code 3).
struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value reached a place it must never reach (CLI exit code 4).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Structural contract violated (wrong dimensions, malformed graph input).
struct StructuralError : std::invalid_argument {
    explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace v2x
