#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace aad {

// Error taxonomy. Shape/parameter problems are invalid_argument so callers
// can distinguish caller bugs from runtime failures (IO, numerics).
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level read once from AAD_LOG_LEVEL (error|info|debug), default info.
LogLevel log_level();
void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace aad
