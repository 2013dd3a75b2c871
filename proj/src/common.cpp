#include "aad/common.hpp"

#include <cstdlib>
#include <cstring>

namespace aad {

static LogLevel parse_level() {
    const char* v = std::getenv("AAD_LOG_LEVEL");
    if (!v) return LogLevel::Info;
    if (std::strcmp(v, "error") == 0) return LogLevel::Error;
    if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
}

LogLevel log_level() {
    static LogLevel lvl = parse_level();
    return lvl;
}

static void emit(const char* tag, const std::string& msg) {
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

void log_error(const std::string& msg) { emit("error", msg); }

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) emit("debug", msg);
}

}  // namespace aad
