#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace zdc {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("ZDC_LOG");
        if (!env) return LogLevel::quiet;
        const std::string s(env);
        if (s == "debug" || s == "2") return LogLevel::debug;
        if (s == "info" || s == "1") return LogLevel::info;
        return LogLevel::quiet;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "[zdc] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "[zdc] " << msg << "\n";
}

} // namespace zdc
