#include "hiforead/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hiforead::log {

namespace {

Level parse_env() {
    const char* env = std::getenv("HIFOREAD_LOG");
    if (env == nullptr) return Level::warn;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "warn") == 0) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "off") == 0) return Level::off;
    return Level::warn;
}

const char* tag(Level lvl) {
    switch (lvl) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        default: return "?";
    }
}

} // namespace

Level level() {
    static const Level lvl = parse_env();
    return lvl;
}

bool enabled(Level lvl) {
    return static_cast<int>(lvl) >= static_cast<int>(level());
}

void write(Level lvl, const std::string& message) {
    if (!enabled(lvl)) return;
    std::fprintf(stderr, "[hiforead] %s: %s\n", tag(lvl), message.c_str());
}

} // namespace hiforead::log
