#pragma once

#include <string>

namespace hiforead::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Active level, read once from HIFOREAD_LOG (debug|info|warn|error|off).
/// Defaults to warn.
Level level();

bool enabled(Level lvl);

/// Writes "[hiforead] <tag>: <message>\n" to stderr when lvl is enabled.
void write(Level lvl, const std::string& message);

inline void debug(const std::string& m) { write(Level::debug, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void error(const std::string& m) { write(Level::error, m); }

} // namespace hiforead::log
