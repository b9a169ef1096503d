#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace navfly::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

/// Level comes from NAVFLY_LOG (debug|info|warn|error|off), default warn.
inline Level threshold() {
  static const Level lvl = [] {
    const char* env = std::getenv("NAVFLY_LOG");
    if (env == nullptr) return Level::kWarn;
    if (std::strcmp(env, "debug") == 0) return Level::kDebug;
    if (std::strcmp(env, "info") == 0) return Level::kInfo;
    if (std::strcmp(env, "warn") == 0) return Level::kWarn;
    if (std::strcmp(env, "error") == 0) return Level::kError;
    if (std::strcmp(env, "off") == 0) return Level::kOff;
    return Level::kWarn;
  }();
  return lvl;
}

template <typename... Args>
void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
  if (lvl < threshold()) return;
  std::fprintf(stderr, "[navfly %s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

template <typename... Args>
void debug(const char* fmt, Args... args) { emit(Level::kDebug, "debug", fmt, args...); }
template <typename... Args>
void info(const char* fmt, Args... args) { emit(Level::kInfo, "info", fmt, args...); }
template <typename... Args>
void warn(const char* fmt, Args... args) { emit(Level::kWarn, "warn", fmt, args...); }
template <typename... Args>
void error(const char* fmt, Args... args) { emit(Level::kError, "error", fmt, args...); }

}  // namespace navfly::log
