#include "core/log.hpp"

#include <atomic>

namespace ds {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Warn)};
}

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

static void emit(const char* tag, const std::string& msg) {
  std::fprintf(stderr, "[dsynth %s] %s\n", tag, msg.c_str());
}

void log_warn(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Warn)) emit("warn", msg);
}

void log_info(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Info)) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Debug)) emit("debug", msg);
}

} // namespace ds
