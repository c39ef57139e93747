#pragma once

#include <cstdio>
#include <string>

namespace ds {

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace ds
