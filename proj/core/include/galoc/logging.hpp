#pragma once

#include <optional>
#include <string_view>

namespace galoc {

enum class LogLevel { Error, Warn, Info, Debug };

std::optional<LogLevel> log_level_from_string(std::string_view name);

/// Reads A2VISR_LOG_LEVEL (error, warn, info, debug; default warn). An
/// unrecognized value keeps the default and logs a warning.
void init_logging();
void set_log_level(LogLevel level);

void log_error(std::string_view message);
void log_warn(std::string_view message);
void log_info(std::string_view message);
void log_debug(std::string_view message);

}  // namespace galoc
