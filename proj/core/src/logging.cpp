#include "galoc/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace galoc {

namespace {

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("galoc");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *instance;
}

}  // namespace

std::optional<LogLevel> log_level_from_string(std::string_view name) {
  if (name == "error") return LogLevel::Error;
  if (name == "warn") return LogLevel::Warn;
  if (name == "info") return LogLevel::Info;
  if (name == "debug") return LogLevel::Debug;
  return std::nullopt;
}

void set_log_level(LogLevel level) {
  switch (level) {
    case LogLevel::Error: logger().set_level(spdlog::level::err); break;
    case LogLevel::Warn: logger().set_level(spdlog::level::warn); break;
    case LogLevel::Info: logger().set_level(spdlog::level::info); break;
    case LogLevel::Debug: logger().set_level(spdlog::level::debug); break;
  }
}

void init_logging() {
  const char* env = std::getenv("A2VISR_LOG_LEVEL");
  if (env == nullptr) {
    set_log_level(LogLevel::Warn);
    return;
  }
  if (const auto level = log_level_from_string(env)) {
    set_log_level(*level);
  } else {
    set_log_level(LogLevel::Warn);
    log_warn(std::string("ignoring unknown A2VISR_LOG_LEVEL '") + env + "'");
  }
}

void log_error(std::string_view message) { logger().error("{}", message); }
void log_warn(std::string_view message) { logger().warn("{}", message); }
void log_info(std::string_view message) { logger().info("{}", message); }
void log_debug(std::string_view message) { logger().debug("{}", message); }

}  // namespace galoc
