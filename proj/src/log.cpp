#include "lhc/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string>

namespace lhc::log {

void configure_from_env() {
  if (spdlog::get("lhc") == nullptr) spdlog::set_default_logger(spdlog::stderr_logger_mt("lhc"));
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("LHC_LOG"); env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
  }
  spdlog::set_level(level);
}

}  // namespace lhc::log
