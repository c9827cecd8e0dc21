#pragma once

#include <spdlog/spdlog.h>

namespace lhc::log {

/// Reads the LHC_LOG environment variable (trace, debug, info, warn, error,
/// off) and applies it to the default logger. Defaults to warn.
void configure_from_env();

}  // namespace lhc::log
