#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lhc {

inline constexpr std::string_view kEngineName = "lhc";
inline constexpr std::string_view kEngineVersion = "0.1.0";

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_real(double value);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

/// Provenance line carried by every artifact: engine version, scenario hash
/// and seed. CSV files start with it prefixed by '#'.
std::string artifact_header(std::string_view scenario_hash, std::uint64_t seed);

}  // namespace lhc
