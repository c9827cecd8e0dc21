#include "lhc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace lhc {

std::string format_real(double value) {
  if (value == 0.0) return "0";  // also folds -0
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

std::string artifact_header(std::string_view scenario_hash, std::uint64_t seed) {
  std::string out;
  out += "engine=";
  out += kEngineName;
  out += ' ';
  out += kEngineVersion;
  out += " scenario_hash=";
  out += scenario_hash;
  out += " seed=";
  out += std::to_string(seed);
  return out;
}

}  // namespace lhc
