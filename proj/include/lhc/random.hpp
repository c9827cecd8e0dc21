#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace lhc {

/// Identifies an independent family of draws within one Monte Carlo path.
/// The rating chain and the Cox process never share a stream with any
/// Lévy driver, which is what makes their jump times independent of the
/// market noise.
enum class StreamTag : std::uint64_t {
  Chain = 1,
  Cox = 2,
  Auxiliary = 3,
  LevyDriver = 16,  // + driver index
};

inline constexpr std::uint64_t levy_stream(int driver) {
  return static_cast<std::uint64_t>(StreamTag::LevyDriver) + static_cast<std::uint64_t>(driver);
}

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ keyed by (seed, path index, stream tag).
///
/// Every path derives its own streams from its index alone, so a path's
/// draws do not depend on how paths are distributed over worker threads.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
    std::uint64_t sm = seed;
    std::uint64_t key = splitmix64(sm);
    sm = key ^ (path * 0xD1B54A32D192ED03ULL);
    key = splitmix64(sm);
    sm = key ^ (stream * 0xABC98388FB8FAC03ULL);
    for (auto& word : s_) word = splitmix64(sm);
  }

  RandomStream(std::uint64_t seed, std::uint64_t path, StreamTag tag)
      : RandomStream(seed, path, static_cast<std::uint64_t>(tag)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  unsigned poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<unsigned>(mean)(*this);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lhc
