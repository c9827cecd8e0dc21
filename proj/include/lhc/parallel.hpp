#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lhc {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Evaluates fn(path) for path = 0 .. n-1 on `threads` workers, each owning
/// a contiguous block, and returns the results in path order. The first
/// exception of the lowest failing path is rethrown.
template <class Fn>
auto map_paths(std::uint64_t n, int threads, Fn fn) -> std::vector<decltype(fn(std::uint64_t{}))> {
  using Result = decltype(fn(std::uint64_t{}));
  std::vector<Result> out(n);
  const auto workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(resolve_threads(threads), n));
  if (workers == 1) {
    for (std::uint64_t p = 0; p < n; ++p) out[p] = fn(p);
    return out;
  }
  std::exception_ptr failure;
  std::uint64_t failed_path = n;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = n * w / workers;
    const std::uint64_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      std::uint64_t p = begin;
      try {
        for (; p < end; ++p) out[p] = fn(p);
      } catch (...) {
        std::lock_guard lock(guard);
        if (p < failed_path) {
          failed_path = p;
          failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace lhc
