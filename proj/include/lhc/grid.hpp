#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lhc/error.hpp"

namespace lhc {

/// Uniform partition 0 = t_0 < ... < t_n = T* shared by calendar time and
/// maturity.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ModelError("grid horizon must be positive");
    if (steps < 1) throw ModelError("grid needs at least one step");
  }

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  int nodes() const { return steps_ + 1; }
  double dt() const { return horizon_ / steps_; }
  double time(int k) const { return k == steps_ ? horizon_ : k * dt(); }

  /// Index of the last node not after `t` (clamped to the grid).
  int node_at_or_before(double t) const {
    if (t <= 0.0) return 0;
    const int k = static_cast<int>(std::floor(t / dt() * (1.0 + 1e-14)));
    return k > steps_ ? steps_ : k;
  }

  std::vector<double> times() const {
    std::vector<double> out(nodes());
    for (int k = 0; k < nodes(); ++k) out[k] = time(k);
    return out;
  }

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_ = 1.0;
  int steps_ = 1;
};

/// Trapezoid rule over nodes [from, to] of uniformly spaced samples. Returns
/// the negated integral when to < from.
inline double trapezoid(std::span<const double> values, int from, int to, double dx) {
  if (from == to) return 0.0;
  if (to < from) return -trapezoid(values, to, from, dx);
  double sum = 0.5 * (values[from] + values[to]);
  for (int k = from + 1; k < to; ++k) sum += values[k];
  return sum * dx;
}

/// Running trapezoid integrals from node `from`: out[k] = int_{from}^{k} for
/// k >= from. Entries before `from` are left at zero.
inline void cumulative_trapezoid(std::span<const double> values, int from, double dx, std::span<double> out) {
  const int n = static_cast<int>(values.size());
  for (int k = 0; k <= from && k < n; ++k) out[k] = 0.0;
  for (int k = from + 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * dx * (values[k - 1] + values[k]);
}

}  // namespace lhc
