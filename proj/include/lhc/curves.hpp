#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lhc/grid.hpp"

namespace lhc {

/// sigma(t, theta) in R^d on the grid, zero for t > theta.
class VolatilitySurface {
 public:
  VolatilitySurface() = default;
  VolatilitySurface(const TimeGrid& grid, int dim);

  /// sigma(t, theta) = s for t <= theta.
  static VolatilitySurface constant(const TimeGrid& grid, const Eigen::VectorXd& s);
  /// sigma(t, theta) = s exp(-decay (theta - t)) for t <= theta.
  static VolatilitySurface exponential(const TimeGrid& grid, const Eigen::VectorXd& s, double decay);
  static VolatilitySurface from_function(const TimeGrid& grid, int dim,
                                         const std::function<Eigen::VectorXd(double t, double theta)>& fn);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }

  std::span<const double> at(int t, int theta) const {
    return {data_.data() + offset(t, theta), static_cast<std::size_t>(dim_)};
  }
  std::span<double> at(int t, int theta) { return {data_.data() + offset(t, theta), static_cast<std::size_t>(dim_)}; }

  /// Largest Euclidean norm over the grid; finite by construction.
  double max_norm() const;

  /// Returns a copy scaled by `factor`.
  VolatilitySurface scaled(double factor) const;

  std::optional<int> owner_rating;

 private:
  std::size_t offset(int t, int theta) const {
    return (static_cast<std::size_t>(t) * grid_.nodes() + theta) * dim_;
  }
  TimeGrid grid_;
  int dim_ = 0;
  std::vector<double> data_;
};

/// Sigma(t, theta) = int_t^theta sigma(t, v) dv by the trapezoid rule.
Eigen::VectorXd integrate_sigma(const VolatilitySurface& vol, int t, int theta);

enum class CurveKind { RiskFree, PreDefault };

/// Forward rates f(t, theta) (or pre-default g_i) on the grid. Row t holds
/// the curve observed at t_t with the flat extension f(t, theta) =
/// f(theta, theta) for theta < t, so a single row carries both the live
/// curve and the realized short-rate history.
class ForwardSurface {
 public:
  ForwardSurface() = default;
  /// Every row initialized to `initial_curve` (a curve that never moves).
  ForwardSurface(const TimeGrid& grid, std::span<const double> initial_curve, CurveKind kind = CurveKind::RiskFree,
                 std::optional<int> rating = std::nullopt);

  static ForwardSurface flat(const TimeGrid& grid, double rate, CurveKind kind = CurveKind::RiskFree,
                             std::optional<int> rating = std::nullopt);

  const TimeGrid& grid() const { return grid_; }
  CurveKind kind() const { return kind_; }
  std::optional<int> rating() const { return rating_; }

  std::span<const double> row(int t) const {
    return {rates_.data() + static_cast<std::size_t>(t) * grid_.nodes(), static_cast<std::size_t>(grid_.nodes())};
  }
  std::span<double> row(int t) {
    return {rates_.data() + static_cast<std::size_t>(t) * grid_.nodes(), static_cast<std::size_t>(grid_.nodes())};
  }
  double rate(int t, int theta) const { return row(t)[theta]; }
  double short_rate(int t) const { return rate(t, t); }
  double max_abs() const;

 private:
  TimeGrid grid_;
  CurveKind kind_ = CurveKind::RiskFree;
  std::optional<int> rating_;
  std::vector<double> rates_;
};

/// alpha(t, theta) on the grid, zero for t > theta.
class DriftSurface {
 public:
  DriftSurface() = default;
  explicit DriftSurface(const TimeGrid& grid, std::optional<int> rating = std::nullopt);

  const TimeGrid& grid() const { return grid_; }
  double at(int t, int theta) const { return alpha_[index(t, theta)]; }
  double& at(int t, int theta) { return alpha_[index(t, theta)]; }
  std::span<const double> row(int t) const {
    return {alpha_.data() + index(t, 0), static_cast<std::size_t>(grid_.nodes())};
  }
  std::span<double> row(int t) { return {alpha_.data() + index(t, 0), static_cast<std::size_t>(grid_.nodes())}; }
  double max_abs() const;

  std::optional<int> owner_rating;

 private:
  std::size_t index(int t, int theta) const { return static_cast<std::size_t>(t) * grid_.nodes() + theta; }
  TimeGrid grid_;
  std::vector<double> alpha_;
};

// Row-level curve functions: `curve` is row t of a forward surface.

/// exp(-int_t^theta f(t, s) ds) for t <= theta, exp(int_theta^t r) otherwise.
double curve_bond_price(std::span<const double> curve, int t, int theta, double dx);
/// exp(-int_0^theta f(t, u) du).
double curve_discounted_bond(std::span<const double> curve, int theta, double dx);
/// B_t = exp(int_0^t r(u) du).
double curve_bank_account(std::span<const double> curve, int t, double dx);

double bond_price(const ForwardSurface& surface, int t, int theta);
double discounted_bond(const ForwardSurface& surface, int t, int theta);
double bank_account(const ForwardSurface& surface, int t);
/// Bank account at an arbitrary time, with the short rate interpolated
/// linearly between grid nodes; agrees with bank_account at nodes. Needs
/// rows up to the node following `time`.
double bank_account_at(const ForwardSurface& surface, double time);

/// One Euler step f(t+dt, theta) = f(t, theta) + alpha dt + <sigma, dZ> for
/// theta >= t+dt; row t+1 is written from row t, entries before t+dt keep
/// their frozen values.
void evolve_step(ForwardSurface& surface, int t, std::span<const double> drift_row, const VolatilitySurface& vol,
                 std::span<const double> dz, double dt);
ForwardSurface evolve_step(ForwardSurface surface, int t, const DriftSurface& drift, const VolatilitySurface& vol,
                           std::span<const double> dz, double dt);

/// Number of (rating, theta) cells at row t where g_{K-1} > ... > g_1 > f
/// fails. Violations are logged as warnings.
int count_rating_order_violations(std::span<const double> riskfree, const std::vector<std::span<const double>>& ratings,
                                  int t);

/// CSV with columns t, theta, value for t <= theta.
void write_surface_csv(std::ostream& out, const ForwardSurface& surface);
void write_surface_csv(std::ostream& out, const DriftSurface& surface);

}  // namespace lhc
