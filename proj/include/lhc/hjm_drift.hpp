#pragma once

#include <span>
#include <vector>

#include "lhc/curves.hpp"
#include "lhc/levy.hpp"
#include "lhc/migration.hpp"
#include "lhc/recovery.hpp"

namespace lhc {

/// J(Sigma(t, theta)) and <grad J(Sigma(t, theta)), sigma(t, theta)> for a
/// deterministic volatility, tabulated for t <= theta.
class LevyDriftTable {
 public:
  LevyDriftTable() = default;
  LevyDriftTable(const LevyModel& model, const VolatilitySurface& vol);

  const TimeGrid& grid() const { return grid_; }
  double exponent(int t, int theta) const { return exponent_[index(t, theta)]; }
  double drift(int t, int theta) const { return drift_[index(t, theta)]; }
  std::span<const double> exponent_row(int t) const { return {exponent_.data() + index(t, 0), width()}; }
  std::span<const double> drift_row(int t) const { return {drift_.data() + index(t, 0), width()}; }

 private:
  std::size_t width() const { return static_cast<std::size_t>(grid_.nodes()); }
  std::size_t index(int t, int theta) const { return static_cast<std::size_t>(t) * width() + theta; }

  TimeGrid grid_;
  std::vector<double> exponent_;
  std::vector<double> drift_;
};

/// alpha(t, theta) = <grad J(Sigma(t, theta)), sigma(t, theta)>.
DriftSurface riskfree_drift(const LevyModel& model, const VolatilitySurface& vol);

/// Row t of the curves feeding the rating-dependent part of a drift
/// condition for rating i.
struct SchemeRow {
  RecoveryKind scheme = RecoveryKind::MarketValue;
  int rating = 0;
  int t = 0;
  double dx = 0.0;
  std::span<const double> riskfree;              // f(t, .)
  std::vector<std::span<const double>> ratings;  // g_j(t, .) for every rating j
  std::span<const double> intensities;           // lambda_{i, .}(t), default column last if present
  double delta = 0.0;                            // delta_i(t)
};

/// Adds the derivative-form migration and recovery terms to `alpha_row` for
/// theta >= t:
///   sum_{j != i} lambda_ij (g_i - g_j) exp(int_t^theta (g_i - g_j))
///   Treasury: + delta lambda_iK (g_i - f) exp(int_t^theta (g_i - f))
///   par:      + delta lambda_iK g_i exp(int_t^theta g_i)
void add_scheme_drift(const SchemeRow& row, std::span<double> alpha_row);

/// Adds the integral-form counterparts to `rhs_row` for theta >= t:
///   sum_{j != i} lambda_ij (D_j / D_i - 1)
///   Treasury: + delta lambda_iK (B / D_i - 1)
///   par:      + delta lambda_iK (1 / D_i - 1)
void add_scheme_integral(const SchemeRow& row, std::span<double> rhs_row);

/// Deterministic inputs of the drift condition for one rating.
struct DriftInputs {
  RecoveryKind scheme = RecoveryKind::MarketValue;
  int rating = 0;
  const LevyModel* model = nullptr;
  const VolatilitySurface* vol = nullptr;
  const ForwardSurface* riskfree = nullptr;
  std::span<const ForwardSurface> ratings;
  const IntensityMatrixProcess* generator = nullptr;
  std::span<const double> delta;  // delta_i at grid nodes
};

/// Checks that the inputs are complete and mutually consistent.
void validate_drift_inputs(const DriftInputs& inputs);

/// Row t of the inputs; `intensity_buffer` backs the returned intensities.
SchemeRow scheme_row(const DriftInputs& inputs, int t, std::vector<double>& intensity_buffer);

/// Drift alpha_i solving the derivative-form condition of `inputs.scheme`.
DriftSurface defaultable_drift(const DriftInputs& inputs);

/// Integral-form residual int_t^theta alpha_i - J_i(Sigma_i) - scheme term,
/// zero on the diagonal and undefined (stored as 0) below it.
struct DriftConditionResidual {
  RecoveryKind scheme = RecoveryKind::MarketValue;
  int rating = 0;
  TimeGrid grid;
  std::vector<double> residual;  // [t][theta]

  double at(int t, int theta) const { return residual[static_cast<std::size_t>(t) * grid.nodes() + theta]; }
  double max_abs() const;
  double mean_abs() const;  // over t <= theta
};

DriftConditionResidual condition_residual(const DriftInputs& inputs, const DriftSurface& alpha);

/// Row version: residual(theta) for theta >= t given row t of alpha and of the
/// tabulated Lévy part.
void condition_residual_row(const LevyDriftTable& levy, const SchemeRow& row, std::span<const double> alpha_row,
                            std::span<double> out);

/// Trapezoid budget 1e-10 + 2 M^2 dtheta^2 for a residual whose integrands
/// are bounded by `scale`.
double residual_tolerance(const TimeGrid& grid, double scale);

/// Bound on the integrands entering a drift condition: rates, drifts,
/// volatility norms and intensities.
double residual_scale(const DriftInputs& inputs, const DriftSurface& alpha);

}  // namespace lhc
