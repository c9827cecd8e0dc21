#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lhc/grid.hpp"
#include "lhc/random.hpp"

namespace lhc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One point mass of the Lévy measure: jumps of size `jump` arriving at
/// `rate` per unit time.
struct JumpAtom {
  Vec jump;
  double rate = 0.0;

  /// Atoms inside the closed unit ball are compensated.
  bool is_small() const { return jump.norm() <= 1.0; }
};

struct JumpEvent {
  double time = 0.0;
  int atom = 0;
};

/// Increments of Z over a time grid together with the exact jump times.
struct IncrementPath {
  std::vector<double> grid_times;
  Mat increments;  // n_steps x d
  std::vector<JumpEvent> jump_events;

  /// Z(t_k) by summing increments up to node k.
  Vec value_at(int node) const;
};

/// Lévy process on R^d whose Lévy measure is a finite sum of atoms:
/// Z(t) = a t + W(t) + compensated small jumps + large jumps.
///
/// Immutable after construction; the covariance factor is computed once.
class LevyModel {
 public:
  LevyModel(Vec drift, Mat covariance, std::vector<JumpAtom> atoms);

  /// Pure Brownian model with covariance Q.
  static LevyModel brownian(Mat covariance);

  int dim() const { return static_cast<int>(drift_.size()); }
  const Vec& drift() const { return drift_; }
  const Mat& covariance() const { return cov_; }
  const std::vector<JumpAtom>& atoms() const { return atoms_; }

  /// Laplace exponent J(u), with E exp(-<u, Z(t)>) = exp(t J(u)).
  double laplace_exponent(const Vec& u) const;
  double laplace_exponent(std::span<const double> u) const;

  /// Gradient of J.
  Vec laplace_exponent_gradient(const Vec& u) const;
  /// <grad J(u), v> without forming the gradient.
  double laplace_exponent_directional(std::span<const double> u, std::span<const double> v) const;

  /// b(u): Laplace transform of the Lévy measure outside the unit ball.
  double tail_transform(const Vec& u) const;

  /// E Z(1) = a + sum over large atoms of rho y.
  Vec mean() const;

  /// Finite-atom measures put the whole space inside the domain of b and
  /// make b bounded on bounded sets, so the integrability conditions on the
  /// driver hold for every volatility.
  bool integrability_conditions_hold() const { return true; }

  /// Draws dZ over [t0, t0 + dt) into `out` and appends any jump times.
  void draw_increment(RandomStream& rng, double t0, double dt, std::span<double> out,
                      std::vector<JumpEvent>* jumps) const;

  /// Symmetric square root factor F with F F^T = Q (eigenvalues clamped at 0).
  const Mat& noise_factor() const { return factor_; }

 private:
  Vec drift_;
  Mat cov_;
  std::vector<JumpAtom> atoms_;
  Mat factor_;
  int factor_rank_ = 0;
  Vec compensation_;  // sum over small atoms of rho y
};

/// Exact simulation of the increments of `model` over `grid`.
IncrementPath simulate_increments(const LevyModel& model, const TimeGrid& grid, RandomStream& rng);
IncrementPath simulate_increments(const LevyModel& model, const TimeGrid& grid, std::uint64_t seed,
                                  std::uint64_t path_index = 0);

}  // namespace lhc
