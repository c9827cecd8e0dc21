#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lhc/grid.hpp"
#include "lhc/random.hpp"

namespace lhc {

using Mat = Eigen::MatrixXd;

/// How an intensity matrix process behaves between its knots.
enum class Interpolation {
  StepLeft,  // value at knot k holds on [knot_k, knot_{k+1})
  Linear,    // linear between knots, constant after the last
};

/// Time-indexed generator Lambda(t) of the rating chain.
///
/// States are 0-based. With an absorbing default the last state is default
/// and its row is zero; without one (multiple-defaults mode) every state is
/// a rating. Diagonals are recomputed from the off-diagonals at construction.
class IntensityMatrixProcess {
 public:
  IntensityMatrixProcess() = default;
  IntensityMatrixProcess(std::vector<double> knots, std::vector<Mat> matrices, Interpolation interpolation,
                         bool absorbing_default);

  static IntensityMatrixProcess constant(const Mat& matrix, bool absorbing_default = true);
  /// Piecewise constant: matrices[k] on [breakpoints[k], breakpoints[k+1]).
  static IntensityMatrixProcess piecewise(std::vector<double> breakpoints, std::vector<Mat> matrices,
                                          bool absorbing_default = true);
  /// Samples at grid nodes with linear interpolation between them.
  static IntensityMatrixProcess sampled(const TimeGrid& grid, std::vector<Mat> matrices, bool absorbing_default = true);

  int states() const { return states_; }
  bool absorbing_default() const { return absorbing_; }
  /// Index of the default state, or -1 without one.
  int default_state() const { return absorbing_ ? states_ - 1 : -1; }
  /// Number of pre-default ratings.
  int ratings() const { return absorbing_ ? states_ - 1 : states_; }
  Interpolation interpolation() const { return interpolation_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Mat>& matrices() const { return matrices_; }

  /// Right-continuous value Lambda(t).
  Mat at(double t) const;
  /// Left limit Lambda(t-).
  Mat left_limit(double t) const;
  double entry(int i, int j, double t) const;
  /// int_s^t lambda_ij(u) du, exact for the interpolation rule.
  double integral(int i, int j, double s, double t) const;

  /// True when the process was realized from a simulated market path rather
  /// than specified deterministically.
  bool path_dependent() const { return path_dependent_; }
  void mark_path_dependent() { path_dependent_ = true; }

  /// Largest exit rate max_i |lambda_ii| over all knots.
  double max_exit_rate() const;

 private:
  std::size_t segment(double t) const;
  void normalize_and_validate();

  int states_ = 0;
  bool absorbing_ = true;
  bool path_dependent_ = false;
  Interpolation interpolation_ = Interpolation::StepLeft;
  std::vector<double> knots_;
  std::vector<Mat> matrices_;
};

/// Realization of the rating chain: C^1 is piecewise constant and right
/// continuous, C^2 is the state before the last jump.
class RatingPath {
 public:
  RatingPath() = default;
  RatingPath(int initial_state, int states, int default_state)
      : initial_state_(initial_state), states_(states), default_state_(default_state) {}

  int initial_state() const { return initial_state_; }
  int states() const { return states_; }
  /// Index of the absorbing default state, -1 without one.
  int default_state() const { return default_state_; }
  const std::vector<double>& jump_times() const { return jump_times_; }
  /// State entered at each jump.
  const std::vector<int>& jump_states() const { return jump_states_; }

  void add_jump(double time, int to_state);

  /// C^1(t).
  int state_at(double t) const;
  /// C^2(t): the state before the last jump at or before t (C^1(0) before any jump).
  int previous_state_at(double t) const;
  /// Default time tau (first entry into the default state).
  std::optional<double> default_time() const;
  /// Pre-default rating C^2(tau).
  std::optional<int> rating_before_default() const;

  /// H_i(t) = 1{C^1(t) = i}.
  int indicator(int state, double t) const { return state_at(t) == state ? 1 : 0; }
  /// H_{i,j}(t): number of i -> j transitions in (0, t].
  int transition_count(int from, int to, double t) const;

 private:
  int initial_state_ = 0;
  int states_ = 0;
  int default_state_ = -1;
  std::vector<double> jump_times_;
  std::vector<int> jump_states_;
};

/// Canonical construction of the chain: each holding time solves
/// exp(-int |lambda_ii|) = U with fresh uniforms, next state drawn with
/// probability lambda_ij / |lambda_ii|.
///
/// The clock can be advanced interval by interval with generators that are
/// only known up to the current time, which is how path-dependent
/// intensities are simulated.
class ChainClock {
 public:
  ChainClock(int initial_state, int states, int default_state, RandomStream& rng, double time_tolerance);

  int state() const { return state_; }
  bool absorbed() const { return default_state_ >= 0 && state_ == default_state_; }

  /// Advances over [a, b] with Lambda linear between `left` and `right`.
  void advance(double a, double b, const Mat& left, const Mat& right, RatingPath& path);

 private:
  int state_;
  int default_state_;
  RandomStream* rng_;
  double tolerance_;
  double remaining_;  // exponential clock left until the next jump
};

/// Advances `clock` over [a, b] under a deterministic generator, splitting
/// the interval at the generator's knots.
void advance_chain(ChainClock& clock, const IntensityMatrixProcess& generator, double a, double b, RatingPath& path);

RatingPath simulate_chain(const IntensityMatrixProcess& generator, int initial_state, double horizon,
                          RandomStream& rng);
RatingPath simulate_chain(const IntensityMatrixProcess& generator, int initial_state, const TimeGrid& grid,
                          std::uint64_t seed, std::uint64_t path_index = 0);

/// p(t, u) for grid nodes u >= t, solving dp/du = p Lambda(u), p(t,t) = I.
struct ForwardEquationSolution {
  int start_node = 0;
  std::vector<Mat> p;  // p[k] = p(t, t_{start+k})

  const Mat& at(int node) const { return p.at(static_cast<std::size_t>(node - start_node)); }
};

/// RK4 from time `from` to `to` with `steps` equal steps; returns the
/// matrices at the step boundaries (steps + 1 entries).
std::vector<Mat> solve_forward_equation(const IntensityMatrixProcess& generator, double from, double to, int steps);

ForwardEquationSolution kolmogorov_forward(const IntensityMatrixProcess& generator, int t_index, const TimeGrid& grid,
                                           int substeps = 1);

/// Compensated counting processes of a rating path on the grid:
///   M_i(t)     = H_i(t) - H_i(0) - int_0^t lambda_{C^1(u), i}(u) du
///   M_{i,j}(t) = H_{i,j}(t) - int_0^t lambda_ij(u) H_i(u) du
///   M_K(t)     = H_K(t) - int_0^t lambda_{C^1(u), K}(u) (1 - H_K(u)) du
struct CompensatedMartingales {
  std::vector<std::vector<double>> state;                 // [i][node]
  std::vector<std::vector<std::vector<double>>> transition;  // [i][j][node]
  std::vector<double> default_process;                    // M_K, empty without default state
};

CompensatedMartingales compensated_martingales(const RatingPath& path, const IntensityMatrixProcess& generator,
                                               const TimeGrid& grid);

/// lambda_{i,K}(t) = (g_i(t,t) - f(t,t)) / (1 - delta_i(t)). Throws
/// H1InfeasibleError for a non-positive spread or delta >= 1.
double h1_default_intensity(double spread, double delta, int rating, double time);

/// Generator sampled at grid nodes whose default column is rewritten so that
/// Hypothesis H1 holds exactly at every node. `short_spreads[i][k]` is
/// g_i(t_k, t_k) - f(t_k, t_k); `deltas[i][k]` is delta_i(t_k).
IntensityMatrixProcess enforce_h1(const TimeGrid& grid, const std::vector<std::vector<double>>& short_spreads,
                                  const std::vector<std::vector<double>>& deltas, const IntensityMatrixProcess& base);

/// lambda_t = f_t / (1 - F_t) from samples of a distribution function on a
/// uniform grid, with second-order finite-difference densities.
std::vector<double> hazard_from_distribution(std::span<const double> distribution, double dt);

}  // namespace lhc
