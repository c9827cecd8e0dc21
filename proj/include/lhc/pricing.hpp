#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lhc/curves.hpp"
#include "lhc/migration.hpp"
#include "lhc/random.hpp"
#include "lhc/recovery.hpp"

namespace lhc {

/// A [0, 1]-valued process sampled at grid nodes (recovery delta_i(t) or
/// loss L_t).
class RecoverySchedule {
 public:
  RecoverySchedule() = default;
  explicit RecoverySchedule(std::vector<double> values);
  static RecoverySchedule constant(double value, int nodes);

  double at(int node) const { return values_.at(static_cast<std::size_t>(node)); }
  std::span<const double> values() const { return values_; }
  int nodes() const { return static_cast<int>(values_.size()); }
  bool is_constant() const;

  bool operator==(const RecoverySchedule&) const = default;

 private:
  std::vector<double> values_;
};

struct RecoveryScheme {
  RecoveryKind kind = RecoveryKind::MarketValue;
  std::vector<RecoverySchedule> deltas;  // one per pre-default rating
  RecoverySchedule loss;                 // L_t, multiple defaults only
  /// Constant Cox intensity gamma. When absent under multiple defaults the
  /// intensity follows from H1: gamma_t = (g_{C^1(t)}(t,t) - f(t,t)) / L_t.
  std::optional<double> cox_intensity;

  /// Checks ranges and shapes; Treasury and par need constant recoveries.
  void validate(int ratings, int nodes) const;
};

/// D(t, theta) along one path at every grid node for a fixed maturity node.
struct DefaultableBondPath {
  int maturity = 0;
  std::vector<double> value;        // D(t_k, theta)
  std::vector<double> discounted;   // D(t_k, theta) / B_{t_k}
  std::vector<int> rating;          // C^1(t_k)
  std::vector<double> loss_factor;  // V_{t_k}
  double terminal_payoff = 0.0;     // D(theta, theta)
};

/// Market state of one simulated path: surfaces f and g_j with all rows
/// filled, the rating path and, for multiple defaults, V at grid nodes.
struct PathMarket {
  const ForwardSurface* riskfree = nullptr;
  std::span<const ForwardSurface> ratings;
  const RatingPath* chain = nullptr;
  std::span<const double> loss_factor;
};

/// Scheme-dependent price path. Before default D = D_{C^1(t)}(t, theta);
/// after default at tau from rating j:
///   market value  delta_j(tau) D_j(tau-, theta) B_t / B_tau
///   Treasury      delta_j B(t, theta)
///   par           delta_j B_t / B_tau
/// and under multiple defaults D = V_t D_{C^1(t)}(t, theta). After the
/// maturity the payoff is held in the bank account.
DefaultableBondPath price_path(const RecoveryScheme& scheme, const PathMarket& market, int maturity);

/// V_t after one step: V_prev (1 - L) if the Cox process jumped, else V_prev.
double update_loss_process(double v_prev, double loss, bool cox_jump);

/// Cox process simulated step by step by thinning against the larger of the
/// intensities at the step ends, with gamma linear inside the step.
class CoxClock {
 public:
  explicit CoxClock(RandomStream& rng) : rng_(&rng) {}

  /// Advances over [a, b]; returns the number of accepted jumps and appends
  /// their times.
  int advance(double a, double b, double gamma_a, double gamma_b, std::vector<double>& jump_times);

 private:
  RandomStream* rng_;
};

struct CoxPath {
  std::vector<double> jump_times;
  std::vector<double> loss_factor;  // V at grid nodes
};

/// Cox process with intensities `gamma` at grid nodes and its loss factor V.
CoxPath simulate_cox(std::span<const double> gamma, const RecoverySchedule& loss, const TimeGrid& grid,
                     RandomStream& rng);

/// D_i(t, theta) = sum_j [exp(-int_t^theta r) p_ij(t, theta)
///                        + delta_j int_t^theta exp(-int_t^u r) p_ij(t, u) lambda_jK(u) du]
/// for deterministic r and Lambda, with `steps` RK4/trapezoid steps.
double ex_dividend_price(const IntensityMatrixProcess& generator, const std::function<double(double)>& short_rate,
                         std::span<const double> deltas, int rating, double t, double theta, int steps = 1000);

/// -(log P(t + dtheta) - log P(t)) / dtheta for a price function of the
/// maturity.
double short_spread_limit(const std::function<double(double)>& price_of_maturity, double t, double dtheta);

}  // namespace lhc
