#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lhc/hjm_drift.hpp"
#include "lhc/market.hpp"

namespace lhc {

/// Per-checkpoint sample statistics of a quantity that should be a
/// martingale started at `initial`.
struct MartingaleReport {
  std::vector<int> nodes;
  std::vector<double> checkpoints;  // times
  double initial = 0.0;
  std::vector<double> mean;
  std::vector<double> std_err;
  std::vector<double> z;
  double z_threshold = 4.0;
  std::uint64_t paths = 0;
  bool degenerate = false;  // zero variance but the mean moved

  double max_abs_z() const;
  bool pass() const;
};

/// Checkpoint nodes round(m k / count), k = 1..count, for maturity node m.
std::vector<int> martingale_checkpoints(int maturity, int count = 5);

/// `evaluate(path)` returns the quantity at each checkpoint node. Paths are
/// distributed over `threads` workers and reduced in path order with
/// compensated summation.
MartingaleReport martingale_test(const std::function<std::vector<double>(std::uint64_t)>& evaluate, double initial,
                                 std::uint64_t n_paths, const std::vector<int>& nodes, const TimeGrid& grid,
                                 double z_threshold = 4.0, int threads = 1);

/// Discounted risk-free bond exp(-int_0^theta f(t_k, u) du) along simulated
/// paths of a market.
MartingaleReport riskfree_martingale_test(const MarketSimulator& market, int maturity, std::uint64_t n_paths,
                                          std::uint64_t seed, const std::vector<int>& nodes,
                                          double z_threshold = 4.0, int threads = 1);

/// Discounted defaultable bond D(t_k, theta) / B_{t_k} under the market's
/// recovery scheme.
MartingaleReport defaultable_martingale_test(const MarketSimulator& market, int maturity, std::uint64_t n_paths,
                                             std::uint64_t seed, const std::vector<int>& nodes,
                                             double z_threshold = 4.0, int threads = 1);

/// Prices along one simulated path.
DefaultableBondPath price_market_path(const MarketSimulator& market, const MarketPath& path, int maturity);

/// Row t of the consistency condition and of the HJM-type condition
/// h = J(Sigma) - int alpha + scheme terms, for rating `row.rating`.
/// Under multiple defaults `cox_intensity` is gamma_t and `row.delta` is
/// 1 - L_t; otherwise the default intensity is the last entry of
/// `row.intensities`.
void consistency_rows(const LevyDriftTable& levy, const SchemeRow& row, std::span<const double> alpha_row,
                      double cox_intensity, std::span<double> consistency, std::span<double> hjm);

/// Deterministic inputs of the consistency condition for one rating.
struct ConsistencyInputs {
  DriftInputs drift;
  const DriftSurface* alpha = nullptr;
  std::span<const double> cox_intensity;  // gamma at nodes, multiple defaults only
};

struct ConsistencyResidual {
  RecoveryKind scheme = RecoveryKind::MarketValue;
  int rating = 0;
  TimeGrid grid;
  std::vector<double> value;  // consistency LHS [t][theta]
  std::vector<double> hjm;    // HJM-type residual h [t][theta]
  std::vector<double> price;  // D_i(t, theta)

  double at(int t, int theta) const { return value[static_cast<std::size_t>(t) * grid.nodes() + theta]; }
  double hjm_at(int t, int theta) const { return hjm[static_cast<std::size_t>(t) * grid.nodes() + theta]; }
  double price_at(int t, int theta) const { return price[static_cast<std::size_t>(t) * grid.nodes() + theta]; }
  double max_abs() const;
};

ConsistencyResidual consistency_residual(const ConsistencyInputs& inputs);

/// Largest |g_i(t,t) - f(t,t) - (1 - delta_i(t)) lambda_iK(t)| over nodes
/// (gamma_t instead of lambda_iK under multiple defaults).
double h1_violation(const ConsistencyInputs& inputs);

enum class H1Policy {
  Require,  // refuse inputs that violate H1
  Report,   // compute the gap anyway
};

struct EquivalenceReport {
  double gap = 0.0;           // max |consistency - D_i h|
  double h1_violation = 0.0;  // as returned by h1_violation
};

/// max over t <= theta of |consistency - D_i(t, theta) h(t, theta)|.
EquivalenceReport equivalence_check(const ConsistencyInputs& inputs, H1Policy policy = H1Policy::Require);

/// Number of exact coincidences between two sets of jump times.
std::size_t common_jump_audit(std::vector<double> levy_jump_times, std::vector<double> rating_jump_times);

/// Compares the increments of the discounted price with the drift
/// predicted by its decomposition I_1 + I_2 (H1 gap and HJM-type residual),
/// accumulated along each path up to the maturity.
struct DriftDecompositionReport {
  std::uint64_t paths = 0;
  double mean_gap = 0.0;  // mean of sum_k (dD^ - D^ (I_1 + I_2) dt)
  double gap_std_err = 0.0;
  double mean_predicted = 0.0;  // mean of sum_k D^ (I_1 + I_2) dt
  double predicted_std_err = 0.0;
  double mean_increment = 0.0;  // mean of D^(theta) - D^(0)
  double max_abs_i1 = 0.0;
  double max_abs_i2 = 0.0;

  double z() const { return gap_std_err > 0.0 ? mean_gap / gap_std_err : 0.0; }
  bool pass(double threshold = 3.0) const;
};

DriftDecompositionReport drift_decomposition_test(const MarketSimulator& market, int maturity, std::uint64_t n_paths,
                                                  std::uint64_t seed, int threads = 1);

/// Drift-condition residual and consistency gap along one path with stored
/// drifts, for every rating and row.
struct CurveResidual {
  int rating = -1;  // -1 for the risk-free curve
  double max = 0.0;
  double mean = 0.0;
};

struct PathResidualReport {
  std::vector<CurveResidual> curves;
  double residual_max = 0.0;
  double residual_mean = 0.0;
  double equivalence_gap = 0.0;
  double tolerance = 0.0;
};

PathResidualReport path_residuals(const MarketSimulator& market, const MarketPath& path);

}  // namespace lhc
