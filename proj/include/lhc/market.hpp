#pragma once

#include <cstdint>
#include <vector>

#include "lhc/curves.hpp"
#include "lhc/hjm_drift.hpp"
#include "lhc/levy.hpp"
#include "lhc/migration.hpp"
#include "lhc/pricing.hpp"

namespace lhc {

/// Initial curve, volatility and driving Lévy process of one forward curve.
struct CurveSetup {
  std::vector<double> initial;  // curve at t = 0 on the grid nodes
  VolatilitySurface vol;
  int driver = 0;  // index into MarketModel::drivers
};

enum class LambdaMode {
  Given,  // generator used as specified
  H1,     // default column set along each path from the short spreads
};

/// Everything needed to simulate f, g_1..g_{K-1}, the rating chain and the
/// multiple-defaults loss process. Curves may share a driver.
struct MarketModel {
  TimeGrid grid;
  std::vector<LevyModel> drivers;
  CurveSetup riskfree;
  std::vector<CurveSetup> ratings;  // empty for a risk-free-only market
  IntensityMatrixProcess generator;
  LambdaMode lambda_mode = LambdaMode::Given;
  RecoveryScheme scheme;
  int initial_state = 0;
  double riskfree_drift_bump = 0.0;         // added to alpha for theta > t
  std::vector<double> rating_drift_bump;    // per rating, empty for none

  int rating_count() const { return static_cast<int>(ratings.size()); }
  void validate() const;
};

struct SimulationOptions {
  bool keep_drifts = false;  // store alpha for f and each g_i
};

struct MarketPath {
  ForwardSurface riskfree;
  std::vector<ForwardSurface> ratings;
  RatingPath chain;
  std::vector<Mat> generator_nodes;  // realized Lambda(t_k)
  std::vector<double> loss_factor;   // V at nodes
  std::vector<double> cox_jumps;
  std::vector<std::vector<JumpEvent>> levy_jumps;  // per driver
  DriftSurface riskfree_drift;
  std::vector<DriftSurface> rating_drifts;

  /// Realized generator as a path-dependent process, linear between nodes.
  IntensityMatrixProcess realized_generator(const TimeGrid& grid, bool absorbing) const;
};

/// Euler simulation of one market path. Within each step curves are
/// evolved first with drifts built from the state at the step start; the
/// chain then advances across the step with Lambda linear between the two
/// nodes.
class MarketSimulator {
 public:
  explicit MarketSimulator(MarketModel model);

  const MarketModel& model() const { return model_; }
  const LevyDriftTable& riskfree_table() const { return riskfree_table_; }
  const LevyDriftTable& rating_table(int i) const { return rating_tables_.at(static_cast<std::size_t>(i)); }

  MarketPath simulate(std::uint64_t seed, std::uint64_t path, const SimulationOptions& options = {}) const;

  /// Lambda(t_k) given rows k of f and g_j. Applies H1 when requested.
  Mat generator_at(int k, std::span<const double> riskfree_row,
                   const std::vector<std::span<const double>>& rating_rows) const;
  /// Drift row alpha_i(t_k, .) for rating i.
  void rating_drift_row(int i, int k, std::span<const double> riskfree_row,
                        const std::vector<std::span<const double>>& rating_rows, const Mat& lambda,
                        std::span<double> out) const;
  /// Cox intensity gamma at node k for rating `state`.
  double cox_intensity(int state, int k, std::span<const double> riskfree_row,
                       const std::vector<std::span<const double>>& rating_rows) const;

 private:
  MarketModel model_;
  LevyDriftTable riskfree_table_;
  std::vector<LevyDriftTable> rating_tables_;
};

}  // namespace lhc
