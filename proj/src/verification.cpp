#include "lhc/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lhc/error.hpp"
#include "lhc/parallel.hpp"

namespace lhc {

// ---------------------------------------------------------------------------
// Martingale tests

double MartingaleReport::max_abs_z() const {
  double best = 0.0;
  for (double v : z) best = std::max(best, std::abs(v));
  return best;
}

bool MartingaleReport::pass() const { return !degenerate && max_abs_z() <= z_threshold; }

std::vector<int> martingale_checkpoints(int maturity, int count) {
  std::vector<int> nodes;
  for (int k = 1; k <= count; ++k) {
    const int node = static_cast<int>(std::lround(static_cast<double>(maturity) * k / count));
    if (nodes.empty() || node != nodes.back()) nodes.push_back(node);
  }
  return nodes;
}

MartingaleReport martingale_test(const std::function<std::vector<double>(std::uint64_t)>& evaluate, double initial,
                                 std::uint64_t n_paths, const std::vector<int>& nodes, const TimeGrid& grid,
                                 double z_threshold, int threads) {
  if (n_paths < 1000) throw ModelError("martingale test needs at least 1000 paths");
  const auto samples = map_paths(n_paths, threads, evaluate);
  const std::size_t m = nodes.size();

  MartingaleReport report;
  report.nodes = nodes;
  for (int k : nodes) report.checkpoints.push_back(grid.time(k));
  report.initial = initial;
  report.z_threshold = z_threshold;
  report.paths = n_paths;

  for (std::size_t c = 0; c < m; ++c) {
    CompensatedSum sum;
    for (const auto& s : samples) {
      if (s.size() != m) throw ModelError("evaluator returned the wrong number of checkpoints");
      sum.add(s[c]);
    }
    const double mean = sum.value() / static_cast<double>(n_paths);
    CompensatedSum squares;
    for (const auto& s : samples) squares.add((s[c] - mean) * (s[c] - mean));
    const double variance = squares.value() / static_cast<double>(n_paths - 1);
    const double se = std::sqrt(variance / static_cast<double>(n_paths));
    double z = 0.0;
    const double shift = mean - initial;
    if (se > 0.0) {
      z = shift / se;
    } else if (std::abs(shift) > 1e-14 * std::max(1.0, std::abs(initial))) {
      report.degenerate = true;
      z = std::copysign(std::numeric_limits<double>::infinity(), shift);
    }
    report.mean.push_back(mean);
    report.std_err.push_back(se);
    report.z.push_back(z);
  }
  return report;
}

MartingaleReport riskfree_martingale_test(const MarketSimulator& market, int maturity, std::uint64_t n_paths,
                                          std::uint64_t seed, const std::vector<int>& nodes, double z_threshold,
                                          int threads) {
  const TimeGrid& grid = market.model().grid;
  const double initial = curve_discounted_bond(market.model().riskfree.initial, maturity, grid.dt());
  auto evaluate = [&](std::uint64_t p) {
    const MarketPath path = market.simulate(seed, p);
    std::vector<double> out;
    out.reserve(nodes.size());
    for (int k : nodes) out.push_back(discounted_bond(path.riskfree, k, maturity));
    return out;
  };
  return martingale_test(evaluate, initial, n_paths, nodes, grid, z_threshold, threads);
}

DefaultableBondPath price_market_path(const MarketSimulator& market, const MarketPath& path, int maturity) {
  PathMarket pm;
  pm.riskfree = &path.riskfree;
  pm.ratings = path.ratings;
  pm.chain = &path.chain;
  if (market.model().scheme.kind == RecoveryKind::MultipleDefaults) pm.loss_factor = path.loss_factor;
  return price_path(market.model().scheme, pm, maturity);
}

MartingaleReport defaultable_martingale_test(const MarketSimulator& market, int maturity, std::uint64_t n_paths,
                                             std::uint64_t seed, const std::vector<int>& nodes, double z_threshold,
                                             int threads) {
  const MarketModel& model = market.model();
  if (model.ratings.empty()) throw ModelError("defaultable martingale test needs rating curves");
  const TimeGrid& grid = model.grid;
  const double initial = curve_bond_price(model.ratings[model.initial_state].initial, 0, maturity, grid.dt());
  auto evaluate = [&](std::uint64_t p) {
    const MarketPath path = market.simulate(seed, p);
    const DefaultableBondPath prices = price_market_path(market, path, maturity);
    std::vector<double> out;
    out.reserve(nodes.size());
    for (int k : nodes) out.push_back(prices.discounted[k]);
    return out;
  };
  return martingale_test(evaluate, initial, n_paths, nodes, grid, z_threshold, threads);
}

// ---------------------------------------------------------------------------
// Consistency condition

void consistency_rows(const LevyDriftTable& levy, const SchemeRow& row, std::span<const double> alpha_row,
                      double cox_intensity, std::span<double> consistency, std::span<double> hjm) {
  const int n = static_cast<int>(consistency.size());
  const int t = row.t;
  const int i = row.rating;
  const int ratings = static_cast<int>(row.ratings.size());
  const bool multiple = row.scheme == RecoveryKind::MultipleDefaults;

  condition_residual_row(levy, row, alpha_row, hjm);
  for (int theta = 0; theta < n; ++theta) hjm[theta] = -hjm[theta];

  std::vector<double> log_price(ratings, 0.0);
  double log_riskfree = 0.0;
  double alpha_integral = 0.0;
  const double spread = row.ratings[i][t] - row.riskfree[t];
  const double intensity = multiple ? cox_intensity : row.intensities.back();
  const auto exponent = levy.exponent_row(t);

  std::fill(consistency.begin(), consistency.end(), 0.0);
  for (int theta = t; theta < n; ++theta) {
    if (theta > t) {
      for (int j = 0; j < ratings; ++j) log_price[j] -= 0.5 * row.dx * (row.ratings[j][theta - 1] + row.ratings[j][theta]);
      log_riskfree -= 0.5 * row.dx * (row.riskfree[theta - 1] + row.riskfree[theta]);
      alpha_integral += 0.5 * row.dx * (alpha_row[theta - 1] + alpha_row[theta]);
    }
    const double di = std::exp(log_price[i]);
    double value = 0.0;
    for (int j = 0; j < ratings; ++j)
      if (j != i) value += (std::exp(log_price[j]) - di) * row.intensities[j];
    switch (row.scheme) {
      case RecoveryKind::MarketValue:
      case RecoveryKind::MultipleDefaults:
        value += (row.delta * di - di) * intensity;
        break;
      case RecoveryKind::Treasury:
        value += (row.delta * std::exp(log_riskfree) - di) * intensity;
        break;
      case RecoveryKind::Par:
        value += (row.delta - di) * intensity;
        break;
    }
    const double a_bar = exponent[theta] - alpha_integral;
    value += (spread + a_bar) * di;
    consistency[theta] = value;
  }
}

namespace {

void check_consistency_inputs(const ConsistencyInputs& in) {
  validate_drift_inputs(in.drift);
  if (in.alpha == nullptr) throw ModelError("consistency check needs a drift surface");
  if (!(in.alpha->grid() == in.drift.vol->grid())) throw ModelError("drift surface grid differs");
  if (in.drift.scheme == RecoveryKind::MultipleDefaults &&
      static_cast<int>(in.cox_intensity.size()) != in.drift.vol->grid().nodes())
    throw ModelError("multiple-defaults consistency needs gamma at every node");
}

double node_intensity(const ConsistencyInputs& in, const SchemeRow& row) {
  return in.drift.scheme == RecoveryKind::MultipleDefaults ? in.cox_intensity[row.t] : row.intensities.back();
}

}  // namespace

double ConsistencyResidual::max_abs() const {
  double best = 0.0;
  for (double v : value) best = std::max(best, std::abs(v));
  return best;
}

ConsistencyResidual consistency_residual(const ConsistencyInputs& inputs) {
  check_consistency_inputs(inputs);
  const TimeGrid& grid = inputs.drift.vol->grid();
  const int n = grid.nodes();
  const LevyDriftTable levy(*inputs.drift.model, *inputs.drift.vol);
  ConsistencyResidual res;
  res.scheme = inputs.drift.scheme;
  res.rating = inputs.drift.rating;
  res.grid = grid;
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  res.value.assign(cells, 0.0);
  res.hjm.assign(cells, 0.0);
  res.price.assign(cells, 0.0);
  std::vector<double> buffer;
  for (int t = 0; t < n; ++t) {
    const SchemeRow row = scheme_row(inputs.drift, t, buffer);
    const std::size_t off = static_cast<std::size_t>(t) * n;
    consistency_rows(levy, row, inputs.alpha->row(t), node_intensity(inputs, row),
                     std::span<double>(res.value.data() + off, n), std::span<double>(res.hjm.data() + off, n));
    for (int theta = t; theta < n; ++theta)
      res.price[off + theta] = curve_bond_price(row.ratings[row.rating], t, theta, grid.dt());
  }
  return res;
}

double h1_violation(const ConsistencyInputs& inputs) {
  check_consistency_inputs(inputs);
  const TimeGrid& grid = inputs.drift.vol->grid();
  std::vector<double> buffer;
  double worst = 0.0;
  for (int t = 0; t < grid.nodes(); ++t) {
    const SchemeRow row = scheme_row(inputs.drift, t, buffer);
    const double spread = row.ratings[row.rating][t] - row.riskfree[t];
    worst = std::max(worst, std::abs(spread - (1.0 - row.delta) * node_intensity(inputs, row)));
  }
  return worst;
}

EquivalenceReport equivalence_check(const ConsistencyInputs& inputs, H1Policy policy) {
  EquivalenceReport report;
  report.h1_violation = h1_violation(inputs);
  if (policy == H1Policy::Require && report.h1_violation > 1e-12)
    throw ModelError("equivalence of the consistency and HJM conditions needs H1; violation " +
                     std::to_string(report.h1_violation));
  const ConsistencyResidual res = consistency_residual(inputs);
  const int n = res.grid.nodes();
  for (int t = 0; t < n; ++t)
    for (int theta = t; theta < n; ++theta)
      report.gap = std::max(report.gap, std::abs(res.at(t, theta) - res.price_at(t, theta) * res.hjm_at(t, theta)));
  return report;
}

std::size_t common_jump_audit(std::vector<double> levy_jump_times, std::vector<double> rating_jump_times) {
  std::sort(levy_jump_times.begin(), levy_jump_times.end());
  std::sort(rating_jump_times.begin(), rating_jump_times.end());
  std::size_t count = 0;
  std::size_t j = 0;
  for (double t : levy_jump_times) {
    while (j < rating_jump_times.size() && rating_jump_times[j] < t) ++j;
    if (j < rating_jump_times.size() && rating_jump_times[j] == t) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Path-level checks

namespace {

struct PathRows {
  std::vector<std::span<const double>> ratings;
  std::vector<double> intensities;
};

SchemeRow path_row(const MarketSimulator& market, const MarketPath& path, int i, int k, PathRows& storage) {
  const MarketModel& model = market.model();
  storage.ratings.clear();
  for (const auto& g : path.ratings) storage.ratings.push_back(g.row(k));
  const Mat& lambda = path.generator_nodes.at(static_cast<std::size_t>(k));
  storage.intensities.assign(static_cast<std::size_t>(lambda.cols()), 0.0);
  for (int j = 0; j < lambda.cols(); ++j) storage.intensities[j] = lambda(i, j);
  SchemeRow row;
  row.scheme = model.scheme.kind;
  row.rating = i;
  row.t = k;
  row.dx = model.grid.dt();
  row.riskfree = path.riskfree.row(k);
  row.ratings = storage.ratings;
  row.intensities = storage.intensities;
  row.delta = model.scheme.kind == RecoveryKind::MultipleDefaults ? 1.0 - model.scheme.loss.at(k)
                                                                  : model.scheme.deltas[i].at(k);
  return row;
}

double path_intensity(const MarketSimulator& market, const SchemeRow& row) {
  if (row.scheme != RecoveryKind::MultipleDefaults) return row.intensities.back();
  return market.cox_intensity(row.rating, row.t, row.riskfree, row.ratings);
}

}  // namespace

bool DriftDecompositionReport::pass(double threshold) const {
  if (gap_std_err == 0.0) return std::abs(mean_gap) <= 1e-12;
  return std::abs(z()) <= threshold;
}

DriftDecompositionReport drift_decomposition_test(const MarketSimulator& market, int maturity, std::uint64_t n_paths,
                                                  std::uint64_t seed, int threads) {
  const MarketModel& model = market.model();
  if (model.ratings.empty()) throw ModelError("drift decomposition needs rating curves");
  if (n_paths < 2) throw ModelError("drift decomposition needs at least two paths");
  const TimeGrid& grid = model.grid;
  const int n = grid.nodes();
  const double dt = grid.dt();
  const int def = model.generator.default_state();

  struct Sample {
    double gap = 0.0;
    double predicted = 0.0;
    double increment = 0.0;
    double i1 = 0.0;
    double i2 = 0.0;
  };
  auto evaluate = [&](std::uint64_t p) {
    SimulationOptions options;
    options.keep_drifts = true;
    const MarketPath path = market.simulate(seed, p, options);
    const DefaultableBondPath prices = price_market_path(market, path, maturity);
    Sample s;
    PathRows storage;
    std::vector<double> consistency(n), hjm(n);
    for (int k = 0; k < maturity; ++k) {
      const int state = path.chain.state_at(grid.time(k));
      double drift = 0.0;
      if (state != def) {
        const SchemeRow row = path_row(market, path, state, k, storage);
        const double intensity = path_intensity(market, row);
        consistency_rows(market.rating_table(state), row, path.rating_drifts[state].row(k), intensity, consistency,
                         hjm);
        const double i1 = row.ratings[state][k] - row.riskfree[k] - (1.0 - row.delta) * intensity;
        s.i1 = std::max(s.i1, std::abs(i1));
        s.i2 = std::max(s.i2, std::abs(hjm[maturity]));
        drift = prices.discounted[k] * (i1 + hjm[maturity]);
      }
      s.gap += prices.discounted[k + 1] - prices.discounted[k] - dt * drift;
      s.predicted += dt * drift;
    }
    s.increment = prices.discounted[maturity] - prices.discounted[0];
    return s;
  };
  const auto samples = map_paths(n_paths, threads, evaluate);

  auto moments = [&](auto field, double& mean, double& se) {
    CompensatedSum sum;
    for (const auto& s : samples) sum.add(field(s));
    mean = sum.value() / static_cast<double>(n_paths);
    CompensatedSum squares;
    for (const auto& s : samples) squares.add((field(s) - mean) * (field(s) - mean));
    se = std::sqrt(squares.value() / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths));
  };
  DriftDecompositionReport report;
  report.paths = n_paths;
  double unused = 0.0;
  moments([](const Sample& s) { return s.gap; }, report.mean_gap, report.gap_std_err);
  moments([](const Sample& s) { return s.predicted; }, report.mean_predicted, report.predicted_std_err);
  moments([](const Sample& s) { return s.increment; }, report.mean_increment, unused);
  for (const auto& s : samples) {
    report.max_abs_i1 = std::max(report.max_abs_i1, s.i1);
    report.max_abs_i2 = std::max(report.max_abs_i2, s.i2);
  }
  return report;
}

PathResidualReport path_residuals(const MarketSimulator& market, const MarketPath& path) {
  const MarketModel& model = market.model();
  const TimeGrid& grid = model.grid;
  const int n = grid.nodes();
  const int ratings = model.rating_count();
  if (path.riskfree_drift.grid().nodes() != n || static_cast<int>(path.rating_drifts.size()) != ratings)
    throw ModelError("path residuals need a path simulated with stored drifts");

  PathResidualReport report;
  CompensatedSum sum;
  long cells = 0;
  double scale = std::max({path.riskfree.max_abs(), path.riskfree_drift.max_abs(), model.riskfree.vol.max_norm()});
  std::vector<double> residual(n), consistency(n), hjm(n);

  CurveResidual curve;
  CompensatedSum curve_sum;
  long curve_cells = 0;
  auto record = [&](double r) {
    curve.max = std::max(curve.max, r);
    curve_sum.add(r);
    ++curve_cells;
    report.residual_max = std::max(report.residual_max, r);
    sum.add(r);
    ++cells;
  };
  auto close_curve = [&] {
    curve.mean = curve_cells > 0 ? curve_sum.value() / static_cast<double>(curve_cells) : 0.0;
    report.curves.push_back(curve);
    curve = CurveResidual{};
    curve_sum = CompensatedSum{};
    curve_cells = 0;
  };

  // risk-free condition: int alpha = J(Sigma)
  for (int k = 0; k + 1 < n; ++k) {
    const auto alpha = path.riskfree_drift.row(k);
    const auto exponent = market.riskfree_table().exponent_row(k);
    double integral = 0.0;
    for (int theta = k; theta < n; ++theta) {
      if (theta > k) integral += 0.5 * grid.dt() * (alpha[theta - 1] + alpha[theta]);
      record(std::abs(integral - exponent[theta]));
    }
  }
  close_curve();

  PathRows storage;
  for (int i = 0; i < ratings; ++i) {
    curve.rating = i;
    scale = std::max({scale, path.ratings[i].max_abs(), path.rating_drifts[i].max_abs(), model.ratings[i].vol.max_norm()});
    for (int k = 0; k + 1 < n; ++k) {
      const SchemeRow row = path_row(market, path, i, k, storage);
      for (double v : row.intensities) scale = std::max(scale, std::abs(v));
      const auto alpha = path.rating_drifts[i].row(k);
      condition_residual_row(market.rating_table(i), row, alpha, residual);
      consistency_rows(market.rating_table(i), row, alpha, path_intensity(market, row), consistency, hjm);
      double log_price = 0.0;
      for (int theta = k; theta < n; ++theta) {
        if (theta > k) log_price -= 0.5 * grid.dt() * (row.ratings[i][theta - 1] + row.ratings[i][theta]);
        record(std::abs(residual[theta]));
        report.equivalence_gap =
            std::max(report.equivalence_gap, std::abs(consistency[theta] - std::exp(log_price) * hjm[theta]));
      }
    }
    close_curve();
  }
  report.residual_mean = cells > 0 ? sum.value() / static_cast<double>(cells) : 0.0;
  report.tolerance = residual_tolerance(grid, scale);
  return report;
}

}  // namespace lhc
