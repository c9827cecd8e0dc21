#include "lhc/market.hpp"

#include <algorithm>
#include <string>

#include "lhc/error.hpp"

namespace lhc {

namespace {

void check_curve(const MarketModel& m, const CurveSetup& c, const std::string& name) {
  if (static_cast<int>(c.initial.size()) != m.grid.nodes())
    throw ModelError(name + ": initial curve length does not match the grid");
  if (c.driver < 0 || c.driver >= static_cast<int>(m.drivers.size()))
    throw ModelError(name + ": driver index out of range");
  if (!(c.vol.grid() == m.grid)) throw ModelError(name + ": volatility grid does not match the model grid");
  if (c.vol.dim() != m.drivers[c.driver].dim()) throw ModelError(name + ": volatility and driver dimensions differ");
}

}  // namespace

void MarketModel::validate() const {
  if (drivers.empty()) throw ModelError("market needs at least one Lévy driver");
  check_curve(*this, riskfree, "f");
  for (int i = 0; i < rating_count(); ++i) check_curve(*this, ratings[i], "g_" + std::to_string(i + 1));
  if (!rating_drift_bump.empty() && static_cast<int>(rating_drift_bump.size()) != rating_count())
    throw ModelError("one drift bump per rating is required");
  if (ratings.empty()) return;
  if (generator.ratings() != rating_count()) throw ModelError("generator and curves disagree on the rating count");
  if (generator.absorbing_default() != has_default_state(scheme.kind))
    throw ModelError("generator default state does not fit the recovery scheme");
  if (lambda_mode == LambdaMode::H1 && !generator.absorbing_default())
    throw ModelError("H1-derived default intensities need an absorbing default state");
  scheme.validate(rating_count(), grid.nodes());
  if (initial_state < 0 || initial_state >= rating_count()) throw ModelError("initial rating out of range");
}

IntensityMatrixProcess MarketPath::realized_generator(const TimeGrid& grid, bool absorbing) const {
  auto gen = IntensityMatrixProcess::sampled(grid, generator_nodes, absorbing);
  gen.mark_path_dependent();
  return gen;
}

MarketSimulator::MarketSimulator(MarketModel model) : model_(std::move(model)) {
  model_.validate();
  riskfree_table_ = LevyDriftTable(model_.drivers[model_.riskfree.driver], model_.riskfree.vol);
  for (const auto& c : model_.ratings) rating_tables_.emplace_back(model_.drivers[c.driver], c.vol);
}

Mat MarketSimulator::generator_at(int k, std::span<const double> riskfree_row,
                                  const std::vector<std::span<const double>>& rating_rows) const {
  const double t = model_.grid.time(k);
  Mat lambda = model_.generator.at(t);
  if (model_.lambda_mode == LambdaMode::H1) {
    const int def = model_.generator.default_state();
    for (int i = 0; i < model_.rating_count(); ++i) {
      const double spread = rating_rows[i][k] - riskfree_row[k];
      lambda(i, def) = h1_default_intensity(spread, model_.scheme.deltas[i].at(k), i, t);
    }
    for (int i = 0; i < lambda.rows(); ++i) {
      double exit = 0.0;
      for (int j = 0; j < lambda.cols(); ++j)
        if (j != i) exit += lambda(i, j);
      lambda(i, i) = -exit;
    }
  }
  return lambda;
}

void MarketSimulator::rating_drift_row(int i, int k, std::span<const double> riskfree_row,
                                       const std::vector<std::span<const double>>& rating_rows, const Mat& lambda,
                                       std::span<double> out) const {
  const int n = model_.grid.nodes();
  const auto base = rating_tables_[i].drift_row(k);
  const double bump = model_.rating_drift_bump.empty() ? 0.0 : model_.rating_drift_bump[i];
  std::fill(out.begin(), out.end(), 0.0);
  for (int theta = k; theta < n; ++theta) out[theta] = base[theta] + (theta > k ? bump : 0.0);
  std::vector<double> intensities(static_cast<std::size_t>(lambda.cols()));
  for (int j = 0; j < lambda.cols(); ++j) intensities[j] = lambda(i, j);
  SchemeRow row;
  row.scheme = model_.scheme.kind;
  row.rating = i;
  row.t = k;
  row.dx = model_.grid.dt();
  row.riskfree = riskfree_row;
  row.ratings = rating_rows;
  row.intensities = intensities;
  row.delta = model_.scheme.deltas[i].at(k);
  add_scheme_drift(row, out);
}

double MarketSimulator::cox_intensity(int state, int k, std::span<const double> riskfree_row,
                                      const std::vector<std::span<const double>>& rating_rows) const {
  if (model_.scheme.cox_intensity) return *model_.scheme.cox_intensity;
  const double loss = model_.scheme.loss.at(k);
  return h1_default_intensity(rating_rows[state][k] - riskfree_row[k], 1.0 - loss, state, model_.grid.time(k));
}

MarketPath MarketSimulator::simulate(std::uint64_t seed, std::uint64_t path, const SimulationOptions& options) const {
  const TimeGrid& grid = model_.grid;
  const int n = grid.nodes();
  const int ratings = model_.rating_count();
  const double dt = grid.dt();
  const bool multiple = model_.scheme.kind == RecoveryKind::MultipleDefaults && ratings > 0;

  MarketPath out;
  out.riskfree = ForwardSurface(grid, model_.riskfree.initial, CurveKind::RiskFree);
  for (int i = 0; i < ratings; ++i)
    out.ratings.emplace_back(grid, model_.ratings[i].initial, CurveKind::PreDefault, i);
  out.loss_factor.assign(n, 1.0);
  out.levy_jumps.resize(model_.drivers.size());
  if (options.keep_drifts) {
    out.riskfree_drift = DriftSurface(grid);
    for (int i = 0; i < ratings; ++i) out.rating_drifts.emplace_back(grid, i);
  }

  std::vector<RandomStream> noise;
  for (std::size_t d = 0; d < model_.drivers.size(); ++d)
    noise.emplace_back(seed, path, levy_stream(static_cast<int>(d)));
  std::vector<std::vector<double>> dz(model_.drivers.size());
  for (std::size_t d = 0; d < model_.drivers.size(); ++d) dz[d].resize(model_.drivers[d].dim());

  RandomStream chain_rng(seed, path, StreamTag::Chain);
  RandomStream cox_rng(seed, path, StreamTag::Cox);
  const int def = ratings > 0 ? model_.generator.default_state() : -1;
  std::optional<ChainClock> clock;
  if (ratings > 0) {
    out.chain = RatingPath(model_.initial_state, model_.generator.states(), def);
    clock.emplace(model_.initial_state, model_.generator.states(), def, chain_rng, 1e-10 * grid.horizon());
  }
  CoxClock cox(cox_rng);

  auto rows_at = [&](int k) {
    std::vector<std::span<const double>> rows;
    rows.reserve(ratings);
    for (const auto& g : out.ratings) rows.push_back(std::as_const(g).row(k));
    return rows;
  };

  std::vector<double> alpha(n);
  Mat lambda_left;
  if (ratings > 0) {
    lambda_left = generator_at(0, std::as_const(out.riskfree).row(0), rows_at(0));
    out.generator_nodes.push_back(lambda_left);
  }
  double v = 1.0;

  for (int k = 0; k + 1 < n; ++k) {
    for (std::size_t d = 0; d < model_.drivers.size(); ++d)
      model_.drivers[d].draw_increment(noise[d], grid.time(k), dt, dz[d], &out.levy_jumps[d]);

    const auto f_row = std::as_const(out.riskfree).row(k);
    const auto g_rows = rows_at(k);

    // drifts for every rating use the curves at t_k, so compute all before evolving
    std::vector<std::vector<double>> rating_alpha(ratings, std::vector<double>(n));
    for (int i = 0; i < ratings; ++i) rating_drift_row(i, k, f_row, g_rows, lambda_left, rating_alpha[i]);

    const auto f_base = riskfree_table_.drift_row(k);
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (int theta = k; theta < n; ++theta)
      alpha[theta] = f_base[theta] + (theta > k ? model_.riskfree_drift_bump : 0.0);

    const int state_start = ratings > 0 ? clock->state() : -1;
    double gamma_left = 0.0;
    if (multiple) gamma_left = cox_intensity(state_start, k, f_row, g_rows);

    if (options.keep_drifts) {
      std::copy(alpha.begin(), alpha.end(), out.riskfree_drift.row(k).begin());
      for (int i = 0; i < ratings; ++i)
        std::copy(rating_alpha[i].begin(), rating_alpha[i].end(), out.rating_drifts[i].row(k).begin());
    }

    evolve_step(out.riskfree, k, alpha, model_.riskfree.vol, dz[model_.riskfree.driver], dt);
    for (int i = 0; i < ratings; ++i)
      evolve_step(out.ratings[i], k, rating_alpha[i], model_.ratings[i].vol, dz[model_.ratings[i].driver], dt);

    if (ratings == 0) continue;
    const auto f_next = std::as_const(out.riskfree).row(k + 1);
    const auto g_next = rows_at(k + 1);
    const bool derived = model_.lambda_mode == LambdaMode::H1;
    const Mat lambda_right = derived ? generator_at(k + 1, f_next, g_next) : Mat();

    if (multiple) {
      const double gamma_right = cox_intensity(state_start, k + 1, f_next, g_next);
      const int jumps = cox.advance(grid.time(k), grid.time(k + 1), gamma_left, gamma_right, out.cox_jumps);
      for (int m = 0; m < jumps; ++m) v = update_loss_process(v, model_.scheme.loss.at(k), true);
      out.loss_factor[k + 1] = v;
    }

    if (derived) {
      clock->advance(grid.time(k), grid.time(k + 1), lambda_left, lambda_right, out.chain);
      lambda_left = lambda_right;
    } else {
      advance_chain(*clock, model_.generator, grid.time(k), grid.time(k + 1), out.chain);
      lambda_left = generator_at(k + 1, f_next, g_next);
    }
    out.generator_nodes.push_back(lambda_left);
  }
  return out;
}

}  // namespace lhc
