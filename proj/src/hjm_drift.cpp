#include "lhc/hjm_drift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lhc/error.hpp"

namespace lhc {

LevyDriftTable::LevyDriftTable(const LevyModel& model, const VolatilitySurface& vol) : grid_(vol.grid()) {
  if (model.dim() != vol.dim()) throw ModelError("Lévy model and volatility dimensions differ");
  const int n = grid_.nodes();
  const int d = vol.dim();
  const double dx = grid_.dt();
  exponent_.assign(width() * width(), 0.0);
  drift_.assign(width() * width(), 0.0);
  std::vector<double> sigma_int(d);
  for (int t = 0; t < n; ++t) {
    std::fill(sigma_int.begin(), sigma_int.end(), 0.0);
    for (int theta = t; theta < n; ++theta) {
      const auto s = vol.at(t, theta);
      if (theta > t) {
        const auto prev = vol.at(t, theta - 1);
        for (int k = 0; k < d; ++k) sigma_int[k] += 0.5 * dx * (prev[k] + s[k]);
      }
      exponent_[index(t, theta)] = theta == t ? 0.0 : model.laplace_exponent(std::span<const double>(sigma_int));
      drift_[index(t, theta)] = model.laplace_exponent_directional(sigma_int, s);
    }
  }
}

DriftSurface riskfree_drift(const LevyModel& model, const VolatilitySurface& vol) {
  const LevyDriftTable table(model, vol);
  DriftSurface alpha(vol.grid());
  const int n = vol.grid().nodes();
  for (int t = 0; t < n; ++t)
    for (int theta = t; theta < n; ++theta) alpha.at(t, theta) = table.drift(t, theta);
  return alpha;
}

namespace {

void check_row(const SchemeRow& row, std::size_t width) {
  const auto ratings = static_cast<int>(row.ratings.size());
  if (ratings < 1) throw ModelError("drift condition needs at least one rating (K >= 2)");
  if (row.rating < 0 || row.rating >= ratings)
    throw ModelError("drift condition requested for rating " + std::to_string(row.rating + 1) +
                     ", which is not a pre-default rating");
  const int states = has_default_state(row.scheme) ? ratings + 1 : ratings;
  if (static_cast<int>(row.intensities.size()) != states) throw ModelError("intensity row has the wrong length");
  if (row.riskfree.size() != width) throw ModelError("risk-free row has the wrong length");
  for (const auto& g : row.ratings)
    if (g.size() != width) throw ModelError("rating curve row has the wrong length");
  if (row.t < 0 || static_cast<std::size_t>(row.t) >= width) throw ModelError("row index out of range");
}

// Calls fn(theta, exp(int_t^theta (a - b))) for theta >= t, where the
// integrand is a(theta) - b(theta).
template <class Diff, class Fn>
void with_exponential_integral(const SchemeRow& row, std::size_t width, Diff diff, Fn fn) {
  double acc = 0.0;
  for (int theta = row.t; theta < static_cast<int>(width); ++theta) {
    if (theta > row.t) acc += 0.5 * row.dx * (diff(theta - 1) + diff(theta));
    fn(theta, diff(theta), std::exp(acc));
  }
}

template <class Term>
void for_each_scheme_term(const SchemeRow& row, std::size_t width, Term term) {
  check_row(row, width);
  const int i = row.rating;
  const auto gi = row.ratings[i];
  for (int j = 0; j < static_cast<int>(row.ratings.size()); ++j) {
    if (j == i) continue;
    const double lambda = row.intensities[j];
    if (lambda == 0.0) continue;
    const auto gj = row.ratings[j];
    with_exponential_integral(
        row, width, [&](int v) { return gi[v] - gj[v]; },
        [&](int theta, double rate, double ratio) { term(theta, lambda, rate, ratio); });
  }
  if (row.scheme != RecoveryKind::Treasury && row.scheme != RecoveryKind::Par) return;
  const double weight = row.delta * row.intensities.back();
  if (weight == 0.0) return;
  if (row.scheme == RecoveryKind::Treasury) {
    with_exponential_integral(
        row, width, [&](int v) { return gi[v] - row.riskfree[v]; },
        [&](int theta, double rate, double ratio) { term(theta, weight, rate, ratio); });
  } else {
    with_exponential_integral(
        row, width, [&](int v) { return gi[v]; },
        [&](int theta, double rate, double ratio) { term(theta, weight, rate, ratio); });
  }
}

}  // namespace

void add_scheme_drift(const SchemeRow& row, std::span<double> alpha_row) {
  for_each_scheme_term(row, alpha_row.size(), [&](int theta, double weight, double rate, double ratio) {
    alpha_row[theta] += weight * rate * ratio;
  });
}

void add_scheme_integral(const SchemeRow& row, std::span<double> rhs_row) {
  for_each_scheme_term(row, rhs_row.size(), [&](int theta, double weight, double, double ratio) {
    rhs_row[theta] += weight * (ratio - 1.0);
  });
}

void validate_drift_inputs(const DriftInputs& in) {
  if (in.model == nullptr || in.vol == nullptr || in.riskfree == nullptr || in.generator == nullptr)
    throw ModelError("drift inputs are incomplete");
  const TimeGrid& grid = in.vol->grid();
  if (!(in.riskfree->grid() == grid)) throw ModelError("risk-free surface grid differs from the volatility grid");
  for (const auto& g : in.ratings)
    if (!(g.grid() == grid)) throw ModelError("rating surface grid differs from the volatility grid");
  if (static_cast<int>(in.delta.size()) != grid.nodes()) throw ModelError("recovery schedule length must match the grid");
  if (in.generator->absorbing_default() != has_default_state(in.scheme))
    throw ModelError("generator and recovery scheme disagree on the default state");
  if (in.generator->ratings() != static_cast<int>(in.ratings.size()))
    throw ModelError("generator and rating surfaces disagree on the rating count");
}

SchemeRow scheme_row(const DriftInputs& in, int t, std::vector<double>& intensity_buffer) {
  const TimeGrid& grid = in.vol->grid();
  SchemeRow row;
  row.scheme = in.scheme;
  row.rating = in.rating;
  row.t = t;
  row.dx = grid.dt();
  row.riskfree = in.riskfree->row(t);
  for (const auto& g : in.ratings) row.ratings.push_back(g.row(t));
  const Mat lambda = in.generator->at(grid.time(t));
  if (in.rating < 0 || in.rating >= lambda.rows())
    throw ModelError("drift condition requested for rating " + std::to_string(in.rating + 1) +
                     ", which is not a pre-default rating");
  intensity_buffer.assign(lambda.cols(), 0.0);
  for (int j = 0; j < lambda.cols(); ++j) intensity_buffer[j] = lambda(in.rating, j);
  row.intensities = intensity_buffer;
  row.delta = in.delta[t];
  return row;
}


DriftSurface defaultable_drift(const DriftInputs& inputs) {
  validate_drift_inputs(inputs);
  const LevyDriftTable levy(*inputs.model, *inputs.vol);
  const TimeGrid& grid = inputs.vol->grid();
  DriftSurface alpha(grid, inputs.rating);
  std::vector<double> buffer;
  for (int t = 0; t < grid.nodes(); ++t) {
    const SchemeRow row = scheme_row(inputs, t, buffer);
    auto out = alpha.row(t);
    const auto base = levy.drift_row(t);
    for (int theta = t; theta < grid.nodes(); ++theta) out[theta] = base[theta];
    add_scheme_drift(row, out);
  }
  return alpha;
}

void condition_residual_row(const LevyDriftTable& levy, const SchemeRow& row, std::span<const double> alpha_row,
                            std::span<double> out) {
  const int n = static_cast<int>(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  add_scheme_integral(row, out);
  const auto exponent = levy.exponent_row(row.t);
  double integral = 0.0;
  for (int theta = row.t; theta < n; ++theta) {
    if (theta > row.t) integral += 0.5 * row.dx * (alpha_row[theta - 1] + alpha_row[theta]);
    out[theta] = integral - exponent[theta] - out[theta];
  }
}

DriftConditionResidual condition_residual(const DriftInputs& inputs, const DriftSurface& alpha) {
  validate_drift_inputs(inputs);
  const TimeGrid& grid = inputs.vol->grid();
  if (!(alpha.grid() == grid)) throw ModelError("drift surface grid differs from the volatility grid");
  const LevyDriftTable levy(*inputs.model, *inputs.vol);
  DriftConditionResidual res;
  res.scheme = inputs.scheme;
  res.rating = inputs.rating;
  res.grid = grid;
  res.residual.assign(static_cast<std::size_t>(grid.nodes()) * grid.nodes(), 0.0);
  std::vector<double> buffer;
  for (int t = 0; t < grid.nodes(); ++t) {
    const SchemeRow row = scheme_row(inputs, t, buffer);
    condition_residual_row(levy, row, alpha.row(t),
                           std::span<double>(res.residual.data() + static_cast<std::size_t>(t) * grid.nodes(),
                                             static_cast<std::size_t>(grid.nodes())));
  }
  return res;
}

double DriftConditionResidual::max_abs() const {
  double best = 0.0;
  for (double v : residual) best = std::max(best, std::abs(v));
  return best;
}

double DriftConditionResidual::mean_abs() const {
  const int n = grid.nodes();
  double sum = 0.0;
  long count = 0;
  for (int t = 0; t < n; ++t)
    for (int theta = t; theta < n; ++theta, ++count) sum += std::abs(at(t, theta));
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

double residual_tolerance(const TimeGrid& grid, double scale) {
  const double dx = grid.dt();
  return 1e-10 + 2.0 * scale * scale * dx * dx;
}

double residual_scale(const DriftInputs& inputs, const DriftSurface& alpha) {
  validate_drift_inputs(inputs);
  double scale = std::max({inputs.riskfree->max_abs(), alpha.max_abs(), inputs.vol->max_norm(),
                           inputs.generator->max_exit_rate()});
  for (const auto& g : inputs.ratings) scale = std::max(scale, g.max_abs());
  return scale;
}

}  // namespace lhc
