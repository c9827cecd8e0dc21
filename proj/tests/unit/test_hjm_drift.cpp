#include <doctest.h>

#include "fixtures.hpp"
#include "lhc/error.hpp"
#include "lhc/hjm_drift.hpp"

using namespace lhc;
using namespace lhc::test;

namespace {

std::vector<double> curve(const TimeGrid& g, double level, double slope) {
  std::vector<double> out;
  for (int k = 0; k < g.nodes(); ++k) out.push_back(level + slope * g.time(k));
  return out;
}

// Deterministic three-state market: two ratings and default.
struct Market {
  TimeGrid grid{1.0, 50};
  LevyModel model = mixed_2d();
  VolatilitySurface vol = VolatilitySurface::exponential(grid, vec({0.012, 0.006}), 0.4);
  ForwardSurface f{grid, curve(grid, 0.03, 0.01)};
  std::vector<ForwardSurface> g{ForwardSurface(grid, curve(grid, 0.045, 0.008)),
                                ForwardSurface(grid, curve(grid, 0.07, 0.004))};
  IntensityMatrixProcess absorbing =
      IntensityMatrixProcess::constant(mat({{0, 0.12, 0.03}, {0.2, 0, 0.08}, {0, 0, 0}}), true);
  IntensityMatrixProcess open = IntensityMatrixProcess::constant(mat({{0, 0.12}, {0.2, 0}}), false);
  std::vector<double> delta = std::vector<double>(grid.nodes(), 0.35);

  DriftInputs inputs(RecoveryKind scheme, int rating) const {
    DriftInputs in;
    in.scheme = scheme;
    in.rating = rating;
    in.model = &model;
    in.vol = &vol;
    in.riskfree = &f;
    in.ratings = g;
    in.generator = scheme == RecoveryKind::MultipleDefaults ? &open : &absorbing;
    in.delta = delta;
    return in;
  }
};

constexpr RecoveryKind kSchemes[] = {RecoveryKind::MarketValue, RecoveryKind::Treasury, RecoveryKind::Par,
                                     RecoveryKind::MultipleDefaults};

double max_diff(const DriftSurface& a, const DriftSurface& b) {
  double out = 0.0;
  for (int t = 0; t < a.grid().nodes(); ++t)
    for (int theta = t; theta < a.grid().nodes(); ++theta) out = std::max(out, std::abs(a.at(t, theta) - b.at(t, theta)));
  return out;
}

}  // namespace

TEST_CASE("zero volatility gives zero risk-free drift") {
  const TimeGrid g(1.0, 20);
  const auto alpha = riskfree_drift(mixed_2d(), VolatilitySurface::constant(g, vec({0.0, 0.0})));
  CHECK(alpha.max_abs() == 0.0);
}

TEST_CASE("Gaussian drift is q s^2 (theta - t)") {
  const TimeGrid g(2.0, 40);
  const double q = 0.3, s = 0.02;
  const auto alpha = riskfree_drift(LevyModel::brownian(mat({{q}})), VolatilitySurface::constant(g, vec({s})));
  for (int t = 0; t < g.nodes(); t += 7)
    for (int theta = t; theta < g.nodes(); ++theta)
      CHECK(alpha.at(t, theta) == doctest::Approx(q * s * s * (g.time(theta) - g.time(t))).epsilon(1e-12));
}

TEST_CASE("single-atom drift is the maturity derivative of the exponent") {
  const TimeGrid g(1.0, 50);
  const double y = 2.0, rho = 3.0, s = 0.05;
  const auto alpha = riskfree_drift(single_large_atom(), VolatilitySurface::constant(g, vec({s})));
  for (int t = 0; t < g.nodes(); t += 5)
    for (int theta = t; theta < g.nodes(); ++theta) {
      const double big_sigma = s * (g.time(theta) - g.time(t));
      const auto j = [&](double u) { return rho * (std::exp(-u * y) - 1.0); };
      const double h = 1e-6;
      const double fd = (j(big_sigma + s * h) - j(big_sigma - s * h)) / (2.0 * h);
      CHECK(alpha.at(t, theta) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("risk-free drift satisfies the integral condition within the trapezoid budget") {
  const Market m;
  const auto alpha = riskfree_drift(m.model, m.vol);
  const LevyDriftTable table(m.model, m.vol);
  double worst = 0.0;
  for (int t = 0; t < m.grid.nodes(); ++t) {
    double integral = 0.0;
    for (int theta = t + 1; theta < m.grid.nodes(); ++theta) {
      integral += 0.5 * m.grid.dt() * (alpha.at(t, theta - 1) + alpha.at(t, theta));
      worst = std::max(worst, std::abs(integral - table.exponent(t, theta)));
    }
  }
  const double scale = std::max(alpha.max_abs(), m.vol.max_norm());
  CHECK(worst <= residual_tolerance(m.grid, scale));
}

TEST_CASE("no migration reduces every scheme to the risk-free drift") {
  Market m;
  m.absorbing = IntensityMatrixProcess::constant(Mat::Zero(3, 3), true);
  m.open = IntensityMatrixProcess::constant(Mat::Zero(2, 2), false);
  const auto base = riskfree_drift(m.model, m.vol);
  for (auto scheme : kSchemes)
    for (int i = 0; i < 2; ++i) CHECK(max_diff(defaultable_drift(m.inputs(scheme, i)), base) == 0.0);
}

TEST_CASE("two-state market value drift has no extra term") {
  const TimeGrid g(1.0, 20);
  const LevyModel model = mixed_2d();
  const auto vol = VolatilitySurface::exponential(g, vec({0.01, 0.01}), 0.2);
  const auto f = ForwardSurface::flat(g, 0.03);
  const std::vector<ForwardSurface> gs{ForwardSurface::flat(g, 0.05)};
  const auto gen = IntensityMatrixProcess::constant(mat({{0, 0.04}, {0, 0}}));
  const std::vector<double> delta(g.nodes(), 0.5);
  DriftInputs in{RecoveryKind::MarketValue, 0, &model, &vol, &f, gs, &gen, delta};
  CHECK(max_diff(defaultable_drift(in), riskfree_drift(model, vol)) == 0.0);
}

TEST_CASE("two-state Treasury drift adds the recovery term") {
  const TimeGrid g(1.0, 20);
  const LevyModel model = mixed_2d();
  const auto vol = VolatilitySurface::exponential(g, vec({0.01, 0.01}), 0.2);
  const double cf = 0.03, cg = 0.05, lambda = 0.04, delta = 0.4;
  const auto f = ForwardSurface::flat(g, cf);
  const std::vector<ForwardSurface> gs{ForwardSurface::flat(g, cg)};
  const auto gen = IntensityMatrixProcess::constant(mat({{0, lambda}, {0, 0}}));
  const std::vector<double> deltas(g.nodes(), delta);
  DriftInputs in{RecoveryKind::Treasury, 0, &model, &vol, &f, gs, &gen, deltas};
  const auto alpha = defaultable_drift(in);
  const auto base = riskfree_drift(model, vol);
  for (int t = 0; t < g.nodes(); ++t)
    for (int theta = t; theta < g.nodes(); ++theta) {
      const double extra = delta * lambda * (cg - cf) * std::exp((cg - cf) * (g.time(theta) - g.time(t)));
      CHECK(alpha.at(t, theta) - base.at(t, theta) == doctest::Approx(extra).epsilon(1e-12));
    }
  // the same term as the maturity derivative of the integral form delta lambda (B / D - 1)
  for (int t = 0; t < g.nodes(); t += 4)
    for (int theta = t + 1; theta + 1 < g.nodes(); ++theta) {
      const auto rhs = [&](double th) { return delta * lambda * (std::exp((cg - cf) * (th - g.time(t))) - 1.0); };
      const double fd = (rhs(g.time(theta) + 1e-6) - rhs(g.time(theta) - 1e-6)) / 2e-6;
      CHECK(alpha.at(t, theta) - base.at(t, theta) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("synthesized drifts satisfy the integral condition") {
  const Market m;
  for (auto scheme : kSchemes)
    for (int i = 0; i < 2; ++i) {
      const auto in = m.inputs(scheme, i);
      const auto alpha = defaultable_drift(in);
      const auto res = condition_residual(in, alpha);
      CAPTURE(to_string(scheme));
      CAPTURE(i);
      CHECK(res.max_abs() <= residual_tolerance(m.grid, residual_scale(in, alpha)));
      for (int t = 0; t < m.grid.nodes(); ++t) CHECK(res.at(t, t) == 0.0);
    }
}

TEST_CASE("perturbed drift cell shows up in the residual") {
  const Market m;
  const auto in = m.inputs(RecoveryKind::Treasury, 1);
  auto alpha = defaultable_drift(in);
  const double eps = 1e-3;
  alpha.at(10, 30) += eps;
  const auto res = condition_residual(in, alpha);
  CHECK(std::abs(res.at(10, 30)) >= 0.9 * eps * m.grid.dt() / 2.0);
  CHECK(std::abs(res.at(10, 40)) >= 0.9 * eps * m.grid.dt());
}

TEST_CASE("zero coefficients give a zero residual") {
  Market m;
  m.vol = VolatilitySurface::constant(m.grid, vec({0.0, 0.0}));
  m.absorbing = IntensityMatrixProcess::constant(Mat::Zero(3, 3), true);
  const DriftSurface alpha(m.grid);
  CHECK(condition_residual(m.inputs(RecoveryKind::MarketValue, 0), alpha).max_abs() == 0.0);
}

TEST_CASE("derivative and integral forms agree") {
  const Market m;
  const LevyDriftTable table(m.model, m.vol);
  for (auto scheme : kSchemes) {
    const auto in = m.inputs(scheme, 0);
    const auto alpha = defaultable_drift(in);
    std::vector<double> buffer, rhs(m.grid.nodes());
    double worst = 0.0;
    for (int t = 0; t < m.grid.nodes(); t += 3) {
      const SchemeRow row = scheme_row(in, t, buffer);
      std::fill(rhs.begin(), rhs.end(), 0.0);
      add_scheme_integral(row, rhs);
      for (int theta = t; theta < m.grid.nodes(); ++theta) rhs[theta] += table.exponent(t, theta);
      for (int theta = t + 1; theta + 1 < m.grid.nodes(); ++theta) {
        const double fd = (rhs[theta + 1] - rhs[theta - 1]) / (2.0 * m.grid.dt());
        worst = std::max(worst, std::abs(fd - alpha.at(t, theta)));
      }
    }
    CAPTURE(to_string(scheme));
    CHECK(worst <= 10.0 * m.grid.dt() * m.grid.dt());
  }
}

TEST_CASE("zero recovery makes Treasury and par coincide") {
  Market m;
  std::fill(m.delta.begin(), m.delta.end(), 0.0);
  for (int i = 0; i < 2; ++i)
    CHECK(max_diff(defaultable_drift(m.inputs(RecoveryKind::Treasury, i)),
                   defaultable_drift(m.inputs(RecoveryKind::Par, i))) <= 1e-14);
}

TEST_CASE("market value and multiple defaults share the migration drift") {
  const Market m;
  for (int i = 0; i < 2; ++i)
    CHECK(max_diff(defaultable_drift(m.inputs(RecoveryKind::MarketValue, i)),
                   defaultable_drift(m.inputs(RecoveryKind::MultipleDefaults, i))) == 0.0);
}

TEST_CASE("default state is not a rating") {
  const Market m;
  CHECK_THROWS_AS(defaultable_drift(m.inputs(RecoveryKind::MarketValue, 2)), ModelError);
  auto in = m.inputs(RecoveryKind::MultipleDefaults, 0);
  in.generator = &m.absorbing;
  CHECK_THROWS_AS(defaultable_drift(in), ModelError);
}
