#include <doctest.h>

#include "fixtures.hpp"
#include "lhc/error.hpp"
#include "lhc/pricing.hpp"

using namespace lhc;
using namespace lhc::test;

namespace {

struct FlatMarket {
  TimeGrid grid{1.0, 20};
  double r = 0.03;
  ForwardSurface f = ForwardSurface::flat(grid, r);
  std::vector<ForwardSurface> g{ForwardSurface::flat(grid, 0.05), ForwardSurface::flat(grid, 0.08)};

  RecoveryScheme scheme(RecoveryKind kind) const {
    RecoveryScheme s;
    s.kind = kind;
    s.deltas = {RecoverySchedule::constant(0.4, grid.nodes()), RecoverySchedule::constant(0.25, grid.nodes())};
    if (kind == RecoveryKind::MultipleDefaults) s.loss = RecoverySchedule::constant(0.5, grid.nodes());
    return s;
  }

  DefaultableBondPath price(RecoveryKind kind, const RatingPath& chain, std::span<const double> v = {}) const {
    PathMarket pm{&f, g, &chain, v};
    return price_path(scheme(kind), pm, grid.steps());
  }
};

RatingPath defaulting_path(double tau) {
  RatingPath p(0, 3, 2);
  p.add_jump(0.1, 1);
  p.add_jump(tau, 2);
  return p;
}

}  // namespace

TEST_CASE("recovery schemes are validated") {
  const int n = 5;
  RecoveryScheme s;
  s.kind = RecoveryKind::Treasury;
  s.deltas = {RecoverySchedule({0.1, 0.2, 0.2, 0.2, 0.2})};
  CHECK_THROWS_AS(s.validate(1, n), ModelError);
  s.kind = RecoveryKind::MarketValue;
  CHECK_NOTHROW(s.validate(1, n));
  s.deltas = {RecoverySchedule::constant(1.2, n)};
  CHECK_THROWS_AS(s.validate(1, n), ModelError);
  s.deltas = {RecoverySchedule::constant(0.2, n)};
  CHECK_THROWS_AS(s.validate(2, n), ModelError);
  s.kind = RecoveryKind::MultipleDefaults;
  s.loss = RecoverySchedule::constant(0.3, n);
  s.cox_intensity = -1.0;
  CHECK_THROWS_AS(s.validate(1, n), ModelError);
}

TEST_CASE("survival pays face value in every scheme") {
  const FlatMarket m;
  RatingPath alive(0, 3, 2);
  alive.add_jump(0.3, 1);
  for (auto kind : {RecoveryKind::MarketValue, RecoveryKind::Treasury, RecoveryKind::Par}) {
    const auto d = m.price(kind, alive);
    CHECK(d.terminal_payoff == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.value[0] == doctest::Approx(std::exp(-0.05)).epsilon(1e-14));
    CHECK(d.value[10] == doctest::Approx(std::exp(-0.08 * 0.5)).epsilon(1e-14));
    CHECK(d.rating[10] == 1);
  }
}

TEST_CASE("Treasury recovery after default") {
  const FlatMarket m;
  const double tau = 0.43;
  const auto d = m.price(RecoveryKind::Treasury, defaulting_path(tau));
  for (int k = 9; k < m.grid.nodes(); ++k)
    CHECK(d.value[k] == doctest::Approx(0.25 * std::exp(-m.r * (1.0 - m.grid.time(k)))).epsilon(1e-14));
  CHECK(d.terminal_payoff == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d.value[8] == doctest::Approx(std::exp(-0.08 * 0.6)).epsilon(1e-14));
}

TEST_CASE("par recovery after default") {
  const FlatMarket m;
  const double tau = 0.45;
  const auto d = m.price(RecoveryKind::Par, defaulting_path(tau));
  CHECK(d.value[9] == doctest::Approx(0.25).epsilon(1e-14));
  for (int k = 9; k < m.grid.nodes(); ++k)
    CHECK(d.value[k] == doctest::Approx(0.25 * std::exp(m.r * (m.grid.time(k) - tau))).epsilon(1e-13));
}

TEST_CASE("market value recovery uses the pre-default price before the jump") {
  const FlatMarket m;
  const double tau = 0.43;
  const auto d = m.price(RecoveryKind::MarketValue, defaulting_path(tau));
  const double before = std::exp(-0.08 * (1.0 - 0.40));
  for (int k = 9; k < m.grid.nodes(); ++k)
    CHECK(d.value[k] == doctest::Approx(0.25 * before * std::exp(m.r * (m.grid.time(k) - tau))).epsilon(1e-13));
}

TEST_CASE("multiple defaults factorize into loss factor times pre-default price") {
  const FlatMarket m;
  RatingPath chain(0, 2, -1);
  chain.add_jump(0.37, 1);
  std::vector<double> v(m.grid.nodes(), 1.0);
  for (int k = 5; k < m.grid.nodes(); ++k) v[k] = 0.5;
  for (int k = 12; k < m.grid.nodes(); ++k) v[k] = 0.25;
  const auto d = m.price(RecoveryKind::MultipleDefaults, chain, v);
  for (int k = 0; k < m.grid.nodes(); ++k) {
    const int state = chain.state_at(m.grid.time(k));
    CHECK(std::abs(d.value[k] - v[k] * bond_price(m.g[state], k, m.grid.steps())) <= 1e-14);
  }
}

TEST_CASE("scheme and chain must agree on the default state") {
  const FlatMarket m;
  const std::vector<double> v(m.grid.nodes(), 1.0);
  CHECK_THROWS_AS(m.price(RecoveryKind::MultipleDefaults, defaulting_path(0.5), v), ModelError);
  CHECK_THROWS_AS(m.price(RecoveryKind::Par, RatingPath(0, 2, -1)), ModelError);
}

TEST_CASE("payoff after maturity rolls at the bank account") {
  const FlatMarket m;
  RatingPath alive(0, 3, 2);
  PathMarket pm{&m.f, m.g, &alive, {}};
  const auto d = price_path(m.scheme(RecoveryKind::Par), pm, 10);
  CHECK(d.value[15] == doctest::Approx(std::exp(m.r * 0.25)).epsilon(1e-14));
  CHECK(d.discounted[15] == doctest::Approx(d.discounted[10]).epsilon(1e-15));
}

TEST_CASE("loss process update") {
  CHECK(update_loss_process(0.8, 0.3, false) == 0.8);
  CHECK(update_loss_process(0.8, 1.0, true) == 0.0);
  CHECK(update_loss_process(0.8, 0.25, true) == doctest::Approx(0.6));
}

TEST_CASE("mean loss factor decays at L gamma") {
  const TimeGrid g(1.0, 10);
  const double loss = 0.4, gamma = 1.5;
  const std::vector<double> gam(g.nodes(), gamma);
  const auto sched = RecoverySchedule::constant(loss, g.nodes());
  std::vector<double> v;
  for (std::uint64_t p = 0; p < 20000; ++p) {
    RandomStream rng(3, p, StreamTag::Cox);
    v.push_back(simulate_cox(gam, sched, g, rng).loss_factor.back());
  }
  const Moments mo = moments(v);
  CHECK(std::abs(mo.mean - std::exp(-loss * gamma)) <= 4.0 * mo.se);
  for (double x : v) CHECK((x >= 0.0 && x <= 1.0));
}

TEST_CASE("thinning accepts nothing at zero intensity") {
  RandomStream rng(1, 0, StreamTag::Cox);
  CoxClock clock(rng);
  std::vector<double> times;
  CHECK(clock.advance(0.0, 1.0, 0.0, 0.0, times) == 0);
  CHECK(times.empty());
}

TEST_CASE("ex-dividend price closed forms") {
  const auto rate = [](double) { return 0.03; };
  const double r = 0.03, lambda = 0.05;
  const auto gen = IntensityMatrixProcess::constant(mat({{0, lambda}, {0, 0}}));
  const std::vector<double> zero{0.0}, full{1.0};
  CHECK(ex_dividend_price(gen, rate, zero, 0, 0.4, 0.4) == 1.0);
  CHECK(ex_dividend_price(gen, rate, zero, 0, 0.2, 1.7) == doctest::Approx(std::exp(-(r + lambda) * 1.5)).epsilon(1e-9));
  const double full_recovery = (lambda + r * std::exp(-(r + lambda) * 1.5)) / (r + lambda);
  CHECK(ex_dividend_price(gen, rate, full, 0, 0.2, 1.7) == doctest::Approx(full_recovery).epsilon(1e-9));
  const auto no_rate = [](double) { return 0.0; };
  CHECK(ex_dividend_price(gen, no_rate, full, 0, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ex-dividend price with full recovery and no rates is default insensitive") {
  const auto gen = IntensityMatrixProcess::constant(mat({{0, 0.3, 0.1}, {0.4, 0, 0.25}, {0, 0, 0}}));
  const std::vector<double> full{1.0, 1.0};
  CHECK(ex_dividend_price(gen, [](double) { return 0.0; }, full, 1, 0.0, 3.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ex-dividend pricing refuses random or non-absorbing generators") {
  auto gen = IntensityMatrixProcess::constant(mat({{0, 0.1}, {0, 0}}));
  const std::vector<double> d{0.2};
  const auto rate = [](double) { return 0.01; };
  auto random_gen = gen;
  random_gen.mark_path_dependent();
  CHECK_THROWS_AS(ex_dividend_price(random_gen, rate, d, 0, 0.0, 1.0), UnsupportedModeError);
  const auto open = IntensityMatrixProcess::constant(mat({{0, 0.1}, {0.1, 0}}), false);
  CHECK_THROWS_AS(ex_dividend_price(open, rate, d, 0, 0.0, 1.0), UnsupportedModeError);
}

TEST_CASE("short spread limits") {
  const double r = 0.03, lambda = 0.05;
  const auto gen = IntensityMatrixProcess::constant(mat({{0, lambda}, {0, 0}}));
  const auto rate = [r](double) { return r; };
  auto limit = [&](double delta) {
    const std::vector<double> d{delta};
    return short_spread_limit([&](double th) { return ex_dividend_price(gen, rate, d, 0, 0.5, th, 50); }, 0.5, 1e-3);
  };
  CHECK(limit(0.0) == doctest::Approx(r + lambda).epsilon(0.01));
  CHECK(limit(1.0) == doctest::Approx(r).epsilon(0.01));
  CHECK(limit(0.4) == doctest::Approx(r + 0.6 * lambda).epsilon(0.01));
  const auto safe = IntensityMatrixProcess::constant(Mat::Zero(2, 2));
  const std::vector<double> d{0.0};
  CHECK(short_spread_limit([&](double th) { return ex_dividend_price(safe, rate, d, 0, 0.5, th, 50); }, 0.5, 1e-3) ==
        doctest::Approx(r).epsilon(1e-9));
}
