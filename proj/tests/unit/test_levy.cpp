#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "lhc/error.hpp"
#include "lhc/levy.hpp"

using namespace lhc;
using namespace lhc::test;

namespace {

// Direct evaluation of the Levy-Khintchine exponent, independent of the library.
double reference_exponent(const LevyModel& m, const Vec& u) {
  double j = -u.dot(m.drift()) + 0.5 * u.dot(m.covariance() * u);
  for (const auto& a : m.atoms()) {
    const double uy = u.dot(a.jump);
    j += a.rate * (std::exp(-uy) - 1.0 + (a.jump.norm() <= 1.0 ? uy : 0.0));
  }
  return j;
}

Vec central_difference(const LevyModel& m, const Vec& u, double h) {
  Vec g(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    Vec up = u, dn = u;
    up[k] += h;
    dn[k] -= h;
    g[k] = (m.laplace_exponent(up) - m.laplace_exponent(dn)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("exponent vanishes at the origin") {
  for (const auto& m : {brownian_2d(), mixed_2d()}) CHECK(m.laplace_exponent(Vec::Zero(2)) == 0.0);
  CHECK(single_large_atom().laplace_exponent(vec({0.0})) == 0.0);
}

TEST_CASE("Brownian exponent is half the quadratic form") {
  const LevyModel m = LevyModel::brownian(mat({{0.04}}));
  CHECK(m.laplace_exponent(vec({2.0})) == doctest::Approx(0.08).epsilon(1e-15));
}

TEST_CASE("single large atom closed forms") {
  const LevyModel m = single_large_atom();
  CHECK(m.laplace_exponent(vec({0.5})) == doctest::Approx(3.0 * (std::exp(-1.0) - 1.0)).epsilon(1e-14));
  CHECK(m.laplace_exponent(vec({0.5})) == doctest::Approx(-1.896362).epsilon(1e-6));
  CHECK(m.laplace_exponent_gradient(vec({0.5}))[0] == doctest::Approx(-6.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(m.laplace_exponent_gradient(vec({0.5}))[0] == doctest::Approx(-2.207277).epsilon(1e-6));
  CHECK(m.tail_transform(vec({0.0})) == doctest::Approx(3.0));
  CHECK(m.tail_transform(vec({1.0})) == doctest::Approx(0.406006).epsilon(1e-6));
}

TEST_CASE("tail transform ignores small atoms") {
  const LevyModel m(vec({0.0}), mat({{0.0}}), {{vec({0.7}), 2.0}});
  CHECK(m.tail_transform(vec({1.3})) == 0.0);
}

TEST_CASE("exponent matches the defining formula") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const LevyModel m = mixed_2d();
  for (int k = 0; k < 50; ++k) {
    const Vec x = vec({u(rng), u(rng)});
    CHECK(m.laplace_exponent(x) == doctest::Approx(reference_exponent(m, x)).epsilon(1e-13));
  }
}

TEST_CASE("gradient at the origin is minus the mean") {
  const LevyModel m = mixed_2d();
  const Vec g = m.laplace_exponent_gradient(Vec::Zero(2));
  Vec mean = m.drift();
  for (const auto& a : m.atoms())
    if (!a.is_small()) mean += a.rate * a.jump;
  CHECK((g + mean).norm() < 1e-15);
  CHECK((m.mean() - mean).norm() < 1e-15);
}

TEST_CASE("Brownian gradient is Q u") {
  const LevyModel m = brownian_2d();
  const Vec u = vec({0.3, -1.2});
  CHECK((m.laplace_exponent_gradient(u) - m.covariance() * u).norm() < 1e-15);
}

TEST_CASE("gradient agrees with central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& m : {brownian_2d(), mixed_2d()}) {
    for (int k = 0; k < 100; ++k) {
      const Vec x = vec({u(rng), u(rng)});
      const Vec g = m.laplace_exponent_gradient(x);
      CHECK((g - central_difference(m, x, 1e-5)).norm() / (1.0 + g.norm()) <= 1e-6);
    }
  }
}

TEST_CASE("directional derivative equals the gradient pairing") {
  const LevyModel m = mixed_2d();
  const Vec u = vec({0.4, 0.9});
  const Vec v = vec({-0.2, 1.7});
  const double expected = m.laplace_exponent_gradient(u).dot(v);
  CHECK(m.laplace_exponent_directional(std::span<const double>(u.data(), 2), std::span<const double>(v.data(), 2)) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("exponent is convex along rays") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0), s(0.0, 1.0);
  const LevyModel m = mixed_2d();
  for (int k = 0; k < 100; ++k) {
    const Vec x = vec({u(rng), u(rng)});
    const double w = s(rng);
    CHECK(m.laplace_exponent(Vec(w * x)) <= w * m.laplace_exponent(x) + 1e-12);
  }
}

TEST_CASE("overflowing exponent is a domain error") {
  const LevyModel m(vec({0.0}), mat({{0.0}}), {{vec({-2.0}), 1.0}});
  CHECK_THROWS_AS(m.laplace_exponent(vec({500.0})), DomainError);
  CHECK_THROWS_AS(m.laplace_exponent_gradient(vec({500.0})), DomainError);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(LevyModel::brownian(mat({{1.0, 0.0}, {0.0, -0.5}})), ModelError);
  CHECK_THROWS_AS(LevyModel::brownian(mat({{1.0, 0.3}, {0.1, 1.0}})), ModelError);
  CHECK_THROWS_AS(LevyModel(vec({0.0}), mat({{0.0}}), {{vec({1.0}), -1.0}}), ModelError);
  CHECK_THROWS_AS(LevyModel(vec({0.0}), mat({{0.0}}), {{vec({1.0, 2.0}), 1.0}}), ModelError);
}

TEST_CASE("semidefinite covariance is factorized") {
  const LevyModel m = LevyModel::brownian(mat({{1.0, 1.0}, {1.0, 1.0}}));
  const Mat& f = m.noise_factor();
  CHECK((f * f.transpose() - m.covariance()).norm() < 1e-12);
}

TEST_CASE("zero model has zero increments") {
  const LevyModel m(Vec::Zero(2), Mat::Zero(2, 2), {});
  const auto p = simulate_increments(m, TimeGrid(1.0, 10), 3);
  CHECK(p.increments.norm() == 0.0);
  CHECK(p.jump_events.empty());
}

TEST_CASE("pure drift increments are exact") {
  const LevyModel m(vec({1.0}), mat({{0.0}}), {});
  const auto p = simulate_increments(m, TimeGrid(2.0, 4), 3);
  for (Eigen::Index k = 0; k < p.increments.rows(); ++k) CHECK(p.increments(k, 0) == 0.5);
}

TEST_CASE("small atoms are compensated") {
  const LevyModel m(vec({0.0}), mat({{0.0}}), {{vec({0.5}), 2.0}});
  const auto p = simulate_increments(m, TimeGrid(1.0, 1), 1);
  const double jumps = static_cast<double>(p.jump_events.size());
  CHECK(p.increments(0, 0) == doctest::Approx(0.5 * jumps - 1.0).epsilon(1e-14));
}

TEST_CASE("compound Poisson moments") {
  const LevyModel m = single_large_atom();
  const TimeGrid grid(1.0, 10);
  std::vector<double> z;
  const int n = 40000;
  for (int p = 0; p < n; ++p) z.push_back(simulate_increments(m, grid, 99, p).value_at(grid.steps())[0]);
  const Moments mo = moments(z);
  CHECK(std::abs(mo.mean - 6.0) <= 4.0 * mo.se);
  std::vector<double> sq;
  for (double v : z) sq.push_back((v - 6.0) * (v - 6.0));
  const Moments var = moments(sq);
  CHECK(std::abs(var.mean - 12.0) <= 4.0 * var.se);
}

TEST_CASE("jump times are exact and inside their steps") {
  const LevyModel m = mixed_2d();
  const TimeGrid grid(1.0, 8);
  const auto p = simulate_increments(m, grid, 4, 2);
  REQUIRE(!p.jump_events.empty());
  for (std::size_t k = 1; k < p.jump_events.size(); ++k)
    CHECK(p.jump_events[k].time >= p.jump_events[k - 1].time);
  for (const auto& e : p.jump_events) {
    CHECK(e.time > 0.0);
    CHECK(e.time < 1.0);
  }
}

TEST_CASE("increments over disjoint steps are uncorrelated") {
  const LevyModel m = mixed_2d();
  const TimeGrid grid(1.0, 2);
  std::vector<double> prod, a, b;
  for (int p = 0; p < 20000; ++p) {
    const auto inc = simulate_increments(m, grid, 8, p);
    a.push_back(inc.increments(0, 0));
    b.push_back(inc.increments(1, 0));
  }
  const double ma = moments(a).mean, mb = moments(b).mean;
  for (std::size_t k = 0; k < a.size(); ++k) prod.push_back((a[k] - ma) * (b[k] - mb));
  const Moments c = moments(prod);
  CHECK(std::abs(c.mean) <= 4.0 * c.se);
}

TEST_CASE("same seed gives identical paths") {
  const LevyModel m = mixed_2d();
  const TimeGrid grid(1.0, 20);
  const auto a = simulate_increments(m, grid, 123, 7);
  const auto b = simulate_increments(m, grid, 123, 7);
  CHECK(a.increments == b.increments);
  REQUIRE(a.jump_events.size() == b.jump_events.size());
  for (std::size_t k = 0; k < a.jump_events.size(); ++k) CHECK(a.jump_events[k].time == b.jump_events[k].time);
  const auto c = simulate_increments(m, grid, 123, 8);
  CHECK(a.increments != c.increments);
}

TEST_CASE("integrability conditions are reported as satisfied") { CHECK(mixed_2d().integrability_conditions_hold()); }
