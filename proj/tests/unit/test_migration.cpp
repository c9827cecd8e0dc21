#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "lhc/error.hpp"
#include "lhc/migration.hpp"

using namespace lhc;
using namespace lhc::test;

namespace {

Mat three_state() { return mat({{0, 0.3, 0.1}, {0.4, 0, 0.25}, {0, 0, 0}}); }

}  // namespace

TEST_CASE("generator diagonals are recomputed from the off-diagonals") {
  const auto gen = IntensityMatrixProcess::constant(three_state());
  const Mat l = gen.at(0.3);
  CHECK(l(0, 0) == doctest::Approx(-0.4));
  CHECK(l(1, 1) == doctest::Approx(-0.65));
  CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  CHECK(gen.ratings() == 2);
  CHECK(gen.default_state() == 2);
  CHECK(gen.max_exit_rate() == doctest::Approx(0.65));
}

TEST_CASE("invalid generators are rejected") {
  CHECK_THROWS_AS(IntensityMatrixProcess::constant(mat({{0, -0.1}, {0, 0}})), ModelError);
  CHECK_THROWS_AS(IntensityMatrixProcess::constant(mat({{0, 0.1}, {0.2, 0}})), ModelError);
  CHECK_THROWS_AS(IntensityMatrixProcess::constant(mat({{0, 0.1, 0.0}, {0.2, 0, 0.1}})), ModelError);
  CHECK_THROWS_AS(IntensityMatrixProcess::piecewise({0.0, 0.0}, {three_state(), three_state()}), ModelError);
  CHECK_NOTHROW(IntensityMatrixProcess::constant(mat({{0, 0.1}, {0.2, 0}}), false));
}

TEST_CASE("piecewise generator values and integrals") {
  const auto gen = IntensityMatrixProcess::piecewise({0.0, 0.5}, {mat({{0, 0.2}, {0, 0}}), mat({{0, 0.6}, {0, 0}})});
  CHECK(gen.entry(0, 1, 0.49) == 0.2);
  CHECK(gen.entry(0, 1, 0.5) == 0.6);
  CHECK(gen.left_limit(0.5)(0, 1) == 0.2);
  CHECK(gen.integral(0, 1, 0.25, 1.0) == doctest::Approx(0.2 * 0.25 + 0.6 * 0.5).epsilon(1e-15));
}

TEST_CASE("sampled generator interpolates linearly") {
  const TimeGrid g(1.0, 2);
  const auto gen = IntensityMatrixProcess::sampled(
      g, {mat({{0, 0.0}, {0, 0}}), mat({{0, 0.2}, {0, 0}}), mat({{0, 0.4}, {0, 0}})});
  CHECK(gen.entry(0, 1, 0.25) == doctest::Approx(0.1));
  CHECK(gen.integral(0, 1, 0.0, 1.0) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("rating path accessors") {
  RatingPath p(0, 3, 2);
  p.add_jump(0.2, 1);
  p.add_jump(0.5, 0);
  p.add_jump(0.7, 2);
  CHECK(p.state_at(0.1) == 0);
  CHECK(p.state_at(0.2) == 1);
  CHECK(p.previous_state_at(0.1) == 0);
  CHECK(p.previous_state_at(0.6) == 1);
  CHECK(p.default_time() == 0.7);
  CHECK(p.rating_before_default() == 0);
  CHECK(p.transition_count(0, 1, 1.0) == 1);
  CHECK(p.transition_count(1, 0, 0.4) == 0);
  CHECK(p.indicator(2, 0.8) == 1);
  CHECK_THROWS_AS(p.add_jump(0.1, 1), ModelError);
}

TEST_CASE("zero generator never jumps") {
  const auto gen = IntensityMatrixProcess::constant(Mat::Zero(3, 3));
  for (std::uint64_t p = 0; p < 100; ++p) {
    const auto path = simulate_chain(gen, 1, TimeGrid(5.0, 10), 3, p);
    CHECK(path.jump_times().empty());
    CHECK(path.state_at(5.0) == 1);
  }
}

TEST_CASE("two-state default time is exponential") {
  const double lambda = 0.8;
  const auto gen = IntensityMatrixProcess::constant(mat({{0, lambda}, {0, 0}}));
  std::vector<double> tau;
  for (std::uint64_t p = 0; p < 20000; ++p) {
    RandomStream rng(17, p, StreamTag::Chain);
    const auto path = simulate_chain(gen, 0, 100.0, rng);
    REQUIRE(path.default_time().has_value());
    tau.push_back(*path.default_time());
  }
  const Moments m = moments(tau);
  CHECK(std::abs(m.mean - 1.0 / lambda) <= 4.0 * m.se);
}

TEST_CASE("survival under a time-varying intensity") {
  const TimeGrid g(2.0, 4);
  const auto gen = IntensityMatrixProcess::sampled(
      g, {mat({{0, 0.1}, {0, 0}}), mat({{0, 0.5}, {0, 0}}), mat({{0, 0.9}, {0, 0}}), mat({{0, 0.3}, {0, 0}}),
          mat({{0, 0.2}, {0, 0}})});
  const int n = 20000;
  int survived = 0;
  for (std::uint64_t p = 0; p < n; ++p) survived += simulate_chain(gen, 0, g, 23, p).state_at(1.7) == 0 ? 1 : 0;
  const double expected = std::exp(-gen.integral(0, 1, 0.0, 1.7));
  const double freq = static_cast<double>(survived) / n;
  CHECK(std::abs(freq - expected) <= 4.0 * std::sqrt(expected * (1.0 - expected) / n));
}

TEST_CASE("empirical state law matches the forward equation") {
  const TimeGrid g(1.0, 10);
  const auto gen = IntensityMatrixProcess::constant(three_state());
  const auto sol = kolmogorov_forward(gen, 0, g, 4);
  const int n = 20000;
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (std::uint64_t p = 0; p < n; ++p) counts[simulate_chain(gen, 0, g, 5, p).state_at(1.0)] += 1.0;
  for (int j = 0; j < 3; ++j) {
    const double p = sol.at(10)(0, j);
    CHECK(std::abs(counts[j] / n - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
  }
}

TEST_CASE("forward equation starts at the identity and conserves rows") {
  const TimeGrid g(1.0, 20);
  const auto gen = IntensityMatrixProcess::piecewise({0.0, 0.4}, {three_state(), 2.0 * three_state()});
  const auto sol = kolmogorov_forward(gen, 5, g, 2);
  CHECK((sol.at(5) - Mat::Identity(3, 3)).norm() == 0.0);
  for (int u = 5; u < g.nodes(); ++u) {
    CHECK((sol.at(u).rowwise().sum() - Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(sol.at(u).minCoeff() >= -1e-9);
    CHECK(sol.at(u).maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("forward equation matches the matrix exponential") {
  const TimeGrid g(2.0, 40);
  const auto gen = IntensityMatrixProcess::constant(three_state());
  const auto sol = kolmogorov_forward(gen, 0, g);
  for (int u = 0; u < g.nodes(); ++u) {
    const Mat expm = (gen.at(0.0) * g.time(u)).exp();
    CHECK((sol.at(u) - expm).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("two-state forward equation closed form") {
  const TimeGrid g(3.0, 30);
  const double lambda = 0.7;
  const auto sol = kolmogorov_forward(IntensityMatrixProcess::constant(mat({{0, lambda}, {0, 0}})), 6, g, 8);
  for (int u = 6; u < g.nodes(); ++u) {
    const double survive = std::exp(-lambda * (g.time(u) - g.time(6)));
    CHECK(std::abs(sol.at(u)(0, 0) - survive) <= 1e-10);
    CHECK(std::abs(sol.at(u)(0, 1) - (1.0 - survive)) <= 1e-10);
  }
}

TEST_CASE("compensated processes of a jump-free path vanish") {
  const TimeGrid g(1.0, 10);
  const auto gen = IntensityMatrixProcess::constant(Mat::Zero(3, 3));
  const auto m = compensated_martingales(RatingPath(1, 3, 2), gen, g);
  for (const auto& row : m.state)
    for (double v : row) CHECK(v == 0.0);
  for (double v : m.default_process) CHECK(v == 0.0);
}

TEST_CASE("transition martingale jumps by one at each transition") {
  const TimeGrid g(1.0, 10);
  const auto gen = IntensityMatrixProcess::constant(three_state());
  RatingPath p(0, 3, 2);
  p.add_jump(0.33, 1);
  p.add_jump(0.71, 2);
  const auto m = compensated_martingales(p, gen, g);
  const auto& m01 = m.transition[0][1];
  // compensator 0.3 * time spent in state 0
  CHECK(m01[3] == doctest::Approx(-0.3 * 0.3).epsilon(1e-12));
  CHECK(m01[4] == doctest::Approx(1.0 - 0.3 * 0.33).epsilon(1e-12));
  CHECK(m01[10] == doctest::Approx(1.0 - 0.3 * 0.33).epsilon(1e-12));
  const auto& mk = m.default_process;
  CHECK(mk[10] == doctest::Approx(1.0 - 0.1 * 0.33 - 0.25 * (0.71 - 0.33)).epsilon(1e-12));
}

TEST_CASE("compensated default process has mean zero") {
  const TimeGrid g(1.0, 10);
  const auto gen = IntensityMatrixProcess::constant(mat({{0, 0.9}, {0, 0}}));
  std::vector<double> x;
  for (std::uint64_t p = 0; p < 20000; ++p)
    x.push_back(compensated_martingales(simulate_chain(gen, 0, g, 31, p), gen, g).default_process[10]);
  const Moments m = moments(x);
  CHECK(std::abs(m.mean) <= 4.0 * m.se);
}

TEST_CASE("H1 default intensity") {
  CHECK(h1_default_intensity(0.03, 0.0, 0, 0.0) == 0.03);
  CHECK(h1_default_intensity(0.02, 0.5, 0, 0.0) == doctest::Approx(0.04).epsilon(1e-15));
  CHECK_THROWS_AS(h1_default_intensity(0.0, 0.5, 0, 0.0), H1InfeasibleError);
  CHECK_THROWS_AS(h1_default_intensity(0.02, 1.0, 0, 0.0), H1InfeasibleError);
  try {
    h1_default_intensity(-0.01, 0.2, 1, 0.25);
    FAIL("expected an exception");
  } catch (const H1InfeasibleError& e) {
    CHECK(e.rating() == 1);
    CHECK(e.time() == 0.25);
    CHECK(std::string(e.what()).find("g_2") != std::string::npos);
  }
}

TEST_CASE("enforced generator satisfies H1 exactly at the nodes") {
  const TimeGrid g(1.0, 5);
  std::vector<std::vector<double>> spreads(2), deltas(2);
  for (int k = 0; k < g.nodes(); ++k) {
    spreads[0].push_back(0.01 + 0.002 * k);
    spreads[1].push_back(0.03 - 0.001 * k);
    deltas[0].push_back(0.4);
    deltas[1].push_back(0.1 * k / 5.0);
  }
  const auto gen = enforce_h1(g, spreads, deltas, IntensityMatrixProcess::constant(three_state()));
  for (int k = 0; k < g.nodes(); ++k)
    for (int i = 0; i < 2; ++i) {
      const Mat l = gen.at(g.time(k));
      CHECK(spreads[i][k] - l(i, 2) * (1.0 - deltas[i][k]) == doctest::Approx(0.0).scale(1.0).epsilon(1e-16));
      CHECK(l(0, 1) == 0.3);
      CHECK(l.row(i).sum() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    }
  spreads[1][3] = 0.0;
  CHECK_THROWS_AS(enforce_h1(g, spreads, deltas, IntensityMatrixProcess::constant(three_state())), H1InfeasibleError);
}

TEST_CASE("hazard from a distribution function") {
  const double dt = 1e-3, c = 0.7;
  std::vector<double> exp_cdf, uniform_cdf, zero(50, 0.0);
  for (int k = 0; k <= 1500; ++k) {
    exp_cdf.push_back(1.0 - std::exp(-c * k * dt));
    uniform_cdf.push_back(k * dt / 2.0);
  }
  const auto h = hazard_from_distribution(exp_cdf, dt);
  for (double v : h) CHECK(std::abs(v - c) <= 1e-6);
  CHECK(hazard_from_distribution(uniform_cdf, dt)[1000] == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : hazard_from_distribution(zero, dt)) CHECK(v == 0.0);
  std::vector<double> bad{0.0, 0.5, 1.0};
  CHECK_THROWS_AS(hazard_from_distribution(bad, dt), DomainError);
}
