#include "lhc/migration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lhc/error.hpp"

namespace lhc {

// ---------------------------------------------------------------------------
// IntensityMatrixProcess

IntensityMatrixProcess::IntensityMatrixProcess(std::vector<double> knots, std::vector<Mat> matrices,
                                               Interpolation interpolation, bool absorbing_default)
    : absorbing_(absorbing_default),
      interpolation_(interpolation),
      knots_(std::move(knots)),
      matrices_(std::move(matrices)) {
  if (knots_.empty() || knots_.size() != matrices_.size())
    throw ModelError("intensity process needs one matrix per knot");
  for (std::size_t k = 1; k < knots_.size(); ++k)
    if (!(knots_[k] > knots_[k - 1])) throw ModelError("intensity knots must be strictly increasing");
  states_ = static_cast<int>(matrices_.front().rows());
  normalize_and_validate();
}

IntensityMatrixProcess IntensityMatrixProcess::constant(const Mat& matrix, bool absorbing_default) {
  return IntensityMatrixProcess({0.0}, {matrix}, Interpolation::StepLeft, absorbing_default);
}

IntensityMatrixProcess IntensityMatrixProcess::piecewise(std::vector<double> breakpoints, std::vector<Mat> matrices,
                                                         bool absorbing_default) {
  return IntensityMatrixProcess(std::move(breakpoints), std::move(matrices), Interpolation::StepLeft,
                                absorbing_default);
}

IntensityMatrixProcess IntensityMatrixProcess::sampled(const TimeGrid& grid, std::vector<Mat> matrices,
                                                       bool absorbing_default) {
  if (static_cast<int>(matrices.size()) != grid.nodes()) throw ModelError("need one generator per grid node");
  return IntensityMatrixProcess(grid.times(), std::move(matrices), Interpolation::Linear, absorbing_default);
}

void IntensityMatrixProcess::normalize_and_validate() {
  const int min_states = absorbing_ ? 2 : 1;
  if (states_ < min_states) throw ModelError("generator has too few states");
  for (auto& m : matrices_) {
    if (m.rows() != states_ || m.cols() != states_) throw ModelError("generator matrices must be square and equal-sized");
    if (!m.allFinite()) throw ModelError("generator entries must be finite");
    for (int i = 0; i < states_; ++i) {
      double exit = 0.0;
      for (int j = 0; j < states_; ++j) {
        if (i == j) continue;
        if (m(i, j) < 0.0) {
          std::ostringstream msg;
          msg << "negative off-diagonal intensity lambda(" << i + 1 << "," << j + 1 << ") = " << m(i, j);
          throw ModelError(msg.str());
        }
        exit += m(i, j);
      }
      m(i, i) = -exit;
    }
    if (absorbing_ && m.row(states_ - 1).cwiseAbs().maxCoeff() != 0.0)
      throw ModelError("default state must be absorbing (last generator row must vanish)");
  }
}

std::size_t IntensityMatrixProcess::segment(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return 0;
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

Mat IntensityMatrixProcess::at(double t) const {
  const std::size_t s = segment(t);
  if (interpolation_ == Interpolation::StepLeft || s + 1 >= knots_.size() || t <= knots_[s]) return matrices_[s];
  const double w = (t - knots_[s]) / (knots_[s + 1] - knots_[s]);
  return (1.0 - w) * matrices_[s] + w * matrices_[s + 1];
}

Mat IntensityMatrixProcess::left_limit(double t) const {
  if (interpolation_ == Interpolation::StepLeft) {
    const std::size_t s = segment(t);
    if (s > 0 && t == knots_[s]) return matrices_[s - 1];
  }
  return at(t);
}

double IntensityMatrixProcess::entry(int i, int j, double t) const {
  const std::size_t s = segment(t);
  if (interpolation_ == Interpolation::StepLeft || s + 1 >= knots_.size() || t <= knots_[s]) return matrices_[s](i, j);
  const double w = (t - knots_[s]) / (knots_[s + 1] - knots_[s]);
  return (1.0 - w) * matrices_[s](i, j) + w * matrices_[s + 1](i, j);
}

double IntensityMatrixProcess::integral(int i, int j, double s, double t) const {
  if (t < s) return -integral(i, j, t, s);
  double total = 0.0;
  double a = s;
  while (a < t) {
    const std::size_t seg = segment(a);
    double b = t;
    if (seg + 1 < knots_.size() && knots_[seg + 1] < b) b = knots_[seg + 1];
    if (a < knots_.front() && knots_.front() < b) b = knots_.front();
    if (interpolation_ == Interpolation::StepLeft || seg + 1 >= knots_.size() || a < knots_.front()) {
      total += matrices_[seg](i, j) * (b - a);
    } else {
      total += 0.5 * (entry(i, j, a) + entry(i, j, b)) * (b - a);
    }
    a = b;
  }
  return total;
}

double IntensityMatrixProcess::max_exit_rate() const {
  double best = 0.0;
  for (const auto& m : matrices_) best = std::max(best, (-m.diagonal()).maxCoeff());
  return best;
}

// ---------------------------------------------------------------------------
// RatingPath

void RatingPath::add_jump(double time, int to_state) {
  if (!jump_times_.empty() && time < jump_times_.back()) throw ModelError("rating jumps must be time ordered");
  jump_times_.push_back(time);
  jump_states_.push_back(to_state);
}

int RatingPath::state_at(double t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return initial_state_;
  return jump_states_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

int RatingPath::previous_state_at(double t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  const auto count = static_cast<std::size_t>(it - jump_times_.begin());
  if (count == 0) return initial_state_;
  return count == 1 ? initial_state_ : jump_states_[count - 2];
}

std::optional<double> RatingPath::default_time() const {
  if (default_state_ < 0) return std::nullopt;
  for (std::size_t k = 0; k < jump_states_.size(); ++k)
    if (jump_states_[k] == default_state_) return jump_times_[k];
  return std::nullopt;
}

std::optional<int> RatingPath::rating_before_default() const {
  if (default_state_ < 0) return std::nullopt;
  for (std::size_t k = 0; k < jump_states_.size(); ++k)
    if (jump_states_[k] == default_state_) return k == 0 ? initial_state_ : jump_states_[k - 1];
  return std::nullopt;
}

int RatingPath::transition_count(int from, int to, double t) const {
  int count = 0;
  int current = initial_state_;
  for (std::size_t k = 0; k < jump_times_.size() && jump_times_[k] <= t; ++k) {
    if (current == from && jump_states_[k] == to) ++count;
    current = jump_states_[k];
  }
  return count;
}

// ---------------------------------------------------------------------------
// Chain simulation

ChainClock::ChainClock(int initial_state, int states, int default_state, RandomStream& rng, double time_tolerance)
    : state_(initial_state), default_state_(default_state), rng_(&rng), tolerance_(time_tolerance) {
  if (initial_state < 0 || initial_state >= states) throw ModelError("initial rating out of range");
  if (initial_state == default_state) throw ModelError("chain cannot start in the default state");
  remaining_ = -std::log(rng_->uniform());
}

void ChainClock::advance(double a, double b, const Mat& left, const Mat& right, RatingPath& path) {
  if (!(b > a)) return;
  const double width = b - a;
  double s = a;
  while (!absorbed()) {
    const int i = state_;
    const double qa = -left(i, i);
    const double slope = (-right(i, i) - qa) / width;
    auto rate = [&](double u) { return qa + slope * (u - a); };
    // integral of the linear exit rate over [s, x]
    auto hazard = [&](double x) { return 0.5 * (rate(s) + rate(x)) * (x - s); };

    const double available = hazard(b);
    if (available < remaining_) {
      remaining_ -= available;
      return;
    }
    double lo = s;
    double hi = b;
    while (hi - lo > tolerance_) {
      const double mid = 0.5 * (lo + hi);
      if (hazard(mid) >= remaining_) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double when = hi;
    const double w = (when - a) / width;

    double total = 0.0;
    for (int j = 0; j < left.cols(); ++j)
      if (j != i) total += (1.0 - w) * left(i, j) + w * right(i, j);
    const double pick = rng_->uniform() * total;
    int next = -1;
    double acc = 0.0;
    for (int j = 0; j < left.cols(); ++j) {
      if (j == i) continue;
      const double lij = (1.0 - w) * left(i, j) + w * right(i, j);
      if (lij <= 0.0) continue;
      next = j;
      acc += lij;
      if (pick < acc) break;
    }
    if (next < 0) {  // rate vanished exactly at the jump time; no target
      remaining_ = -std::log(rng_->uniform());
      s = when;
      continue;
    }
    path.add_jump(when, next);
    state_ = next;
    remaining_ = -std::log(rng_->uniform());
    s = when;
  }
}

void advance_chain(ChainClock& clock, const IntensityMatrixProcess& generator, double a, double b, RatingPath& path) {
  std::vector<double> cuts{a};
  for (double k : generator.knots())
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  for (std::size_t s = 0; s + 1 < cuts.size() && !clock.absorbed(); ++s) {
    const double lo = cuts[s];
    const double hi = cuts[s + 1];
    const Mat left = generator.at(lo);
    if (generator.interpolation() == Interpolation::StepLeft) {
      clock.advance(lo, hi, left, left, path);
    } else {
      clock.advance(lo, hi, left, generator.left_limit(hi), path);
    }
  }
}

RatingPath simulate_chain(const IntensityMatrixProcess& generator, int initial_state, double horizon,
                          RandomStream& rng) {
  RatingPath path(initial_state, generator.states(), generator.default_state());
  ChainClock clock(initial_state, generator.states(), generator.default_state(), rng, 1e-10 * horizon);
  advance_chain(clock, generator, 0.0, horizon, path);
  return path;
}

RatingPath simulate_chain(const IntensityMatrixProcess& generator, int initial_state, const TimeGrid& grid,
                          std::uint64_t seed, std::uint64_t path_index) {
  RandomStream rng(seed, path_index, StreamTag::Chain);
  return simulate_chain(generator, initial_state, grid.horizon(), rng);
}

// ---------------------------------------------------------------------------
// Kolmogorov forward equation

std::vector<Mat> solve_forward_equation(const IntensityMatrixProcess& generator, double from, double to, int steps) {
  if (steps < 1) throw ModelError("forward equation needs at least one step");
  const int n = generator.states();
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Mat p = Mat::Identity(n, n);
  out.push_back(p);
  const double h = (to - from) / steps;
  for (int k = 0; k < steps; ++k) {
    const double u = from + k * h;
    const Mat l_start = generator.at(u);
    const Mat l_mid = generator.at(u + 0.5 * h);
    const Mat l_end = generator.left_limit(u + h);
    const Mat k1 = p * l_start;
    const Mat k2 = (p + 0.5 * h * k1) * l_mid;
    const Mat k3 = (p + 0.5 * h * k2) * l_mid;
    const Mat k4 = (p + h * k3) * l_end;
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(p);
  }
  return out;
}

ForwardEquationSolution kolmogorov_forward(const IntensityMatrixProcess& generator, int t_index, const TimeGrid& grid,
                                           int substeps) {
  ForwardEquationSolution sol;
  sol.start_node = t_index;
  const int n = generator.states();
  Mat p = Mat::Identity(n, n);
  sol.p.push_back(p);
  for (int k = t_index; k < grid.steps(); ++k) {
    const auto piece = solve_forward_equation(generator, grid.time(k), grid.time(k + 1), substeps);
    p = p * piece.back();
    sol.p.push_back(p);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Compensated martingales

CompensatedMartingales compensated_martingales(const RatingPath& path, const IntensityMatrixProcess& generator,
                                               const TimeGrid& grid) {
  const int n = generator.states();
  if (path.states() != n) throw ModelError("rating path and generator disagree on the state count");
  const int nodes = grid.nodes();
  const int def = generator.default_state();

  CompensatedMartingales out;
  out.state.assign(n, std::vector<double>(nodes, 0.0));
  out.transition.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(nodes, 0.0)));
  if (def >= 0) out.default_process.assign(nodes, 0.0);

  std::vector<double> comp_state(n, 0.0);
  Mat comp_pair = Mat::Zero(n, n);
  double comp_default = 0.0;
  const int start = path.initial_state();

  auto accumulate = [&](int c, double a, double b) {
    if (b <= a) return;
    for (int i = 0; i < n; ++i) {
      const double integral = generator.integral(c, i, a, b);
      comp_state[i] += integral;
      if (i != c) comp_pair(c, i) += integral;
    }
    if (def >= 0 && c != def) comp_default += generator.integral(c, def, a, b);
  };

  const auto& jumps = path.jump_times();
  std::size_t next_jump = 0;
  for (int k = 0; k < nodes; ++k) {
    if (k > 0) {
      double a = grid.time(k - 1);
      const double b = grid.time(k);
      while (next_jump < jumps.size() && jumps[next_jump] <= b) {
        accumulate(path.state_at(a), a, jumps[next_jump]);
        a = jumps[next_jump];
        ++next_jump;
      }
      accumulate(path.state_at(a), a, b);
    }
    const double t = grid.time(k);
    for (int i = 0; i < n; ++i) {
      out.state[i][k] = path.indicator(i, t) - (i == start ? 1.0 : 0.0) - comp_state[i];
      for (int j = 0; j < n; ++j)
        if (i != j) out.transition[i][j][k] = path.transition_count(i, j, t) - comp_pair(i, j);
    }
    if (def >= 0) out.default_process[k] = path.indicator(def, t) - comp_default;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis H1

double h1_default_intensity(double spread, double delta, int rating, double time) {
  if (!(delta < 1.0)) {
    std::ostringstream msg;
    msg << "H1 infeasible: recovery delta_" << rating + 1 << " = " << delta << " >= 1 at t = " << time;
    throw H1InfeasibleError(rating, time, msg.str());
  }
  if (!(spread > 0.0)) {
    std::ostringstream msg;
    msg << "H1 infeasible: short spread g_" << rating + 1 << "(t,t) - f(t,t) = " << spread
        << " is not positive at t = " << time;
    throw H1InfeasibleError(rating, time, msg.str());
  }
  return spread / (1.0 - delta);
}

IntensityMatrixProcess enforce_h1(const TimeGrid& grid, const std::vector<std::vector<double>>& short_spreads,
                                  const std::vector<std::vector<double>>& deltas, const IntensityMatrixProcess& base) {
  if (!base.absorbing_default()) throw ModelError("H1 default intensities need an absorbing default state");
  const int ratings = base.ratings();
  if (static_cast<int>(short_spreads.size()) != ratings || static_cast<int>(deltas.size()) != ratings)
    throw ModelError("enforce_h1: one spread and recovery series per rating required");
  const int def = base.default_state();
  std::vector<Mat> mats;
  mats.reserve(static_cast<std::size_t>(grid.nodes()));
  for (int k = 0; k < grid.nodes(); ++k) {
    Mat m = base.at(grid.time(k));
    for (int i = 0; i < ratings; ++i)
      m(i, def) = h1_default_intensity(short_spreads[i].at(k), deltas[i].at(k), i, grid.time(k));
    mats.push_back(std::move(m));
  }
  return IntensityMatrixProcess::sampled(grid, std::move(mats), true);
}

std::vector<double> hazard_from_distribution(std::span<const double> distribution, double dt) {
  const std::size_t n = distribution.size();
  if (n < 3) throw DomainError("hazard needs at least three distribution samples");
  std::vector<double> hazard(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double F = distribution[k];
    if (!(F < 1.0)) throw DomainError("distribution function reached 1; hazard undefined");
    if (k > 0 && F < distribution[k - 1]) throw DomainError("distribution function must be non-decreasing");
    double density;
    if (k == 0) {
      density = (-3.0 * distribution[0] + 4.0 * distribution[1] - distribution[2]) / (2.0 * dt);
    } else if (k + 1 == n) {
      density = (3.0 * distribution[n - 1] - 4.0 * distribution[n - 2] + distribution[n - 3]) / (2.0 * dt);
    } else {
      density = (distribution[k + 1] - distribution[k - 1]) / (2.0 * dt);
    }
    hazard[k] = density / (1.0 - F);
  }
  return hazard;
}

}  // namespace lhc
