#include "lhc/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lhc/error.hpp"

namespace lhc {

RecoverySchedule::RecoverySchedule(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw ModelError("recovery schedule values must be finite");
}

RecoverySchedule RecoverySchedule::constant(double value, int nodes) {
  return RecoverySchedule(std::vector<double>(static_cast<std::size_t>(nodes), value));
}

bool RecoverySchedule::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

namespace {

void check_unit_interval(const RecoverySchedule& s, int nodes, const std::string& name) {
  if (s.nodes() != nodes) throw ModelError(name + " schedule length does not match the grid");
  for (double v : s.values())
    if (v < 0.0 || v > 1.0) throw ModelError(name + " must lie in [0, 1]");
}

}  // namespace

void RecoveryScheme::validate(int ratings, int nodes) const {
  if (ratings < 1) throw ModelError("recovery scheme needs at least one pre-default rating");
  if (static_cast<int>(deltas.size()) != ratings) throw ModelError("one recovery schedule per rating is required");
  for (int i = 0; i < ratings; ++i) {
    const std::string name = "delta_" + std::to_string(i + 1);
    check_unit_interval(deltas[i], nodes, name);
    if ((kind == RecoveryKind::Treasury || kind == RecoveryKind::Par) && !deltas[i].is_constant())
      throw ModelError(name + " must be constant for " + std::string(to_string(kind)) + " recovery");
  }
  if (kind == RecoveryKind::MultipleDefaults) {
    check_unit_interval(loss, nodes, "loss L");
    if (cox_intensity && !(*cox_intensity >= 0.0)) throw ModelError("Cox intensity must be non-negative");
  }
}

DefaultableBondPath price_path(const RecoveryScheme& scheme, const PathMarket& market, int maturity) {
  if (market.riskfree == nullptr || market.chain == nullptr) throw ModelError("price_path: market state incomplete");
  const ForwardSurface& f = *market.riskfree;
  const RatingPath& chain = *market.chain;
  const TimeGrid& grid = f.grid();
  const int n = grid.nodes();
  const int ratings = static_cast<int>(market.ratings.size());
  if (maturity < 0 || maturity >= n) throw ModelError("price_path: maturity outside the grid");
  const bool multiple = scheme.kind == RecoveryKind::MultipleDefaults;
  if (multiple && chain.default_state() >= 0)
    throw ModelError("multiple-defaults recovery requires a generator without a default state");
  if (!multiple && chain.default_state() < 0)
    throw ModelError(std::string(to_string(scheme.kind)) + " recovery requires an absorbing default state");
  if (multiple && static_cast<int>(market.loss_factor.size()) != n)
    throw ModelError("price_path: loss factor must be sampled at every node");

  const double dx = grid.dt();
  DefaultableBondPath out;
  out.maturity = maturity;
  out.value.resize(n);
  out.discounted.resize(n);
  out.rating.resize(n);
  out.loss_factor.assign(n, 1.0);
  if (multiple) std::copy(market.loss_factor.begin(), market.loss_factor.end(), out.loss_factor.begin());

  const auto tau = chain.default_time();
  int pre_default = -1;
  int last_before = 0;
  double bank_at_tau = 1.0;
  if (tau) {
    pre_default = *chain.rating_before_default();
    last_before = grid.node_at_or_before(*tau);
    if (last_before > 0 && grid.time(last_before) >= *tau) --last_before;
    bank_at_tau = bank_account_at(f, *tau);
  }

  auto pre_default_price = [&](int state, int k) {
    if (state < 0 || state >= ratings) throw ModelError("price_path: rating index outside the loaded curves");
    return curve_bond_price(market.ratings[state].row(k), k, maturity, dx);
  };

  for (int k = 0; k <= maturity; ++k) {
    const double t = grid.time(k);
    const int state = chain.state_at(t);
    out.rating[k] = state;
    const double bank = bank_account(f, k);
    double value;
    if (!tau || *tau > t) {
      value = out.loss_factor[k] * pre_default_price(state, k);
    } else {
      const auto& delta = scheme.deltas.at(static_cast<std::size_t>(pre_default));
      switch (scheme.kind) {
        case RecoveryKind::MarketValue:
          value = delta.at(last_before) * pre_default_price(pre_default, last_before) * bank / bank_at_tau;
          break;
        case RecoveryKind::Treasury:
          value = delta.at(0) * bond_price(f, k, maturity);
          break;
        case RecoveryKind::Par:
          value = delta.at(0) * bank / bank_at_tau;
          break;
        default:
          throw ModelError("default state reached under multiple-defaults recovery");
      }
    }
    out.value[k] = value;
    out.discounted[k] = value / bank;
  }
  out.terminal_payoff = out.value[maturity];
  const double bank_at_maturity = bank_account(f, maturity);
  for (int k = maturity + 1; k < n; ++k) {
    out.rating[k] = chain.state_at(grid.time(k));
    const double bank = bank_account(f, k);
    out.value[k] = out.terminal_payoff * bank / bank_at_maturity;
    out.discounted[k] = out.terminal_payoff / bank_at_maturity;
  }
  return out;
}

double update_loss_process(double v_prev, double loss, bool cox_jump) { return cox_jump ? v_prev * (1.0 - loss) : v_prev; }

int CoxClock::advance(double a, double b, double gamma_a, double gamma_b, std::vector<double>& jump_times) {
  const double majorant = std::max(gamma_a, gamma_b);
  if (!(b > a) || !(majorant > 0.0)) return 0;
  const unsigned candidates = rng_->poisson(majorant * (b - a));
  std::vector<double> times(candidates);
  for (auto& s : times) s = a + (b - a) * rng_->uniform();
  std::sort(times.begin(), times.end());
  int accepted = 0;
  for (double s : times) {
    const double w = (s - a) / (b - a);
    const double gamma = (1.0 - w) * gamma_a + w * gamma_b;
    if (rng_->uniform() * majorant < gamma) {
      jump_times.push_back(s);
      ++accepted;
    }
  }
  return accepted;
}

CoxPath simulate_cox(std::span<const double> gamma, const RecoverySchedule& loss, const TimeGrid& grid,
                     RandomStream& rng) {
  const int n = grid.nodes();
  if (static_cast<int>(gamma.size()) != n || loss.nodes() != n) throw ModelError("Cox inputs must match the grid");
  CoxPath out;
  out.loss_factor.assign(n, 1.0);
  CoxClock clock(rng);
  double v = 1.0;
  for (int k = 0; k + 1 < n; ++k) {
    const int jumps = clock.advance(grid.time(k), grid.time(k + 1), gamma[k], gamma[k + 1], out.jump_times);
    for (int m = 0; m < jumps; ++m) v = update_loss_process(v, loss.at(k), true);
    out.loss_factor[k + 1] = v;
  }
  return out;
}

double ex_dividend_price(const IntensityMatrixProcess& generator, const std::function<double(double)>& short_rate,
                         std::span<const double> deltas, int rating, double t, double theta, int steps) {
  if (generator.path_dependent())
    throw UnsupportedModeError("ex-dividend pricing needs a deterministic generator");
  if (!generator.absorbing_default()) throw UnsupportedModeError("ex-dividend pricing needs an absorbing default state");
  const int ratings = generator.ratings();
  if (static_cast<int>(deltas.size()) != ratings) throw ModelError("one recovery rate per rating is required");
  if (rating < 0 || rating >= ratings) throw ModelError("ex-dividend price requested for a non-rating state");
  if (theta < t) throw DomainError("maturity precedes the valuation time");
  if (theta == t) return 1.0;

  const int def = generator.default_state();
  const double h = (theta - t) / steps;
  const auto p = solve_forward_equation(generator, t, theta, steps);
  double log_discount = 0.0;
  double r_prev = short_rate(t);
  double dividend = 0.0;
  double integrand_prev = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const double u = t + s * h;
    if (s > 0) {
      const double r = short_rate(u);
      log_discount += 0.5 * h * (r_prev + r);
      r_prev = r;
    }
    const Mat lambda = generator.at(u);
    double recovery_flow = 0.0;
    for (int j = 0; j < ratings; ++j) recovery_flow += deltas[j] * p[s](rating, j) * lambda(j, def);
    const double integrand = std::exp(-log_discount) * recovery_flow;
    if (s > 0) dividend += 0.5 * h * (integrand_prev + integrand);
    integrand_prev = integrand;
  }
  double survival = 0.0;
  for (int j = 0; j < ratings; ++j) survival += p.back()(rating, j);
  return std::exp(-log_discount) * survival + dividend;
}

double short_spread_limit(const std::function<double(double)>& price_of_maturity, double t, double dtheta) {
  return -(std::log(price_of_maturity(t + dtheta)) - std::log(price_of_maturity(t))) / dtheta;
}

}  // namespace lhc
