#include "lhc/curves.hpp"

#include <algorithm>
#include <cmath>

#include "lhc/error.hpp"
#include "lhc/io.hpp"
#include "lhc/log.hpp"

namespace lhc {

VolatilitySurface::VolatilitySurface(const TimeGrid& grid, int dim)
    : grid_(grid), dim_(dim), data_(static_cast<std::size_t>(grid.nodes()) * grid.nodes() * dim, 0.0) {
  if (dim < 1) throw ModelError("volatility dimension must be >= 1");
}

VolatilitySurface VolatilitySurface::constant(const TimeGrid& grid, const Eigen::VectorXd& s) {
  return exponential(grid, s, 0.0);
}

VolatilitySurface VolatilitySurface::exponential(const TimeGrid& grid, const Eigen::VectorXd& s, double decay) {
  return from_function(grid, static_cast<int>(s.size()),
                       [&](double t, double theta) -> Eigen::VectorXd { return s * std::exp(-decay * (theta - t)); });
}

VolatilitySurface VolatilitySurface::from_function(const TimeGrid& grid, int dim,
                                                   const std::function<Eigen::VectorXd(double, double)>& fn) {
  VolatilitySurface vol(grid, dim);
  for (int t = 0; t < grid.nodes(); ++t) {
    for (int theta = t; theta < grid.nodes(); ++theta) {
      const Eigen::VectorXd v = fn(grid.time(t), grid.time(theta));
      if (v.size() != dim) throw ModelError("volatility function returned the wrong dimension");
      auto cell = vol.at(t, theta);
      for (int k = 0; k < dim; ++k) cell[k] = v[k];
    }
  }
  if (!std::isfinite(vol.max_norm())) throw ModelError("volatility surface must be bounded");
  return vol;
}

double VolatilitySurface::max_norm() const {
  double best = 0.0;
  for (std::size_t c = 0; c + dim_ <= data_.size(); c += dim_) {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) s += data_[c + k] * data_[c + k];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

VolatilitySurface VolatilitySurface::scaled(double factor) const {
  VolatilitySurface out = *this;
  for (auto& v : out.data_) v *= factor;
  return out;
}

Eigen::VectorXd integrate_sigma(const VolatilitySurface& vol, int t, int theta) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(vol.dim());
  if (theta <= t) return out;
  const double dx = vol.grid().dt();
  for (int v = t; v <= theta; ++v) {
    const double w = (v == t || v == theta) ? 0.5 * dx : dx;
    const auto cell = vol.at(t, v);
    for (int k = 0; k < vol.dim(); ++k) out[k] += w * cell[k];
  }
  return out;
}

ForwardSurface::ForwardSurface(const TimeGrid& grid, std::span<const double> initial_curve, CurveKind kind,
                               std::optional<int> rating)
    : grid_(grid), kind_(kind), rating_(rating) {
  if (static_cast<int>(initial_curve.size()) != grid.nodes())
    throw ModelError("initial curve length does not match the grid");
  for (double v : initial_curve)
    if (!std::isfinite(v)) throw ModelError("initial curve must be finite");
  rates_.resize(static_cast<std::size_t>(grid.nodes()) * grid.nodes());
  for (int t = 0; t < grid.nodes(); ++t) std::copy(initial_curve.begin(), initial_curve.end(), row(t).begin());
}

ForwardSurface ForwardSurface::flat(const TimeGrid& grid, double rate, CurveKind kind, std::optional<int> rating) {
  const std::vector<double> curve(grid.nodes(), rate);
  return ForwardSurface(grid, curve, kind, rating);
}

double ForwardSurface::max_abs() const {
  double best = 0.0;
  for (double v : rates_) best = std::max(best, std::abs(v));
  return best;
}

DriftSurface::DriftSurface(const TimeGrid& grid, std::optional<int> rating)
    : owner_rating(rating), grid_(grid), alpha_(static_cast<std::size_t>(grid.nodes()) * grid.nodes(), 0.0) {}

double DriftSurface::max_abs() const {
  double best = 0.0;
  for (double v : alpha_) best = std::max(best, std::abs(v));
  return best;
}

double curve_bond_price(std::span<const double> curve, int t, int theta, double dx) {
  // For theta < t the trapezoid runs backwards over frozen short rates and
  // the sign flip yields exp(+int_theta^t r).
  return std::exp(-trapezoid(curve, t, theta, dx));
}

double curve_discounted_bond(std::span<const double> curve, int theta, double dx) {
  return std::exp(-trapezoid(curve, 0, theta, dx));
}

double curve_bank_account(std::span<const double> curve, int t, double dx) {
  return std::exp(trapezoid(curve, 0, t, dx));
}

double bond_price(const ForwardSurface& surface, int t, int theta) {
  return curve_bond_price(surface.row(t), t, theta, surface.grid().dt());
}

double discounted_bond(const ForwardSurface& surface, int t, int theta) {
  return curve_discounted_bond(surface.row(t), theta, surface.grid().dt());
}

double bank_account(const ForwardSurface& surface, int t) {
  return curve_bank_account(surface.row(t), t, surface.grid().dt());
}

double bank_account_at(const ForwardSurface& surface, double time) {
  const TimeGrid& grid = surface.grid();
  const int k = grid.node_at_or_before(time);
  if (k >= grid.steps()) return bank_account(surface, grid.steps());
  const double dx = grid.dt();
  const double h = std::clamp(time - grid.time(k), 0.0, dx);
  const double r0 = surface.short_rate(k);
  const double r1 = surface.short_rate(k + 1);
  // exact integral of the linear interpolant of r over [t_k, time]
  const double partial = r0 * h + 0.5 * (r1 - r0) * h * h / dx;
  return bank_account(surface, k) * std::exp(partial);
}

void evolve_step(ForwardSurface& surface, int t, std::span<const double> drift_row, const VolatilitySurface& vol,
                 std::span<const double> dz, double dt) {
  const int nodes = surface.grid().nodes();
  if (t < 0 || t + 1 >= nodes) throw ModelError("evolve_step: time index out of range");
  if (static_cast<int>(drift_row.size()) != nodes) throw ModelError("evolve_step: drift row has the wrong length");
  if (static_cast<int>(dz.size()) != vol.dim()) throw ModelError("evolve_step: noise dimension mismatch");
  if (!(vol.grid() == surface.grid())) throw ModelError("evolve_step: volatility grid mismatch");
  const auto from = surface.row(t);
  auto to = surface.row(t + 1);
  const int d = vol.dim();
  for (int theta = 0; theta <= t; ++theta) to[theta] = from[theta];
  for (int theta = t + 1; theta < nodes; ++theta) {
    const auto s = vol.at(t, theta);
    double shock = 0.0;
    for (int k = 0; k < d; ++k) shock += s[k] * dz[k];
    to[theta] = from[theta] + drift_row[theta] * dt + shock;
  }
}

ForwardSurface evolve_step(ForwardSurface surface, int t, const DriftSurface& drift, const VolatilitySurface& vol,
                           std::span<const double> dz, double dt) {
  evolve_step(surface, t, drift.row(t), vol, dz, dt);
  return surface;
}

int count_rating_order_violations(std::span<const double> riskfree, const std::vector<std::span<const double>>& ratings,
                                  int t) {
  int violations = 0;
  const int nodes = static_cast<int>(riskfree.size());
  for (int theta = t; theta < nodes; ++theta) {
    double below = riskfree[theta];
    for (std::size_t i = 0; i < ratings.size(); ++i) {
      if (!(ratings[i][theta] > below)) ++violations;
      below = ratings[i][theta];
    }
  }
  if (violations > 0) spdlog::warn("rating order g_(K-1) > ... > g_1 > f violated at {} cells of row {}", violations, t);
  return violations;
}

namespace {
template <class Surface>
void write_rows(std::ostream& out, const Surface& surface) {
  const TimeGrid& grid = surface.grid();
  out << "t,theta,value\n";
  for (int t = 0; t < grid.nodes(); ++t)
    for (int theta = t; theta < grid.nodes(); ++theta)
      out << format_real(grid.time(t)) << ',' << format_real(grid.time(theta)) << ','
          << format_real(surface.row(t)[theta]) << '\n';
}
}  // namespace

void write_surface_csv(std::ostream& out, const ForwardSurface& surface) { write_rows(out, surface); }
void write_surface_csv(std::ostream& out, const DriftSurface& surface) { write_rows(out, surface); }

}  // namespace lhc
