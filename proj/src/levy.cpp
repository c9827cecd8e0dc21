#include "lhc/levy.hpp"

#include <cmath>
#include <sstream>

#include "lhc/error.hpp"

namespace lhc {

namespace {

double dot(std::span<const double> a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[static_cast<Eigen::Index>(k)];
  return s;
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw DomainError(std::string(what) + " is not finite for this argument");
  }
}

}  // namespace

Vec IncrementPath::value_at(int node) const {
  Vec z = Vec::Zero(increments.cols());
  for (int k = 0; k < node; ++k) z += increments.row(k).transpose();
  return z;
}

LevyModel::LevyModel(Vec drift, Mat covariance, std::vector<JumpAtom> atoms)
    : drift_(std::move(drift)), cov_(std::move(covariance)), atoms_(std::move(atoms)) {
  const Eigen::Index d = drift_.size();
  if (d < 1) throw ModelError("Lévy model needs dimension >= 1");
  if (cov_.rows() != d || cov_.cols() != d) throw ModelError("covariance shape does not match drift dimension");
  if (!drift_.allFinite() || !cov_.allFinite()) throw ModelError("Lévy model coefficients must be finite");

  const double scale = std::max(cov_.cwiseAbs().maxCoeff(), 1e-300);
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ModelError("covariance matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (cov_ + cov_.transpose()));
  if (eig.info() != Eigen::Success) throw ModelError("covariance factorization failed");
  const Vec& values = eig.eigenvalues();
  if (values.minCoeff() < -1e-12 * scale) {
    std::ostringstream msg;
    msg << "covariance matrix is not positive semidefinite (eigenvalue " << values.minCoeff() << ")";
    throw ModelError(msg.str());
  }

  // Keep only directions that carry variance.
  std::vector<Eigen::Index> live;
  for (Eigen::Index k = 0; k < d; ++k)
    if (values[k] > 1e-14 * scale) live.push_back(k);
  factor_rank_ = static_cast<int>(live.size());
  factor_ = Mat::Zero(d, factor_rank_);
  for (int c = 0; c < factor_rank_; ++c)
    factor_.col(c) = eig.eigenvectors().col(live[c]) * std::sqrt(values[live[c]]);

  compensation_ = Vec::Zero(d);
  for (const auto& atom : atoms_) {
    if (atom.jump.size() != d) throw ModelError("jump atom dimension does not match the model");
    if (!(atom.rate > 0.0) || !std::isfinite(atom.rate)) throw ModelError("jump atom rates must be positive");
    if (!atom.jump.allFinite()) throw ModelError("jump atom sizes must be finite");
    if (atom.is_small()) compensation_ += atom.rate * atom.jump;
  }
}

LevyModel LevyModel::brownian(Mat covariance) {
  Vec drift = Vec::Zero(covariance.rows());
  return LevyModel(std::move(drift), std::move(covariance), {});
}

double LevyModel::laplace_exponent(const Vec& u) const {
  return laplace_exponent(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
}

double LevyModel::laplace_exponent(std::span<const double> u) const {
  if (static_cast<Eigen::Index>(u.size()) != drift_.size()) throw ModelError("argument dimension mismatch");
  const Eigen::Map<const Vec> uv(u.data(), static_cast<Eigen::Index>(u.size()));
  double value = -uv.dot(drift_) + 0.5 * uv.dot(cov_ * uv);
  for (const auto& atom : atoms_) {
    const double x = dot(u, atom.jump);
    // e^{-x} - 1 (+ x for compensated atoms), via expm1 for small x.
    value += atom.is_small() ? atom.rate * (std::expm1(-x) + x) : atom.rate * std::expm1(-x);
  }
  require_finite(value, "Laplace exponent");
  return value;
}

Vec LevyModel::laplace_exponent_gradient(const Vec& u) const {
  if (u.size() != drift_.size()) throw ModelError("argument dimension mismatch");
  Vec grad = -drift_ + cov_ * u;
  for (const auto& atom : atoms_) {
    const double x = u.dot(atom.jump);
    const double weight = atom.is_small() ? std::expm1(-x) : std::exp(-x);
    grad -= atom.rate * weight * atom.jump;
  }
  if (!grad.allFinite()) throw DomainError("Laplace exponent gradient is not finite for this argument");
  return grad;
}

double LevyModel::laplace_exponent_directional(std::span<const double> u, std::span<const double> v) const {
  const auto n = static_cast<Eigen::Index>(u.size());
  const Eigen::Map<const Vec> uv(u.data(), n);
  const Eigen::Map<const Vec> vv(v.data(), n);
  double value = -vv.dot(drift_) + vv.dot(cov_ * uv);
  for (const auto& atom : atoms_) {
    const double x = dot(u, atom.jump);
    const double weight = atom.is_small() ? std::expm1(-x) : std::exp(-x);
    value -= atom.rate * weight * dot(v, atom.jump);
  }
  require_finite(value, "Laplace exponent gradient");
  return value;
}

double LevyModel::tail_transform(const Vec& u) const {
  double value = 0.0;
  for (const auto& atom : atoms_)
    if (!atom.is_small()) value += atom.rate * std::exp(-u.dot(atom.jump));
  return value;
}

Vec LevyModel::mean() const {
  Vec m = drift_;
  for (const auto& atom : atoms_)
    if (!atom.is_small()) m += atom.rate * atom.jump;
  return m;
}

void LevyModel::draw_increment(RandomStream& rng, double t0, double dt, std::span<double> out,
                               std::vector<JumpEvent>* jumps) const {
  const Eigen::Index d = drift_.size();
  Eigen::Map<Vec> dz(out.data(), d);
  dz = (drift_ - compensation_) * dt;
  if (factor_rank_ > 0) {
    const double scale = std::sqrt(dt);
    for (int c = 0; c < factor_rank_; ++c) dz += factor_.col(c) * (scale * rng.normal());
  }
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const unsigned count = rng.poisson(atoms_[k].rate * dt);
    if (count == 0) continue;
    dz += static_cast<double>(count) * atoms_[k].jump;
    for (unsigned c = 0; c < count; ++c) {
      const double when = t0 + rng.uniform() * dt;
      if (jumps != nullptr) jumps->push_back({when, static_cast<int>(k)});
    }
  }
}

IncrementPath simulate_increments(const LevyModel& model, const TimeGrid& grid, RandomStream& rng) {
  IncrementPath path;
  path.grid_times = grid.times();
  path.increments = Mat::Zero(grid.steps(), model.dim());
  Vec dz(model.dim());
  for (int k = 0; k < grid.steps(); ++k) {
    const double t0 = grid.time(k);
    model.draw_increment(rng, t0, grid.time(k + 1) - t0, std::span<double>(dz.data(), dz.size()),
                         &path.jump_events);
    path.increments.row(k) = dz.transpose();
  }
  return path;
}

IncrementPath simulate_increments(const LevyModel& model, const TimeGrid& grid, std::uint64_t seed,
                                  std::uint64_t path_index) {
  RandomStream rng(seed, path_index, levy_stream(0));
  return simulate_increments(model, grid, rng);
}

}  // namespace lhc
