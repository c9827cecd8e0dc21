#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lhc/levy.hpp"

namespace lhc::test {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double x : row) out(r, c++) = x;
    ++r;
  }
  return out;
}

inline LevyModel brownian_2d() { return LevyModel::brownian(mat({{0.04, 0.01}, {0.01, 0.09}})); }

inline LevyModel single_large_atom() { return LevyModel(vec({0.0}), mat({{0.0}}), {{vec({2.0}), 3.0}}); }

inline LevyModel mixed_2d() {
  return LevyModel(vec({0.1, -0.05}), mat({{0.02, 0.0}, {0.0, 0.03}}),
                   {{vec({0.5, -0.3}), 4.0}, {vec({-1.5, 0.8}), 0.7}, {vec({0.2, 1.6}), 1.1}});
}

/// Mean and standard error of a sample.
struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  const double var = s / static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace lhc::test
