#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "v2vbpc/geometry.hpp"

namespace testing {

using v2vbpc::Quaternion;
using v2vbpc::Vec3;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }
inline double gauss() { return std::normal_distribution<double>(0.0, 1.0)(rng()); }

inline Vec3 random_vec(double scale = 1.0) { return Vec3(gauss(), gauss(), gauss()) * scale; }

inline Quaternion random_unit_quat() {
  Eigen::Vector4d c(gauss(), gauss(), gauss(), gauss());
  return Quaternion(c.normalized());
}

inline Eigen::MatrixXd random_psd(int n, double scale = 1.0) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss();
  return scale * a * a.transpose() / n;
}

/// max |a - b| / max(1, |b|) entrywise.
template <class A, class B>
double rel_err(const A& a, const B& b) {
  double e = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      e = std::max(e, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j))));
  return e;
}

/// Central-difference Jacobian of f: R^n -> R^m.
template <class F>
Eigen::MatrixXd numeric_jacobian(F f, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return J;
}

}  // namespace testing
