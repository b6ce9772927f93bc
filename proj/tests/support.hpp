#pragma once

#include "enmkf/ensemble.hpp"
#include "enmkf/statespace.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

using enmkf::Matrix;
using enmkf::Vector;

inline Matrix mat1(double v) { return Matrix::Constant(1, 1, v); }
inline Vector vec1(double v) { return Vector::Constant(1, v); }

/// x_k = a x_{k-1} + b u_k + w,  y_k = x_k + v
inline enmkf::ModelOperators scalar_ops(double a, double b, double w, double v) {
  return {mat1(a), mat1(b), mat1(1.0), mat1(w), mat1(v)};
}

inline enmkf::FunctionProvider scalar_provider(double a, double b, double w, double v) {
  return {[=](const enmkf::ParameterVector&) { return scalar_ops(a, b, w, v); }, 1, 1, 1, 1};
}

/// Random symmetric positive definite n×n matrix.
template <class Engine>
Matrix random_spd(Eigen::Index n, Engine& engine, double ridge = 0.5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(engine);
  return g * g.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

template <class Engine>
Matrix random_matrix(Eigen::Index r, Eigen::Index c, Engine& engine, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(engine);
  return m;
}

/// Ensemble of M members of a scalar system with a single point-mass parameter.
inline enmkf::Ensemble scalar_ensemble(double mean, double var, Eigen::Index M, std::uint64_t seed) {
  enmkf::PriorSpec prior;
  prior.params = {enmkf::ParameterPrior::fixed(1.0)};
  prior.scale = enmkf::ParamScale::linear;
  prior.state_mean = vec1(mean);
  prior.state_var = var;
  return enmkf::init_ensemble(prior, M, seed);
}

/// Scalar Kalman filter written out term by term.
struct ScalarKf {
  double m;
  double p;

  void predict(double a, double b, double u, double pu, double w) {
    m = a * m + b * u;
    p = a * a * p + b * b * pu + w;
  }
  void update(double y, double v) {
    const double k = p / (p + v);
    m = m + k * (y - m);
    p = (1.0 - k) * p;
  }
};

}  // namespace testing
