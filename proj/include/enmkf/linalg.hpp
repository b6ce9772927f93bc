#pragma once

#include <Eigen/Dense>

#include <random>
#include <string_view>

namespace enmkf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// (M + Mᵀ)/2
Matrix symmetrize(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-10);

/// Smallest eigenvalue >= -tol * max(trace, 1).
bool is_psd(const Matrix& m, double tol = 1e-10);

/// Symmetric with strictly positive eigenvalues.
bool is_pd(const Matrix& m);

/// Throws ConfigError naming `what` unless m is square, symmetric and PSD.
void require_psd(const Matrix& m, std::string_view what);
void require_pd(const Matrix& m, std::string_view what);

void require_finite(const Vector& v, std::string_view what);

/// Unbiased (1/(N-1)) covariance of the columns of `samples` (one sample per column).
Matrix sample_covariance(const Matrix& samples);

/// Solves S X = rhs for symmetric S, throwing NumericalError with the
/// condition estimate when S is singular or badly conditioned.
Matrix solve_innovation(const Matrix& s, const Matrix& rhs, std::string_view context);

/// Draws from N(mean, cov) for PSD `cov`. The factor is computed with an
/// eigen-decomposition so that singular covariances are admissible.
class GaussianSampler {
 public:
  GaussianSampler(Vector mean, const Matrix& cov);

  template <class Engine>
  Vector operator()(Engine& engine) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector xi(factor_.cols());
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi(j) = normal(engine);
    return mean_ + factor_ * xi;
  }

  const Matrix& factor() const { return factor_; }

 private:
  Vector mean_;
  Matrix factor_;
};

}  // namespace enmkf
