#include "enmkf/linalg.hpp"

#include "enmkf/errors.hpp"

#include <cmath>
#include <sstream>

namespace enmkf {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

namespace {

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

bool is_psd(const Matrix& m, double tol) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  if (is_diagonal(m)) return (m.diagonal().array() >= 0.0).all();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, std::abs(m.trace()));
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

bool is_pd(const Matrix& m) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  if (is_diagonal(m)) return (m.diagonal().array() > 0.0).all();
  Eigen::LLT<Matrix> llt(symmetrize(m));
  return llt.info() == Eigen::Success;
}

void require_psd(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols())
    throw ConfigError(std::string(what) + " must be square");
  if (!m.allFinite()) throw ConfigError(std::string(what) + " has non-finite entries");
  if (!is_psd(m)) throw ConfigError(std::string(what) + " must be symmetric positive semidefinite");
}

void require_pd(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols())
    throw ConfigError(std::string(what) + " must be square");
  if (!m.allFinite()) throw ConfigError(std::string(what) + " has non-finite entries");
  if (!is_pd(m)) throw ConfigError(std::string(what) + " must be symmetric positive definite");
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) throw DataError(std::string(what) + " has non-finite entries");
}

Matrix sample_covariance(const Matrix& samples) {
  const Eigen::Index count = samples.cols();
  if (count < 2) throw DimensionError("sample covariance needs at least two samples");
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  return symmetrize(centered * centered.transpose() / static_cast<double>(count - 1));
}

Matrix solve_innovation(const Matrix& s, const Matrix& rhs, std::string_view context) {
  if (s.rows() != s.cols() || s.rows() != rhs.rows())
    throw DimensionError(std::string(context) + ": innovation system size mismatch");
  Eigen::LDLT<Matrix> ldlt(symmetrize(s));
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  if (ldlt.info() != Eigen::Success || !(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << context << ": innovation covariance is singular (rcond estimate " << rcond
        << ", size " << s.rows() << ")";
    throw NumericalError(msg.str());
  }
  return ldlt.solve(rhs);
}

GaussianSampler::GaussianSampler(Vector mean, const Matrix& cov) : mean_(std::move(mean)) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size())
    throw DimensionError("GaussianSampler: covariance does not match mean");
  if (mean_.size() == 0) {
    factor_.resize(0, 0);
    return;
  }
  const Matrix sym = symmetrize(cov);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    return;
  }
  // Singular but PSD covariances (e.g. a zero control variance) go through
  // the spectral factor with clamped eigenvalues.
  if (!is_psd(sym)) throw NumericalError("GaussianSampler: covariance is not positive semidefinite");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = es.eigenvectors() * roots.asDiagonal();
}

}  // namespace enmkf
