#include "enmkf/kalman.hpp"

#include "enmkf/errors.hpp"

namespace enmkf {

void ControlModel::validate() const {
  const Eigen::Index la = F.rows();
  const Eigen::Index l = G.rows();
  if (F.cols() != la) throw DimensionError("ControlModel: F must be square");
  if (Q.rows() != la || Q.cols() != la) throw DimensionError("ControlModel: Q must match F");
  if (G.cols() != la) throw DimensionError("ControlModel: G columns must match F");
  if (C.rows() != l || C.cols() != l) throw DimensionError("ControlModel: C must be ℓ×ℓ");
  if (u0_mean.size() != la) throw DimensionError("ControlModel: u0_mean must match F");
  if (u0_cov.rows() != la || u0_cov.cols() != la)
    throw DimensionError("ControlModel: u0_cov must match F");
  require_psd(Q, "control process noise Q");
  require_psd(u0_cov, "initial control covariance");
  require_pd(C, "control measurement noise C");
  if (!u0_mean.allFinite()) throw ConfigError("ControlModel: u0_mean is not finite");
}

ControlFilterState initial_control_state(const ControlModel& model) {
  return {model.u0_mean, symmetrize(model.u0_cov), 0};
}

ControlFilterState kf_predict(const ControlFilterState& s, const ControlModel& m) {
  if (s.mean.size() != m.F.cols() || s.cov.rows() != m.F.cols())
    throw DimensionError("kf_predict: state does not match the control model");
  return {m.F * s.mean, symmetrize(m.F * s.cov * m.F.transpose() + m.Q), s.step_index};
}

ControlFilterState kf_update(const ControlFilterState& s_pred, const Vector& z,
                             const ControlModel& m) {
  if (z.size() != m.G.rows()) throw DimensionError("kf_update: observation length mismatch");
  if (s_pred.mean.size() != m.G.cols()) throw DimensionError("kf_update: state length mismatch");
  require_finite(z, "control observation");

  const Matrix s = m.G * s_pred.cov * m.G.transpose() + m.C;
  // K = cov Gᵀ S⁻¹, computed as (S⁻¹ G cov)ᵀ.
  const Matrix gain =
      solve_innovation(s, m.G * s_pred.cov, "kf_update").transpose();
  const Eigen::Index la = s_pred.mean.size();
  ControlFilterState out;
  out.mean = s_pred.mean + gain * (z - m.G * s_pred.mean);
  out.cov = symmetrize((Matrix::Identity(la, la) - gain * m.G) * s_pred.cov);
  out.step_index = s_pred.step_index + 1;
  return out;
}

ControlModel ar1_model(Eigen::Index channels, const Matrix& q, const Matrix& c,
                       const Vector& u0_mean, const Matrix& u0_cov) {
  ControlModel m;
  m.F = Matrix::Identity(channels, channels);
  m.G = Matrix::Identity(channels, channels);
  m.Q = q;
  m.C = c;
  m.u0_mean = u0_mean;
  m.u0_cov = u0_cov;
  m.validate();
  return m;
}

ControlModel ar2_model(Eigen::Index channels, const Matrix& q, const Matrix& c,
                       const Vector& u0_mean, const Matrix& u0_cov) {
  const Eigen::Index l = channels;
  const Matrix eye = Matrix::Identity(l, l);
  if (q.rows() != l || q.cols() != l) throw DimensionError("ar2_model: Q must be ℓ×ℓ");

  ControlModel m;
  m.F = Matrix::Zero(2 * l, 2 * l);
  m.F.topLeftCorner(l, l) = 2.0 * eye;
  m.F.topRightCorner(l, l) = -eye;
  m.F.bottomLeftCorner(l, l) = eye;
  m.G = Matrix::Zero(l, 2 * l);
  m.G.leftCols(l) = eye;
  m.Q = Matrix::Zero(2 * l, 2 * l);
  m.Q.topLeftCorner(l, l) = q;
  m.C = c;

  if (u0_mean.size() == l) {
    m.u0_mean.resize(2 * l);
    m.u0_mean << u0_mean, u0_mean;
  } else {
    m.u0_mean = u0_mean;
  }
  if (u0_cov.rows() == l && u0_cov.cols() == l) {
    m.u0_cov = Matrix::Zero(2 * l, 2 * l);
    m.u0_cov.topLeftCorner(l, l) = u0_cov;
    m.u0_cov.bottomRightCorner(l, l) = u0_cov;
  } else {
    m.u0_cov = u0_cov;
  }
  m.validate();
  return m;
}

std::vector<ControlFilterState> filter_series(const ControlModel& m,
                                              const std::vector<Vector>& z_series) {
  if (z_series.empty()) throw DataError("filter_series: empty observation series");
  m.validate();
  std::vector<ControlFilterState> out;
  out.reserve(z_series.size());
  ControlFilterState s = initial_control_state(m);
  for (const auto& z : z_series) {
    s = kf_update(kf_predict(s, m), z, m);
    out.push_back(s);
  }
  return out;
}

Matrix difference_variance(const std::vector<Vector>& z_series, double scale) {
  if (z_series.size() < 3) throw DataError("difference_variance: need at least three observations");
  const Eigen::Index l = z_series.front().size();
  const auto count = static_cast<double>(z_series.size() - 1);
  Vector sum = Vector::Zero(l);
  Vector sum_sq = Vector::Zero(l);
  for (std::size_t k = 1; k < z_series.size(); ++k) {
    const Vector d = z_series[k] - z_series[k - 1];
    sum += d;
    sum_sq += d.cwiseProduct(d);
  }
  const Vector mean = sum / count;
  const Vector var = (sum_sq - count * mean.cwiseProduct(mean)) / (count - 1.0);
  return (scale * var).asDiagonal();
}

}  // namespace enmkf
