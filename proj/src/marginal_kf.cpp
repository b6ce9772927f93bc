#include "enmkf/marginal_kf.hpp"

#include "enmkf/errors.hpp"

namespace enmkf {

ConditionalStateFilter mkf_predict(const ConditionalStateFilter& s, const ModelOperators& ops,
                                   const Vector& u_mean, const Matrix& u_cov) {
  const Eigen::Index n = ops.state_dim();
  const Eigen::Index l = ops.control_dim();
  if (s.mean.size() != n || s.cov.rows() != n || s.cov.cols() != n)
    throw DimensionError("mkf_predict: filter state does not match operators");
  if (u_mean.size() != l || u_cov.rows() != l || u_cov.cols() != l)
    throw DimensionError("mkf_predict: control moments do not match operators");

  const Matrix& a = ops.A();
  const Matrix& b = ops.B();
  ConditionalStateFilter out;
  out.mean = a * s.mean + b * u_mean;
  out.cov = symmetrize(a * s.cov * a.transpose() + b * u_cov * b.transpose() + ops.W());
  out.step_index = s.step_index;
  return out;
}

ConditionalStateFilter mkf_update(const ConditionalStateFilter& s_pred, const Vector& y,
                                  const ModelOperators& ops) {
  const Eigen::Index n = ops.state_dim();
  if (y.size() != ops.obs_dim()) throw DimensionError("mkf_update: observation length mismatch");
  if (s_pred.mean.size() != n) throw DimensionError("mkf_update: filter state mismatch");
  require_finite(y, "state observation");

  const Matrix& h = ops.H();
  const Matrix ph = s_pred.cov * h.transpose();
  const Matrix innovation_cov = h * ph + ops.V();
  const Matrix gain = solve_innovation(innovation_cov, ph.transpose(), "mkf_update").transpose();

  ConditionalStateFilter out;
  out.mean = s_pred.mean + gain * (y - h * s_pred.mean);
  out.cov = symmetrize((Matrix::Identity(n, n) - gain * h) * s_pred.cov);
  out.step_index = s_pred.step_index + 1;
  return out;
}

}  // namespace enmkf
