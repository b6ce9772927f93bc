#pragma once

#include "enmkf/linalg.hpp"

#include <vector>

namespace enmkf {

/// Linear-Gaussian surrogate for the noisily observed control vector:
///
///   a_k = F a_{k-1} + q_k,   q_k ~ N(0, Q)
///   z_k = G a_k + c_k,       c_k ~ N(0, C)
///
/// `a` is the (possibly lifted) autoregressive state; u_k = G a_k are the
/// physical control channels.
struct ControlModel {
  Matrix F;
  Matrix Q;
  Matrix C;
  Matrix G;
  Vector u0_mean;
  Matrix u0_cov;

  Eigen::Index lifted_dim() const { return F.rows(); }
  Eigen::Index channel_count() const { return G.rows(); }

  /// Throws ConfigError/DimensionError on inconsistent input.
  void validate() const;
};

/// Filtered control distribution N(mean, cov) in lifted coordinates.
struct ControlFilterState {
  Vector mean;
  Matrix cov;
  int step_index = 0;

  /// Physical control mean G·mean.
  Vector channel_mean(const ControlModel& model) const { return model.G * mean; }
  /// Physical control covariance G·cov·Gᵀ.
  Matrix channel_cov(const ControlModel& model) const {
    return symmetrize(model.G * cov * model.G.transpose());
  }
};

ControlFilterState initial_control_state(const ControlModel& model);

ControlFilterState kf_predict(const ControlFilterState& s, const ControlModel& m);

/// Throws NumericalError when G·cov·Gᵀ + C is singular.
ControlFilterState kf_update(const ControlFilterState& s_pred, const Vector& z,
                             const ControlModel& m);

/// Random walk u_k = u_{k-1} + q_k.
ControlModel ar1_model(Eigen::Index channels, const Matrix& q, const Matrix& c,
                       const Vector& u0_mean, const Matrix& u0_cov);

/// Random increment u_k = 2u_{k-1} - u_{k-2} + q_k in companion form
/// a_k = (u_k, u_{k-1}). `u0_mean`/`u0_cov` may be given per channel (length ℓ,
/// replicated into both lags) or already lifted (length 2ℓ).
ControlModel ar2_model(Eigen::Index channels, const Matrix& q, const Matrix& c,
                       const Vector& u0_mean, const Matrix& u0_cov);

/// Alternating predict/update from (u0_mean, u0_cov); one state per observation.
std::vector<ControlFilterState> filter_series(const ControlModel& m,
                                              const std::vector<Vector>& z_series);

/// Per-channel variance of first differences, scaled by `scale`, as a
/// diagonal matrix. Used as the default random-walk Q.
Matrix difference_variance(const std::vector<Vector>& z_series, double scale = 1.0);

}  // namespace enmkf
