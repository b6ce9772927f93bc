#pragma once

#include "enmkf/linalg.hpp"
#include "enmkf/statespace.hpp"

namespace enmkf {

/// Gaussian filter for T_k given a fixed θ, with the control marginalized.
struct ConditionalStateFilter {
  Vector mean;
  Matrix cov;
  int step_index = 0;
};

/// mean' = A mean + B u_mean,  cov' = A cov Aᵀ + B u_cov Bᵀ + W.
/// `u_mean`/`u_cov` are the filtered control moments in physical channels.
ConditionalStateFilter mkf_predict(const ConditionalStateFilter& s, const ModelOperators& ops,
                                   const Vector& u_mean, const Matrix& u_cov);

/// Standard Kalman analysis with H and V from `ops`.
ConditionalStateFilter mkf_update(const ConditionalStateFilter& s_pred, const Vector& y,
                                  const ModelOperators& ops);

}  // namespace enmkf
