#include "enmkf/statespace.hpp"

#include "enmkf/errors.hpp"

#include <string>

namespace enmkf {

AugmentedState augment(const ParameterVector& theta, const StateVector& state) {
  AugmentedState x;
  x.param_count = theta.size();
  x.values.resize(theta.size() + state.size());
  x.values << theta.values, state.values;
  return x;
}

std::pair<ParameterVector, StateVector> split(const Vector& x, Eigen::Index param_count) {
  if (param_count < 0 || x.size() <= param_count)
    throw DimensionError("split: vector of length " + std::to_string(x.size()) +
                         " leaves no state after " + std::to_string(param_count) + " parameters");
  return {ParameterVector{x.head(param_count)}, StateVector{x.tail(x.size() - param_count)}};
}

ModelOperators::ModelOperators(Matrix a, Matrix b, Matrix h, Matrix w, Matrix v)
    : a_(std::move(a)), b_(std::move(b)), h_(std::move(h)), w_(std::move(w)), v_(std::move(v)) {
  const Eigen::Index n = a_.rows();
  if (a_.cols() != n) throw DimensionError("ModelOperators: A must be square");
  if (b_.rows() != n) throw DimensionError("ModelOperators: B rows must match state dimension");
  if (h_.cols() != n) throw DimensionError("ModelOperators: H columns must match state dimension");
  if (w_.rows() != n || w_.cols() != n) throw DimensionError("ModelOperators: W must be n×n");
  if (v_.rows() != h_.rows() || v_.cols() != h_.rows())
    throw DimensionError("ModelOperators: V must be m×m");
  require_psd(w_, "process noise covariance W");
  require_pd(v_, "observation noise covariance V");
}

Vector ModelOperators::propagate(const Vector& state, const Vector& control) const {
  if (state.size() != a_.cols() || control.size() != b_.cols())
    throw DimensionError("ModelOperators::propagate: argument size mismatch");
  return a_ * state + b_ * control;
}

FunctionProvider::FunctionProvider(Builder builder, Eigen::Index p, Eigen::Index n, Eigen::Index l,
                                   Eigen::Index m, double dt)
    : builder_(std::move(builder)), p_(p), n_(n), l_(l), m_(m), dt_(dt) {}

ModelOperators FunctionProvider::operators(const ParameterVector& theta) const {
  if (theta.size() != p_) throw DimensionError("FunctionProvider: parameter length mismatch");
  ModelOperators ops = builder_(theta);
  if (ops.state_dim() != n_ || ops.control_dim() != l_ || ops.obs_dim() != m_)
    throw DimensionError("FunctionProvider: builder returned operators of the wrong shape");
  return ops;
}

}  // namespace enmkf
