#pragma once

#include "enmkf/linalg.hpp"

#include <cstddef>
#include <functional>
#include <utility>

namespace enmkf {

/// Static model parameters θ. For the wall model these are (log R, log ρC).
struct ParameterVector {
  Vector values;

  Eigen::Index size() const { return values.size(); }
};

/// Discretized state T_k (node temperatures for the wall model).
struct StateVector {
  Vector values;

  Eigen::Index size() const { return values.size(); }
};

/// Joint vector X = [θ; T]. The parameter block always comes first; the
/// augmented observation operator relies on that ordering.
struct AugmentedState {
  Vector values;
  Eigen::Index param_count = 0;

  Eigen::Index size() const { return values.size(); }
  auto theta() const { return values.head(param_count); }
  auto state() const { return values.tail(values.size() - param_count); }
};

AugmentedState augment(const ParameterVector& theta, const StateVector& state);

/// Inverse of augment(). Throws DimensionError when no state entries remain.
std::pair<ParameterVector, StateVector> split(const Vector& x, Eigen::Index param_count);

/// Linear operators of the θ-conditional system
///
///   T_k = A T_{k-1} + B u_k + w_k,   w_k ~ N(0, W)
///   y_k = H T_k + v_k,               v_k ~ N(0, V)
///
/// B is stored as an n×ℓ matrix whose columns are the per-channel control
/// vectors. Checked at construction; immutable afterwards.
class ModelOperators {
 public:
  ModelOperators(Matrix a, Matrix b, Matrix h, Matrix w, Matrix v);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& H() const { return h_; }
  const Matrix& W() const { return w_; }
  const Matrix& V() const { return v_; }

  Vector b_column(Eigen::Index channel) const { return b_.col(channel); }

  Eigen::Index state_dim() const { return a_.rows(); }
  Eigen::Index control_dim() const { return b_.cols(); }
  Eigen::Index obs_dim() const { return h_.rows(); }

  /// A x + B u
  Vector propagate(const Vector& state, const Vector& control) const;

 private:
  Matrix a_, b_, h_, w_, v_;
};

/// Maps θ to the operators of the conditional linear system.
/// Implementations must be deterministic in θ.
class ModelProvider {
 public:
  virtual ~ModelProvider() = default;

  virtual ModelOperators operators(const ParameterVector& theta) const = 0;

  virtual Eigen::Index param_dim() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index control_dim() const = 0;
  virtual Eigen::Index obs_dim() const = 0;
  /// Seconds between consecutive steps.
  virtual double dt() const = 0;
};

/// Provider backed by a callable; convenient for toy systems and tests.
class FunctionProvider final : public ModelProvider {
 public:
  using Builder = std::function<ModelOperators(const ParameterVector&)>;

  FunctionProvider(Builder builder, Eigen::Index p, Eigen::Index n, Eigen::Index l,
                   Eigen::Index m, double dt = 1.0);

  ModelOperators operators(const ParameterVector& theta) const override;
  Eigen::Index param_dim() const override { return p_; }
  Eigen::Index state_dim() const override { return n_; }
  Eigen::Index control_dim() const override { return l_; }
  Eigen::Index obs_dim() const override { return m_; }
  double dt() const override { return dt_; }

 private:
  Builder builder_;
  Eigen::Index p_, n_, l_, m_;
  double dt_;
};

}  // namespace enmkf
