#pragma once

#include "enmkf/kalman.hpp"
#include "enmkf/linalg.hpp"
#include "enmkf/statespace.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace enmkf {

enum class FilterKind { enmkf, enkf };

/// plain:       innovation y + v - 𝓗X
/// scaled_by_r: innovation R(y + v) - 𝓗X with R = exp(θ₀), for observation
///              operators defined without the 1/R factor.
enum class InnovationMode { plain, scaled_by_r };

/// Units in which the stored parameter block is reported.
enum class ParamScale { linear, log };

/// Prior for one parameter component, expressed in physical units.
struct ParameterPrior {
  enum class Kind { uniform, lognormal, fixed };
  Kind kind = Kind::uniform;
  /// uniform: bounds (a, b); lognormal: physical mean a and std b; fixed: value a.
  double a = 0.0;
  double b = 0.0;

  static ParameterPrior uniform(double low, double high) { return {Kind::uniform, low, high}; }
  static ParameterPrior lognormal(double mean, double std) { return {Kind::lognormal, mean, std}; }
  static ParameterPrior fixed(double value) { return {Kind::fixed, value, 0.0}; }

  /// Standard deviation of the physical value under this prior.
  double physical_std() const;
};

struct PriorSpec {
  std::vector<ParameterPrior> params;
  /// Store log(value) in the parameter block (requires positive draws).
  ParamScale scale = ParamScale::log;
  Vector state_mean;
  /// Isotropic initial state variance σ₀².
  double state_var = 0.01;

  void validate() const;
};

/// Independent engines owned by one member. Separate streams keep the
/// observation perturbations of EnMKF and EnKF runs paired under a shared seed.
struct MemberStreams {
  std::mt19937_64 init;
  std::mt19937_64 control;
  std::mt19937_64 perturb;
};

/// M augmented members stored column-wise in a (p+n)×M matrix.
class Ensemble {
 public:
  Ensemble(Matrix members, Eigen::Index param_count, std::uint64_t seed);

  Eigen::Index size() const { return members_.cols(); }
  Eigen::Index param_dim() const { return param_count_; }
  Eigen::Index state_dim() const { return members_.rows() - param_count_; }

  const Matrix& members() const { return members_; }
  Matrix& members() { return members_; }

  auto params() const { return members_.topRows(param_count_); }
  auto states() const { return members_.bottomRows(state_dim()); }

  ParameterVector theta(Eigen::Index i) const { return {members_.col(i).head(param_count_)}; }
  AugmentedState member(Eigen::Index i) const { return {members_.col(i), param_count_}; }

  MemberStreams& streams(Eigen::Index i) { return streams_[static_cast<std::size_t>(i)]; }

 private:
  Matrix members_;
  Eigen::Index param_count_;
  std::vector<MemberStreams> streams_;
};

/// Prediction covariance 𝒫 of the augmented vector.
struct PredictionCovariance {
  Matrix matrix;
};

/// Control moments in physical channels, N(mean, cov).
struct ControlMoments {
  Vector mean;
  Matrix cov;

  static ControlMoments from(const ControlFilterState& s, const ControlModel& m) {
    return {s.channel_mean(m), s.channel_cov(m)};
  }
};

struct AnalysisOptions {
  /// Test hook: when false the observation perturbations vⁱ are forced to zero.
  bool perturb = true;
};

Ensemble init_ensemble(const PriorSpec& prior, Eigen::Index members, std::uint64_t seed);

/// Operators for every member's θ.
std::vector<ModelOperators> member_operators(const Ensemble& e, const ModelProvider& provider);

/// Tⁱ ← A_θⁱ Tⁱ + B_θⁱ u_{k|k}; θ unchanged.
Ensemble enmkf_predict(Ensemble e, const std::vector<ModelOperators>& ops, const ControlMoments& u);
Ensemble enmkf_predict(Ensemble e, const ModelProvider& provider, const ControlMoments& u);

/// Sample covariance plus blockdiag(0, (1/M) Σ B_θⁱ P^u B_θⁱᵀ + W).
PredictionCovariance enmkf_covariance(const Ensemble& e_pred, const std::vector<ModelOperators>& ops,
                                      const ControlMoments& u, const Matrix& w);
PredictionCovariance enmkf_covariance(const Ensemble& e_pred, const ModelProvider& provider,
                                      const ControlMoments& u, const Matrix& w);

/// Tⁱ ← A_θⁱ Tⁱ + B_θⁱ uⁱ with uⁱ ~ N(u_{k|k}, P^u_{k|k}) from member i's control stream.
Ensemble enkf_predict(Ensemble e, const std::vector<ModelOperators>& ops, const ControlMoments& u);
Ensemble enkf_predict(Ensemble e, const ModelProvider& provider, const ControlMoments& u);

/// Sample covariance plus blockdiag(0, W).
PredictionCovariance enkf_covariance(const Ensemble& e_pred, const Matrix& w);

/// Perturbed-observation analysis with a single gain K = 𝒫𝓗ᵀ(𝓗𝒫𝓗ᵀ + V)⁻¹, 𝓗 = [0 H].
Ensemble analyze(Ensemble e_pred, const PredictionCovariance& p, const Vector& y,
                 const ModelOperators& ops, InnovationMode mode, AnalysisOptions options = {});

struct FilterDiagnostics {
  int step = 0;
  /// Parameter ensemble mean/std in physical units.
  Vector param_mean;
  Vector param_std;
  Vector state_mean;
  /// Ensemble estimate of the noiseless observation (heat flux for the wall)
  /// and its sample covariance.
  Vector obs_mean;
  Matrix obs_cov;
};

FilterDiagnostics diagnose(const Ensemble& e, const Matrix& h, InnovationMode mode, ParamScale scale,
                           int step);

struct StepResult {
  Ensemble ensemble;
  ControlFilterState control;
  FilterDiagnostics diagnostics;
};

struct StepSettings {
  FilterKind kind = FilterKind::enmkf;
  InnovationMode mode = InnovationMode::plain;
  ParamScale scale = ParamScale::linear;
  AnalysisOptions analysis;
};

/// One assimilation cycle: control KF predict/update with z, then the chosen
/// ensemble prediction, prediction covariance and analysis with y.
StepResult step(const StepSettings& settings, Ensemble e, const ModelProvider& provider,
                const ControlFilterState& control, const ControlModel& control_model,
                const Vector& z, const Vector& y, const Matrix& w);

}  // namespace enmkf
