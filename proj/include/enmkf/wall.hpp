#pragma once

#include "enmkf/statespace.hpp"

#include <array>

namespace enmkf::wall {

/// Discretization of a single-layer wall on the normalized domain s ∈ [0, 1].
/// The state holds all n_cells + 1 node temperatures (°C), boundary nodes included.
struct WallConfig {
  int n_cells = 20;
  /// Step length in seconds; one measurement per minute.
  double dt = 60.0;
  /// Mid-wall temperature of the initial profile (°C).
  double tau0 = 16.1;
  /// Isotropic variance of the initial-state prior (°C²).
  double state_prior_var = 0.01;
  /// Physical thickness; documentation only, it cancels in normalized coordinates.
  double thickness_mm = 215.0;

  int node_count() const { return n_cells + 1; }
  double ds() const { return 1.0 / n_cells; }
  void validate() const;
};

struct WallParameters {
  double R = 0.3106;     ///< thermal resistance, m²K/W
  double rhoC = 3.2e5;   ///< heat capacity per unit area, J/m²K
};

/// Observation and process noise attached to the operators.
struct WallNoise {
  double var_fint = 20.0;  ///< (W/m²)²
  double var_fext = 5.0;   ///< (W/m²)²
  double w_scale = 0.0;    ///< W = w_scale · I (°C²)

  Matrix V() const;
};

/// Normalized diffusivity 1/(R ρC), 1/s.
double diffusivity(const WallParameters& params);

/// Backward-Euler mesh ratio a·dt/Δs².
double mesh_ratio(const WallConfig& cfg, const WallParameters& params);

/// Flux stencil without the 1/R factor: (1/(2Δs))·[[3,-4,1,0…],[…0,1,-4,3]].
Matrix flux_operator(const WallConfig& cfg);

/// Backward-Euler operators of the wall. Control channels are (T_int, T_ext);
/// observations are R·(F_int, F_ext) through flux_operator().
ModelOperators build_operators(const WallConfig& cfg, const WallParameters& params,
                               const WallNoise& noise = {});

/// (F_int, F_ext) = (1/R)·H·T in W/m².
std::array<double, 2> flux_observe(const Vector& temperatures, double R, const WallConfig& cfg);

/// Piecewise-linear profile through T_int0 (s=0), tau0 (s=1/2) and T_ext0 (s=1).
StateVector initial_condition(double t_int0, double t_ext0, const WallConfig& cfg);

/// θ = (log R, log ρC) ↦ build_operators(cfg, (e^θ₀, e^θ₁), noise).
class WallProvider final : public ModelProvider {
 public:
  WallProvider(WallConfig cfg, WallNoise noise);

  ModelOperators operators(const ParameterVector& theta) const override;
  Eigen::Index param_dim() const override { return 2; }
  Eigen::Index state_dim() const override { return cfg_.node_count(); }
  Eigen::Index control_dim() const override { return 2; }
  Eigen::Index obs_dim() const override { return 2; }
  double dt() const override { return cfg_.dt; }

  const WallConfig& config() const { return cfg_; }

 private:
  WallConfig cfg_;
  WallNoise noise_;
};

WallProvider wall_provider(const WallConfig& cfg, const WallNoise& noise = {});

}  // namespace enmkf::wall
