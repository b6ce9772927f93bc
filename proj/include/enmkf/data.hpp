#pragma once

#include "enmkf/wall.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace enmkf::data {

/// One per-minute measurement: boundary temperatures (°C) and heat fluxes (W/m²).
struct MeasurementRecord {
  int t_min = 0;
  double T_int = 0.0;
  double T_ext = 0.0;
  double F_int = 0.0;
  double F_ext = 0.0;
};

/// Parses `t_min,T_int,T_ext,F_int,F_ext`. Errors carry 1-based line numbers.
std::vector<MeasurementRecord> read_csv(std::istream& in);
std::vector<MeasurementRecord> load_csv(const std::filesystem::path& path);

void write_csv(std::ostream& out, std::span<const MeasurementRecord> records);
void write_csv(const std::filesystem::path& path, std::span<const MeasurementRecord> records);
/// Same layout with the `*_true` header used for noiseless companions.
void write_truth_csv(const std::filesystem::path& path, std::span<const MeasurementRecord> records);

/// Cadence and finiteness checks; `first_line` offsets reported line numbers.
void validate_series(std::span<const MeasurementRecord> records, int first_line = 2);

struct Sinusoid {
  double amplitude = 0.0;
  double period_min = 1440.0;
  double phase = 0.0;
};

/// mean + Σ amplitude·sin(2πt/period + phase); no terms means a constant.
struct BoundaryProfile {
  double mean = 0.0;
  std::vector<Sinusoid> terms;

  double operator()(double t_min) const;

  static BoundaryProfile constant(double value) { return {value, {}}; }
};

struct NoiseLevels {
  double var_T = 0.01;      ///< both boundary temperatures, °C²
  double var_Fint = 20.0;   ///< (W/m²)²
  double var_Fext = 5.0;    ///< (W/m²)²
};

struct SyntheticSpec {
  wall::WallParameters truth{0.3106, 3.2e5};
  int horizon_min = 2000;
  BoundaryProfile T_int{25.0, {{1.5, 1440.0, 0.0}}};
  BoundaryProfile T_ext{10.0, {{4.0, 1440.0, 1.0471975511965976}}};
  NoiseLevels noise;
  std::uint64_t seed = 1;
  wall::WallConfig cfg;

  void validate() const;
};

struct SyntheticData {
  std::vector<MeasurementRecord> records;  ///< noisy, t_min = 1..horizon
  std::vector<MeasurementRecord> truth;    ///< noiseless boundaries and fluxes
  Matrix states;                           ///< noiseless node temperatures, column k = minute k (k = 0..horizon)
};

/// Forward-simulates the wall from the piecewise-linear initial profile and
/// perturbs every channel with independent Gaussian noise.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Variance of (series − centered moving average) times 1/(1 − 1/window).
/// Only indices with a full window contribute.
double estimate_noise_variance(std::span<const double> series, int window = 31);

}  // namespace enmkf::data
