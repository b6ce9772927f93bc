#pragma once

#include "enmkf/data.hpp"
#include "enmkf/ensemble.hpp"
#include "enmkf/wall.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace enmkf::experiment {

/// Everything needed for one wall run. Defaults reproduce the synthetic
/// campaign with the narrow synthetic priors.
struct RunConfig {
  FilterKind method = FilterKind::enmkf;
  int M = 100;
  std::uint64_t seed = 1;
  int ar_order = 1;

  /// Priors for (R, rhoC) in physical units.
  std::vector<ParameterPrior> priors{ParameterPrior::uniform(0.28, 0.36),
                                     ParameterPrior::uniform(301000.0, 376000.0)};
  wall::WallConfig wall;

  /// Flux observation noise V = diag(var_fint, var_fext).
  double var_fint = 20.0;
  double var_fext = 5.0;
  /// Boundary temperature noise C = diag(var_tint, var_text).
  double var_tint = 0.01;
  double var_text = 0.01;
  /// Control process noise: explicit diagonal, or q_scale × variance of first differences.
  std::optional<std::pair<double, double>> q_diag;
  double q_scale = 1.0;
  /// W = w_scale · I.
  double w_scale = 0.0;

  /// CSV input; the synthetic campaign is generated when empty.
  std::optional<std::filesystem::path> data_path;
  data::SyntheticSpec synthetic;
  /// Number of records to assimilate; 0 means all.
  int max_steps = 0;

  std::filesystem::path output_dir;

  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

struct RunResult {
  FilterDiagnostics initial;
  std::vector<FilterDiagnostics> history;  ///< one entry per assimilated minute
  std::vector<int> minutes;                ///< t_min of each history entry
  double wall_clock_s = 0.0;
};

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& s);

/// Measurements the config points at (CSV or generated synthetic campaign).
std::vector<data::MeasurementRecord> load_measurements(const RunConfig& cfg);

/// The control model used for the boundary temperatures of `records`.
ControlModel boundary_model(const RunConfig& cfg, const std::vector<data::MeasurementRecord>& records);

/// Runs the wall filter over `records` without touching the filesystem.
RunResult run_on(const RunConfig& cfg, const std::vector<data::MeasurementRecord>& records);

/// Loads data, runs, and writes diagnostics.csv and summary.json to cfg.output_dir when set.
RunResult run_filter(const RunConfig& cfg);

void write_diagnostics_csv(const std::filesystem::path& path, const RunResult& result);
/// Reads the columns of a diagnostics.csv back into a history (state mean left empty).
RunResult read_diagnostics_csv(const std::filesystem::path& path);
nlohmann::json run_summary(const RunConfig& cfg, const RunResult& result);

struct StoppingRule {
  double rel_tol = 1e-3;
  int window_min = 500;

  void validate() const;
};

/// True iff both parameter means moved by less than rel_tol (relative) and both
/// stds by less than 10·rel_tol over the last `window_min` minutes ending at minute k.
bool stopping_check(const RunResult& history, const StoppingRule& rule, int k);

/// stopping_check at every minute; minutes without a full window report false.
std::vector<bool> stopping_trace(const RunResult& history, const StoppingRule& rule);

struct ConvergenceRow {
  FilterKind method;
  int M;
  std::uint64_t seed;
  double R_mean, R_std, rhoC_mean, rhoC_std;
};

struct ConvergenceAggregate {
  FilterKind method;
  int M;
  double R_abs_err;     ///< mean over replicates of |R_mean − R_true|
  double rhoC_abs_err;
  double R_std;         ///< mean over replicates
  double rhoC_std;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceAggregate> aggregate;
};

/// Both methods for every M and replicate seed (base.seed + r), evaluated at minute t_eval.
ConvergenceTable convergence_study(const RunConfig& base, const std::vector<int>& m_list, int t_eval,
                                   int replicates);

void write_convergence(const std::filesystem::path& dir, const ConvergenceTable& table);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MethodRun {
  FilterKind method;
  std::uint64_t seed;
  Vector final_bias;          ///< (R, rhoC) final mean − truth
  Vector final_std;
  Vector initial_std;
  bool collapsed;             ///< some parameter std fell below 1% of its initial std
  Vector flux_residual_var;   ///< variance over time of F̂ − F_true (int, ext)
  std::vector<Vector> std_trajectory;
};

struct ComparisonReport {
  std::vector<MethodRun> first;   ///< runs of methods.first, one per seed
  std::vector<MethodRun> second;  ///< paired runs of methods.second
  std::pair<FilterKind, FilterKind> methods;
};

/// Paired-seed runs on the synthetic campaign (seeds cfg.seed + r).
ComparisonReport compare_methods(const RunConfig& cfg, int replicates,
                                 std::pair<FilterKind, FilterKind> methods = {FilterKind::enmkf,
                                                                              FilterKind::enkf});

nlohmann::json comparison_json(const ComparisonReport& report);
void write_comparison(const std::filesystem::path& dir, const ComparisonReport& report);

/// Median of a copy of `v`.
double median(std::vector<double> v);

}  // namespace enmkf::experiment
