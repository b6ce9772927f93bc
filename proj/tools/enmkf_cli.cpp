// Command-line front end: filter, synth, converge, compare, stopcheck.

#include "enmkf/data.hpp"
#include "enmkf/errors.hpp"
#include "enmkf/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace enmkf;
using namespace enmkf::experiment;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method;
  std::optional<int> ensemble_size;
  std::optional<int> ar_order;
  std::string data;
  std::optional<int> horizon;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--method", o.method, "enmkf or enkf")->check(CLI::IsMember({"enmkf", "enkf"}));
  cmd->add_option("--ensemble-size", o.ensemble_size, "Ensemble size M");
  cmd->add_option("--ar-order", o.ar_order, "Boundary AR order (1 or 2)")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--data", o.data, "Measurement CSV (t_min,T_int,T_ext,F_int,F_ext)");
  cmd->add_option("--horizon", o.horizon, "Synthetic campaign length in minutes");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg = o.config.empty() ? config_from_json(nlohmann::json::object()) : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.method.empty()) cfg.method = filter_kind_from_string(o.method);
  if (o.ensemble_size) cfg.M = *o.ensemble_size;
  if (o.ar_order) cfg.ar_order = *o.ar_order;
  if (!o.data.empty()) cfg.data_path = o.data;
  if (o.horizon) cfg.synthetic.horizon_min = *o.horizon;
  cfg.validate();
  return cfg;
}

void print_final(const RunResult& r) {
  const auto& d = r.history.back();
  std::cout << "steps " << r.history.size() << "  R " << d.param_mean(0) << " ± " << d.param_std(0) << "  rhoC "
            << d.param_mean(1) << " ± " << d.param_std(1) << "  flux (" << d.obs_mean(0) << ", " << d.obs_mean(1)
            << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble-marginalized Kalman filtering for wall thermal properties"};
  app.require_subcommand(1);

  CommonOptions filter_opts, synth_opts, conv_opts, cmp_opts, stop_opts;

  auto* filter_cmd = app.add_subcommand("filter", "Run EnMKF or EnKF over a measurement series");
  add_common(filter_cmd, filter_opts);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic measurement campaign");
  add_common(synth_cmd, synth_opts);

  auto* conv_cmd = app.add_subcommand("converge", "Ensemble-size convergence study (both methods)");
  add_common(conv_cmd, conv_opts);
  std::vector<int> m_list{25, 50, 100};
  int t_eval = 2000;
  int conv_replicates = 10;
  conv_cmd->add_option("--m-list", m_list, "Ensemble sizes")->delimiter(',');
  conv_cmd->add_option("--t-eval", t_eval, "Evaluation minute");
  conv_cmd->add_option("--replicates", conv_replicates, "Seeds per ensemble size");

  auto* cmp_cmd = app.add_subcommand("compare", "Paired-seed EnMKF vs EnKF comparison");
  add_common(cmp_cmd, cmp_opts);
  int cmp_replicates = 10;
  cmp_cmd->add_option("--replicates", cmp_replicates, "Number of paired seeds");

  auto* stop_cmd = app.add_subcommand("stopcheck", "Evaluate the stopping rule on a filter history");
  add_common(stop_cmd, stop_opts);
  StoppingRule rule;
  std::string diagnostics_path;
  stop_cmd->add_option("--rel-tol", rule.rel_tol, "Relative tolerance on parameter means");
  stop_cmd->add_option("--window", rule.window_min, "Window in minutes");
  stop_cmd->add_option("--diagnostics", diagnostics_path, "Existing diagnostics.csv (otherwise runs the filter)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*filter_cmd) {
      const RunConfig cfg = resolve(filter_opts);
      const RunResult r = run_filter(cfg);
      print_final(r);
      if (!cfg.output_dir.empty()) std::cout << "wrote " << (cfg.output_dir / "diagnostics.csv").string() << '\n';
    } else if (*synth_cmd) {
      RunConfig cfg = resolve(synth_opts);
      if (synth_opts.seed) cfg.synthetic.seed = *synth_opts.seed;
      const fs::path out = cfg.output_dir.empty() ? fs::path(".") : cfg.output_dir;
      fs::create_directories(out);
      const auto synthetic = data::generate_synthetic(cfg.synthetic);
      data::write_csv(out / "data.csv", synthetic.records);
      data::write_truth_csv(out / "data_truth.csv", synthetic.truth);
      std::cout << "wrote " << synthetic.records.size() << " records to " << (out / "data.csv").string() << '\n';
    } else if (*conv_cmd) {
      const RunConfig cfg = resolve(conv_opts);
      const auto table = convergence_study(cfg, m_list, t_eval, conv_replicates);
      const fs::path out = cfg.output_dir.empty() ? fs::path(".") : cfg.output_dir;
      write_convergence(out, table);
      for (const auto& a : table.aggregate)
        std::cout << to_string(a.method) << " M=" << a.M << "  |R err| " << a.R_abs_err << "  |rhoC err| "
                  << a.rhoC_abs_err << "  R std " << a.R_std << '\n';
    } else if (*cmp_cmd) {
      const RunConfig cfg = resolve(cmp_opts);
      const auto report = compare_methods(cfg, cmp_replicates);
      const fs::path out = cfg.output_dir.empty() ? fs::path(".") : cfg.output_dir;
      write_comparison(out, report);
      std::cout << comparison_json(report).dump(2) << '\n';
    } else if (*stop_cmd) {
      rule.validate();
      RunResult history;
      if (!diagnostics_path.empty()) {
        history = read_diagnostics_csv(diagnostics_path);
      } else {
        history = run_filter(resolve(stop_opts));
      }
      const auto trace = stopping_trace(history, rule);
      std::optional<int> first;
      int transitions = 0;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i] && (i == 0 || !trace[i - 1])) {
          ++transitions;
          if (!first) first = history.minutes[i];
        }
      }
      const bool final_state = !trace.empty() && trace.back();
      nlohmann::json j = {{"rel_tol", rule.rel_tol},
                          {"window_min", rule.window_min},
                          {"stop", final_state},
                          {"transitions", transitions}};
      if (first) j["first_stop_minute"] = *first;
      std::cout << j.dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}
