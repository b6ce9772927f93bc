#include "enmkf/experiment.hpp"

#include "enmkf/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace enmkf::experiment {

using nlohmann::json;

namespace {

constexpr double kCollapseFraction = 0.01;

ParameterPrior prior_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return ParameterPrior::uniform(j.at("low").get<double>(), j.at("high").get<double>());
  if (kind == "lognormal") return ParameterPrior::lognormal(j.at("mean").get<double>(), j.at("std").get<double>());
  if (kind == "fixed") return ParameterPrior::fixed(j.at("value").get<double>());
  throw ConfigError("unknown prior kind '" + kind + "'");
}

json prior_to_json(const ParameterPrior& p) {
  switch (p.kind) {
    case ParameterPrior::Kind::uniform:
      return {{"kind", "uniform"}, {"low", p.a}, {"high", p.b}};
    case ParameterPrior::Kind::lognormal:
      return {{"kind", "lognormal"}, {"mean", p.a}, {"std", p.b}};
    case ParameterPrior::Kind::fixed:
      return {{"kind", "fixed"}, {"value", p.a}};
  }
  return {};
}

data::BoundaryProfile profile_from_json(const json& j) {
  data::BoundaryProfile p;
  p.mean = j.value("mean", 0.0);
  if (j.contains("terms")) {
    for (const auto& t : j.at("terms"))
      p.terms.push_back({t.value("amplitude", 0.0), t.value("period_min", 1440.0), t.value("phase", 0.0)});
  }
  return p;
}

json profile_to_json(const data::BoundaryProfile& p) {
  json terms = json::array();
  for (const auto& t : p.terms)
    terms.push_back({{"amplitude", t.amplitude}, {"period_min", t.period_min}, {"phase", t.phase}});
  return {{"mean", p.mean}, {"terms", terms}};
}

void wall_from_json(const json& j, wall::WallConfig& w) {
  w.n_cells = j.value("n_cells", w.n_cells);
  w.dt = j.value("dt", w.dt);
  w.tau0 = j.value("tau0", w.tau0);
  w.state_prior_var = j.value("state_prior_var", w.state_prior_var);
  w.thickness_mm = j.value("thickness_mm", w.thickness_mm);
}

json wall_to_json(const wall::WallConfig& w) {
  return {{"n_cells", w.n_cells}, {"dt", w.dt}, {"tau0", w.tau0}, {"state_prior_var", w.state_prior_var},
          {"thickness_mm", w.thickness_mm}};
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

const FilterDiagnostics& at_minute(const RunResult& r, int minute) {
  if (r.minutes.empty()) throw ConfigError("empty diagnostics history");
  const int offset = minute - r.minutes.front();
  if (offset < 0 || offset >= static_cast<int>(r.history.size()))
    throw ConfigError("minute " + std::to_string(minute) + " outside the diagnostics history");
  return r.history[static_cast<std::size_t>(offset)];
}

}  // namespace

std::string to_string(FilterKind kind) { return kind == FilterKind::enmkf ? "enmkf" : "enkf"; }

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "enmkf") return FilterKind::enmkf;
  if (s == "enkf") return FilterKind::enkf;
  throw ConfigError("method must be 'enmkf' or 'enkf', got '" + s + "'");
}

void RunConfig::validate() const {
  if (M < 2) throw ConfigError("ensemble size M must be at least 2");
  if (ar_order != 1 && ar_order != 2) throw ConfigError("ar_order must be 1 or 2");
  if (priors.size() != 2) throw ConfigError("exactly two priors (R, rhoC) are required");
  wall.validate();
  for (double v : {var_fint, var_fext, var_tint, var_text})
    if (!(v > 0.0)) throw ConfigError("noise variances must be positive");
  if (q_diag && (!(q_diag->first >= 0.0) || !(q_diag->second >= 0.0)))
    throw ConfigError("q_diag entries must be >= 0");
  if (!(q_scale >= 0.0)) throw ConfigError("q_scale must be >= 0");
  if (!(w_scale >= 0.0)) throw ConfigError("w_scale must be >= 0");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (!data_path) synthetic.validate();
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("method")) c.method = filter_kind_from_string(j.at("method").get<std::string>());
    c.M = j.value("M", c.M);
    c.seed = j.value("seed", c.seed);
    c.ar_order = j.value("ar_order", c.ar_order);
    if (j.contains("priors")) {
      const auto& p = j.at("priors");
      c.priors = {prior_from_json(p.at("R")), prior_from_json(p.at("rhoC"))};
    }
    if (j.contains("wall")) wall_from_json(j.at("wall"), c.wall);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      c.var_fint = n.value("var_fint", c.var_fint);
      c.var_fext = n.value("var_fext", c.var_fext);
      c.var_tint = n.value("var_tint", c.var_tint);
      c.var_text = n.value("var_text", c.var_text);
      if (n.contains("q_diag")) {
        const auto& q = n.at("q_diag");
        c.q_diag = std::make_pair(q.at(0).get<double>(), q.at(1).get<double>());
      }
      c.q_scale = n.value("q_scale", c.q_scale);
      c.w_scale = n.value("w_scale", c.w_scale);
    }
    if (j.contains("data_path")) c.data_path = j.at("data_path").get<std::string>();
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      auto& spec = c.synthetic;
      if (s.contains("truth")) {
        spec.truth.R = s.at("truth").value("R", spec.truth.R);
        spec.truth.rhoC = s.at("truth").value("rhoC", spec.truth.rhoC);
      }
      spec.horizon_min = s.value("horizon_min", spec.horizon_min);
      if (s.contains("T_int")) spec.T_int = profile_from_json(s.at("T_int"));
      if (s.contains("T_ext")) spec.T_ext = profile_from_json(s.at("T_ext"));
      if (s.contains("noise")) {
        const auto& n = s.at("noise");
        spec.noise.var_T = n.value("var_T", spec.noise.var_T);
        spec.noise.var_Fint = n.value("var_Fint", spec.noise.var_Fint);
        spec.noise.var_Fext = n.value("var_Fext", spec.noise.var_Fext);
      }
      spec.seed = s.value("seed", spec.seed);
    }
    c.max_steps = j.value("max_steps", c.max_steps);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  // The synthetic campaign always uses the run's wall discretization.
  c.synthetic.cfg = c.wall;
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json noise = {{"var_fint", c.var_fint}, {"var_fext", c.var_fext}, {"var_tint", c.var_tint},
                {"var_text", c.var_text}, {"q_scale", c.q_scale},   {"w_scale", c.w_scale}};
  if (c.q_diag) noise["q_diag"] = {c.q_diag->first, c.q_diag->second};
  const auto& s = c.synthetic;
  json j = {
      {"method", to_string(c.method)},
      {"M", c.M},
      {"seed", c.seed},
      {"ar_order", c.ar_order},
      {"priors", {{"R", prior_to_json(c.priors.at(0))}, {"rhoC", prior_to_json(c.priors.at(1))}}},
      {"wall", wall_to_json(c.wall)},
      {"noise", noise},
      {"synthetic",
       {{"truth", {{"R", s.truth.R}, {"rhoC", s.truth.rhoC}}},
        {"horizon_min", s.horizon_min},
        {"T_int", profile_to_json(s.T_int)},
        {"T_ext", profile_to_json(s.T_ext)},
        {"noise", {{"var_T", s.noise.var_T}, {"var_Fint", s.noise.var_Fint}, {"var_Fext", s.noise.var_Fext}}},
        {"seed", s.seed}}},
      {"max_steps", c.max_steps},
  };
  if (c.data_path) j["data_path"] = c.data_path->string();
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir.string();
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<data::MeasurementRecord> load_measurements(const RunConfig& cfg) {
  std::vector<data::MeasurementRecord> records =
      cfg.data_path ? data::load_csv(*cfg.data_path) : data::generate_synthetic(cfg.synthetic).records;
  if (cfg.max_steps > 0 && static_cast<std::size_t>(cfg.max_steps) < records.size())
    records.resize(static_cast<std::size_t>(cfg.max_steps));
  return records;
}

ControlModel boundary_model(const RunConfig& cfg, const std::vector<data::MeasurementRecord>& records) {
  if (records.empty()) throw DataError("no measurements to assimilate");
  Matrix c = Matrix::Zero(2, 2);
  c(0, 0) = cfg.var_tint;
  c(1, 1) = cfg.var_text;

  Matrix q = Matrix::Zero(2, 2);
  if (cfg.q_diag) {
    q(0, 0) = cfg.q_diag->first;
    q(1, 1) = cfg.q_diag->second;
  } else {
    std::vector<Vector> z;
    z.reserve(records.size());
    for (const auto& r : records) z.push_back((Vector(2) << r.T_int, r.T_ext).finished());
    q = difference_variance(z, cfg.q_scale);
  }
  const Vector u0 = (Vector(2) << records.front().T_int, records.front().T_ext).finished();
  const Matrix u0_cov = 10.0 * c;
  return cfg.ar_order == 1 ? ar1_model(2, q, c, u0, u0_cov) : ar2_model(2, q, c, u0, u0_cov);
}

RunResult run_on(const RunConfig& cfg, const std::vector<data::MeasurementRecord>& records) {
  cfg.validate();
  data::validate_series(records);
  if (records.empty()) throw DataError("no measurements to assimilate");
  const auto start = std::chrono::steady_clock::now();

  const ControlModel control_model = boundary_model(cfg, records);
  const wall::WallProvider provider =
      wall::wall_provider(cfg.wall, {cfg.var_fint, cfg.var_fext, cfg.w_scale});
  const Matrix w = cfg.w_scale * Matrix::Identity(provider.state_dim(), provider.state_dim());

  PriorSpec prior;
  prior.params = cfg.priors;
  prior.scale = ParamScale::log;
  prior.state_mean = wall::initial_condition(records.front().T_int, records.front().T_ext, cfg.wall).values;
  prior.state_var = cfg.wall.state_prior_var;
  Ensemble ensemble = init_ensemble(prior, cfg.M, cfg.seed);

  StepSettings settings;
  settings.kind = cfg.method;
  settings.mode = InnovationMode::scaled_by_r;
  settings.scale = ParamScale::log;

  RunResult result;
  const Matrix h = wall::flux_operator(cfg.wall);
  result.initial = diagnose(ensemble, h, settings.mode, settings.scale, 0);
  result.history.reserve(records.size());
  result.minutes.reserve(records.size());

  ControlFilterState control = initial_control_state(control_model);
  Vector z(2), y(2);
  for (const auto& r : records) {
    z << r.T_int, r.T_ext;
    y << r.F_int, r.F_ext;
    try {
      StepResult s = step(settings, std::move(ensemble), provider, control, control_model, z, y, w);
      ensemble = std::move(s.ensemble);
      control = std::move(s.control);
      result.history.push_back(std::move(s.diagnostics));
      result.minutes.push_back(r.t_min);
    } catch (const NumericalError& e) {
      throw NumericalError("step at t_min " + std::to_string(r.t_min) + ": " + e.what());
    }
  }
  result.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_diagnostics_csv(const std::filesystem::path& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  std::string text = "t_min,R_mean,R_std,rhoC_mean,rhoC_std,Fint_mean,Fext_mean,Fint_var,Fext_var\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const auto& d = result.history[i];
    text += std::to_string(result.minutes[i]);
    for (double v : {d.param_mean(0), d.param_std(0), d.param_mean(1), d.param_std(1), d.obs_mean(0),
                     d.obs_mean(1), d.obs_cov(0, 0), d.obs_cov(1, 1)}) {
      text += ',';
      text += format_number(v);
    }
    text += '\n';
  }
  out << text;
}

RunResult read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("t_min,R_mean,R_std,rhoC_mean,rhoC_std", 0) != 0)
    throw DataError(path.string() + ": line 1: unexpected diagnostics header");
  RunResult r;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": line " + std::to_string(line_no) + ": non-numeric cell");
      }
    }
    if (v.size() != 9) throw DataError(path.string() + ": line " + std::to_string(line_no) + ": expected 9 columns");
    FilterDiagnostics d;
    d.step = static_cast<int>(v[0]);
    d.param_mean = (Vector(2) << v[1], v[3]).finished();
    d.param_std = (Vector(2) << v[2], v[4]).finished();
    d.obs_mean = (Vector(2) << v[5], v[6]).finished();
    d.obs_cov = Matrix::Zero(2, 2);
    d.obs_cov(0, 0) = v[7];
    d.obs_cov(1, 1) = v[8];
    r.history.push_back(std::move(d));
    r.minutes.push_back(static_cast<int>(v[0]));
  }
  return r;
}

json run_summary(const RunConfig& cfg, const RunResult& result) {
  json j;
  j["config"] = config_to_json(cfg);
  j["steps"] = result.history.size();
  if (!result.history.empty()) {
    const auto& d = result.history.back();
    j["final"] = {{"t_min", result.minutes.back()},
                  {"R_mean", d.param_mean(0)},
                  {"R_std", d.param_std(0)},
                  {"rhoC_mean", d.param_mean(1)},
                  {"rhoC_std", d.param_std(1)},
                  {"Fint_mean", d.obs_mean(0)},
                  {"Fext_mean", d.obs_mean(1)},
                  {"Fint_var", d.obs_cov(0, 0)},
                  {"Fext_var", d.obs_cov(1, 1)}};
  }
  j["initial"] = {{"R_mean", result.initial.param_mean(0)},
                  {"R_std", result.initial.param_std(0)},
                  {"rhoC_mean", result.initial.param_mean(1)},
                  {"rhoC_std", result.initial.param_std(1)}};
  // Only this block varies between identical runs.
  j["timing"] = {{"finished_at", utc_timestamp()}, {"wall_clock_s", result.wall_clock_s}};
  return j;
}

RunResult run_filter(const RunConfig& cfg) {
  cfg.validate();
  const auto records = load_measurements(cfg);
  RunResult result = run_on(cfg, records);
  if (!cfg.output_dir.empty()) {
    ensure_dir(cfg.output_dir);
    write_diagnostics_csv(cfg.output_dir / "diagnostics.csv", result);
    std::ofstream(cfg.output_dir / "summary.json") << run_summary(cfg, result).dump(2) << '\n';
  }
  return result;
}

void StoppingRule::validate() const {
  if (!(rel_tol > 0.0)) throw ConfigError("stopping rule: rel_tol must be > 0");
  if (window_min < 2) throw ConfigError("stopping rule: window must be >= 2");
}

bool stopping_check(const RunResult& history, const StoppingRule& rule, int k) {
  rule.validate();
  if (k < rule.window_min) throw ConfigError("stopping check: minute precedes the first full window");
  const auto& now = at_minute(history, k);
  const auto& before = at_minute(history, k - rule.window_min);
  for (Eigen::Index j = 0; j < now.param_mean.size(); ++j) {
    const double dmean = std::abs(now.param_mean(j) - before.param_mean(j)) / std::abs(now.param_mean(j));
    const double dstd = std::abs(now.param_std(j) - before.param_std(j)) / now.param_std(j);
    if (!(dmean < rule.rel_tol) || !(dstd < 10.0 * rule.rel_tol)) return false;
  }
  return true;
}

std::vector<bool> stopping_trace(const RunResult& history, const StoppingRule& rule) {
  std::vector<bool> trace(history.history.size(), false);
  if (history.minutes.empty()) return trace;
  const int first = history.minutes.front();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const int k = history.minutes[i];
    if (k < rule.window_min || k - rule.window_min < first) continue;
    trace[i] = stopping_check(history, rule, k);
  }
  return trace;
}

ConvergenceTable convergence_study(const RunConfig& base, const std::vector<int>& m_list, int t_eval,
                                   int replicates) {
  if (base.data_path) throw ConfigError("convergence study needs the synthetic campaign (truth)");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (t_eval < 1 || t_eval > base.synthetic.horizon_min)
    throw ConfigError("t_eval must lie within the synthetic horizon");

  RunConfig cfg = base;
  cfg.max_steps = t_eval;
  const auto records = load_measurements(cfg);
  const auto& truth = base.synthetic.truth;

  ConvergenceTable table;
  for (FilterKind method : {FilterKind::enmkf, FilterKind::enkf}) {
    for (int m : m_list) {
      ConvergenceAggregate agg{method, m, 0.0, 0.0, 0.0, 0.0};
      for (int r = 0; r < replicates; ++r) {
        cfg.method = method;
        cfg.M = m;
        cfg.seed = base.seed + static_cast<std::uint64_t>(r);
        const RunResult res = run_on(cfg, records);
        const auto& d = at_minute(res, t_eval);
        table.rows.push_back({method, m, cfg.seed, d.param_mean(0), d.param_std(0), d.param_mean(1), d.param_std(1)});
        agg.R_abs_err += std::abs(d.param_mean(0) - truth.R);
        agg.rhoC_abs_err += std::abs(d.param_mean(1) - truth.rhoC);
        agg.R_std += d.param_std(0);
        agg.rhoC_std += d.param_std(1);
      }
      agg.R_abs_err /= replicates;
      agg.rhoC_abs_err /= replicates;
      agg.R_std /= replicates;
      agg.rhoC_std /= replicates;
      table.aggregate.push_back(agg);
    }
  }
  return table;
}

void write_convergence(const std::filesystem::path& dir, const ConvergenceTable& table) {
  ensure_dir(dir);
  {
    std::ofstream out(dir / "convergence.csv");
    out << "method,M,seed,R_mean,R_std,rhoC_mean,rhoC_std\n";
    for (const auto& r : table.rows)
      out << to_string(r.method) << ',' << r.M << ',' << r.seed << ',' << format_number(r.R_mean) << ','
          << format_number(r.R_std) << ',' << format_number(r.rhoC_mean) << ',' << format_number(r.rhoC_std)
          << '\n';
  }
  std::ofstream out(dir / "convergence_summary.csv");
  out << "method,M,R_abs_err,rhoC_abs_err,R_std,rhoC_std\n";
  for (const auto& a : table.aggregate)
    out << to_string(a.method) << ',' << a.M << ',' << format_number(a.R_abs_err) << ','
        << format_number(a.rhoC_abs_err) << ',' << format_number(a.R_std) << ',' << format_number(a.rhoC_std)
        << '\n';
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("loglog_slope: need matching series of length >= 2");
  const auto count = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("loglog_slope: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

ComparisonReport compare_methods(const RunConfig& cfg, int replicates, std::pair<FilterKind, FilterKind> methods) {
  if (cfg.data_path) throw ConfigError("method comparison needs the synthetic campaign (truth)");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  RunConfig run = cfg;
  const auto synthetic = data::generate_synthetic(cfg.synthetic);
  auto records = synthetic.records;
  auto truth = synthetic.truth;
  if (cfg.max_steps > 0 && static_cast<std::size_t>(cfg.max_steps) < records.size()) {
    records.resize(static_cast<std::size_t>(cfg.max_steps));
    truth.resize(records.size());
  }
  const Vector true_params = (Vector(2) << cfg.synthetic.truth.R, cfg.synthetic.truth.rhoC).finished();

  const auto one_run = [&](FilterKind method, std::uint64_t seed) {
    run.method = method;
    run.seed = seed;
    const RunResult res = run_on(run, records);
    MethodRun m;
    m.method = method;
    m.seed = seed;
    const auto& last = res.history.back();
    m.final_bias = last.param_mean - true_params;
    m.final_std = last.param_std;
    m.initial_std = res.initial.param_std;
    m.collapsed = ((m.final_std.array() < kCollapseFraction * m.initial_std.array())).any();
    Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
    for (std::size_t k = 0; k < res.history.size(); ++k) {
      const Vector resid =
          res.history[k].obs_mean - (Vector(2) << truth[k].F_int, truth[k].F_ext).finished();
      sum += resid;
      sum_sq += resid.cwiseProduct(resid);
      m.std_trajectory.push_back(res.history[k].param_std);
    }
    const auto count = static_cast<double>(res.history.size());
    m.flux_residual_var = (sum_sq - sum.cwiseProduct(sum) / count) / (count - 1.0);
    return m;
  };

  ComparisonReport report;
  report.methods = methods;
  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    report.first.push_back(one_run(methods.first, seed));
    report.second.push_back(one_run(methods.second, seed));
  }
  return report;
}

json comparison_json(const ComparisonReport& report) {
  const auto summarize = [](const std::vector<MethodRun>& runs) {
    std::vector<double> bias_r, bias_c, std_r, std_c, fvi, fve;
    int collapsed = 0;
    for (const auto& m : runs) {
      bias_r.push_back(std::abs(m.final_bias(0)));
      bias_c.push_back(std::abs(m.final_bias(1)));
      std_r.push_back(m.final_std(0));
      std_c.push_back(m.final_std(1));
      fvi.push_back(m.flux_residual_var(0));
      fve.push_back(m.flux_residual_var(1));
      collapsed += m.collapsed ? 1 : 0;
    }
    return json{{"median_abs_bias_R", median(bias_r)},
                {"median_abs_bias_rhoC", median(bias_c)},
                {"median_final_std_R", median(std_r)},
                {"median_final_std_rhoC", median(std_c)},
                {"median_flux_residual_var_int", median(fvi)},
                {"median_flux_residual_var_ext", median(fve)},
                {"collapse_rate", static_cast<double>(collapsed) / static_cast<double>(runs.size())}};
  };
  json per_seed = json::array();
  for (std::size_t i = 0; i < report.first.size(); ++i) {
    const auto& a = report.first[i];
    const auto& b = report.second[i];
    per_seed.push_back({{"seed", a.seed},
                        {"bias_R_diff", a.final_bias(0) - b.final_bias(0)},
                        {"bias_rhoC_diff", a.final_bias(1) - b.final_bias(1)},
                        {"std_R_diff", a.final_std(0) - b.final_std(0)},
                        {"std_rhoC_diff", a.final_std(1) - b.final_std(1)}});
  }
  return {{"methods", {to_string(report.methods.first), to_string(report.methods.second)}},
          {"replicates", report.first.size()},
          {"first", summarize(report.first)},
          {"second", summarize(report.second)},
          {"paired_differences", per_seed}};
}

void write_comparison(const std::filesystem::path& dir, const ComparisonReport& report) {
  ensure_dir(dir);
  std::ofstream(dir / "comparison.json") << comparison_json(report).dump(2) << '\n';
  std::ofstream out(dir / "comparison.csv");
  out << "method,seed,R_bias,rhoC_bias,R_std,rhoC_std,collapsed,Fint_resid_var,Fext_resid_var\n";
  for (const auto* runs : {&report.first, &report.second})
    for (const auto& m : *runs)
      out << to_string(m.method) << ',' << m.seed << ',' << format_number(m.final_bias(0)) << ','
          << format_number(m.final_bias(1)) << ',' << format_number(m.final_std(0)) << ','
          << format_number(m.final_std(1)) << ',' << (m.collapsed ? 1 : 0) << ','
          << format_number(m.flux_residual_var(0)) << ',' << format_number(m.flux_residual_var(1)) << '\n';
}

}  // namespace enmkf::experiment
