#include "enmkf/ensemble.hpp"

#include "enmkf/errors.hpp"

#include <cmath>
#include <string>

namespace enmkf {

namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t member, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member), static_cast<std::uint32_t>(member >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

double draw_parameter(const ParameterPrior& prior, std::mt19937_64& engine) {
  switch (prior.kind) {
    case ParameterPrior::Kind::uniform:
      return std::uniform_real_distribution<double>(prior.a, prior.b)(engine);
    case ParameterPrior::Kind::lognormal: {
      const double sigma2 = std::log1p((prior.b * prior.b) / (prior.a * prior.a));
      const double mu = std::log(prior.a) - 0.5 * sigma2;
      return std::lognormal_distribution<double>(mu, std::sqrt(sigma2))(engine);
    }
    case ParameterPrior::Kind::fixed:
      return prior.a;
  }
  throw ConfigError("unknown parameter prior kind");
}

void check_ops(const Ensemble& e, const std::vector<ModelOperators>& ops) {
  if (static_cast<Eigen::Index>(ops.size()) != e.size())
    throw DimensionError("one set of operators per member is required");
  for (const auto& op : ops)
    if (op.state_dim() != e.state_dim()) throw DimensionError("operators do not match ensemble state");
}

}  // namespace

double ParameterPrior::physical_std() const {
  switch (kind) {
    case Kind::uniform:
      return (b - a) / std::sqrt(12.0);
    case Kind::lognormal:
      return b;
    case Kind::fixed:
      return 0.0;
  }
  return 0.0;
}

void PriorSpec::validate() const {
  for (std::size_t j = 0; j < params.size(); ++j) {
    const auto& pr = params[j];
    const std::string name = "parameter prior " + std::to_string(j);
    if (!std::isfinite(pr.a) || !std::isfinite(pr.b)) throw ConfigError(name + " is not finite");
    switch (pr.kind) {
      case ParameterPrior::Kind::uniform:
        if (!(pr.a < pr.b)) throw ConfigError(name + ": uniform bounds need low < high");
        if (scale == ParamScale::log && pr.a <= 0.0)
          throw ConfigError(name + ": log-space parameters need positive bounds");
        break;
      case ParameterPrior::Kind::lognormal:
        if (!(pr.a > 0.0) || !(pr.b > 0.0)) throw ConfigError(name + ": lognormal needs mean > 0, std > 0");
        break;
      case ParameterPrior::Kind::fixed:
        if (scale == ParamScale::log && pr.a <= 0.0)
          throw ConfigError(name + ": log-space parameters need a positive value");
        break;
    }
  }
  if (!(state_var > 0.0) || !std::isfinite(state_var)) throw ConfigError("state prior variance must be > 0");
  if (state_mean.size() == 0) throw ConfigError("state prior mean is empty");
  if (!state_mean.allFinite()) throw ConfigError("state prior mean is not finite");
}

Ensemble::Ensemble(Matrix members, Eigen::Index param_count, std::uint64_t seed)
    : members_(std::move(members)), param_count_(param_count) {
  if (members_.cols() < 2) throw ConfigError("ensemble needs at least two members");
  if (param_count_ < 0 || param_count_ >= members_.rows())
    throw DimensionError("ensemble parameter block leaves no state");
  streams_.reserve(static_cast<std::size_t>(members_.cols()));
  for (Eigen::Index i = 0; i < members_.cols(); ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    streams_.push_back({make_stream(seed, idx, 0), make_stream(seed, idx, 1), make_stream(seed, idx, 2)});
  }
}

Ensemble init_ensemble(const PriorSpec& prior, Eigen::Index members, std::uint64_t seed) {
  if (members < 2) throw ConfigError("ensemble size M must be at least 2");
  prior.validate();
  const auto p = static_cast<Eigen::Index>(prior.params.size());
  const Eigen::Index n = prior.state_mean.size();
  Ensemble e(Matrix::Zero(p + n, members), p, seed);
  const double sd = std::sqrt(prior.state_var);
  for (Eigen::Index i = 0; i < members; ++i) {
    auto& engine = e.streams(i).init;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double v = draw_parameter(prior.params[static_cast<std::size_t>(j)], engine);
      e.members()(j, i) = prior.scale == ParamScale::log ? std::log(v) : v;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index r = 0; r < n; ++r) e.members()(p + r, i) = prior.state_mean(r) + sd * normal(engine);
  }
  return e;
}

std::vector<ModelOperators> member_operators(const Ensemble& e, const ModelProvider& provider) {
  if (provider.param_dim() != e.param_dim() || provider.state_dim() != e.state_dim())
    throw DimensionError("provider dimensions do not match the ensemble");
  std::vector<ModelOperators> ops;
  ops.reserve(static_cast<std::size_t>(e.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) ops.push_back(provider.operators(e.theta(i)));
  return ops;
}

Ensemble enmkf_predict(Ensemble e, const std::vector<ModelOperators>& ops, const ControlMoments& u) {
  check_ops(e, ops);
  const Eigen::Index p = e.param_dim();
  const Eigen::Index n = e.state_dim();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const auto& op = ops[static_cast<std::size_t>(i)];
    const Vector prev = e.members().col(i).tail(n);
    e.members().col(i).segment(p, n) = op.propagate(prev, u.mean);
  }
  return e;
}

Ensemble enmkf_predict(Ensemble e, const ModelProvider& provider, const ControlMoments& u) {
  const auto ops = member_operators(e, provider);
  return enmkf_predict(std::move(e), ops, u);
}

PredictionCovariance enmkf_covariance(const Ensemble& e_pred, const std::vector<ModelOperators>& ops,
                                      const ControlMoments& u, const Matrix& w) {
  check_ops(e_pred, ops);
  const Eigen::Index n = e_pred.state_dim();
  if (w.rows() != n || w.cols() != n) throw DimensionError("enmkf_covariance: W must be n×n");

  Matrix inflation = Matrix::Zero(n, n);
  for (const auto& op : ops) inflation.noalias() += op.B() * u.cov * op.B().transpose();
  inflation /= static_cast<double>(e_pred.size());
  inflation += w;

  PredictionCovariance out{sample_covariance(e_pred.members())};
  out.matrix.bottomRightCorner(n, n) += symmetrize(inflation);
  return out;
}

PredictionCovariance enmkf_covariance(const Ensemble& e_pred, const ModelProvider& provider,
                                      const ControlMoments& u, const Matrix& w) {
  return enmkf_covariance(e_pred, member_operators(e_pred, provider), u, w);
}

Ensemble enkf_predict(Ensemble e, const std::vector<ModelOperators>& ops, const ControlMoments& u) {
  check_ops(e, ops);
  const Eigen::Index p = e.param_dim();
  const Eigen::Index n = e.state_dim();
  const GaussianSampler sampler(u.mean, u.cov);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Vector draw = sampler(e.streams(i).control);
    const Vector prev = e.members().col(i).tail(n);
    e.members().col(i).segment(p, n) = ops[static_cast<std::size_t>(i)].propagate(prev, draw);
  }
  return e;
}

Ensemble enkf_predict(Ensemble e, const ModelProvider& provider, const ControlMoments& u) {
  const auto ops = member_operators(e, provider);
  return enkf_predict(std::move(e), ops, u);
}

PredictionCovariance enkf_covariance(const Ensemble& e_pred, const Matrix& w) {
  const Eigen::Index n = e_pred.state_dim();
  if (w.rows() != n || w.cols() != n) throw DimensionError("enkf_covariance: W must be n×n");
  PredictionCovariance out{sample_covariance(e_pred.members())};
  out.matrix.bottomRightCorner(n, n) += symmetrize(w);
  return out;
}

Ensemble analyze(Ensemble e_pred, const PredictionCovariance& p, const Vector& y,
                 const ModelOperators& ops, InnovationMode mode, AnalysisOptions options) {
  const Eigen::Index np = e_pred.param_dim();
  const Eigen::Index n = e_pred.state_dim();
  const Eigen::Index dim = np + n;
  if (p.matrix.rows() != dim || p.matrix.cols() != dim)
    throw DimensionError("analyze: prediction covariance does not match the ensemble");
  if (ops.state_dim() != n || y.size() != ops.obs_dim())
    throw DimensionError("analyze: observation operator does not match");
  require_finite(y, "observation");
  if (mode == InnovationMode::scaled_by_r && np < 1)
    throw ConfigError("analyze: scaled innovation needs log R as the first parameter");

  const Matrix& h = ops.H();
  // 𝒫𝓗ᵀ with 𝓗 = [0 H] only touches the state columns.
  const Matrix ph = p.matrix.rightCols(n) * h.transpose();
  const Matrix innovation_cov = h * ph.bottomRows(n) + ops.V();
  const Matrix gain = solve_innovation(innovation_cov, ph.transpose(), "analyze").transpose();

  const GaussianSampler noise(Vector::Zero(y.size()), ops.V());
  for (Eigen::Index i = 0; i < e_pred.size(); ++i) {
    Vector observed = y;
    if (options.perturb) observed += noise(e_pred.streams(i).perturb);
    if (mode == InnovationMode::scaled_by_r) observed *= std::exp(e_pred.members()(0, i));
    const Vector innovation = observed - h * e_pred.members().col(i).tail(n);
    e_pred.members().col(i) += gain * innovation;
  }
  if (!e_pred.members().allFinite()) throw NumericalError("analyze: non-finite ensemble after update");
  return e_pred;
}

FilterDiagnostics diagnose(const Ensemble& e, const Matrix& h, InnovationMode mode, ParamScale scale,
                           int step) {
  const Eigen::Index p = e.param_dim();
  const Eigen::Index n = e.state_dim();
  const Eigen::Index m = e.size();
  FilterDiagnostics d;
  d.step = step;

  Matrix params = e.members().topRows(p);
  if (scale == ParamScale::log) params = params.array().exp().matrix();
  d.param_mean = params.rowwise().mean();
  d.param_std = Vector::Zero(p);
  if (p > 0) d.param_std = sample_covariance(params).diagonal().cwiseMax(0.0).cwiseSqrt();

  d.state_mean = e.members().bottomRows(n).rowwise().mean();

  Matrix obs = h * e.members().bottomRows(n);
  if (mode == InnovationMode::scaled_by_r) {
    for (Eigen::Index i = 0; i < m; ++i) obs.col(i) /= std::exp(e.members()(0, i));
  }
  d.obs_mean = obs.rowwise().mean();
  d.obs_cov = sample_covariance(obs);
  return d;
}

StepResult step(const StepSettings& settings, Ensemble e, const ModelProvider& provider,
                const ControlFilterState& control, const ControlModel& control_model,
                const Vector& z, const Vector& y, const Matrix& w) {
  ControlFilterState posterior = kf_update(kf_predict(control, control_model), z, control_model);
  const ControlMoments u = ControlMoments::from(posterior, control_model);
  if (u.mean.size() != provider.control_dim())
    throw DimensionError("step: control model channels do not match the provider");

  const auto ops = member_operators(e, provider);
  PredictionCovariance cov;
  if (settings.kind == FilterKind::enmkf) {
    e = enmkf_predict(std::move(e), ops, u);
    cov = enmkf_covariance(e, ops, u, w);
  } else {
    e = enkf_predict(std::move(e), ops, u);
    cov = enkf_covariance(e, w);
  }
  e = analyze(std::move(e), cov, y, ops.front(), settings.mode, settings.analysis);
  FilterDiagnostics diag = diagnose(e, ops.front().H(), settings.mode, settings.scale, posterior.step_index);
  return {std::move(e), std::move(posterior), std::move(diag)};
}

}  // namespace enmkf
