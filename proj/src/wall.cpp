#include "enmkf/wall.hpp"

#include "enmkf/errors.hpp"

#include <cmath>
#include <vector>

namespace enmkf::wall {

namespace {

// Inverse of the symmetric tridiagonal matrix tridiag(-lambda, 1 + 2 lambda, -lambda)
// of size m, one Thomas sweep per unit column.
Matrix implicit_inverse(Eigen::Index m, double lambda) {
  const double diag = 1.0 + 2.0 * lambda;
  const double off = -lambda;
  std::vector<double> c(static_cast<std::size_t>(m));
  std::vector<double> denom(static_cast<std::size_t>(m));
  denom[0] = diag;
  c[0] = off / diag;
  for (Eigen::Index i = 1; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    denom[k] = diag - off * c[k - 1];
    c[k] = off / denom[k];
  }

  Matrix inv(m, m);
  Vector d(m);
  for (Eigen::Index col = 0; col < m; ++col) {
    d.setZero();
    d(col) = 1.0;
    d(0) /= denom[0];
    for (Eigen::Index i = 1; i < m; ++i) d(i) = (d(i) - off * d(i - 1)) / denom[static_cast<std::size_t>(i)];
    for (Eigen::Index i = m - 2; i >= 0; --i) d(i) -= c[static_cast<std::size_t>(i)] * d(i + 1);
    inv.col(col) = d;
  }
  return inv;
}

}  // namespace

void WallConfig::validate() const {
  if (n_cells < 4) throw ConfigError("wall: n_cells must be at least 4");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("wall: dt must be positive");
  if (!std::isfinite(tau0)) throw ConfigError("wall: tau0 must be finite");
  if (!(state_prior_var > 0.0)) throw ConfigError("wall: state prior variance must be positive");
}

Matrix WallNoise::V() const {
  Matrix v = Matrix::Zero(2, 2);
  v(0, 0) = var_fint;
  v(1, 1) = var_fext;
  return v;
}

double diffusivity(const WallParameters& params) { return 1.0 / (params.R * params.rhoC); }

double mesh_ratio(const WallConfig& cfg, const WallParameters& params) {
  return diffusivity(params) * cfg.dt / (cfg.ds() * cfg.ds());
}

Matrix flux_operator(const WallConfig& cfg) {
  const Eigen::Index n = cfg.node_count();
  const double scale = 1.0 / (2.0 * cfg.ds());
  Matrix h = Matrix::Zero(2, n);
  h(0, 0) = 3.0;
  h(0, 1) = -4.0;
  h(0, 2) = 1.0;
  h(1, n - 3) = 1.0;
  h(1, n - 2) = -4.0;
  h(1, n - 1) = 3.0;
  return scale * h;
}

ModelOperators build_operators(const WallConfig& cfg, const WallParameters& params,
                               const WallNoise& noise) {
  cfg.validate();
  if (!(params.R > 0.0) || !(params.rhoC > 0.0))
    throw ConfigError("wall: R and rhoC must be positive");
  const Eigen::Index n = cfg.node_count();
  const Eigen::Index interior = n - 2;
  const double lambda = mesh_ratio(cfg, params);
  const Matrix inv = implicit_inverse(interior, lambda);

  // Boundary rows of A are zero; the boundary nodes are set by the controls.
  Matrix a = Matrix::Zero(n, n);
  a.block(1, 1, interior, interior) = inv;

  Matrix b = Matrix::Zero(n, 2);
  b(0, 0) = 1.0;
  b.col(0).segment(1, interior) = lambda * inv.col(0);
  b.col(1).segment(1, interior) = lambda * inv.col(interior - 1);
  b(n - 1, 1) = 1.0;

  return ModelOperators(std::move(a), std::move(b), flux_operator(cfg),
                        noise.w_scale * Matrix::Identity(n, n), noise.V());
}

std::array<double, 2> flux_observe(const Vector& temperatures, double R, const WallConfig& cfg) {
  if (temperatures.size() != cfg.node_count())
    throw DimensionError("flux_observe: temperature vector does not match the grid");
  if (!(R > 0.0)) throw ConfigError("flux_observe: R must be positive");
  const Vector f = flux_operator(cfg) * temperatures / R;
  return {f(0), f(1)};
}

StateVector initial_condition(double t_int0, double t_ext0, const WallConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cfg.node_count();
  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Even n_cells hit s = 1/2 on a node; handle it by index to land on tau0 exactly.
    if (2 * i == cfg.n_cells) {
      t(i) = cfg.tau0;
      continue;
    }
    const double s = static_cast<double>(i) / cfg.n_cells;
    t(i) = s <= 0.5 ? t_int0 + 2.0 * (cfg.tau0 - t_int0) * s
                    : cfg.tau0 + 2.0 * (t_ext0 - cfg.tau0) * (s - 0.5);
  }
  return {t};
}

WallProvider::WallProvider(WallConfig cfg, WallNoise noise) : cfg_(cfg), noise_(noise) {
  cfg_.validate();
  require_pd(noise_.V(), "wall observation noise V");
  if (!(noise_.w_scale >= 0.0)) throw ConfigError("wall: process noise scale must be >= 0");
}

ModelOperators WallProvider::operators(const ParameterVector& theta) const {
  if (theta.size() != 2) throw DimensionError("wall provider expects θ = (log R, log rhoC)");
  if (!theta.values.allFinite()) throw NumericalError("wall provider: non-finite parameters");
  const double r = std::exp(theta.values(0));
  const double rho_c = std::exp(theta.values(1));
  if (!(r > 0.0 && rho_c > 0.0 && std::isfinite(r) && std::isfinite(rho_c)))
    throw NumericalError("wall provider: exp(θ) left the representable range");
  return build_operators(cfg_, {r, rho_c}, noise_);
}

WallProvider wall_provider(const WallConfig& cfg, const WallNoise& noise) { return {cfg, noise}; }

}  // namespace enmkf::wall
