#pragma once

#include "enmkf/ensemble.hpp"
#include "enmkf/marginal_kf.hpp"
#include "support.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

/// x_k = a x_{k-1} + b u_k + w_k, y_k = x_k + v_k with a point-mass parameter
/// and control moments N(u_mean_k, pu) handed to the filter directly.
struct ScalarSystem {
  double a = 0.0;
  double b = 1.0;
  double w = 0.0;
  double v = 1.0;
  double pu = 0.0;
  double m0 = 0.0;
  double p0 = 1.0;
};

struct ScalarTrace {
  std::vector<double> ens_mean, ens_std, kf_mean, kf_std;
};

inline ScalarTrace point_mass_run(const ScalarSystem& sys, Eigen::Index M, int steps, std::uint64_t seed,
                                  std::uint64_t data_seed = 1000) {
  const enmkf::ModelOperators op = scalar_ops(sys.a, sys.b, sys.w, sys.v);
  const std::vector<enmkf::ModelOperators> ops(static_cast<std::size_t>(M), op);
  enmkf::Ensemble e = scalar_ensemble(sys.m0, sys.p0, M, seed);
  enmkf::ConditionalStateFilter kf{vec1(sys.m0), mat1(sys.p0), 0};

  std::mt19937_64 data_rng(data_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double x = sys.m0 + std::sqrt(sys.p0) * normal(data_rng);
  ScalarTrace out;
  for (int k = 1; k <= steps; ++k) {
    const double u_true = 1.0 + std::sin(0.3 * k);
    const double u_mean = u_true + std::sqrt(sys.pu) * normal(data_rng);
    x = sys.a * x + sys.b * u_true + std::sqrt(sys.w) * normal(data_rng);
    const Vector y = vec1(x + std::sqrt(sys.v) * normal(data_rng));
    const enmkf::ControlMoments u{vec1(u_mean), mat1(sys.pu)};

    e = enmkf::enmkf_predict(std::move(e), ops, u);
    const auto cov = enmkf::enmkf_covariance(e, ops, u, mat1(sys.w));
    e = enmkf::analyze(std::move(e), cov, y, op, enmkf::InnovationMode::plain);
    kf = enmkf::mkf_update(enmkf::mkf_predict(kf, op, u.mean, u.cov), y, op);

    const auto states = e.states();
    const double mean = states.mean();
    const double var = (states.array() - mean).square().sum() / static_cast<double>(M - 1);
    out.ens_mean.push_back(mean);
    out.ens_std.push_back(std::sqrt(var));
    out.kf_mean.push_back(kf.mean(0));
    out.kf_std.push_back(std::sqrt(kf.cov(0, 0)));
  }
  return out;
}

/// Memoryless dynamics: inflation from both the control and W is active.
inline ScalarSystem memoryless_system() { return {0.0, 1.0, 0.2, 1.0, 0.5, 0.0, 1.0}; }

/// Persistent dynamics with a known control and no process noise.
inline ScalarSystem persistent_system() { return {0.8, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0}; }

/// Time-averaged |ensemble mean − exact mean| averaged over replicates.
inline double mean_abs_error(const ScalarSystem& sys, Eigen::Index M, int steps, int replicates) {
  double total = 0.0;
  for (int r = 0; r < replicates; ++r) {
    const auto t = point_mass_run(sys, M, steps, 500 + static_cast<std::uint64_t>(r),
                                  2000 + static_cast<std::uint64_t>(r));
    double acc = 0.0;
    for (std::size_t k = 0; k < t.ens_mean.size(); ++k) acc += std::abs(t.ens_mean[k] - t.kf_mean[k]);
    total += acc / static_cast<double>(t.ens_mean.size());
  }
  return total / replicates;
}

}  // namespace testing
