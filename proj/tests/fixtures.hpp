#pragma once

// Shared test data and independent oracles.  Nothing here calls the solver
// code paths it is used to check.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oligo/market_model.hpp"
#include "oligo/scenario.hpp"
#include "oligo/sensitivity.hpp"

namespace oligo::testing {

inline std::string reference_config_path() { return std::string(OLIGO_CONFIG_DIR) + "/paper_t5.json"; }

inline bool reference_params_present() {
  try {
    return !load_config(reference_config_path()).reference_placeholder;
  } catch (const ConfigError&) {
    return false;
  }
}

inline ScenarioConfig reference_scenario() { return load_config(reference_config_path()); }

/// Five-firm market of the reference scenario with the b-vector of period t
/// and the given anchors.
inline Market reference_market(int t, const std::vector<double>& anchors = {}) {
  const ScenarioConfig cfg = reference_scenario();
  Market m = cfg.market_for_period(t);
  for (std::size_t i = 0; i < anchors.size(); ++i) m.firms[i].anchor = anchors[i];
  return m;
}

/// Random market within the model assumptions: gamma in [1, 1.5] keeps T*pi(T)
/// concave, every firm has a positive lower bound.
inline Market random_market(std::mt19937_64& rng, std::size_t l = 5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Market m;
  m.demand.gamma = 1.0 + 0.5 * u(rng);
  m.demand.scale = 5000.0;
  for (std::size_t i = 0; i < l; ++i) {
    FirmParams f;
    f.b = 1.0 + 10.0 * u(rng);
    f.delta = 0.7 + 0.6 * u(rng);
    f.cap_k = 3.0 + 4.0 * u(rng);
    f.beta = u(rng) < 0.3 ? 0.0 : 3.0 * u(rng);
    f.lo = 0.01 + 0.5 * u(rng);
    f.hi = 150.0 + 100.0 * u(rng);
    f.anchor = 20.0 + 50.0 * u(rng);
    m.firms.push_back(f);
  }
  return m;
}

inline Vector random_feasible(std::mt19937_64& rng, const Market& m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& f = m.firms[i];
    x[i] = f.lo + (f.hi - f.lo) * u(rng);
  }
  return x;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Damped Newton on the smooth system F(x) = 0 with a finite-difference
/// Jacobian; the oracle for beta = 0 markets with interior equilibria.
inline Vector newton_oracle(const Market& m, Vector x) {
  const auto F = [&](const Vector& y) {
    const double T = y.sum();
    const double p = m.demand.scale;
    const double g = m.demand.gamma;
    const double pi = std::pow(p, 1.0 / g) * std::pow(T, -1.0 / g);
    const double dpi = -pi / (g * T);
    Vector out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const auto& f = m.firms[i];
      const double mc = f.b + std::pow(f.cap_k, -1.0 / f.delta) * std::pow(y[i], 1.0 / f.delta);
      out[i] = mc - y[i] * dpi - pi;
    }
    return out;
  };
  for (int it = 0; it < 200; ++it) {
    const Vector r = F(x);
    if (r.lpNorm<Eigen::Infinity>() < 1e-13) break;
    Matrix J(x.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
    }
    const Vector step = J.fullPivLu().solve(-r);
    double t = 1.0;
    while (t > 1e-8) {
      const Vector trial = x + t * step;
      if ((trial.array() > 0.0).all() && F(trial).norm() < r.norm()) {
        x = trial;
        break;
      }
      t *= 0.5;
    }
    if (t <= 1e-8) break;
  }
  return x;
}

/// Grid oracle: argmin of f over n uniformly spaced points of [lo, hi].
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, int n) {
  double best_x = lo;
  double best_f = f(lo);
  for (int k = 1; k < n; ++k) {
    const double x = lo + (hi - lo) * k / (n - 1);
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return best_x;
}

/// The scalar GE  0 in p1 + p2 x + d(|x| + indicator[0, 1])(x)  at
/// (p1, p2) = (-1, 1), x = 0.
inline LinearizedGE scalar_ge_linearization() {
  const CoordinateState c{0.0, -1.0, 1.0, 0.0, 0.0, 1.0};
  LinearizedGE ge;
  ge.jac_x = Matrix::Constant(1, 1, 1.0);  // dF/dx = p2
  ge.jac_p = Matrix(1, 2);
  ge.jac_p << 1.0, 0.0;                     // dF/dp = (1, x) at x = 0
  ge.cones = {classify_cone(c)};
  return ge;
}

inline CoordinateState scalar_ge_state() { return {0.0, -1.0, 1.0, 0.0, 0.0, 1.0}; }

}  // namespace oligo::testing
