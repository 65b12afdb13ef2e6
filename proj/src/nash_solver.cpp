#include "oligo/nash_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oligo/scalar_min.hpp"

namespace oligo {

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0)) throw std::invalid_argument("solver: tol_residual must be positive");
  if (!(tol_sweep > 0.0)) throw std::invalid_argument("solver: tol_sweep must be positive");
  if (!(inner_tol_x > 0.0)) throw std::invalid_argument("solver: inner_tol_x must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("solver: max_sweeps must be at least 1");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kResidual: return "residual";
    case StopReason::kStagnation: return "stagnation";
    case StopReason::kMaxSweeps: return "max_sweeps";
  }
  return "unknown";
}

double change_cost(const FirmParams& f, double x) { return f.beta * std::abs(x - f.anchor); }

double player_objective(const Market& m, std::size_t i, const Vector& x) {
  const FirmParams& f = m.firms.at(i);
  return prod_cost(f, x[i]) - x[i] * price(m.demand, x.sum()) + change_cost(f, x[i]);
}

double best_response(const Market& m, std::size_t i, double rivals_total, const SolverConfig& cfg) {
  const FirmParams& f = m.firms.at(i);
  if (rivals_total < 0.0) throw DomainError("best response: negative rival production");
  if (!(rivals_total + f.lo > 0.0)) throw DomainError("best response: total production can vanish");
  if (f.lo == f.hi) return f.lo;

  const DemandCurve& d = m.demand;
  ScalarProblem p;
  p.lo = f.lo;
  p.hi = f.hi;
  p.kinks = {f.anchor};
  p.convex_hint = true;
  p.objective = [&](double x) {
    return prod_cost(f, x) - x * price(d, x + rivals_total) + change_cost(f, x);
  };
  p.slope = [&](double x) {
    const PriceDerivs pd = price_derivs(d, x + rivals_total);
    const double sign = x > f.anchor ? 1.0 : (x < f.anchor ? -1.0 : 0.0);
    return marginal_cost(f, x) - pd.value - x * pd.d1 + f.beta * sign;
  };
  return minimize_convex(p, cfg.inner_tol_x).x;
}

double firm_residual(const FirmParams& f, double x, double g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lam_lo = -f.beta;
  double lam_hi = f.beta;
  if (x > f.anchor) lam_lo = f.beta;
  if (x < f.anchor) lam_hi = -f.beta;
  double n_lo = 0.0;
  double n_hi = 0.0;
  if (x <= f.lo) n_lo = -inf;
  if (x >= f.hi) n_hi = inf;
  const double lower = g + lam_lo + n_lo;
  const double upper = g + lam_hi + n_hi;
  if (lower > 0.0) return lower;
  if (upper < 0.0) return -upper;
  return 0.0;
}

double kkt_residual(const Market& m, const Vector& x) {
  const Vector g = pseudo_gradient(m, x);
  double r = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) r = std::max(r, firm_residual(m.firms[i], x[i], g[i]));
  return r;
}

EquilibriumResult evaluate_profile(const Market& m, const Vector& x) {
  const auto l = static_cast<Eigen::Index>(m.size());
  EquilibriumResult r;
  r.x = x;
  r.total_costs.resize(l);
  r.change_costs.resize(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    r.total_costs[i] = player_objective(m, static_cast<std::size_t>(i), x);
    r.change_costs[i] = change_cost(m.firms[i], x[i]);
  }
  r.profits = -r.total_costs;
  return r;
}

namespace {

double subset_residual(const Market& m, const Vector& x, const std::vector<bool>& active) {
  const Vector g = pseudo_gradient(m, x);
  double r = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (active[i]) r = std::max(r, firm_residual(m.firms[i], x[i], g[i]));
  }
  return r;
}

void check_feasible(const Market& m, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != m.size())
    throw std::invalid_argument("start profile has wrong length");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(x[i] >= m.firms[i].lo && x[i] <= m.firms[i].hi))
      throw std::invalid_argument("start profile outside the admissible box (firm " +
                                  std::to_string(i + 1) + ")");
  }
}

}  // namespace

EquilibriumResult gauss_seidel_subset(const Market& m, const Vector& x0,
                                      const std::vector<bool>& active, const SolverConfig& cfg,
                                      const StepObserver& observer) {
  cfg.validate();
  check_feasible(m, x0);
  if (active.size() != m.size()) throw std::invalid_argument("active mask has wrong length");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (active[i]) order.push_back(i);
  }
  std::mt19937_64 rng(cfg.seed);

  Vector x = x0;
  Vector best_x = x;
  double best_res = subset_residual(m, x, active);
  double res = best_res;
  int sweeps = 0;
  StopReason stop = StopReason::kMaxSweeps;
  bool converged = false;

  if (res <= cfg.tol_residual) {
    converged = true;
    stop = StopReason::kResidual;
  }
  while (!converged && sweeps < cfg.max_sweeps) {
    if (cfg.order == SweepOrder::kRandomPermutation) std::shuffle(order.begin(), order.end(), rng);
    double change = 0.0;
    for (std::size_t i : order) {
      const double before = observer ? player_objective(m, i, x) : 0.0;
      const double prev = x[i];
      x[i] = best_response(m, i, x.sum() - x[i], cfg);
      change = std::max(change, std::abs(x[i] - prev));
      if (observer) observer(i, before, player_objective(m, i, x));
    }
    ++sweeps;
    res = subset_residual(m, x, active);
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= cfg.tol_residual) {
      converged = true;
      stop = StopReason::kResidual;
    } else if (change <= cfg.tol_sweep && res <= 10.0 * cfg.tol_residual) {
      converged = true;
      stop = StopReason::kStagnation;
    }
  }

  EquilibriumResult out = evaluate_profile(m, converged ? x : best_x);
  out.residual = converged ? res : best_res;
  out.sweeps = sweeps;
  out.converged = converged;
  out.stop = stop;
  return out;
}

EquilibriumResult gauss_seidel(const Market& m, const Vector& x0, const SolverConfig& cfg,
                               const StepObserver& observer) {
  return gauss_seidel_subset(m, x0, std::vector<bool>(m.size(), true), cfg, observer);
}

}  // namespace oligo
