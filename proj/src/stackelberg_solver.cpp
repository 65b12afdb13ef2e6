#include "oligo/stackelberg_solver.hpp"

#include <algorithm>
#include <stdexcept>

#include "oligo/scalar_min.hpp"

namespace oligo {

namespace {

void check_leader(const Market& m, std::size_t leader, double leader_x) {
  if (m.size() < 2) throw std::invalid_argument("stackelberg: need a leader and at least one follower");
  if (leader >= m.size()) throw std::invalid_argument("stackelberg: leader index out of range");
  const FirmParams& f = m.firms[leader];
  if (!(leader_x >= f.lo && leader_x <= f.hi))
    throw std::invalid_argument("stackelberg: leader production outside its interval");
}

Vector drop_index(const Vector& v, std::size_t skip) {
  Vector out(v.size() - 1);
  for (Eigen::Index i = 0, j = 0; i < v.size(); ++i) {
    if (static_cast<std::size_t>(i) != skip) out[j++] = v[i];
  }
  return out;
}

// Theta with warm starts chained from one evaluation to the next.
class ThetaEvaluator {
 public:
  ThetaEvaluator(const Market& m, std::size_t leader, const SolverConfig& cfg)
      : m_(m), leader_(leader), cfg_(cfg), warm_(m.anchors()) {}

  double operator()(double leader_x) {
    FollowerEquilibrium z = followers_equilibrium(m_, leader_, leader_x, warm_, cfg_);
    ++evals_;
    worst_residual_ = std::max(worst_residual_, z.residual);
    if (!z.converged) ++failures_;
    warm_ = z.profile;
    return player_objective(m_, leader_, z.profile);
  }

  int evals() const { return evals_; }
  int failures() const { return failures_; }
  double worst_residual() const { return worst_residual_; }

 private:
  const Market& m_;
  std::size_t leader_;
  SolverConfig cfg_;
  Vector warm_;
  int evals_ = 0;
  int failures_ = 0;
  double worst_residual_ = 0.0;
};

}  // namespace

SolverConfig follower_config(const SolverConfig& outer) {
  SolverConfig inner = outer;
  inner.tol_residual = outer.tol_residual / 10.0;
  inner.tol_sweep = outer.tol_sweep / 10.0;
  return inner;
}

FollowerEquilibrium followers_equilibrium(const Market& m, std::size_t leader, double leader_x,
                                          const std::optional<Vector>& warm,
                                          const SolverConfig& cfg) {
  check_leader(m, leader, leader_x);
  Vector x0 = warm ? *warm : m.anchors();
  if (static_cast<std::size_t>(x0.size()) != m.size())
    throw std::invalid_argument("stackelberg: warm start has wrong length");
  x0 = x0.cwiseMax(m.lower_bounds()).cwiseMin(m.upper_bounds());
  x0[static_cast<Eigen::Index>(leader)] = leader_x;

  std::vector<bool> active(m.size(), true);
  active[leader] = false;
  const EquilibriumResult r = gauss_seidel_subset(m, x0, active, cfg);

  FollowerEquilibrium out;
  out.profile = r.x;
  out.followers = drop_index(r.x, leader);
  out.residual = r.residual;
  out.converged = r.converged;
  out.sweeps = r.sweeps;
  return out;
}

double theta(const Market& m, std::size_t leader, double leader_x, const SolverConfig& cfg) {
  const FollowerEquilibrium z =
      followers_equilibrium(m, leader, leader_x, std::nullopt, follower_config(cfg));
  return player_objective(m, leader, z.profile);
}

double theta(const Market& m, double leader_x, const SolverConfig& cfg) {
  return theta(m, 0, leader_x, cfg);
}

StackelbergResult solve_leader(const Market& m, const SolverConfig& cfg, int n_starts,
                               std::size_t leader) {
  m.validate();
  cfg.validate();
  check_leader(m, leader, m.firms.at(leader).anchor);
  const SolverConfig inner = follower_config(cfg);
  const FirmParams& lf = m.firms[leader];

  ThetaEvaluator eval(m, leader, inner);
  double leader_x = lf.lo;
  if (lf.lo < lf.hi) {
    ScalarProblem p;
    p.lo = lf.lo;
    p.hi = lf.hi;
    p.kinks = {lf.anchor};
    p.objective = [&eval](double x) { return eval(x); };
    leader_x = minimize_lipschitz(p, p.default_tol(), n_starts).x;
  }

  // Final lower-level solve from a fixed start keeps the reported point
  // independent of the search path.
  const FollowerEquilibrium z = followers_equilibrium(m, leader, leader_x, std::nullopt, inner);
  const EquilibriumResult full = evaluate_profile(m, z.profile);

  StackelbergResult out;
  out.leader_index = leader;
  out.leader_x = leader_x;
  out.follower_x = z.followers;
  out.x = z.profile;
  out.total_costs = full.total_costs;
  out.profits = full.profits;
  out.change_costs = full.change_costs;
  out.leader_profit = full.profits[static_cast<Eigen::Index>(leader)];
  out.follower_profits = drop_index(full.profits, leader);
  out.theta_evals = eval.evals() + 1;
  out.worst_follower_residual = std::max(eval.worst_residual(), z.residual);
  out.inner_failures = eval.failures() + (z.converged ? 0 : 1);
  out.follower_residual = z.residual;
  out.converged = z.converged;
  return out;
}

}  // namespace oligo
