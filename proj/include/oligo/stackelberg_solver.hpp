#pragma once

#include <optional>

#include "oligo/market_model.hpp"
#include "oligo/nash_solver.hpp"

namespace oligo {

inline constexpr int kDefaultLeaderStarts = 32;

/// Cournot-Nash equilibrium of the followers for a fixed leader production.
struct FollowerEquilibrium {
  Vector followers;  // length l-1, firm order with the leader removed
  Vector profile;    // full profile including the leader
  double residual = 0.0;
  bool converged = false;
  int sweeps = 0;
};

struct StackelbergResult {
  std::size_t leader_index = 0;
  double leader_x = 0.0;
  Vector follower_x;
  Vector x;  // assembled full profile
  Vector total_costs;
  Vector profits;
  Vector change_costs;
  double leader_profit = 0.0;
  Vector follower_profits;
  int theta_evals = 0;
  double worst_follower_residual = 0.0;  // over every theta evaluation
  int inner_failures = 0;
  double follower_residual = 0.0;  // at the returned point
  bool converged = false;
};

/// Tighter tolerances for the lower level so that theta noise stays below
/// the outer tolerance.
SolverConfig follower_config(const SolverConfig& outer);

FollowerEquilibrium followers_equilibrium(const Market& m, std::size_t leader, double leader_x,
                                          const std::optional<Vector>& warm,
                                          const SolverConfig& cfg);

/// Leader's total cost when the followers re-equilibrate; the market's
/// first firm leads.
double theta(const Market& m, double leader_x, const SolverConfig& cfg);
double theta(const Market& m, std::size_t leader, double leader_x, const SolverConfig& cfg);

/// Minimizes theta over the leader's interval with multi-start golden
/// section; the leader's anchor is an explicit candidate.
StackelbergResult solve_leader(const Market& m, const SolverConfig& cfg,
                               int n_starts = kDefaultLeaderStarts, std::size_t leader = 0);

}  // namespace oligo
