#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "oligo/market_model.hpp"

namespace oligo {

enum class SweepOrder { kAscending, kRandomPermutation };

struct SolverConfig {
  double tol_residual = 1e-9;  // KKT residual threshold
  double tol_sweep = 1e-10;    // max profile change per sweep
  int max_sweeps = 500;
  double inner_tol_x = 1e-8;   // golden-section tolerance of each best response
  SweepOrder order = SweepOrder::kAscending;
  std::uint64_t seed = 0;      // used by kRandomPermutation only

  void validate() const;
};

enum class StopReason { kResidual, kStagnation, kMaxSweeps };

std::string_view to_string(StopReason r);

struct EquilibriumResult {
  Vector x;
  Vector total_costs;   // J_i
  Vector profits;       // -J_i
  Vector change_costs;  // beta_i |x_i - a_i|
  double residual = 0.0;
  int sweeps = 0;
  bool converged = false;
  StopReason stop = StopReason::kMaxSweeps;
};

/// J_i = c_i(x_i) - x_i pi(T) + beta_i |x_i - a_i|.
double player_objective(const Market& m, std::size_t i, const Vector& x);

double change_cost(const FirmParams& f, double x);

/// Firm i's minimizer over [lo_i, hi_i] of its total cost when the rivals
/// jointly produce `rivals_total`.
double best_response(const Market& m, std::size_t i, double rivals_total, const SolverConfig& cfg);

/// dist(0, F_i + Lambda_i(x_i - a_i) + N_{A_i}(x_i)) for one firm; the set
/// is an interval so the distance is closed form.
double firm_residual(const FirmParams& f, double x, double g);

/// max_i firm_residual over the firms.
double kkt_residual(const Market& m, const Vector& x);

/// Called after every best-response step with the firm index and its
/// objective before and after the update.
using StepObserver = std::function<void(std::size_t firm, double before, double after)>;

/// Nonsmooth Gauss-Seidel: cyclic best responses until the KKT residual
/// certifies an equilibrium.  Non-convergence is reported, not thrown.
EquilibriumResult gauss_seidel(const Market& m, const Vector& x0, const SolverConfig& cfg,
                               const StepObserver& observer = {});
inline EquilibriumResult gauss_seidel(const Market& m, const SolverConfig& cfg) {
  return gauss_seidel(m, m.anchors(), cfg);
}

/// Gauss-Seidel restricted to the firms flagged in `active`; the others stay
/// at their x0 value.  Residuals are measured over active firms only.
EquilibriumResult gauss_seidel_subset(const Market& m, const Vector& x0,
                                      const std::vector<bool>& active, const SolverConfig& cfg,
                                      const StepObserver& observer = {});

/// Fills total costs, profits and change costs for a profile.
EquilibriumResult evaluate_profile(const Market& m, const Vector& x);

}  // namespace oligo
