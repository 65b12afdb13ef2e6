#pragma once

#include <functional>
#include <vector>

namespace oligo {

/// Bounded univariate problem with a piecewise-smooth objective.
///
/// `kinks` lists the points where the objective may fail to be
/// differentiable; they are always evaluated as candidates, so a minimizer
/// sitting exactly on a kink is returned bit-exactly. `slope`, when set, is
/// the derivative of the objective away from kinks and lets the convex
/// routine refine its golden-section estimate beyond what function-value
/// comparisons can resolve.
struct ScalarProblem {
  std::function<double(double)> objective;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> kinks;
  bool convex_hint = false;
  std::function<double(double)> slope;

  void validate() const;
  double default_tol() const { return 1e-9 * (hi - lo); }
};

struct ScalarMin {
  double x;
  double f;
};

/// Bounds, kinks and grid nodes within this of the best value win over
/// search estimates; among them the leftmost is returned.
inline constexpr double kTieTolerance = 1e-12;
inline constexpr int kDefaultStarts = 16;

/// Golden-section search on [lo, hi] for a convex objective.  The interior
/// estimate is compared with every kink and both bounds.  With a slope, the
/// estimate is refined by bisection and a bound or kink is only accepted
/// when the slopes on either side of it certify a minimizer.
ScalarMin minimize_convex(const ScalarProblem& p, double tol_x);
inline ScalarMin minimize_convex(const ScalarProblem& p) {
  return minimize_convex(p, p.default_tol());
}

/// Multi-start golden section for locally Lipschitz objectives: one local
/// search per cell of a uniform `n_starts`-cell grid, plus the grid nodes,
/// kinks and bounds as candidates.
ScalarMin minimize_lipschitz(const ScalarProblem& p, double tol_x, int n_starts = kDefaultStarts);
inline ScalarMin minimize_lipschitz(const ScalarProblem& p) {
  return minimize_lipschitz(p, p.default_tol(), kDefaultStarts);
}

/// Plain golden-section search on [a, b]; returns the lowest point evaluated.
ScalarMin golden_section(const std::function<double(double)>& f, double a, double b, double tol_x);

}  // namespace oligo
