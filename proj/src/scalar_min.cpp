#include "oligo/scalar_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oligo {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2
constexpr int kMaxGoldenIters = 400;

ScalarMin leftmost_within(const std::vector<ScalarMin>& cands, double fmax) {
  ScalarMin best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const auto& c : cands) {
    if (c.f <= fmax && c.x < best.x) best = c;
  }
  return best;
}

ScalarMin lowest(const std::vector<ScalarMin>& cands) {
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) fmin = std::min(fmin, c.f);
  return leftmost_within(cands, fmin);
}

// Exact candidates (bounds, kinks, grid nodes) within the tie tolerance of
// the best value win, leftmost first.  Search estimates compete on value
// alone: a tolerance-wide tie among them would cost accuracy.
ScalarMin pick_best(const std::vector<ScalarMin>& exact, const std::vector<ScalarMin>& estimates) {
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& c : exact) fmin = std::min(fmin, c.f);
  for (const auto& c : estimates) fmin = std::min(fmin, c.f);
  const ScalarMin e = leftmost_within(exact, fmin + kTieTolerance);
  if (std::isfinite(e.x)) return e;
  return lowest(estimates);
}

// Moves x to a zero of the slope.  Starting from the kink-free piece that
// holds x, walks toward the sign change (slopes of a convex function are
// monotone) and bisects inside the piece that brackets it.  Returns false
// when the minimizer is a bound or a kink instead.
bool polish_with_slope(const ScalarProblem& p, double& x) {
  std::vector<double> br{p.lo, p.hi};
  br.insert(br.end(), p.kinks.begin(), p.kinks.end());
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  const std::size_t n_pieces = br.size() - 1;

  std::size_t j = static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), x) - br.begin());
  j = std::min(std::max<std::size_t>(j, 1), n_pieces) - 1;

  for (std::size_t guard = 0; guard <= n_pieces; ++guard) {
    const double a = std::nextafter(br[j], br[j + 1]);
    const double b = std::nextafter(br[j + 1], br[j]);
    if (!(a <= b)) return false;
    const double sa = p.slope(a);
    const double sb = p.slope(b);
    if (sa > 0.0) {
      // Root further left, unless the breakpoint itself is the minimizer.
      if (j == 0 || p.slope(std::nextafter(br[j], br[j - 1])) < 0.0) return false;
      --j;
      continue;
    }
    if (sb < 0.0) {
      if (j + 1 == n_pieces || p.slope(std::nextafter(br[j + 1], br[j + 2])) > 0.0) return false;
      ++j;
      continue;
    }
    double neg = a;
    double pos = b;
    if (sa == 0.0) {
      x = a;
      return true;
    }
    if (sb == 0.0) {
      x = b;
      return true;
    }
    for (int k = 0; k < 200; ++k) {
      const double mid = neg + 0.5 * (pos - neg);
      if (mid == neg || mid == pos) break;
      const double sm = p.slope(mid);
      if (sm < 0.0) {
        neg = mid;
      } else if (sm > 0.0) {
        pos = mid;
      } else {
        x = mid;
        return true;
      }
    }
    x = std::abs(p.slope(neg)) <= std::abs(p.slope(pos)) ? neg : pos;
    return true;
  }
  return false;
}

}  // namespace

void ScalarProblem::validate() const {
  if (!objective) throw std::invalid_argument("scalar problem: objective missing");
  if (!(lo < hi)) throw std::invalid_argument("scalar problem: need lo < hi");
  for (double k : kinks) {
    if (!(k >= lo && k <= hi)) throw std::invalid_argument("scalar problem: kink outside [lo, hi]");
  }
}

ScalarMin golden_section(const std::function<double(double)>& f, double a, double b, double tol_x) {
  std::vector<ScalarMin> seen;
  if (!(b > a)) {
    seen.push_back({a, f(a)});
    return seen.front();
  }
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  seen.push_back({c, fc});
  seen.push_back({d, fd});
  for (int it = 0; it < kMaxGoldenIters && (b - a) > tol_x; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      seen.push_back({c, fc});
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      seen.push_back({d, fd});
    }
  }
  const double mid = 0.5 * (a + b);
  seen.push_back({mid, f(mid)});
  return lowest(seen);
}

ScalarMin minimize_convex(const ScalarProblem& p, double tol_x) {
  p.validate();
  ScalarMin interior = golden_section(p.objective, p.lo, p.hi, tol_x);
  if (p.slope) {
    double x = interior.x;
    if (polish_with_slope(p, x) && x != interior.x) interior = {x, p.objective(x)};
  }
  // With a slope, bounds and kinks compete only if the one-sided slopes
  // beside them certify a minimizer.
  const auto certified = [&p](double x) {
    if (!p.slope) return true;
    const bool left = x <= p.lo || p.slope(std::nextafter(x, p.lo)) <= 0.0;
    const bool right = x >= p.hi || p.slope(std::nextafter(x, p.hi)) >= 0.0;
    return left && right;
  };
  std::vector<ScalarMin> exact;
  std::vector<double> points{p.lo, p.hi};
  points.insert(points.end(), p.kinks.begin(), p.kinks.end());
  for (double x : points) {
    if (certified(x)) exact.push_back({x, p.objective(x)});
  }
  return pick_best(exact, {interior});
}

ScalarMin minimize_lipschitz(const ScalarProblem& p, double tol_x, int n_starts) {
  p.validate();
  if (n_starts < 1) throw std::invalid_argument("scalar problem: n_starts must be positive");
  const double h = (p.hi - p.lo) / n_starts;
  std::vector<ScalarMin> exact;
  std::vector<ScalarMin> estimates;
  std::vector<double> nodes(static_cast<std::size_t>(n_starts) + 1);
  for (int j = 0; j <= n_starts; ++j) {
    nodes[j] = j == n_starts ? p.hi : p.lo + j * h;
    exact.push_back({nodes[j], p.objective(nodes[j])});
  }
  for (int j = 0; j < n_starts; ++j) {
    estimates.push_back(golden_section(p.objective, nodes[j], nodes[j + 1], tol_x));
  }
  for (double k : p.kinks) exact.push_back({k, p.objective(k)});
  return pick_best(exact, estimates);
}

}  // namespace oligo
