#include "oligo/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "oligo/nash_solver.hpp"

namespace oligo {

std::string_view to_string(ConeTag t) {
  switch (t) {
    case ConeTag::kZero: return "ZERO";
    case ConeTag::kFree: return "FREE";
    case ConeTag::kNonneg: return "NONNEG";
    case ConeTag::kNonpos: return "NONPOS";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kLipschitzLocalizationCertified: return "LIPSCHITZ_LOCALIZATION_CERTIFIED";
    case Verdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

ConeTag classify_cone(const CoordinateState& c, const SensitivityOptions& opts) {
  FirmParams f;
  f.beta = c.beta;
  f.anchor = c.anchor;
  f.lo = c.lo;
  f.hi = c.hi;
  const double res = firm_residual(f, c.x, c.g);
  if (res > opts.kkt_tol) {
    std::ostringstream os;
    os << "critical cone undefined: KKT residual " << res << " exceeds " << opts.kkt_tol;
    throw SensitivityError(SensitivityError::Code::kNotAtSolution, os.str());
  }
  if (c.lo == c.hi) return ConeTag::kZero;

  const double v = -c.g;
  const bool at_lo = c.x <= c.lo;
  const bool at_hi = c.x >= c.hi;
  const bool kink = c.beta > 0.0 && c.x == c.anchor;
  if (!kink && !at_lo && !at_hi) return ConeTag::kFree;

  // One-sided rates of q along +1 and -1.  At a solution v never exceeds
  // them; a direction is critical when its rate matches v.
  double right = c.beta;
  double left = c.beta;
  if (!kink) {
    right = c.x > c.anchor ? c.beta : -c.beta;
    left = -right;
    if (c.beta == 0.0) right = left = 0.0;
  }
  const bool up = !at_hi && v >= right - opts.margin;
  const bool down = !at_lo && -v >= left - opts.margin;
  if (up && down) return ConeTag::kFree;
  if (up) return ConeTag::kNonneg;
  if (down) return ConeTag::kNonpos;
  return ConeTag::kZero;
}

ConeTag critical_cone(const Market& m, std::size_t i, const Vector& x,
                      const SensitivityOptions& opts) {
  const Vector g = pseudo_gradient(m, x);
  const FirmParams& f = m.firms.at(i);
  return classify_cone({x[i], g[i], f.beta, f.anchor, f.lo, f.hi}, opts);
}

std::vector<ConeTag> critical_cones(const Market& m, const Vector& x,
                                    const SensitivityOptions& opts) {
  const Vector g = pseudo_gradient(m, x);
  std::vector<ConeTag> out;
  out.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const FirmParams& f = m.firms[i];
    out.push_back(classify_cone({x[i], g[i], f.beta, f.anchor, f.lo, f.hi}, opts));
  }
  return out;
}

LocalizationReport localization_from_jacobian(const Matrix& jac) {
  LocalizationReport r;
  r.jac = jac;
  const Matrix sym = 0.5 * (jac + jac.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  r.min_sym_eig = es.eigenvalues().minCoeff();
  r.pd = r.min_sym_eig > 0.0;
  r.verdict = r.pd ? Verdict::kLipschitzLocalizationCertified : Verdict::kInconclusive;
  return r;
}

LocalizationReport check_localization(const Market& m, const Vector& x,
                                      const SensitivityOptions& opts) {
  LocalizationReport r = localization_from_jacobian(jacobian(m, x));
  r.cones = critical_cones(m, x, opts);
  return r;
}

DirectionalResponse solve_linearized(const LinearizedGE& ge, const Vector& h,
                                     const SensitivityOptions& opts) {
  const Eigen::Index l = ge.jac_x.rows();
  if (ge.jac_x.cols() != l || static_cast<Eigen::Index>(ge.cones.size()) != l ||
      ge.jac_p.rows() != l || ge.jac_p.cols() != h.size())
    throw std::invalid_argument("linearized GE: inconsistent dimensions");

  const Vector rhs = ge.jac_p * h;
  std::vector<Eigen::Index> free_idx;
  std::vector<Eigen::Index> sided;
  for (Eigen::Index i = 0; i < l; ++i) {
    if (ge.cones[i] == ConeTag::kFree) free_idx.push_back(i);
    if (ge.cones[i] == ConeTag::kNonneg || ge.cones[i] == ConeTag::kNonpos) sided.push_back(i);
  }
  if (sided.size() > 24)
    throw SensitivityError(SensitivityError::Code::kTooManyFaces, "too many one-sided coordinates");

  const double tol = opts.face_tol * (1.0 + rhs.lpNorm<Eigen::Infinity>());
  std::vector<DirectionalResponse> found;
  const std::uint32_t n_faces = 1u << sided.size();
  for (std::uint32_t mask = 0; mask < n_faces; ++mask) {
    std::vector<Eigen::Index> idx = free_idx;
    for (std::size_t j = 0; j < sided.size(); ++j) {
      if (mask & (1u << j)) idx.push_back(sided[j]);
    }
    std::sort(idx.begin(), idx.end());

    Vector k = Vector::Zero(l);
    if (!idx.empty()) {
      const auto n = static_cast<Eigen::Index>(idx.size());
      Matrix a(n, n);
      Vector b(n);
      for (Eigen::Index r = 0; r < n; ++r) {
        b[r] = -rhs[idx[r]];
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = ge.jac_x(idx[r], idx[c]);
      }
      Eigen::FullPivLU<Matrix> lu(a);
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(b);
      for (Eigen::Index r = 0; r < n; ++r) k[idx[r]] = sol[r];
    }

    const Vector resid = rhs + ge.jac_x * k;
    bool ok = true;
    for (std::size_t j = 0; j < sided.size() && ok; ++j) {
      const Eigen::Index i = sided[j];
      const double sign = ge.cones[i] == ConeTag::kNonneg ? 1.0 : -1.0;
      if (mask & (1u << j)) {
        ok = sign * k[i] >= -tol;
      } else {
        // k_i = 0: the multiplier -resid_i must lie in the polar of the half-line
        ok = sign * resid[i] >= -tol;
      }
    }
    if (!ok) continue;

    DirectionalResponse resp;
    resp.h = h;
    resp.k = k.array() + 0.0;  // -0 -> +0
    resp.active_pattern.assign(ge.cones.begin(), ge.cones.end());
    for (std::size_t j = 0; j < sided.size(); ++j) {
      if (!(mask & (1u << j))) resp.active_pattern[sided[j]] = ConeTag::kZero;
    }
    found.push_back(std::move(resp));
  }

  if (found.empty())
    throw SensitivityError(SensitivityError::Code::kNoSolutionFound,
                           "no face of the critical cone solves the linearized GE");
  const double dup_tol = 100.0 * tol * (1.0 + found.front().k.lpNorm<Eigen::Infinity>());
  for (std::size_t s = 1; s < found.size(); ++s) {
    if ((found[s].k - found.front().k).lpNorm<Eigen::Infinity>() > dup_tol)
      throw SensitivityError(SensitivityError::Code::kMultipleSolutions,
                             "linearized GE has several distinct solutions");
  }
  return found.front();
}

LinearizedGE linearize(const Market& m, const Vector& x, const SensitivityOptions& opts) {
  return {jacobian(m, x), parameter_jacobian(m, x), critical_cones(m, x, opts)};
}

DirectionalResponse graphical_derivative(const Market& m, const Vector& x, const Vector& h,
                                         const SensitivityOptions& opts) {
  if (h.size() != static_cast<Eigen::Index>(m.size()) + 1)
    throw std::invalid_argument("parameter direction must have length l + 1 (b-vector, gamma)");
  return solve_linearized(linearize(m, x, opts), h, opts);
}

}  // namespace oligo
