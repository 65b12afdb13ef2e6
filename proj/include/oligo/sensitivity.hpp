#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include "oligo/market_model.hpp"

namespace oligo {

/// Critical cone of one coordinate: {0}, R, R_+ or R_-.
enum class ConeTag { kZero, kFree, kNonneg, kNonpos };

std::string_view to_string(ConeTag t);

enum class Verdict { kLipschitzLocalizationCertified, kInconclusive };

std::string_view to_string(Verdict v);

struct SensitivityOptions {
  // Multipliers this close to an end of their admissible interval count as
  // sitting on it, which opens the corresponding half-line.
  double margin = 1e-9;
  // Largest per-coordinate KKT residual accepted as "on the solution set".
  double kkt_tol = 1e-6;
  // Feasibility slack for face validation and duplicate detection.
  double face_tol = 1e-10;
};

class SensitivityError : public std::runtime_error {
 public:
  enum class Code { kNotAtSolution, kNoSolutionFound, kMultipleSolutions, kTooManyFaces };

  SensitivityError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// One coordinate of  0 in g + d q(x),  q = beta |. - anchor| + indicator[lo, hi].
struct CoordinateState {
  double x;
  double g;  // smooth part of the GE at x
  double beta;
  double anchor;
  double lo;
  double hi;
};

ConeTag classify_cone(const CoordinateState& c, const SensitivityOptions& opts = {});

ConeTag critical_cone(const Market& m, std::size_t i, const Vector& x,
                      const SensitivityOptions& opts = {});

std::vector<ConeTag> critical_cones(const Market& m, const Vector& x,
                                    const SensitivityOptions& opts = {});

struct LocalizationReport {
  Matrix jac;
  double min_sym_eig = 0.0;
  bool pd = false;
  std::vector<ConeTag> cones;
  Verdict verdict = Verdict::kInconclusive;
};

/// Positive definiteness of the symmetric part of `jac`; cones left empty.
LocalizationReport localization_from_jacobian(const Matrix& jac);

LocalizationReport check_localization(const Market& m, const Vector& x,
                                      const SensitivityOptions& opts = {});

/// Affine GE  0 in jac_p h + jac_x k + N_K(k),  K = product of critical cones.
struct LinearizedGE {
  Matrix jac_x;
  Matrix jac_p;
  std::vector<ConeTag> cones;
};

struct DirectionalResponse {
  Vector h;
  Vector k;
  std::vector<ConeTag> active_pattern;  // face used per coordinate; kZero when pinned
};

/// Solves the affine GE by enumerating the faces of K.  Throws
/// SensitivityError when no face or more than one distinct face validates.
DirectionalResponse solve_linearized(const LinearizedGE& ge, const Vector& h,
                                     const SensitivityOptions& opts = {});

LinearizedGE linearize(const Market& m, const Vector& x, const SensitivityOptions& opts = {});

/// Graphical derivative of the equilibrium map in the parameter direction
/// h = (db_1, ..., db_l, dgamma).
DirectionalResponse graphical_derivative(const Market& m, const Vector& x, const Vector& h,
                                         const SensitivityOptions& opts = {});

}  // namespace oligo
