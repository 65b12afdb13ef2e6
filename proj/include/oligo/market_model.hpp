#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oligo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a model function is evaluated outside its domain
/// (non-positive total production, negative production, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Isoelastic inverse demand  pi(T) = scale^(1/gamma) * T^(-1/gamma).
struct DemandCurve {
  double gamma = 1.0;
  double scale = 5000.0;

  void validate() const;
};

/// Cost data of one firm.
///
/// Production cost is  b*x + delta/(delta+1) * K^(-1/delta) * x^((1+delta)/delta);
/// the cost of change is beta*|x - anchor|; admissible productions are [lo, hi].
struct FirmParams {
  double b = 0.0;
  double delta = 1.0;
  double cap_k = 1.0;
  double beta = 0.0;
  double anchor = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  void validate() const;
};

struct Market {
  DemandCurve demand;
  std::vector<FirmParams> firms;

  std::size_t size() const { return firms.size(); }

  /// Throws std::invalid_argument if any firm is invalid, the market is
  /// empty, or every admissible interval touches zero.
  void validate() const;

  Vector anchors() const;
  Vector lower_bounds() const;
  Vector upper_bounds() const;
};

struct PriceDerivs {
  double value;
  double d1;
  double d2;
};

struct CostDerivs {
  double value;
  double d1;
  double d2;
};

double price(const DemandCurve& d, double total);
PriceDerivs price_derivs(const DemandCurve& d, double total);

/// Partial derivatives of (pi, pi') with respect to gamma at fixed total.
struct PriceGammaDerivs {
  double d_value;
  double d_slope;
};
PriceGammaDerivs price_gamma_derivs(const DemandCurve& d, double total);

double prod_cost(const FirmParams& f, double x);
CostDerivs prod_cost_derivs(const FirmParams& f, double x);

/// c'(x); unlike prod_cost_derivs it is defined at x = 0 for every delta.
double marginal_cost(const FirmParams& f, double x);

/// F_i = c_i'(x_i) - x_i pi'(T) - pi(T): derivative of firm i's smooth cost
/// in its own production.
Vector pseudo_gradient(const Market& m, const Vector& x);

/// dF_i/dx_j = -x_i pi''(T) - pi'(T) + [i == j] (c_i''(x_i) - pi'(T)).
Matrix jacobian(const Market& m, const Vector& x);

/// dF/dp with p = (b_1, ..., b_l, gamma); an l x (l+1) matrix.
Matrix parameter_jacobian(const Market& m, const Vector& x);

}  // namespace oligo
