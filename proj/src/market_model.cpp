#include "oligo/market_model.hpp"

#include <cmath>
#include <sstream>

namespace oligo {

namespace {

void require_positive_total(double total) {
  if (!(total > 0.0)) {
    std::ostringstream os;
    os << "total production must be positive, got " << total;
    throw DomainError(os.str());
  }
}

}  // namespace

void DemandCurve::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("demand: gamma must be positive");
  if (!(scale > 0.0)) throw std::invalid_argument("demand: scale must be positive");
}

void FirmParams::validate() const {
  if (!(b >= 0.0)) throw std::invalid_argument("firm: b must be nonnegative");
  if (!(delta > 0.0)) throw std::invalid_argument("firm: delta must be positive");
  if (!(cap_k > 0.0)) throw std::invalid_argument("firm: K must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("firm: beta must be nonnegative");
  if (!(lo >= 0.0 && lo <= hi)) throw std::invalid_argument("firm: need 0 <= lo <= hi");
  if (!(anchor >= lo && anchor <= hi))
    throw std::invalid_argument("firm: anchor must lie in [lo, hi]");
}

void Market::validate() const {
  demand.validate();
  if (firms.empty()) throw std::invalid_argument("market: no firms");
  bool some_positive = false;
  for (std::size_t i = 0; i < firms.size(); ++i) {
    try {
      firms[i].validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (firm " + std::to_string(i + 1) + ")");
    }
    some_positive = some_positive || firms[i].lo > 0.0;
  }
  if (!some_positive)
    throw std::invalid_argument("market: at least one firm needs a strictly positive lower bound");
}

Vector Market::anchors() const {
  Vector a(firms.size());
  for (std::size_t i = 0; i < firms.size(); ++i) a[i] = firms[i].anchor;
  return a;
}

Vector Market::lower_bounds() const {
  Vector v(firms.size());
  for (std::size_t i = 0; i < firms.size(); ++i) v[i] = firms[i].lo;
  return v;
}

Vector Market::upper_bounds() const {
  Vector v(firms.size());
  for (std::size_t i = 0; i < firms.size(); ++i) v[i] = firms[i].hi;
  return v;
}

double price(const DemandCurve& d, double total) {
  require_positive_total(total);
  return std::pow(d.scale, 1.0 / d.gamma) * std::pow(total, -1.0 / d.gamma);
}

PriceDerivs price_derivs(const DemandCurve& d, double total) {
  const double p = price(d, total);
  const double inv_g = 1.0 / d.gamma;
  return {p, -inv_g * p / total, inv_g * (inv_g + 1.0) * p / (total * total)};
}

PriceGammaDerivs price_gamma_derivs(const DemandCurve& d, double total) {
  const double p = price(d, total);
  const double g = d.gamma;
  const double dp = -p * std::log(d.scale / total) / (g * g);
  const double dslope = -dp / (g * total) + p / (g * g * total);
  return {dp, dslope};
}

double prod_cost(const FirmParams& f, double x) {
  if (x < 0.0) throw DomainError("production cost: negative production");
  if (x == 0.0) return 0.0;
  const double scale = std::pow(f.cap_k, -1.0 / f.delta);
  return f.b * x + f.delta / (f.delta + 1.0) * scale * std::pow(x, (1.0 + f.delta) / f.delta);
}

CostDerivs prod_cost_derivs(const FirmParams& f, double x) {
  if (x < 0.0) throw DomainError("production cost: negative production");
  const double scale = std::pow(f.cap_k, -1.0 / f.delta);
  const double inv_d = 1.0 / f.delta;
  if (x == 0.0) {
    // x^(1/delta - 1) blows up at the origin when delta > 1
    if (f.delta > 1.0) throw DomainError("production cost: curvature unbounded at x = 0");
    const double d2 = f.delta == 1.0 ? scale : 0.0;
    return {0.0, f.b, d2};
  }
  const double root = std::pow(x, inv_d);
  return {f.b * x + f.delta / (f.delta + 1.0) * scale * root * x,
          f.b + scale * root,
          inv_d * scale * root / x};
}

double marginal_cost(const FirmParams& f, double x) {
  if (x < 0.0) throw DomainError("production cost: negative production");
  return f.b + std::pow(f.cap_k, -1.0 / f.delta) * std::pow(x, 1.0 / f.delta);
}

Vector pseudo_gradient(const Market& m, const Vector& x) {
  const auto l = m.size();
  const PriceDerivs p = price_derivs(m.demand, x.sum());
  Vector g(l);
  for (std::size_t i = 0; i < l; ++i) {
    g[i] = marginal_cost(m.firms[i], x[i]) - x[i] * p.d1 - p.value;
  }
  return g;
}

Matrix jacobian(const Market& m, const Vector& x) {
  const auto l = static_cast<Eigen::Index>(m.size());
  const PriceDerivs p = price_derivs(m.demand, x.sum());
  Matrix jac(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const double row = -x[i] * p.d2 - p.d1;
    for (Eigen::Index j = 0; j < l; ++j) jac(i, j) = row;
    jac(i, i) += prod_cost_derivs(m.firms[i], x[i]).d2 - p.d1;
  }
  return jac;
}

Matrix parameter_jacobian(const Market& m, const Vector& x) {
  const auto l = static_cast<Eigen::Index>(m.size());
  const PriceGammaDerivs pg = price_gamma_derivs(m.demand, x.sum());
  Matrix out = Matrix::Zero(l, l + 1);
  for (Eigen::Index i = 0; i < l; ++i) {
    out(i, i) = 1.0;
    out(i, l) = -x[i] * pg.d_slope - pg.d_value;
  }
  return out;
}

}  // namespace oligo
