#pragma once

// Thin numerical-integration layer over Boost.Math. Radial integrands in this
// library are power-like, so most integrals run over log-spaced panels.

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levyholder/error.hpp"

namespace lh::quad {

inline constexpr double kTol = 1e-12;

/// Adaptive Gauss–Kronrod (15/31) on [a, b].
template <class F>
double integrate(F&& f, double a, double b, double tol = kTol) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &err);
}

/// ∫_a^b f(r) dr with 0 < a <= b, computed as ∫ r f(r) d(ln r) over roughly
/// one panel per decade.
template <class F>
double integrate_log(F&& f, double a, double b, double tol = kTol) {
  if (!(a > 0.0) || b < a) throw DomainError("integrate_log: need 0 < a <= b");
  if (a == b) return 0.0;
  const double la = std::log(a);
  const double lb = std::log(b);
  const int panels = std::max(1, static_cast<int>(std::ceil((lb - la) / std::log(10.0))));
  const double h = (lb - la) / panels;
  auto g = [&](double s) {
    const double r = std::exp(s);
    return r * f(r);
  };
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = la + i * h;
    const double hi = (i + 1 == panels) ? lb : lo + h;
    sum += integrate(g, lo, hi, tol);
  }
  return sum;
}

/// Fixed 20-point Gauss–Legendre rule on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

/// Local exponent d ln g / d ln r of a positive function by central differences.
template <class F>
double log_slope(F&& g, double r, double h = 1e-3) {
  const double up = g(r * std::exp(h));
  const double dn = g(r * std::exp(-h));
  return (std::log(up) - std::log(dn)) / (2.0 * h);
}

}  // namespace lh::quad
