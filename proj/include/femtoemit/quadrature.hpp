#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>

#include "femtoemit/errors.hpp"

namespace femtoemit {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  /// Trapezoid: maximum number of interval halvings (2^n panels).
  /// Gauss-Kronrod: maximum bisection depth.
  std::size_t max_refinements = 22;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double l1_norm = 0.0;
};

namespace detail {

inline void require_converged(const char* rule, const QuadratureResult& r, const QuadratureOptions& opt,
                              double a, double b) {
  if (r.error_estimate <= opt.rel_tol * r.l1_norm) return;
  std::ostringstream os;
  os.precision(6);
  os << rule << " on [" << a << ", " << b << "] did not converge: error estimate "
     << r.error_estimate << " > rel_tol " << opt.rel_tol << " x L1 " << r.l1_norm
     << " after " << opt.max_refinements << " refinements";
  throw NumericalError(os.str());
}

}  // namespace detail

/// Integral of a smooth periodic function over one full period [a, b).
/// The trapezoid rule is spectrally accurate for this class, so the
/// refinement loop converges geometrically once the integrand is resolved.
template <class F>
QuadratureResult integrate_periodic(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult r;
  r.value = boost::math::quadrature::trapezoidal(f, a, b, opt.rel_tol, opt.max_refinements,
                                                 &r.error_estimate, &r.l1_norm);
  detail::require_converged("periodic trapezoid", r, opt, a, b);
  return r;
}

/// Adaptive 15-point Gauss-Kronrod for non-periodic smooth integrands.
/// The interval is mapped onto [0, 1] first: on femtosecond-wide intervals
/// the rule's error estimate never drops below its tolerance.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult r;
  const double width = b - a;
  const auto depth = static_cast<unsigned>(opt.max_refinements);
  const auto g = [&](double s) { return f(a + s * width); };
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      g, 0.0, 1.0, depth, opt.rel_tol, &r.error_estimate, &r.l1_norm);
  r.value *= width;
  r.error_estimate *= std::abs(width);
  r.l1_norm *= std::abs(width);
  detail::require_converged("gauss-kronrod", r, opt, a, b);
  return r;
}

}  // namespace femtoemit
