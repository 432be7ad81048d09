#ifndef QDIRAC_QUADRATURE_HPP
#define QDIRAC_QUADRATURE_HPP

// Adaptive Gauss-Kronrod (7/15) over finite intervals, real or complex
// integrands in double precision.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <complex>

namespace qdirac::quadrature {

inline constexpr unsigned kMaxDepth = 15;

template <class Result>
struct Integral {
  Result value{};
  double error = 0.0;
  double l1 = 0.0;
};

/// Integrates f over [a, b]; `tol` is relative to the L1 norm of f.
template <class F>
auto integrate(F&& f, double a, double b, double tol, unsigned max_depth = kMaxDepth) {
  using R = decltype(f(a));
  Integral<R> out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, tol, &out.error, &out.l1);
  return out;
}

}  // namespace qdirac::quadrature

#endif  // QDIRAC_QUADRATURE_HPP
