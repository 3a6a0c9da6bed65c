// Adaptive Simpson quadrature for scalar- and vector-valued integrands.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace scatrel {

namespace detail {

template <typename T>
double quad_norm(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(v);
  } else {
    return v.template lpNorm<Eigen::Infinity>();
  }
}

template <typename F, typename T>
T adaptive_simpson_rec(const F& f, double a, double b, const T& fa, const T& fm,
                       const T& fb, const T& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const T fl = f(0.5 * (a + m));
  const T fr = f(0.5 * (m + b));
  const T left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
  const T sum = left + right;
  if (depth <= 0 || quad_norm<T>(sum - whole) < 15.0 * tol)
    return sum + (sum - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, fl, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, fr, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <typename F>
auto adaptive_simpson(const F& f, double a, double b, double tol = 1e-12,
                      int max_depth = 40) -> decltype(f(a)) {
  using T = decltype(f(a));
  const T fa = f(a);
  const T fm = f(0.5 * (a + b));
  const T fb = f(b);
  const T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral of f over (-inf, b]: substitute t = b - (1-u)/u, u in (0, 1].
// Assumes f decays at least like an integrable power at -inf.
template <typename F>
auto simpson_tail_below(const F& f, double b, double tol = 1e-12) -> decltype(f(b)) {
  auto g = [&](double u) {
    const double eps = 1e-14;
    if (u < eps) u = eps;
    return decltype(f(b))(f(b - (1.0 - u) / u) / (u * u));
  };
  return adaptive_simpson(g, 1e-14, 1.0, tol);
}

// Integral of f over [a, inf).
template <typename F>
auto simpson_tail_above(const F& f, double a, double tol = 1e-12) -> decltype(f(a)) {
  auto g = [&](double u) {
    const double eps = 1e-14;
    if (u < eps) u = eps;
    return decltype(f(a))(f(a + (1.0 - u) / u) / (u * u));
  };
  return adaptive_simpson(g, 1e-14, 1.0, tol);
}

} // namespace scatrel
