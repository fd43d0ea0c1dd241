#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace factor_order {

namespace detail {

inline double eval_poly3(double a3, double a2, double a1, double a0, double x) {
  return ((a3 * x + a2) * x + a1) * x + a0;
}

inline double eval_poly3_deriv(double a3, double a2, double a1, double x) {
  return (3.0 * a3 * x + 2.0 * a2) * x + a1;
}

// A few Newton steps against the original coefficients to strip the
// cancellation left over from the closed-form solution.
inline double polish_root(double a3, double a2, double a1, double a0, double x) {
  for (int i = 0; i < 8; ++i) {
    double p = eval_poly3(a3, a2, a1, a0, x);
    double dp = eval_poly3_deriv(a3, a2, a1, x);
    if (dp == 0.0) break;
    double step = p / dp;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

// All real roots of a3 x^3 + a2 x^2 + a1 x + a0 = 0, ascending.
// Degenerate leading coefficients fall back to the quadratic / linear case.
inline std::vector<double> real_cubic_roots(double a3, double a2, double a1, double a0) {
  const double scale = std::max({std::abs(a3), std::abs(a2), std::abs(a1), std::abs(a0)});
  std::vector<double> roots;
  if (scale == 0.0) return roots;

  if (std::abs(a3) <= 1e-14 * scale) {
    if (std::abs(a2) <= 1e-14 * scale) {
      if (a1 != 0.0) roots.push_back(-a0 / a1);
      return roots;
    }
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      // stable quadratic: avoid subtracting nearly equal magnitudes
      const double qq = -0.5 * (a1 + std::copysign(s, a1));
      roots.push_back(qq / a2);
      if (qq != 0.0) roots.push_back(a0 / qq);
      else roots.push_back(0.0);
      std::sort(roots.begin(), roots.end());
    }
    return roots;
  }

  // depressed form t^3 + p t + q with x = t - a2/(3 a3)
  const double b = a2 / a3, c = a1 / a3, d = a0 / a3;
  const double shift = b / 3.0;
  const double p = c - b * b / 3.0;
  const double q = d - b * c / 3.0 + 2.0 * b * b * b / 27.0;
  const double disc = -4.0 * p * p * p - 27.0 * q * q;

  if (disc > 0.0) {
    // three distinct real roots, trigonometric form (p < 0 here)
    const double r = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * r);
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos((phi - 2.0 * M_PI * k) / 3.0) - shift);
    }
  } else if (p == 0.0 && q == 0.0) {
    roots.push_back(-shift);
  } else {
    // one real root (or a repeated pair on disc == 0; the polish and the
    // callers' branch selection make the distinction irrelevant here)
    const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    const double u = std::cbrt(-q / 2.0 + s);
    const double v = std::cbrt(-q / 2.0 - s);
    roots.push_back(u + v - shift);
    if (disc == 0.0 && p != 0.0) roots.push_back(-(u + v) / 2.0 - shift);
  }

  for (double& x : roots) x = detail::polish_root(a3, a2, a1, a0, x);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace factor_order
