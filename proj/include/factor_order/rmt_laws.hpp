#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "factor_order/cubic.hpp"
#include "factor_order/errors.hpp"
#include "factor_order/quadrature.hpp"

namespace factor_order {

// Aspect ratio c = n/T and noise variance. Every law below is defined for
// unit variance and rescaled: abscissas by sigma2, densities by 1/sigma2.
struct RmtContext {
  double c;
  double sigma2;
  explicit RmtContext(double c_, double sigma2_ = 1.0) : c(c_), sigma2(sigma2_) {
    if (!(c > 0.0)) throw Error("aspect ratio c must be positive");
    if (!(sigma2 > 0.0)) throw Error("noise variance sigma2 must be positive");
  }
};

// c values this close to 1 are routed to the c = 1 closed forms.
inline constexpr double k_unit_aspect_window = 1e-6;

inline bool near_unit_aspect(double c) { return std::abs(c - 1.0) < k_unit_aspect_window; }

// Half-width of the lag covariance limit support together with the root of
// the edge cubic it came from (unit variance).
struct LsdEdge {
  double y1;
  double a;
};

// ---------------------------------------------------------------------------
// sample covariance limit (lag 0)
// ---------------------------------------------------------------------------

inline std::pair<double, double> mp_edges(const RmtContext& ctx) {
  const double rc = std::sqrt(ctx.c);
  return {(1.0 - rc) * (1.0 - rc) * ctx.sigma2, (1.0 + rc) * (1.0 + rc) * ctx.sigma2};
}

namespace detail {

// Stieltjes transform of the sample covariance limit at a real point outside
// the support, unit variance. The defining quadratic is
//   c u m^2 - (1 - c - u) m + 1 = 0;
// the branch is fixed by m(u) -> -1/u as u -> +inf, which selects the
// + square root above the right edge and the - square root below the left
// edge (and on the c > 1 gap between the origin atom and the bulk).
// Each branch is written in its rationalized form, so no subtraction of
// nearly equal terms occurs anywhere outside the support.
inline double unit_mp_stieltjes(double c, double u) {
  const double rc = std::sqrt(c);
  const double left = (1.0 - rc) * (1.0 - rc);
  const double right = (1.0 + rc) * (1.0 + rc);
  if (u > left && u < right) throw InsideSupportError(u);
  if (u == 0.0 && c >= 1.0 - k_unit_aspect_window) throw InsideSupportError(u);
  const double shifted = u + c - 1.0;
  const double s = std::sqrt(std::max(0.0, shifted * shifted - 4.0 * c * u));
  if (u >= right) return -2.0 / (shifted + s);     // shifted >= 2(c + sqrt(c)) > 0
  if (shifted <= 0.0) return 2.0 / (s - shifted);  // covers u <= 0 for c < 1
  return -(shifted + s) / (2.0 * c * u);           // c > 1 gap: both terms positive
}

}  // namespace detail

inline double mp_stieltjes(double ell, const RmtContext& ctx) {
  return detail::unit_mp_stieltjes(ctx.c, ell / ctx.sigma2) / ctx.sigma2;
}

inline double mp_companion_stieltjes(double ell, const RmtContext& ctx) {
  if (ell == 0.0) throw InsideSupportError(ell);
  return -(1.0 - ctx.c) / ell + ctx.c * mp_stieltjes(ell, ctx);
}

// Decreasing spike map at lag 0: ell * m * m_companion, simplified to
// -ell m(ell) - 1. Equals 1/sqrt(c) at the right edge and decays to 0.
inline double spike_function_lag0(double ell, const RmtContext& ctx) {
  const double u = ell / ctx.sigma2;
  const double rc = std::sqrt(ctx.c);
  const double right = (1.0 + rc) * (1.0 + rc);
  if (u < right) throw InsideSupportError(ell);
  return -u * detail::unit_mp_stieltjes(ctx.c, u) - 1.0;
}

// Location of the lag-0 outlier produced by a population spike alpha, or
// nullopt below the phase transition alpha <= sqrt(c). Solved by bisection
// of the decreasing spike map.
inline std::optional<double> spike_location_lag0(double alpha, const RmtContext& ctx) {
  if (!(alpha > 0.0)) throw Error("spike strength alpha must be positive");
  const double rc = std::sqrt(ctx.c);
  if (!(alpha > rc)) return std::nullopt;
  const double right = (1.0 + rc) * (1.0 + rc);
  const double target = 1.0 / alpha;
  auto g = [&](double u) { return -u * detail::unit_mp_stieltjes(ctx.c, u) - 1.0; };
  double lo = right, hi = 2.0 * right;
  while (g(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceFailureError("spike location bracket overflow");
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * ctx.sigma2;
}

// ---------------------------------------------------------------------------
// lag covariance limit (tau >= 1)
// ---------------------------------------------------------------------------

// Root of ((1-c)^2 - 1) y^3 + y^2 + y - 1 = 0 in the branch y > 1 for c < 1,
// y in (0, 1) for c > 1. The cubic degenerates at c = 1.
inline double lsd_edge_root(double c) {
  if (!(c > 0.0)) throw Error("aspect ratio c must be positive");
  if (near_unit_aspect(c)) throw AspectRatioOneError();
  const double k = (1.0 - c) * (1.0 - c);
  const auto roots = real_cubic_roots(k - 1.0, 1.0, 1.0, -1.0);
  for (double y : roots) {
    if (c < 1.0 && y > 1.0) return y;
    if (c > 1.0 && y > 0.0 && y < 1.0) return y;
  }
  throw ConvergenceFailureError("edge cubic produced no root in the required branch");
}

inline LsdEdge lsd_edge(double c) {
  const double y1 = lsd_edge_root(c);
  return LsdEdge{y1, (1.0 - c) * std::sqrt(1.0 + y1) / (y1 - 1.0)};
}

namespace detail {

inline double unit_lsd_support(double c) {
  if (near_unit_aspect(c)) return 2.0;
  return lsd_edge(c).a;
}

// Density of the lag covariance limit, unit variance, precomputed support.
//
// For c near 1 the defining cubic factors exactly as (y+1)(y^2 - 4/x^2),
// giving density sqrt(2/|x| - 1) / (2 pi). Away from c = 1 the generic
// expression cancels catastrophically as x -> 0 (both terms grow like
// 1/x^2), so below |x| = 1e-3 (1-c)^2 the analytic x -> 0 limit is used:
//   c < 1:  (1/2cpi) sqrt(4 (1 - K) / K),   K = (1-c)^2
//   c > 1:  (1/2cpi) sqrt(4 / K)            (the origin atom is separate)
inline double unit_lsd_density(double c, double a, double x) {
  double ax = std::abs(x);
  if (ax >= a) return 0.0;
  if (near_unit_aspect(c)) {
    ax = std::max(ax, 1e-8);
    return std::sqrt(std::max(0.0, 2.0 / ax - 1.0)) / (2.0 * M_PI);
  }
  const double K = (1.0 - c) * (1.0 - c);
  double rad;
  if (ax < 1e-3 * K) {
    rad = (c < 1.0) ? 4.0 * (1.0 - K) / K : 4.0 / K;
  } else {
    const double inv_x2 = 1.0 / (ax * ax);
    const auto roots = real_cubic_roots(1.0, -(K - ax * ax) * inv_x2, -4.0 * inv_x2, -4.0 * inv_x2);
    const double y0 = roots.back();  // largest real root, always > 0
    const double term = (1.0 - c) / ax + 1.0 / std::sqrt(1.0 + y0);
    rad = y0 * y0 / (1.0 + y0) - term * term;
  }
  return std::sqrt(std::max(0.0, rad)) / (2.0 * c * M_PI);
}

// Continuous-part mass of the unit law on [-a, x], by adaptive quadrature
// under x = a sin(theta); the substitution removes the square-root edge.
inline double unit_lsd_cdf_continuous(double c, double a, double x) {
  if (x <= -a) return 0.0;
  if (near_unit_aspect(c)) {
    // closed form: d/dx [sqrt(x(2-x)) + 2 asin(sqrt(x/2))] = sqrt(2/x - 1)
    auto half = [](double t) {
      t = std::clamp(t, 0.0, 2.0);
      return (std::sqrt(t * (2.0 - t)) + 2.0 * std::asin(std::sqrt(t / 2.0))) / (2.0 * M_PI);
    };
    if (x >= 0.0) return 0.5 + half(x);
    return 0.5 - half(-x);
  }
  const double hi = std::asin(std::clamp(x / a, -1.0, 1.0));
  auto f = [&](double th) {
    const double s = a * std::sin(th);
    return unit_lsd_density(c, a, s) * a * std::cos(th);
  };
  return integrate_adaptive(f, -M_PI / 2.0, hi, 5e-10);
}

// Stieltjes transform of the unit law at a real point with |u| > a.
inline double unit_lsd_stieltjes(double c, double a, double u) {
  if (!(std::abs(u) > a)) throw InsideSupportError(u);
  if (near_unit_aspect(c)) {
    // both half-lines folded through x = sqrt(2) sin(psi) t^2 substitution:
    // m(u) = (u/pi) Int_0^{pi/2} 4 cos^2(psi) / (4 sin^4(psi) - u^2) dpsi
    auto f = [&](double ps) {
      const double sn = std::sin(ps), cs = std::cos(ps);
      const double s2 = sn * sn;
      return 4.0 * cs * cs / (4.0 * s2 * s2 - u * u);
    };
    return u / M_PI * integrate_adaptive(f, 0.0, M_PI / 2.0, 5e-10);
  }
  auto f = [&](double th) {
    const double s = a * std::sin(th);
    return unit_lsd_density(c, a, s) * a * std::cos(th) / (s - u);
  };
  double m = integrate_adaptive(f, -M_PI / 2.0, M_PI / 2.0, 5e-10);
  if (c > 1.0) m += (1.0 - 1.0 / c) / (0.0 - u);
  return m;
}

// Closed-form limit of the transform at the right support edge.
inline double unit_lsd_edge_stieltjes(double c) {
  const double d = unit_lsd_support(c);
  return (1.0 - c - std::sqrt((1.0 - c) * (1.0 - c) + 8.0 * d * d)) / (4.0 * c * d);
}

}  // namespace detail

inline double lsd_support(const RmtContext& ctx) {
  return detail::unit_lsd_support(ctx.c) * ctx.sigma2;
}

inline double lsd_density(double x, const RmtContext& ctx) {
  const double a = detail::unit_lsd_support(ctx.c);
  return detail::unit_lsd_density(ctx.c, a, x / ctx.sigma2) / ctx.sigma2;
}

// Distribution function; carries the origin point mass 1 - 1/c when c > 1.
inline double lsd_cdf(double x, const RmtContext& ctx) {
  const double c = ctx.c;
  const double a = detail::unit_lsd_support(c);
  const double u = x / ctx.sigma2;
  double v = detail::unit_lsd_cdf_continuous(c, a, u);
  if (c > 1.0 && u >= 0.0) v += 1.0 - 1.0 / c;
  return std::clamp(v, 0.0, 1.0);
}

inline double lsd_stieltjes(double ell, const RmtContext& ctx) {
  const double c = ctx.c;
  const double a = detail::unit_lsd_support(c);
  return detail::unit_lsd_stieltjes(c, a, ell / ctx.sigma2) / ctx.sigma2;
}

inline double lsd_stieltjes_at_edge(const RmtContext& ctx) {
  return detail::unit_lsd_edge_stieltjes(ctx.c) / ctx.sigma2;
}

}  // namespace factor_order
