#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "factor_order/errors.hpp"

namespace factor_order {

namespace detail {

// 15-point Kronrod nodes on [0,1] side (symmetric), with embedded 7-point Gauss.
// Values from the QUADPACK QK15 rule.
struct Gk15 {
  static constexpr double xgk[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wgk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class F>
inline void gk15(F&& f, double a, double b, double& value, double& error) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(mid - half * Gk15::xgk[i]);
    fv[14 - i] = f(mid + half * Gk15::xgk[i]);
  }
  fv[7] = f(mid);
  double k15 = 0.0, g7 = 0.0;
  for (int i = 0; i < 7; ++i) {
    k15 += Gk15::wgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) g7 += Gk15::wg[i / 2] * (fv[i] + fv[14 - i]);
  }
  k15 += Gk15::wgk[7] * fv[7];
  g7 += Gk15::wg[3] * fv[7];
  value = k15 * half;
  error = std::abs((k15 - g7) * half);
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration of f over [a, b] to an
// absolute tolerance. Splits the interval with the largest error estimate.
template <class F>
inline double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                 int max_intervals = 4000) {
  if (a == b) return 0.0;
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  std::priority_queue<Piece> work;
  double v, e;
  detail::gk15(f, a, b, v, e);
  work.push({a, b, v, e});
  double total_value = v, total_error = e;
  int n_intervals = 1;
  while (total_error > abs_tol && n_intervals < max_intervals) {
    Piece worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {
      work.push(worst);  // interval at floating-point resolution
      break;
    }
    double v1, e1, v2, e2;
    detail::gk15(f, worst.a, mid, v1, e1);
    detail::gk15(f, mid, worst.b, v2, e2);
    total_value += v1 + v2 - worst.value;
    total_error += e1 + e2 - worst.error;
    work.push({worst.a, mid, v1, e1});
    work.push({mid, worst.b, v2, e2});
    ++n_intervals;
  }
  if (total_error > 10.0 * abs_tol + 1e-12 * std::abs(total_value)) {
    throw ConvergenceFailureError("adaptive quadrature did not reach the requested tolerance");
  }
  return total_value;
}

}  // namespace factor_order
