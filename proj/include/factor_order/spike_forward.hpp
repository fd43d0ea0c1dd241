#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "factor_order/errors.hpp"
#include "factor_order/panel_spectra.hpp"
#include "factor_order/rmt_laws.hpp"

namespace factor_order {

inline constexpr double k_infinite_factor = std::numeric_limits<double>::infinity();

// 0/1 matrix of size k(q+1) encoding which factor lags overlap at
// displacement tau: two bands at distance k*tau from the diagonal,
// equivalently (J_lower(tau) + J_upper(tau)) (x) I_k on (q+1)-blocks.
// Vanishes identically for tau > q.
struct LagOverlapMatrix {
  int k = 1;
  int q = 0;
  int tau = 1;
  Matrix matrix;
};

inline LagOverlapMatrix build_lag_overlap(int k, int q, int tau) {
  if (k < 1 || q < 0 || tau < 1) throw Error("need k >= 1, q >= 0, tau >= 1");
  const Index dim = static_cast<Index>(k) * (q + 1);
  const Index band = static_cast<Index>(k) * tau;
  Matrix h = Matrix::Zero(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    if (r + band < dim) {
      h(r, r + band) = 1.0;
      h(r + band, r) = 1.0;
    }
  }
  return LagOverlapMatrix{k, q, tau, std::move(h)};
}

// Eigenvalue multiset of the overlap matrix, descending, snapped to a 1e-10
// grid so exact multiplicities survive the eigensolver noise.
inline std::vector<double> overlap_eigenvalues(const LagOverlapMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailureError("overlap eigensolver did not converge");
  std::vector<double> out(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  for (double& v : out) v = std::round(v * 1e10) / 1e10;
  std::sort(out.rbegin(), out.rend());
  return out;
}

namespace detail {

// Right-hand side of the lag-tau spike equation in unit variance:
//   g(u) = (1/2 + 1/h)^{-1} [ (c m / h)(1 + 1/lambda) + u / lambda ],
//   h = 1 - c^2 m^2 + sqrt(1 - c^2 m^2),  m = lag-law Stieltjes at u.
// Increasing on (d, inf), odd across the support, so one bisection routine
// covers both half-lines.
inline double unit_spike_function(double c, double m, double u, double lambda) {
  const double cm = c * m;
  const double s = std::sqrt(std::max(0.0, 1.0 - cm * cm));
  const double h = (1.0 - cm * cm) + s;
  const double weight = 1.0 / (0.5 + 1.0 / h);
  return weight * ((cm / h) * (1.0 + 1.0 / lambda) + u / lambda);
}

inline void require_positive_lambda(double lambda) {
  if (std::isnan(lambda) || lambda <= 0.0) throw NonPositiveLambdaError(lambda);
}

}  // namespace detail

// Spike map for lags tau >= 1, evaluated at a point outside the support.
// lambda may be infinite (dominant loadings), which drops the 1/lambda terms.
inline double spike_function_lag(double ell, double lambda, const RmtContext& ctx) {
  detail::require_positive_lambda(lambda);
  const double a = detail::unit_lsd_support(ctx.c);
  const double u = ell / ctx.sigma2;
  const double m = detail::unit_lsd_stieltjes(ctx.c, a, u);
  return detail::unit_spike_function(ctx.c, m, u, lambda);
}

// Limit of the spike map at the right support edge, via the closed-form
// edge Stieltjes value rather than quadrature at a singular point.
inline double edge_spike_value(double lambda, const RmtContext& ctx) {
  detail::require_positive_lambda(lambda);
  const double a = detail::unit_lsd_support(ctx.c);
  const double m1 = detail::unit_lsd_edge_stieltjes(ctx.c);
  return detail::unit_spike_function(ctx.c, m1, a, lambda);
}

// Edge value under dominant loadings (lambda = inf): the case-classification
// threshold. Always negative since c m1 < 0.
inline double strong_factor_edge_value(const RmtContext& ctx) {
  return edge_spike_value(k_infinite_factor, ctx);
}

// Solution counts of the spike equation for one overlap eigenvalue a_j,
// following the sign of the edge value g_d:
//   g_d >= 0 (case I):  right root iff a_j > g_d, left root iff a_j < -g_d,
//                       nothing in between;
//   g_d <  0 (case II): both roots on g_d < a_j < -g_d, one right root for
//                       a_j >= -g_d, one left root for a_j <= g_d.
struct SpikeCase {
  double a_j = 0.0;
  double lambda = k_infinite_factor;
  int solutions_right = 0;
  int solutions_left = 0;
  std::string case_label;
};

inline SpikeCase classify_spike(double a_j, double lambda, const RmtContext& ctx) {
  const double g_d = edge_spike_value(lambda, ctx);
  SpikeCase out;
  out.a_j = a_j;
  out.lambda = lambda;
  if (g_d >= 0.0) {
    if (a_j > g_d) {
      out.solutions_right = 1;
      out.case_label = "I.i";
    } else if (a_j < -g_d) {
      out.solutions_left = 1;
      out.case_label = "I.iii";
    } else {
      out.case_label = "I.ii";
    }
  } else {
    if (a_j >= -g_d) {
      out.solutions_right = 1;
      out.case_label = "II.i";
    } else if (a_j > g_d) {
      out.solutions_right = 1;
      out.solutions_left = 1;
      out.case_label = "II.ii";
    } else {
      out.solutions_left = 1;
      out.case_label = "II.iii";
    }
  }
  return out;
}

namespace detail {

// Bisection for the unique u in (d, d * 1e6] with g(u) = target, assuming the
// classification granted a root on this half-line. Returns nullopt when the
// root lies beyond the bracket (treated as an outlier at infinity).
inline std::optional<double> solve_spike_right(double target, double lambda,
                                               const RmtContext& ctx) {
  const double c = ctx.c;
  const double a = unit_lsd_support(c);
  auto g = [&](double u) {
    return unit_spike_function(c, unit_lsd_stieltjes(c, a, u), u, lambda);
  };
  double lo = a * (1.0 + 1e-9);
  double hi = 2.0 * a;
  const double cap = a * 1e6;
  while (g(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) return std::nullopt;
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Every located solution of the lag spike equation g(ell) = a_j with
// |ell| > support, right root first. Requires a finite factor strength.
inline std::vector<double> solve_spike_locations(double a_j, double lambda,
                                                 const RmtContext& ctx) {
  detail::require_positive_lambda(lambda);
  if (std::isinf(lambda)) throw Error("spike locations require a finite factor strength");
  const SpikeCase cls = classify_spike(a_j, lambda, ctx);
  std::vector<double> roots;
  if (cls.solutions_right) {
    if (auto u = detail::solve_spike_right(a_j, lambda, ctx)) roots.push_back(*u * ctx.sigma2);
  }
  if (cls.solutions_left) {
    // odd symmetry: g(-u) = -g(u), so the left root mirrors the right root
    // of the negated target
    if (auto u = detail::solve_spike_right(-a_j, lambda, ctx)) roots.push_back(-*u * ctx.sigma2);
  }
  return roots;
}

// Predicted outlier count of the lag-tau spectra for given orders. At lag 0
// an outlier appears for every factor strength above sqrt(c); at lag tau >= 1
// the counts follow the classification of each overlap eigenvalue.
struct SpikePrediction {
  int k = 0;
  int q = 0;
  int tau = 0;
  std::vector<SpikeCase> cases;  // empty at tau = 0
  int total_count = 0;
};

// q_eigenvalues: the k(q+1) factor-gram eigenvalues, paired with the
// descending overlap eigenvalues; entries may be infinite.
inline std::vector<SpikePrediction> predict_outlier_counts(
    int k, int q, int tau_max, const RmtContext& ctx, const std::vector<double>& q_eigenvalues) {
  if (k < 1 || q < 0 || tau_max < 0) throw Error("need k >= 1, q >= 0, tau_max >= 0");
  const std::size_t dim = static_cast<std::size_t>(k) * (q + 1);
  if (q_eigenvalues.size() != dim)
    throw Error("expected " + std::to_string(dim) + " factor-gram eigenvalues");
  std::vector<double> lambdas = q_eigenvalues;
  std::sort(lambdas.rbegin(), lambdas.rend());
  for (double l : lambdas) detail::require_positive_lambda(l);

  std::vector<SpikePrediction> out;
  const double rc = std::sqrt(ctx.c);
  {
    SpikePrediction p{k, q, 0, {}, 0};
    for (double l : lambdas)
      if (l > rc) ++p.total_count;
    out.push_back(std::move(p));
  }
  for (int tau = 1; tau <= tau_max; ++tau) {
    SpikePrediction p{k, q, tau, {}, 0};
    const auto a_list = overlap_eigenvalues(build_lag_overlap(k, q, tau));
    for (std::size_t j = 0; j < a_list.size(); ++j) {
      SpikeCase sc = classify_spike(a_list[j], lambdas[j], ctx);
      p.total_count += sc.solutions_right + sc.solutions_left;
      p.cases.push_back(std::move(sc));
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Dominant-loading shorthand: every factor-gram eigenvalue at infinity.
inline std::vector<SpikePrediction> predict_outlier_counts(int k, int q, int tau_max,
                                                           const RmtContext& ctx) {
  const std::size_t dim = static_cast<std::size_t>(k) * (q + 1);
  return predict_outlier_counts(k, q, tau_max, ctx,
                                std::vector<double>(dim, k_infinite_factor));
}

}  // namespace factor_order
