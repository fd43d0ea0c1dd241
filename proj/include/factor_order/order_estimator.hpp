#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "factor_order/errors.hpp"
#include "factor_order/panel_spectra.hpp"
#include "factor_order/rmt_laws.hpp"

namespace factor_order {

// Detection thresholds actually applied to a spectrum scan.
struct ThresholdSet {
  double b_hat = 0.0;  // lag-0 threshold
  double d_hat = 0.0;  // lag >= 1 threshold
  double c = 0.0;
  Index n = 0;
  double sigma2_used = 1.0;
};

// (1 + sqrt(c))^2 (1 + 2 n^{-2/3}) sigma2: bulk right edge plus an
// edge-fluctuation buffer.
inline double threshold_lag0(const RmtContext& ctx, Index n) {
  const double rc = std::sqrt(ctx.c);
  const double buffer = 1.0 + 2.0 * std::pow(static_cast<double>(n), -2.0 / 3.0);
  return (1.0 + rc) * (1.0 + rc) * buffer * ctx.sigma2;
}

// Lag-law support edge with the fitted buffer (1 + 0.1 n^{-1/3}).
inline double threshold_lag_pos(const RmtContext& ctx, Index n) {
  const double buffer = 1.0 + 0.1 * std::pow(static_cast<double>(n), -1.0 / 3.0);
  return lsd_support(ctx) * buffer;
}

inline int count_outliers(const Spectrum& spec, double threshold, bool use_abs) {
  if (!(threshold > 0.0)) throw Error("outlier threshold must be positive");
  int count = 0;
  if (use_abs) {
    for (double v : spec.abs_values) {
      if (std::abs(v) > threshold) ++count;
      else break;  // abs-descending
    }
  } else {
    for (double v : spec.values) {
      if (v > threshold) ++count;
      else break;
    }
  }
  return count;
}

struct NoiseVarianceEstimate {
  double sigma2 = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Iterative bulk-mean noise variance from a lag-0 spectrum. Starting window:
// drop the m largest eigenvalues above a bound proportional to the smallest
// positive eigenvalue, and symmetrically the m smallest. Then repeatedly
// average the eigenvalues inside the rescaled bulk interval
// [(1-sqrt(c))^2 s, (1+sqrt(c))^2 (1+2n^{-2/3}) s] until the included index
// set repeats. The interval collapses at c = 1, which is rejected.
inline NoiseVarianceEstimate estimate_noise_variance(const Spectrum& lag0) {
  const double c = lag0.c;
  const Index n = lag0.n;
  if (near_unit_aspect(c)) throw AspectRatioOneError();

  std::vector<double> asc(lag0.values.rbegin(), lag0.values.rend());
  const double lam_max = asc.back();
  if (!(lam_max > 0.0)) throw EmptyWindowError("no positive eigenvalues at lag 0");
  const double zero_floor = 1e-10 * lam_max;
  auto first_pos = std::upper_bound(asc.begin(), asc.end(), zero_floor);
  const double lam1 = *first_pos;

  const double rc = std::sqrt(c);
  const double up_factor =
      (1.0 + rc) * (1.0 + rc) * (1.0 + 2.0 * std::pow(static_cast<double>(n), -2.0 / 3.0));
  const double lo_factor = (1.0 - rc) * (1.0 - rc);

  const double init_bound = up_factor / lo_factor * lam1;
  const long m = static_cast<long>(asc.end() - std::lower_bound(asc.begin(), asc.end(), init_bound));
  if (2 * m >= static_cast<long>(n)) throw EmptyWindowError("rank trim removed every eigenvalue");
  double sigma2 = 0.0;
  {
    double sum = 0.0;
    for (long i = m; i < static_cast<long>(n) - m; ++i) sum += asc[static_cast<std::size_t>(i)];
    sigma2 = sum / static_cast<double>(static_cast<long>(n) - 2 * m);
  }

  std::pair<long, long> included{-1, -1};
  NoiseVarianceEstimate out;
  out.converged = false;
  for (int it = 1; it <= 100; ++it) {
    out.iterations = it;
    const double lo = lo_factor * sigma2;
    const double hi = up_factor * sigma2;
    const long lo_idx = static_cast<long>(std::lower_bound(asc.begin(), asc.end(), lo) - asc.begin());
    const long hi_idx = static_cast<long>(std::upper_bound(asc.begin(), asc.end(), hi) - asc.begin());
    if (lo_idx >= hi_idx) throw EmptyWindowError("no eigenvalues inside the bulk interval");
    if (included == std::make_pair(lo_idx, hi_idx)) {
      out.converged = true;
      break;
    }
    included = {lo_idx, hi_idx};
    double sum = 0.0;
    for (long i = lo_idx; i < hi_idx; ++i) sum += asc[static_cast<std::size_t>(i)];
    sigma2 = sum / static_cast<double>(hi_idx - lo_idx);
  }
  out.sigma2 = sigma2;
  return out;
}

// Decision rule applied to the per-lag outlier counts: q + 1 is the first
// lag whose count reaches twice the lag-0 count, then k = s0 / (q + 1).
// Ambiguity never fails silently; it lands in `warnings`.
struct OrderDecision {
  std::optional<int> k_hat;
  std::optional<int> q_hat;
  std::vector<std::string> warnings;
};

inline OrderDecision decide_orders(int s0, const std::vector<std::pair<int, int>>& counts) {
  OrderDecision d;
  if (s0 == 0) {
    d.k_hat = 0;
    d.q_hat = 0;
    d.warnings.push_back("NoFactors: no lag-0 eigenvalue above the detection threshold");
    return d;
  }
  std::optional<int> jump_tau;
  for (const auto& [tau, count] : counts) {
    if (tau >= 1 && count >= 2 * s0) {
      jump_tau = tau;
      break;
    }
  }
  if (!jump_tau) {
    d.warnings.push_back("IncreaseTauMax: no lag count reached twice the lag-0 count");
    return d;
  }
  d.q_hat = *jump_tau - 1;
  const int divisor = *jump_tau;
  if (s0 % divisor == 0) {
    d.k_hat = s0 / divisor;
  } else {
    d.k_hat = static_cast<int>(std::lround(static_cast<double>(s0) / divisor));
    d.warnings.push_back("Divisibility: lag-0 count " + std::to_string(s0) +
                         " is not a multiple of q_hat + 1 = " + std::to_string(divisor));
  }
  return d;
}

// Final pipeline report.
struct OrderEstimate {
  std::optional<int> k_hat;
  std::optional<int> q_hat;
  int s0 = 0;                              // lag-0 outlier count
  std::vector<std::pair<int, int>> counts; // (tau, count) for tau = 0..tau_max
  double sigma2_hat = 0.0;
  std::string sigma2_source;               // "given" | "estimated"
  ThresholdSet thresholds;
  std::vector<std::string> warnings;
  std::vector<Spectrum> spectra;           // per tau, kept for reporting
};

namespace detail {

inline int thread_cap() {
  if (const char* env = std::getenv("FACTOR_ORDER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// One spectrum per lag; lags are independent, so they may run on as many
// threads as the cap allows without affecting the result.
inline std::vector<Spectrum> lag_spectra(const Panel& panel, int tau_max, Index t_used) {
  std::vector<Spectrum> spectra(static_cast<std::size_t>(tau_max) + 1);
  auto work = [&](int tau) {
    spectra[static_cast<std::size_t>(tau)] =
        eigenvalues_sym(build_sym_lag_cov(panel, tau, t_used));
  };
  const int threads = std::min(thread_cap(), tau_max + 1);
  if (threads <= 1) {
    for (int tau = 0; tau <= tau_max; ++tau) work(tau);
    return spectra;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int tau = t; tau <= tau_max; tau += threads) work(tau);
    });
  }
  for (auto& th : pool) th.join();
  return spectra;
}

}  // namespace detail

// Estimate the factor count and lag order of a panel from its lag-spectra
// outlier counts. Shares t_used = N - tau_max across lags so a single c
// governs every threshold. sigma2 empty means "estimate it from lag 0".
inline OrderEstimate estimate_orders(const Panel& panel, int tau_max,
                                     std::optional<double> sigma2 = std::nullopt) {
  if (tau_max < 1) throw Error("tau_max must be at least 1");
  if (panel.N <= tau_max + 1) throw InsufficientColumnsError(panel.N - tau_max, tau_max, panel.N);
  const Index t_used = panel.N - tau_max;
  const double c = static_cast<double>(panel.n) / static_cast<double>(t_used);

  OrderEstimate est;
  est.spectra = detail::lag_spectra(panel, tau_max, t_used);

  if (sigma2) {
    if (!(*sigma2 > 0.0)) throw Error("sigma2 must be positive");
    est.sigma2_hat = *sigma2;
    est.sigma2_source = "given";
  } else {
    const NoiseVarianceEstimate nv = estimate_noise_variance(est.spectra[0]);
    est.sigma2_hat = nv.sigma2;
    est.sigma2_source = "estimated";
    if (!nv.converged)
      est.warnings.push_back("NonConvergence: noise variance iteration hit the cycle guard");
  }

  const RmtContext ctx(c, est.sigma2_hat);
  const double b_hat = threshold_lag0(ctx, panel.n);
  const double d_hat = threshold_lag_pos(ctx, panel.n);
  est.thresholds = ThresholdSet{b_hat, d_hat, c, panel.n, est.sigma2_hat};

  est.s0 = count_outliers(est.spectra[0], b_hat, /*use_abs=*/false);
  est.counts.emplace_back(0, est.s0);
  for (int tau = 1; tau <= tau_max; ++tau) {
    est.counts.emplace_back(
        tau, count_outliers(est.spectra[static_cast<std::size_t>(tau)], d_hat, /*use_abs=*/true));
  }

  OrderDecision decision = decide_orders(est.s0, est.counts);
  est.k_hat = decision.k_hat;
  est.q_hat = decision.q_hat;
  for (auto& w : decision.warnings) est.warnings.push_back(std::move(w));
  return est;
}

}  // namespace factor_order
