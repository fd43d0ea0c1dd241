#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "factor_order/errors.hpp"
#include "factor_order/order_estimator.hpp"
#include "factor_order/panel_spectra.hpp"
#include "factor_order/rmt_laws.hpp"
#include "factor_order/rng.hpp"

namespace factor_order {

// Dynamic factor model design: R_t = sum_{i=0}^q L_i f_{t-i} + e_t with
// Gaussian factors N(0, sigma_f2 I_k), noise N(0, sigma2 I_n), and loading
// columns beta * 1_n + N(0, sigma_eps2 I_n). Defaults mirror the reference
// design (n=450, T=500, k=2, q=2, beta=1, sigma_f2=4, sigma2=1,
// sigma_eps2=0.25, lags scanned up to 5).
struct ModelConfig {
  Index n = 450;
  Index t = 500;
  int k = 2;
  int q = 2;
  double beta = 1.0;
  double sigma_f2 = 4.0;
  double sigma2 = 1.0;
  double sigma_eps2 = 0.25;
  std::uint64_t seed = 0;
  int tau_max = 5;
};

inline void validate(const ModelConfig& cfg) {
  if (cfg.n < 1 || cfg.t < 1) throw Error("model dimensions must be positive");
  if (cfg.k < 1 || cfg.q < 0 || cfg.tau_max < 0) throw Error("need k >= 1, q >= 0, tau_max >= 0");
  if (!(cfg.sigma_f2 > 0.0 && cfg.sigma2 > 0.0 && cfg.sigma_eps2 > 0.0))
    throw Error("model variances must be positive");
}

// substream ids (see derive_stream_seed)
inline constexpr std::uint64_t k_stream_loadings = 1;
inline constexpr std::uint64_t k_stream_factors = 2;
inline constexpr std::uint64_t k_stream_noise = 3;
inline constexpr std::uint64_t k_stream_replicate_base = 1000;

inline std::uint64_t replicate_seed(std::uint64_t base, int replicate) {
  return derive_stream_seed(base, k_stream_replicate_base + static_cast<std::uint64_t>(replicate));
}

// q+1 loading matrices of size n x k; column j of L_i is
// beta * 1_n + N(0, sigma_eps2). Draw order: lag, then column, then row.
inline std::vector<Matrix> generate_loadings(const ModelConfig& cfg, GaussianStream& rng) {
  validate(cfg);
  const double sd = std::sqrt(cfg.sigma_eps2);
  std::vector<Matrix> loadings;
  loadings.reserve(static_cast<std::size_t>(cfg.q) + 1);
  for (int i = 0; i <= cfg.q; ++i) {
    Matrix l(cfg.n, cfg.k);
    for (int j = 0; j < cfg.k; ++j)
      for (Index r = 0; r < cfg.n; ++r) l(r, j) = cfg.beta + sd * rng.gaussian();
    loadings.push_back(std::move(l));
  }
  return loadings;
}

// Panel with N = T + tau_max columns. Pre-sample factors f_0 .. f_{1-q} are
// drawn as well (stationary start), so every column uses the same law.
inline Panel generate_panel(const ModelConfig& cfg) {
  validate(cfg);
  const Index n_cols = cfg.t + cfg.tau_max;

  GaussianStream rng_load(derive_stream_seed(cfg.seed, k_stream_loadings));
  const std::vector<Matrix> loadings = generate_loadings(cfg, rng_load);

  GaussianStream rng_f(derive_stream_seed(cfg.seed, k_stream_factors));
  const Index f_cols = n_cols + cfg.q;  // t = 1-q .. n_cols
  Matrix factors(cfg.k, f_cols);
  const double f_sd = std::sqrt(cfg.sigma_f2);
  for (Index t = 0; t < f_cols; ++t)
    for (int j = 0; j < cfg.k; ++j) factors(j, t) = f_sd * rng_f.gaussian();

  GaussianStream rng_e(derive_stream_seed(cfg.seed, k_stream_noise));
  Matrix data(cfg.n, n_cols);
  const double e_sd = std::sqrt(cfg.sigma2);
  for (Index t = 0; t < n_cols; ++t)
    for (Index r = 0; r < cfg.n; ++r) data(r, t) = e_sd * rng_e.gaussian();

  // column t (1-based) uses factors f_{t-i}, stored at index t - i + q - 1
  for (int i = 0; i <= cfg.q; ++i)
    data.noalias() += loadings[static_cast<std::size_t>(i)] *
                      factors.middleCols(cfg.q - i, n_cols);
  return Panel{std::move(data), cfg.n, n_cols};
}

// Sup distance between the empirical spectral CDF and the lag-law CDF.
// The law CDF is accumulated segment by segment across the sorted
// eigenvalues, so the whole scan costs one pass of quadrature.
inline double esd_ks_distance(const Spectrum& spec, const RmtContext& ctx) {
  const double c = ctx.c;
  const double a = detail::unit_lsd_support(c);
  std::vector<double> asc(spec.values.rbegin(), spec.values.rend());
  const double n = static_cast<double>(asc.size());

  const double atom = (c > 1.0) ? 1.0 - 1.0 / c : 0.0;
  double dist = 0.0;
  double mass = 0.0;  // continuous mass accumulated up to theta_prev
  double theta_prev = -M_PI / 2.0;
  auto f = [&](double th) {
    const double s = a * std::sin(th);
    return detail::unit_lsd_density(c, a, s) * a * std::cos(th);
  };
  for (std::size_t i = 0; i < asc.size(); ++i) {
    const double u = asc[i] / ctx.sigma2;
    double cdf;
    if (u <= -a) {
      cdf = 0.0;
    } else if (u >= a) {
      cdf = 1.0;
    } else if (near_unit_aspect(c)) {
      cdf = detail::unit_lsd_cdf_continuous(c, a, u);  // closed form
    } else {
      const double theta = std::asin(std::clamp(u / a, -1.0, 1.0));
      mass += integrate_adaptive(f, theta_prev, theta, 1e-10);
      theta_prev = theta;
      cdf = mass;
      if (u >= 0.0) cdf += atom;
    }
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    dist = std::max({dist, std::abs(lo - cdf), std::abs(hi - cdf)});
  }
  return std::min(dist, 1.0);
}

// Monte Carlo harness: replicate r re-runs the pipeline on a panel drawn
// from a child seed of (cfg.seed, r); results do not depend on execution
// order. sigma2 empty lets each replicate estimate its own noise variance.
inline std::vector<OrderEstimate> run_replicates(const ModelConfig& cfg, int reps,
                                                 std::optional<double> sigma2 = std::nullopt) {
  if (reps < 1) throw Error("need at least one replicate");
  std::vector<OrderEstimate> out;
  out.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    ModelConfig child = cfg;
    child.seed = replicate_seed(cfg.seed, r);
    out.push_back(estimate_orders(generate_panel(child), cfg.tau_max, sigma2));
  }
  return out;
}

}  // namespace factor_order
