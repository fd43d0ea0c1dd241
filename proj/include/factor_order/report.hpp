#pragma once

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "factor_order/order_estimator.hpp"
#include "factor_order/spike_forward.hpp"

namespace factor_order {

inline constexpr const char* k_report_schema_version = "1";

// Single-document JSON report. Counts appear for every scanned lag; each lag
// carries the largest absolute eigenvalues (13 by default, matching the
// width of the usual diagnostic table).
inline nlohmann::json report_json(const OrderEstimate& est, int report_eigs = 13) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [tau, count] : est.counts) {
    const Spectrum& spec = est.spectra[static_cast<std::size_t>(tau)];
    nlohmann::json top = nlohmann::json::array();
    const int limit = std::min<int>(report_eigs, static_cast<int>(spec.abs_values.size()));
    for (int i = 0; i < limit; ++i) top.push_back(std::abs(spec.abs_values[static_cast<std::size_t>(i)]));
    counts.push_back({{"tau", tau}, {"count", count}, {"top_eigenvalues", std::move(top)}});
  }
  nlohmann::json j{
      {"n", est.thresholds.n},
      {"T", est.spectra.empty() ? 0 : est.spectra[0].t_used},
      {"c", est.thresholds.c},
      {"sigma2_hat", est.sigma2_hat},
      {"sigma2_source", est.sigma2_source},
      {"thresholds", {{"b_hat", est.thresholds.b_hat}, {"d_hat", est.thresholds.d_hat}}},
      {"counts", std::move(counts)},
      {"warnings", est.warnings},
      {"version", k_report_schema_version},
  };
  j["k_hat"] = est.k_hat ? nlohmann::json(*est.k_hat) : nlohmann::json();
  j["q_hat"] = est.q_hat ? nlohmann::json(*est.q_hat) : nlohmann::json();
  return j;
}

// JSON for predicted per-lag outlier counts.
inline nlohmann::json prediction_json(const std::vector<SpikePrediction>& preds) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : preds) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& sc : p.cases) {
      cases.push_back({{"a", sc.a_j},
                       {"lambda", std::isinf(sc.lambda) ? nlohmann::json("inf") : nlohmann::json(sc.lambda)},
                       {"right", sc.solutions_right},
                       {"left", sc.solutions_left},
                       {"case", sc.case_label}});
    }
    arr.push_back({{"tau", p.tau}, {"count", p.total_count}, {"cases", std::move(cases)}});
  }
  return arr;
}

}  // namespace factor_order
