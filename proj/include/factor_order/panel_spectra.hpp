#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "factor_order/errors.hpp"

namespace factor_order {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Observation panel: row i is series i, column t is time t. All entries finite.
struct Panel {
  Matrix data;
  Index n = 0;  // series
  Index N = 0;  // time points
};

inline Panel validate_panel(const Matrix& raw) {
  if (raw.rows() == 0 || raw.cols() == 0) throw EmptyInputError();
  for (Index i = 0; i < raw.rows(); ++i)
    for (Index j = 0; j < raw.cols(); ++j)
      if (!std::isfinite(raw(i, j))) throw NonFiniteError(i, j);
  return Panel{raw, raw.rows(), raw.cols()};
}

inline Panel validate_panel(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw EmptyInputError();
  const Index n_cols = static_cast<Index>(rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Index>(rows[i].size()) != n_cols)
      throw RaggedRowsError(static_cast<long>(i), n_cols, static_cast<long>(rows[i].size()));
  }
  Matrix data(static_cast<Index>(rows.size()), n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index j = 0; j < n_cols; ++j) data(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return validate_panel(data);
}

// Symmetrized lag-tau covariance (1/2T) sum_{j<=T} (R_j R_{j+tau}' + R_{j+tau} R_j').
// The matrix is exactly symmetric: the upper triangle is computed and mirrored.
struct SymLagCov {
  Matrix matrix;
  int tau = 0;
  Index t_used = 0;
};

inline SymLagCov build_sym_lag_cov(const Panel& panel, int tau, Index t_used) {
  if (tau < 0 || t_used < 1 || t_used + tau > panel.N)
    throw InsufficientColumnsError(t_used, tau, panel.N);
  const auto head = panel.data.middleCols(0, t_used);
  const auto lagged = panel.data.middleCols(tau, t_used);
  Matrix cross = head * lagged.transpose();
  const double two_t = 2.0 * static_cast<double>(t_used);
  const Index n = panel.n;
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = (cross(i, j) + cross(j, i)) / two_t;
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return SymLagCov{std::move(out), tau, t_used};
}

// Full real spectrum with metadata. `values` descending, `abs_values`
// descending by magnitude, c = n / t_used.
struct Spectrum {
  std::vector<double> values;
  std::vector<double> abs_values;
  int tau = 0;
  Index n = 0;
  Index t_used = 0;
  double c = 0.0;
};

inline Spectrum eigenvalues_sym(const SymLagCov& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailureError("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();  // ascending
  Spectrum spec;
  spec.values.assign(ev.data(), ev.data() + ev.size());
  std::reverse(spec.values.begin(), spec.values.end());
  spec.abs_values = spec.values;
  std::sort(spec.abs_values.begin(), spec.abs_values.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  spec.tau = cov.tau;
  spec.n = cov.matrix.rows();
  spec.t_used = cov.t_used;
  spec.c = static_cast<double>(spec.n) / static_cast<double>(cov.t_used);
  return spec;
}

}  // namespace factor_order
