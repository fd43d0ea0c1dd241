// Command-line front end: simulate panels, estimate orders, tabulate the
// limit laws, and print forward outlier-count predictions.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "factor_order/csv_io.hpp"
#include "factor_order/order_estimator.hpp"
#include "factor_order/report.hpp"
#include "factor_order/rmt_laws.hpp"
#include "factor_order/simulator.hpp"
#include "factor_order/spike_forward.hpp"

namespace fo = factor_order;

namespace {

constexpr const char* k_version = "0.1.0";

// distinct exit statuses per error family
constexpr int k_exit_error = 1;
constexpr int k_exit_io = 2;
constexpr int k_exit_aspect_ratio = 3;
constexpr int k_exit_inside_support = 4;

struct SimulateOpts {
  fo::ModelConfig cfg;
  std::string out_path;
};

int run_simulate(const SimulateOpts& opts) {
  const fo::Panel panel = fo::generate_panel(opts.cfg);
  std::vector<std::string> comments;
  {
    std::ostringstream echo;
    echo << "n=" << opts.cfg.n << " t=" << opts.cfg.t << " k=" << opts.cfg.k
         << " q=" << opts.cfg.q << " beta=" << opts.cfg.beta
         << " sigma_f2=" << opts.cfg.sigma_f2 << " sigma2=" << opts.cfg.sigma2
         << " sigma_eps2=" << opts.cfg.sigma_eps2 << " seed=" << opts.cfg.seed
         << " tau_max=" << opts.cfg.tau_max;
    comments.push_back("factor_order simulate " + echo.str());
    comments.push_back("rows = series, columns = time (" + std::to_string(panel.n) + " x " +
                       std::to_string(panel.N) + ")");
  }
  if (opts.out_path.empty()) {
    fo::write_panel_csv(std::cout, panel.data, comments);
  } else {
    std::ofstream out(opts.out_path);
    if (!out) throw fo::CsvParseError(0, 0, "cannot open output file " + opts.out_path);
    fo::write_panel_csv(out, panel.data, comments);
  }
  return 0;
}

struct EstimateOpts {
  std::string input;
  int tau_max = 5;
  std::optional<double> sigma2;
  int report_eigs = 13;
  bool header = false;
};

int run_estimate(const EstimateOpts& opts) {
  std::ifstream in(opts.input);
  if (!in) throw fo::CsvParseError(0, 0, "cannot open input file " + opts.input);
  const fo::Panel panel = fo::read_panel_csv(in, opts.header);
  const fo::OrderEstimate est = fo::estimate_orders(panel, opts.tau_max, opts.sigma2);
  std::cout << fo::report_json(est, opts.report_eigs).dump(2) << '\n';
  return 0;
}

struct RmtOpts {
  double c = 0.9;
  double sigma2 = 1.0;
  std::string what;
  int grid = 201;
  std::optional<double> at;
};

int run_rmt(const RmtOpts& opts) {
  const fo::RmtContext ctx(opts.c, opts.sigma2);
  std::cout.precision(10);
  if (opts.what == "support") {
    std::cout << fo::lsd_support(ctx) << '\n';
    return 0;
  }
  if (opts.what == "edges") {
    const auto [left, right] = fo::mp_edges(ctx);
    std::cout << left << '\t' << right << '\n';
    return 0;
  }
  const double a = fo::lsd_support(ctx);
  auto emit = [&](double x, double y) { std::cout << x << '\t' << y << '\n'; };
  if (opts.what == "density" || opts.what == "cdf") {
    auto eval = [&](double x) {
      return opts.what == "density" ? fo::lsd_density(x, ctx) : fo::lsd_cdf(x, ctx);
    };
    if (opts.at) {
      emit(*opts.at, eval(*opts.at));
      return 0;
    }
    for (int i = 0; i < opts.grid; ++i) {
      const double x = -a + 2.0 * a * i / (opts.grid - 1);
      emit(x, eval(x));
    }
    return 0;
  }
  if (opts.what == "stieltjes") {
    if (opts.at) {
      emit(*opts.at, fo::lsd_stieltjes(*opts.at, ctx));
      return 0;
    }
    // default grid sweeps the right exterior of the support
    for (int i = 0; i < opts.grid; ++i) {
      const double ell = a * (1.01 + 3.99 * i / (opts.grid - 1));
      emit(ell, fo::lsd_stieltjes(ell, ctx));
    }
    return 0;
  }
  throw fo::Error("unknown --what value: " + opts.what);
}

struct PredictOpts {
  int k = 1;
  int q = 0;
  double c = 0.9;
  double sigma2 = 1.0;
  int tau_max = 5;
  std::string lambda = "inf";
};

int run_predict(const PredictOpts& opts) {
  const fo::RmtContext ctx(opts.c, opts.sigma2);
  double lambda = fo::k_infinite_factor;
  if (opts.lambda != "inf") lambda = std::stod(opts.lambda);
  const std::vector<double> lambdas(static_cast<std::size_t>(opts.k) * (opts.q + 1), lambda);
  const auto preds = fo::predict_outlier_counts(opts.k, opts.q, opts.tau_max, ctx, lambdas);
  std::cout << fo::prediction_json(preds).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic factor model order estimation from lagged spectra"};
  app.set_version_flag("--version", k_version);
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a factor-model panel as CSV");
  simulate->add_option("--n", sim.cfg.n, "series count")->capture_default_str();
  simulate->add_option("--t", sim.cfg.t, "time points (panel gets t + tau-max columns)")->capture_default_str();
  simulate->add_option("--k", sim.cfg.k, "factor count")->capture_default_str();
  simulate->add_option("--q", sim.cfg.q, "lag order")->capture_default_str();
  simulate->add_option("--beta", sim.cfg.beta, "loading mean")->capture_default_str();
  simulate->add_option("--sigma-f2", sim.cfg.sigma_f2, "factor variance")->capture_default_str();
  simulate->add_option("--sigma2", sim.cfg.sigma2, "noise variance")->capture_default_str();
  simulate->add_option("--sigma-eps2", sim.cfg.sigma_eps2, "loading noise variance")->capture_default_str();
  simulate->add_option("--seed", sim.cfg.seed, "random seed")->capture_default_str();
  simulate->add_option("--tau-max", sim.cfg.tau_max, "highest lag the panel will support")->capture_default_str();
  simulate->add_option("--out", sim.out_path, "output file (default stdout)");

  EstimateOpts estimate_opts;
  auto* estimate = app.add_subcommand("estimate", "Estimate (k, q) from a CSV panel");
  estimate->add_option("--input", estimate_opts.input, "CSV panel, rows = series")->required();
  estimate->add_option("--tau-max", estimate_opts.tau_max, "highest lag to scan")->capture_default_str();
  double sigma2_flag = 0.0;
  auto* sigma2_opt = estimate->add_option("--sigma2", sigma2_flag, "known noise variance (default: estimated)");
  estimate->add_option("--report-eigs", estimate_opts.report_eigs, "eigenvalues reported per lag")->capture_default_str();
  estimate->add_flag("--header", estimate_opts.header, "skip one header line");

  RmtOpts rmt;
  auto* rmt_cmd = app.add_subcommand("rmt", "Tabulate the limiting spectral laws");
  rmt_cmd->add_option("--c", rmt.c, "aspect ratio n/T")->required();
  rmt_cmd->add_option("--sigma2", rmt.sigma2, "noise variance")->capture_default_str();
  rmt_cmd->add_option("--what", rmt.what, "density|cdf|stieltjes|support|edges")->required();
  rmt_cmd->add_option("--grid", rmt.grid, "points in the table")->capture_default_str();
  double at_flag = 0.0;
  auto* at_opt = rmt_cmd->add_option("--at", at_flag, "evaluate at a single point instead of a grid");

  PredictOpts pred;
  auto* predict = app.add_subcommand("predict", "Predicted per-lag outlier counts");
  predict->add_option("--k", pred.k, "factor count")->required();
  predict->add_option("--q", pred.q, "lag order")->required();
  predict->add_option("--c", pred.c, "aspect ratio n/T")->required();
  predict->add_option("--sigma2", pred.sigma2, "noise variance")->capture_default_str();
  predict->add_option("--tau-max", pred.tau_max, "highest lag to predict")->capture_default_str();
  predict->add_option("--lambda", pred.lambda, "factor-gram eigenvalue, or 'inf'")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*estimate) {
      if (*sigma2_opt) estimate_opts.sigma2 = sigma2_flag;
      return run_estimate(estimate_opts);
    }
    if (*rmt_cmd) {
      if (*at_opt) rmt.at = at_flag;
      return run_rmt(rmt);
    }
    if (*predict) return run_predict(pred);
  } catch (const fo::CsvParseError& e) {
    std::cerr << "error: csv: " << e.what() << '\n';
    return k_exit_io;
  } catch (const fo::AspectRatioOneError& e) {
    std::cerr << "error: aspect-ratio-one: " << e.what() << '\n';
    return k_exit_aspect_ratio;
  } catch (const fo::InsideSupportError& e) {
    std::cerr << "error: inside-support: " << e.what() << '\n';
    return k_exit_inside_support;
  } catch (const fo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return k_exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return k_exit_error;
  }
  return 0;
}
