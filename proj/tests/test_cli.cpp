#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>

#include "factor_order/csv_io.hpp"
#include "factor_order/order_estimator.hpp"
#include "factor_order/simulator.hpp"

using namespace factor_order;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path();
  const fs::path out = dir / ("fo_cli_out_" + std::to_string(counter) + ".txt");
  const fs::path err = dir / ("fo_cli_err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(FACTOR_ORDER_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (status == -1) ? -1 : WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p, std::ios::binary);
  f << content;
  return p;
}

}  // namespace

TEST_CASE("csv round trip is exact") {
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(-30.0, 30.0);
  Matrix data(5, 9);
  for (Index i = 0; i < data.size(); ++i) data(i) = normal(gen) * std::exp2(scale(gen));
  data(0, 0) = 0.0;
  data(1, 2) = -0.0;
  data(2, 3) = 1e-308;
  data(3, 1) = -12345678.90123456789;

  std::ostringstream os;
  write_panel_csv(os, data, {"config echo line"});
  std::istringstream is(os.str());
  const Panel back = read_panel_csv(is);
  REQUIRE(back.n == 5);
  REQUIRE(back.N == 9);
  CHECK(back.data == data);
}

TEST_CASE("csv reader diagnostics") {
  {
    std::istringstream is("1,2\n3,abc\n");
    try {
      read_panel_csv(is);
      FAIL("expected CsvParseError");
    } catch (const CsvParseError& e) {
      CHECK(e.row == 2);
      CHECK(e.col == 2);
      CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
    }
  }
  {
    std::istringstream is("# comment\n\n1,2\n3,4,5\n");
    CHECK_THROWS_AS(read_panel_csv(is), RaggedRowsError);
  }
  {
    std::istringstream is("series_a,series_b\n1,2\n");
    const Panel p = read_panel_csv(is, /*skip_header=*/true);
    CHECK(p.n == 1);
    CHECK(p.N == 2);
  }
  {
    std::istringstream is("1,2\n3,inf\n");
    CHECK_THROWS_AS(read_panel_csv(is), NonFiniteError);
  }
}

TEST_CASE("simulate writes a reproducible csv of the advertised shape") {
  const auto r1 = run_cli("simulate --n 12 --t 20 --k 1 --q 1 --seed 7");
  REQUIRE(r1.exit_code == 0);
  const auto r2 = run_cli("simulate --n 12 --t 20 --k 1 --q 1 --seed 7");
  CHECK(r1.out == r2.out);  // byte-identical

  std::istringstream is(r1.out);
  const Panel p = read_panel_csv(is);
  CHECK(p.n == 12);
  CHECK(p.N == 25);  // t + default tau_max = 5

  const auto r3 = run_cli("simulate --n 12 --t 20 --k 1 --q 1 --seed 8");
  CHECK(r3.out != r1.out);
}

TEST_CASE("simulate piped into estimate matches the library result") {
  ModelConfig cfg;
  cfg.n = 100;
  cfg.t = 120;
  cfg.k = 1;
  cfg.q = 1;
  cfg.tau_max = 3;
  cfg.seed = 42;

  const fs::path csv = fs::temp_directory_path() / "fo_pipe.csv";
  const auto sim = run_cli("simulate --n 100 --t 120 --k 1 --q 1 --seed 42 --tau-max 3 --out " +
                           csv.string());
  REQUIRE(sim.exit_code == 0);

  const auto est = run_cli("estimate --input " + csv.string() + " --tau-max 3 --sigma2 1");
  REQUIRE(est.exit_code == 0);
  const json j = json::parse(est.out);

  const OrderEstimate lib = estimate_orders(generate_panel(cfg), 3, 1.0);
  REQUIRE(lib.k_hat.has_value());
  CHECK(j["k_hat"].get<int>() == *lib.k_hat);
  CHECK(j["q_hat"].get<int>() == *lib.q_hat);
  CHECK(j["sigma2_source"] == "given");
  REQUIRE(j["counts"].size() == 4);
  for (int tau = 0; tau <= 3; ++tau) {
    CHECK(j["counts"][static_cast<std::size_t>(tau)]["tau"].get<int>() == tau);
    CHECK(j["counts"][static_cast<std::size_t>(tau)]["count"].get<int>() ==
          lib.counts[static_cast<std::size_t>(tau)].second);
    CHECK(j["counts"][static_cast<std::size_t>(tau)]["top_eigenvalues"].size() == 13);
  }
  CHECK(j.contains("version"));
  CHECK(j["warnings"].is_array());

  // identical invocation, byte-identical report
  const auto est2 = run_cli("estimate --input " + csv.string() + " --tau-max 3 --sigma2 1");
  CHECK(est2.out == est.out);

  const auto est3 =
      run_cli("estimate --input " + csv.string() + " --tau-max 3 --sigma2 1 --report-eigs 5");
  REQUIRE(est3.exit_code == 0);
  const json j3 = json::parse(est3.out);
  CHECK(j3["counts"][0]["top_eigenvalues"].size() == 5);

  fs::remove(csv);
}

TEST_CASE("estimate exits zero on warnings and reports them") {
  std::ostringstream os;
  std::mt19937_64 gen(4100);
  std::normal_distribution<double> normal;
  Matrix noise(60, 80);
  for (Index i = 0; i < noise.size(); ++i) noise(i) = normal(gen);
  write_panel_csv(os, noise);
  const fs::path csv = write_temp("fo_noise.csv", os.str());
  const auto r = run_cli("estimate --input " + csv.string() + " --tau-max 2 --sigma2 1");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["k_hat"].get<int>() == 0);
  CHECK(j["q_hat"].get<int>() == 0);
  REQUIRE(!j["warnings"].empty());
  CHECK(std::string(j["warnings"][0]).find("NoFactors") == 0);
  fs::remove(csv);
}

TEST_CASE("estimate exit codes") {
  const fs::path bad = write_temp("fo_bad.csv", "1,2,3\n4,abc,6\n");
  const auto r = run_cli("estimate --input " + bad.string() + " --tau-max 1");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("row 2, column 2") != std::string::npos);
  fs::remove(bad);

  const auto missing = run_cli("estimate --input /nonexistent/file.csv --tau-max 1");
  CHECK(missing.exit_code == 2);

  // c = 1 (square panel after the lag reservation) needs --sigma2
  std::ostringstream os;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  Matrix sq(30, 32);
  for (Index i = 0; i < sq.size(); ++i) sq(i) = normal(gen);
  write_panel_csv(os, sq);
  const fs::path sq_csv = write_temp("fo_sq.csv", os.str());
  const auto r3 = run_cli("estimate --input " + sq_csv.string() + " --tau-max 2");
  CHECK(r3.exit_code == 3);
  const auto r3b = run_cli("estimate --input " + sq_csv.string() + " --tau-max 2 --sigma2 1");
  CHECK(r3b.exit_code == 0);
  fs::remove(sq_csv);

  const auto usage = run_cli("estimate");
  CHECK(usage.exit_code != 0);
}

TEST_CASE("rmt subcommand") {
  const auto support = run_cli("rmt --c 0.9 --what support");
  REQUIRE(support.exit_code == 0);
  CHECK_THAT(std::stod(support.out), Catch::Matchers::WithinAbs(1.8573, 1e-3));

  const auto edges = run_cli("rmt --c 0.9 --what edges");
  REQUIRE(edges.exit_code == 0);
  std::istringstream es(edges.out);
  double left, right;
  es >> left >> right;
  CHECK_THAT(left, Catch::Matchers::WithinAbs(0.0026, 1e-4));
  CHECK_THAT(right, Catch::Matchers::WithinAbs(3.7974, 1e-4));

  const auto dens = run_cli("rmt --c 1 --what density --at 1");
  REQUIRE(dens.exit_code == 0);
  std::istringstream ds(dens.out);
  double x, phi;
  ds >> x >> phi;
  CHECK(x == 1.0);
  CHECK_THAT(phi, Catch::Matchers::WithinAbs(0.159155, 1e-5));

  const auto grid = run_cli("rmt --c 0.5 --what density --grid 11");
  REQUIRE(grid.exit_code == 0);
  int lines = 0;
  for (char ch : grid.out)
    if (ch == '\n') ++lines;
  CHECK(lines == 11);

  const auto cdf = run_cli("rmt --c 2 --what cdf --at 0.0");
  REQUIRE(cdf.exit_code == 0);
  std::istringstream cs(cdf.out);
  double x2, f2;
  cs >> x2 >> f2;
  CHECK_THAT(f2, Catch::Matchers::WithinAbs(0.75, 1e-6));

  const auto inside = run_cli("rmt --c 0.9 --what stieltjes --at 1.0");
  CHECK(inside.exit_code == 4);

  const auto unknown = run_cli("rmt --c 0.9 --what nonsense");
  CHECK(unknown.exit_code == 1);
}

TEST_CASE("predict subcommand") {
  const auto r = run_cli("predict --k 2 --q 2 --c 0.9");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.size() == 6);
  const std::vector<int> expected{6, 8, 8, 12, 12, 12};
  for (std::size_t tau = 0; tau < 6; ++tau) {
    CHECK(j[tau]["tau"].get<int>() == static_cast<int>(tau));
    CHECK(j[tau]["count"].get<int>() == expected[tau]);
  }
  CHECK(j[1]["cases"].size() == 6);
  CHECK(j[1]["cases"][0]["lambda"] == "inf");

  const auto single = run_cli("predict --k 1 --q 0 --c 0.5 --tau-max 2");
  REQUIRE(single.exit_code == 0);
  const json js = json::parse(single.out);
  CHECK(js[0]["count"].get<int>() == 1);
  CHECK(js[1]["count"].get<int>() == 2);
  CHECK(js[2]["count"].get<int>() == 2);

  const auto weak = run_cli("predict --k 1 --q 0 --c 0.81 --lambda 0.5 --tau-max 1");
  REQUIRE(weak.exit_code == 0);
  const json jw = json::parse(weak.out);
  CHECK(jw[0]["count"].get<int>() == 0);
}

TEST_CASE("version flag") {
  const auto r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(!r.out.empty());
}
