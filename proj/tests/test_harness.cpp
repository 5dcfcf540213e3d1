#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pushpull/cli.hpp"
#include "pushpull/config.hpp"
#include "pushpull/errors.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/harness.hpp"
#include "pushpull/trace_io.hpp"

using namespace pushpull;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pushpull_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return load_config(in);
}

RunConfig quadratic_config(const TempDir& dir, const std::string& extra = "") {
  return parse("topology = multi_sub_ring\nn = 6\nalgo = smtpp\noracle = quadratic\n"
               "quad_dim = 4\nsigma = 0.5\nhorizon = 12\nseeds = 1,2,3\nout = " +
               dir.file("res") + "\n" + extra);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("graph resolution honors the communication mode") {
  TempDir dir;
  const auto tree_cfg = quadratic_config(dir);
  const auto setup = build_graphs(tree_cfg);
  CHECK(setup.used_trees);
  CHECK(setup.g_r.edges.size() == 5);  // n - 1 tree edges
  CHECK(setup.g_c.edges == reverse(setup.g_r).edges);

  const auto full_cfg = quadratic_config(dir, "graph_mode = full\n");
  const auto full = build_graphs(full_cfg);
  CHECK_FALSE(full.used_trees);
  CHECK(full.g_r.edges == full.topology.edges);

  auto sgp_cfg = quadratic_config(dir);
  sgp_cfg.algo = Algo::Sgp;
  CHECK_FALSE(build_graphs(sgp_cfg).used_trees);
}

TEST_CASE("graph diagnostics pass on valid pairs and name the failure otherwise") {
  TempDir dir;
  const auto diag = check_graph(quadratic_config(dir));
  CHECK(diag.assumption_ok);
  CHECK(diag.topology_strongly_connected);
  CHECK(diag.support_exact_r);
  CHECK(diag.support_exact_c);
  CHECK(diag.row_sum_residual <= 1e-12);
  CHECK(diag.col_sum_residual <= 1e-12);
  CHECK(diag.perron.c_pi > 0.0);
}

TEST_CASE("disconnected custom graphs fail the assumption check") {
  TempDir dir;
  {
    std::ofstream g(dir.file("path.edges"));
    g << "n 3\n0 1\n1 2\n";  // no return edges
  }
  const auto cfg = parse("topology = custom\ngraph_file = " + dir.file("path.edges") +
                         "\nalgo = smtpp\noracle = quadratic\nhorizon = 1\ngraph_mode = full\n");
  const auto diag = check_graph(cfg);
  CHECK_FALSE(diag.assumption_ok);
  CHECK(diag.failure_reason.find("no common spanning-tree root") != std::string::npos);
  CHECK_THROWS_AS(run_experiment(cfg, false), AssumptionError);
}

TEST_CASE("denser graphs mix faster") {
  TempDir dir;
  const auto ring = check_graph(parse(
      "topology = ring\nn = 20\nalgo = sgp\noracle = quadratic\nhorizon = 1\n"));
  const auto expo = check_graph(parse(
      "topology = exponential\nn = 20\nalgo = sgp\noracle = quadratic\nhorizon = 1\n"));
  CHECK(expo.perron.rho_c < ring.perron.rho_c);
}

TEST_CASE("single node passes trivially") {
  const auto diag = check_graph(parse(
      "topology = ring\nn = 1\nalgo = smtpp\noracle = quadratic\nhorizon = 1\n"));
  CHECK(diag.assumption_ok);
  CHECK(diag.perron.rho_r == 0.0);
  CHECK(diag.perron.c_pi == 1.0);
}

TEST_CASE("experiments write one csv per seed plus aggregate and summary") {
  TempDir dir;
  const auto cfg = quadratic_config(dir);
  const auto result = run_experiment(cfg, true);
  CHECK(result.traces.size() == 3);
  CHECK(fs::exists(dir.file("res/smtpp_seed1.csv")));
  CHECK(fs::exists(dir.file("res/smtpp_seed2.csv")));
  CHECK(fs::exists(dir.file("res/smtpp_seed3.csv")));
  CHECK(fs::exists(dir.file("res/smtpp_aggregate.csv")));
  CHECK(fs::exists(dir.file("res/summary.json")));

  // traces parse back to the in-memory values
  const auto parsed = trace_from_csv(read_file(dir.file("res/smtpp_seed1.csv")));
  REQUIRE(parsed.records.size() == result.traces[0].records.size());
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    CHECK(parsed.records[i].f_bar == result.traces[0].records[i].f_bar);
    CHECK(parsed.records[i].grad_norm_sq == result.traces[0].records[i].grad_norm_sq);
    CHECK(parsed.records[i].cons_residual == result.traces[0].records[i].cons_residual);
  }

  // reruns are byte identical
  const auto before = read_file(dir.file("res/smtpp_seed2.csv"));
  run_experiment(cfg, true);
  CHECK(read_file(dir.file("res/smtpp_seed2.csv")) == before);

  // horizon 0 writes a single record
  auto zero_cfg = quadratic_config(dir);
  zero_cfg.horizon = 0;
  run_experiment(zero_cfg, true);
  const auto text = read_file(dir.file("res/smtpp_seed1.csv"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + one row
}

TEST_CASE("workers do not change the output") {
  TempDir dir;
  auto cfg = quadratic_config(dir);
  const auto serial_result = run_experiment(cfg, false);
  cfg.workers = 3;
  const auto parallel_result = run_experiment(cfg, false);
  for (std::size_t s = 0; s < serial_result.traces.size(); ++s)
    CHECK(trace_to_csv(serial_result.traces[s]) == trace_to_csv(parallel_result.traces[s]));
}

TEST_CASE("synthetic data round trips and balances labels") {
  const auto text = synth_libsvm(100, 10, 4, 0.3);
  CHECK(text == synth_libsvm(100, 10, 4, 0.3));
  std::istringstream in(text);
  const auto ds = parse_libsvm(in, 10);
  REQUIRE(ds.samples.size() == 100);
  int pos = 0;
  for (const auto& s : ds.samples) pos += s.label > 0;
  CHECK(pos > 10);
  CHECK(pos < 90);
  CHECK(synth_libsvm(100, 10, 5, 0.3) != text);
}

TEST_CASE("tail averaging uses the trailing window") {
  MetricsTrace trace;
  trace.records.resize(10);
  for (int i = 0; i < 10; ++i) trace.records[i].grad_norm_sq = i;  // 0..9
  CHECK(tail_average_grad_norm(trace, 0.2) == doctest::Approx(8.5));  // mean of {8, 9}
  CHECK(tail_average_grad_norm(trace, 1.0) == doctest::Approx(4.5));
}

TEST_CASE("sweep: singleton grid reproduces a plain run") {
  TempDir dir;
  auto cfg = quadratic_config(dir);
  const auto cells = run_sweep(cfg, false);
  REQUIRE(cells.size() == 1);
  const auto plain = run_experiment(cfg, false);
  double tail = 0.0;
  for (const auto& t : plain.traces) tail += tail_average_grad_norm(t, cfg.tail_window);
  tail /= plain.traces.size();
  CHECK(cells[0].tail_mean_grad_norm_sq == doctest::Approx(tail).epsilon(1e-14));
}

TEST_CASE("sweep: two algorithms yield side-by-side rows") {
  TempDir dir;
  auto cfg = quadratic_config(dir, "sweep_algos = smtpp,stpp\n");
  const auto cells = run_sweep(cfg, true);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].algo == Algo::Smtpp);
  CHECK(cells[1].algo == Algo::Stpp);
  const auto table = read_file(dir.file("res/sweep_table.csv"));
  CHECK(table.find("smtpp") != std::string::npos);
  CHECK(table.find("stpp") != std::string::npos);
}

TEST_CASE("coupled sweep ties the step size to lambda squared") {
  TempDir dir;
  auto cfg = quadratic_config(dir, "sweep_lambda = 0.05,0.1\nsweep_coupling_c = 10\n");
  cfg.horizon = 5;
  const auto cells = run_sweep(cfg, false);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].eta == doctest::Approx(10 * 0.05 * 0.05).epsilon(1e-14));
  CHECK(cells[1].eta == doctest::Approx(10 * 0.1 * 0.1).epsilon(1e-14));
}

TEST_CASE("cli drives the full pipeline with documented exit codes") {
  TempDir dir;
  std::ostringstream out, err;
  CHECK(cli_main({"gen-data", "--out", dir.file("d.libsvm"), "--samples", "60", "--dim", "8",
                  "--seed", "5"},
                 out, err) == 0);
  {
    std::ofstream cfg(dir.file("cfg.txt"));
    cfg << "topology = multi_sub_ring\nn = 4\nalgo = smtpp\noracle = logistic\ndata = "
        << dir.file("d.libsvm") << "\ndim = 8\nhorizon = 5\nseeds = 1,2\nout = "
        << dir.file("out") << "\n";
  }
  CHECK(cli_main({"check-graph", "--config", dir.file("cfg.txt")}, out, err) == 0);
  CHECK(cli_main({"run", "--config", dir.file("cfg.txt")}, out, err) == 0);
  CHECK(fs::exists(dir.file("out/smtpp_seed1.csv")));
  CHECK(fs::exists(dir.file("out/smtpp_aggregate.csv")));

  // config errors exit 2
  std::ostringstream err2;
  CHECK(cli_main({"run", "--config", dir.file("missing.txt")}, out, err2) == 5);
  {
    std::ofstream bad(dir.file("bad.txt"));
    bad << "topology = ring\nalgo = smtpp\noracle = quadratic\nhorizon = 1\nlambda = 7\n";
  }
  CHECK(cli_main({"run", "--config", dir.file("bad.txt")}, out, err2) == 2);

  // assumption failures exit 3
  {
    std::ofstream g(dir.file("path.edges"));
    g << "n 3\n0 1\n1 2\n";
    std::ofstream cfg(dir.file("cfg3.txt"));
    cfg << "topology = custom\ngraph_file = " << dir.file("path.edges")
        << "\nalgo = smtpp\noracle = quadratic\nhorizon = 1\ngraph_mode = full\n";
  }
  CHECK(cli_main({"check-graph", "--config", dir.file("cfg3.txt")}, out, err2) == 3);
}

TEST_CASE("failed experiments leave no partial outputs") {
  TempDir dir;
  auto cfg = quadratic_config(dir);
  cfg.eta = 1e6;  // guarantees overflow long before the horizon
  cfg.horizon = 2000;
  CHECK_THROWS_AS(run_experiment(cfg, true), NumericError);
  CHECK_FALSE(fs::exists(dir.file("res/smtpp_seed1.csv")));
  CHECK_FALSE(fs::exists(dir.file("res/summary.json")));
}

TEST_CASE("check-graph dumps round-trippable mixing matrices") {
  TempDir dir;
  {
    std::ofstream cfg(dir.file("cfg.txt"));
    cfg << "topology = ring\nn = 5\nalgo = smtpp\noracle = quadratic\nhorizon = 1\n"
        << "graph_mode = full\nout = " << dir.file("diag") << "\n";
  }
  std::ostringstream out, err;
  REQUIRE(cli_main({"check-graph", "--config", dir.file("cfg.txt"), "--out", dir.file("diag")},
                   out, err) == 0);
  const auto r = matrix_from_csv(read_file(dir.file("diag/R.csv")));
  CHECK(r.rows() == 5);
  CHECK(r(0, 0) == 0.5);
  const auto c = matrix_from_csv(read_file(dir.file("diag/C.csv")));
  CHECK(c.rows() == 5);
  double col_sum = 0.0;
  for (int i = 0; i < 5; ++i) col_sum += c(i, 0);
  CHECK(col_sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("atomic writes create parents and replace content") {
  TempDir dir;
  const auto path = dir.file("nested/dir/file.txt");
  write_file_atomic(path, "one");
  CHECK(read_file(path) == "one");
  write_file_atomic(path, "two");
  CHECK(read_file(path) == "two");
  CHECK_FALSE(fs::exists(path + ".tmp"));
}

}  // TEST_SUITE
