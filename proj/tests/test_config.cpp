#include <sstream>

#include "doctest.h"
#include "pushpull/config.hpp"
#include "pushpull/errors.hpp"

using namespace pushpull;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return load_config(in);
}

constexpr const char* kMinimal =
    "topology = ring\nalgo = smtpp\noracle = quadratic\nhorizon = 10\n";

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal config fills documented defaults") {
  const auto cfg = parse(kMinimal);
  CHECK(cfg.topology.kind == TopologyKind::Ring);
  CHECK(cfg.topology.n == 20);
  CHECK(cfg.algo == Algo::Smtpp);
  CHECK(cfg.lambda == 0.1);
  CHECK(cfg.eta == 0.1);
  CHECK(cfg.batch == 1);
  CHECK(cfg.record_every == 1);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(cfg.horizon == 10);
  CHECK(cfg.schedule_kind == StepSchedule::Kind::Constant);
  CHECK(cfg.graph_mode == GraphMode::Auto);
  CHECK(cfg.alpha == 0.01);
  CHECK(cfg.dim == 123);
}

TEST_CASE("range and enum validation") {
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "lambda = 1.5\n"),
                       doctest::Contains("lambda"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "lambda = 0\n"),
                       doctest::Contains("lambda"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("topology = ring\nalgo = smptp\noracle = quadratic\nhorizon = 1\n"),
      doctest::Contains("smtpp"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "eta = -1\n"), doctest::Contains("eta"),
                       ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "record_every = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "graph_mode = sideways\n"), ConfigError);
}

TEST_CASE("unknown, duplicate, and missing keys carry positions") {
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "mystery = 1\n"),
                       doctest::Contains("unknown key 'mystery'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "mystery = 1\n"),
                       doctest::Contains("line 5"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("topology = ring\nalgo = smtpp\noracle = quadratic\n"),
                       doctest::Contains("horizon"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "algo = stpp\n"),
                       doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "nonsense\n"), ConfigError);
}

TEST_CASE("logistic oracle requires an existing dataset") {
  CHECK_THROWS_WITH_AS(parse("topology = ring\nalgo = smtpp\noracle = logistic\nhorizon = 1\n"),
                       doctest::Contains("data"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("topology = ring\nalgo = smtpp\noracle = logistic\nhorizon = 1\n"
                             "data = /no/such/file.libsvm\n"),
                       doctest::Contains("does not exist"), ConfigError);
}

TEST_CASE("comments and spacing are tolerated") {
  const auto cfg = parse(
      "# experiment\n"
      "topology = exponential   # dense\n"
      "\n"
      "algo=sgp\n"
      "  oracle =  quadratic\n"
      "horizon = 3\n"
      "eta = 0.2\n");
  CHECK(cfg.topology.kind == TopologyKind::Exponential);
  CHECK(cfg.algo == Algo::Sgp);
  CHECK(cfg.eta == 0.2);
}

TEST_CASE("echo round trip is a fixed point") {
  const auto cfg = parse(
      "topology = multi_sub_ring\nn = 12\nsub_rings = 3\nroot = 2\nalgo = stpp\n"
      "oracle = quadratic\nsigma = 0.5\nquad_dim = 6\nhorizon = 77\nlambda = 0.25\n"
      "eta = 0.05\nschedule = step_decay\ndecay_factor = 0.5\ndecay_period = 40\n"
      "seeds = 3,9\nrecord_every = 2\ntracker_init = gradient\nworkers = 2\n"
      "sweep_lambda = 0.05,0.1\nsweep_coupling_c = 10\n");
  const std::string echo1 = config_echo(cfg);
  const auto reloaded = parse(echo1);
  const std::string echo2 = config_echo(reloaded);
  CHECK(echo1 == echo2);
  CHECK(reloaded.topology.sub_rings == 3);
  CHECK(reloaded.lambda == 0.25);
  CHECK(reloaded.schedule_kind == StepSchedule::Kind::SteppedDecay);
  CHECK(reloaded.tracker_init == TrackerInit::Gradient);
  CHECK(reloaded.sweep_lambda == std::vector<double>{0.05, 0.1});
  CHECK(reloaded.sweep_coupling_c == 10.0);
}

TEST_CASE("sweep grids parse and validate") {
  const auto cfg = parse(std::string(kMinimal) +
                         "sweep_lambda = 0.05,0.1\nsweep_eta = 0.1,0.2\nsweep_algos = "
                         "smtpp,stpp\n");
  CHECK(cfg.sweep_lambda.size() == 2);
  CHECK(cfg.sweep_eta.size() == 2);
  CHECK(cfg.sweep_algos == std::vector<Algo>{Algo::Smtpp, Algo::Stpp});
  CHECK_THROWS_WITH_AS(parse(std::string(kMinimal) + "sweep_lambda = \n"),
                       doctest::Contains("empty list"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "sweep_lambda = 2.0\n"), ConfigError);
}

TEST_CASE("schedule construction from config") {
  auto cfg = parse(std::string(kMinimal) + "schedule = theory_coupled\ncoupling_c = 10\n");
  CHECK(cfg.make_schedule(20).eta(0) == doctest::Approx(10 * 0.1 * 0.1).epsilon(1e-14));
  cfg = parse(std::string(kMinimal) + "schedule = horizon_optimal\ncoupling_c = 2\n");
  const auto schedule = cfg.make_schedule(20);
  CHECK(schedule.eta(0) > 0.0);
}

}  // TEST_SUITE
