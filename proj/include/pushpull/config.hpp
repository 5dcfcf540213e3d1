#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushpull/algo.hpp"
#include "pushpull/graph.hpp"
#include "pushpull/schedule.hpp"

namespace pushpull {

enum class GraphMode { Auto, Trees, Full };
enum class OracleKind { Logistic, Quadratic };

// Flat key = value experiment configuration. Unknown keys are errors; '#'
// starts a comment. Defaults follow the benchmark setup: lambda 0.1, eta 0.1,
// batch 1, record_every 1, seeds 1..5, n 20.
struct RunConfig {
  TopologySpec topology;
  std::string graph_file;       // custom topology edge list
  std::string pull_graph_file;  // explicit G_R override
  std::string push_graph_file;  // explicit G_C override
  GraphMode graph_mode = GraphMode::Auto;

  Algo algo = Algo::Smtpp;
  double lambda = 0.1;
  double eta = 0.1;
  StepSchedule::Kind schedule_kind = StepSchedule::Kind::Constant;
  double decay_factor = 0.1;
  int decay_period = 300;
  double coupling_c = 1.0;
  int batch = 1;
  long horizon = 0;
  TrackerInit tracker_init = TrackerInit::Zero;
  CsgdmMode csgdm_mode = CsgdmMode::Ema;

  OracleKind oracle_kind = OracleKind::Logistic;
  std::string data_path;  // logistic
  int dim = 123;
  double alpha = 0.01;
  std::uint64_t partition_seed = 1;
  double sigma = 1.0;  // quadratic
  int quad_dim = 10;
  double quad_hetero = 1.0;
  std::uint64_t quad_seed = 7;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int record_every = 1;
  std::string out_dir = "results";
  int workers = 1;
  double tail_window = 0.2;
  bool serial = false;

  std::vector<double> sweep_lambda;
  std::vector<double> sweep_eta;
  double sweep_coupling_c = 0.0;  // > 0: eta grid replaced by c * lambda^2
  std::vector<Algo> sweep_algos;

  StepSchedule make_schedule(int n) const;
};

RunConfig load_config(std::istream& in);
RunConfig load_config_file(const std::string& path);

// Canonical key = value form; load(echo(cfg)) == cfg.
std::string config_echo(const RunConfig& cfg);

std::string to_string(GraphMode mode);
std::string to_string(OracleKind kind);

}  // namespace pushpull
