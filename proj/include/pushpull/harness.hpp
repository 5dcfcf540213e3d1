#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pushpull/config.hpp"
#include "pushpull/metrics.hpp"
#include "pushpull/mixing.hpp"

namespace pushpull {

// Resolved communication structure for a run. In Auto mode the tracking
// methods (smtpp, stpp) communicate over a spanning-tree pair extracted from
// the topology (G_R = breadth-first tree at the root, G_C = its reverse),
// while the push-sum baselines keep the full graph for both directions.
struct GraphSetup {
  DirectedGraph topology;
  DirectedGraph g_r;
  DirectedGraph g_c;
  MixingPair mixing;
  bool used_trees = false;
  int root = 0;
};

GraphSetup build_graphs(const RunConfig& cfg);

struct GraphDiagnostics {
  int n = 0;
  bool topology_strongly_connected = false;
  std::vector<int> common_roots;  // spanning roots shared by G_R and G_C^T
  double row_sum_residual = 0.0;
  double col_sum_residual = 0.0;
  double min_diag_r = 0.0;
  double min_diag_c = 0.0;
  bool support_exact_r = false;
  bool support_exact_c = false;
  PerronData perron;
  bool assumption_ok = false;
  std::string failure_reason;
};

GraphDiagnostics check_graph(const RunConfig& cfg);
void print_diagnostics(const GraphDiagnostics& diag, const GraphSetup& setup, std::ostream& out);

Oracle build_oracle(const RunConfig& cfg);

struct ExperimentResult {
  std::string algo;
  std::vector<MetricsTrace> traces;
  AggregateTrace agg;
  PerronData diagnostics;
  std::string config_echo;
  double wall_seconds = 0.0;
  std::vector<std::string> files_written;
};

// Runs every seed (up to cfg.workers jobs in flight), optionally writing
// per-seed CSVs, the aggregate CSV, and summary.json under cfg.out_dir.
// Partial outputs are removed if any job fails.
ExperimentResult run_experiment(const RunConfig& cfg, bool write_files);

struct SweepCell {
  Algo algo;
  double lambda = 0.0;
  double eta = 0.0;
  double tail_mean_grad_norm_sq = 0.0;  // mean over seeds of the tail average
  double tail_std_grad_norm_sq = 0.0;   // std over seeds
  ExperimentResult result;
};

// Cartesian product over sweep_algos x sweep_lambda x sweep_eta (or the
// coupled eta = c * lambda^2 when sweep_coupling_c > 0), shared seeds.
std::vector<SweepCell> run_sweep(const RunConfig& cfg, bool write_files);

std::string sweep_table_csv(const std::vector<SweepCell>& cells);

// Separable-plus-noise binary classification sample set in LIBSVM format,
// deterministic per seed.
std::string synth_libsvm(int samples, int dim, std::uint64_t seed, double noise);

// Mean of grad_norm_sq over the trailing `window` fraction of records.
double tail_average_grad_norm(const MetricsTrace& trace, double window);

}  // namespace pushpull
