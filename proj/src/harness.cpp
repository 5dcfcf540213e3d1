#include "pushpull/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <ostream>
#include <sstream>

#include "pushpull/errors.hpp"
#include "pushpull/trace_io.hpp"

namespace pushpull {

namespace {

bool wants_trees(const RunConfig& cfg) {
  if (cfg.graph_mode == GraphMode::Trees) return true;
  if (cfg.graph_mode == GraphMode::Full) return false;
  return cfg.algo == Algo::Smtpp || cfg.algo == Algo::Stpp;
}

}  // namespace

GraphSetup build_graphs(const RunConfig& cfg) {
  GraphSetup setup;
  setup.topology = build_topology(cfg.topology);
  setup.root = cfg.topology.root;
  if (!cfg.pull_graph_file.empty() || !cfg.push_graph_file.empty()) {
    if (cfg.pull_graph_file.empty() || cfg.push_graph_file.empty())
      throw ConfigError("pull_graph_file and push_graph_file must be given together");
    setup.g_r = parse_edge_list_file(cfg.pull_graph_file);
    setup.g_c = parse_edge_list_file(cfg.push_graph_file);
    if (setup.g_r.n != setup.topology.n || setup.g_c.n != setup.topology.n)
      throw ConfigError("pull/push graph node counts disagree with the topology");
  } else if (wants_trees(cfg) && setup.topology.n > 1) {
    const DirectedGraph tree = extract_spanning_tree(setup.topology, setup.root);
    setup.g_r = tree;
    setup.g_c = reverse(tree);
    setup.used_trees = true;
  } else {
    setup.g_r = setup.topology;
    setup.g_c = setup.topology;
  }
  setup.mixing = build_mixing_pair(setup.g_r, setup.g_c);
  return setup;
}

namespace {

double stochasticity_residual(const Matrix& w, bool rows) {
  double worst = 0.0;
  const int n = w.rows();
  for (int a = 0; a < n; ++a) {
    double sum = 0.0;
    for (int b = 0; b < n; ++b) sum += rows ? w(a, b) : w(b, a);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double min_diagonal(const Matrix& w) {
  double worst = w.rows() > 0 ? w(0, 0) : 0.0;
  for (int i = 1; i < w.rows(); ++i) worst = std::min(worst, w(i, i));
  return worst;
}

// Off-diagonal entry (i, j) nonzero exactly when edge (j -> i) exists.
bool support_matches(const Matrix& w, const DirectedGraph& g) {
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      if (i == j) continue;
      const bool present = w(i, j) > 0.0;
      if (present != g.has_edge(j, i)) return false;
    }
  }
  return true;
}

}  // namespace

GraphDiagnostics check_graph(const RunConfig& cfg) {
  const GraphSetup setup = build_graphs(cfg);
  GraphDiagnostics d;
  d.n = setup.topology.n;
  d.topology_strongly_connected = is_strongly_connected(setup.topology);
  d.row_sum_residual = stochasticity_residual(setup.mixing.r.w, true);
  d.col_sum_residual = stochasticity_residual(setup.mixing.c.w, false);
  d.min_diag_r = min_diagonal(setup.mixing.r.w);
  d.min_diag_c = min_diagonal(setup.mixing.c.w);
  d.support_exact_r = support_matches(setup.mixing.r.w, setup.g_r);
  d.support_exact_c = support_matches(setup.mixing.c.w, setup.g_c);
  d.perron = setup.mixing.perron;

  const auto roots_r = spanning_roots(setup.g_r);
  const auto roots_ct = spanning_roots(reverse(setup.g_c));
  std::set_intersection(roots_r.begin(), roots_r.end(), roots_ct.begin(), roots_ct.end(),
                        std::back_inserter(d.common_roots));

  d.assumption_ok = true;
  if (d.common_roots.empty()) {
    d.assumption_ok = false;
    d.failure_reason = "no common spanning-tree root between the pull and push graphs";
  } else if (d.min_diag_r <= 0.0 || d.min_diag_c <= 0.0) {
    d.assumption_ok = false;
    d.failure_reason = "mixing matrix with non-positive diagonal";
  }
  return d;
}

void print_diagnostics(const GraphDiagnostics& d, const GraphSetup& setup, std::ostream& out) {
  out << "nodes:                      " << d.n << "\n";
  out << "pull graph edges:           " << setup.g_r.edges.size()
      << (setup.used_trees ? "  (spanning tree at root " + std::to_string(setup.root) + ")" : "")
      << "\n";
  out << "push graph edges:           " << setup.g_c.edges.size()
      << (setup.used_trees ? "  (reversed spanning tree)" : "") << "\n";
  out << "topology strongly connected: " << (d.topology_strongly_connected ? "yes" : "no")
      << "\n";
  out << "common spanning-tree roots: " << d.common_roots.size();
  if (!d.common_roots.empty()) out << "  (first: " << d.common_roots.front() << ")";
  out << "\n";
  out << "row-sum residual (R):       " << d.row_sum_residual << "\n";
  out << "col-sum residual (C):       " << d.col_sum_residual << "\n";
  out << "min diagonal R / C:         " << d.min_diag_r << " / " << d.min_diag_c << "\n";
  out << "support matches graph:      R " << (d.support_exact_r ? "yes" : "no") << ", C "
      << (d.support_exact_c ? "yes" : "no") << "\n";
  out << "perron residual R / C:      " << d.perron.residual_r << " / " << d.perron.residual_c
      << "\n";
  out << "rho_R (SLEM):               " << d.perron.rho_r
      << (d.perron.rho_r_converged ? "" : "  [low confidence]") << "\n";
  out << "rho_C (SLEM):               " << d.perron.rho_c
      << (d.perron.rho_c_converged ? "" : "  [low confidence]") << "\n";
  out << "c_pi:                       " << d.perron.c_pi << "\n";
  out << "assumption check:           " << (d.assumption_ok ? "PASS" : "FAIL") << "\n";
  if (!d.assumption_ok) out << "reason:                     " << d.failure_reason << "\n";
}

Oracle build_oracle(const RunConfig& cfg) {
  const int n = cfg.topology.n;
  if (cfg.oracle_kind == OracleKind::Quadratic)
    return Oracle::quadratic_random(n, cfg.quad_dim, cfg.sigma, cfg.quad_hetero, cfg.quad_seed);
  Dataset ds = parse_libsvm_file(cfg.data_path, cfg.dim);
  Partition part = partition_even(static_cast<int>(ds.samples.size()), n, cfg.partition_seed);
  return Oracle::logistic(std::move(ds), std::move(part), cfg.alpha);
}

namespace {

RunSpec make_run_spec(const RunConfig& cfg, const GraphSetup& setup, const Oracle& oracle,
                      const std::string& digest_str) {
  RunSpec spec;
  spec.algo = cfg.algo;
  spec.r = &setup.mixing.r.w;
  spec.c = &setup.mixing.c.w;
  spec.oracle = &oracle;
  spec.schedule = cfg.make_schedule(cfg.topology.n);
  spec.lambda = cfg.lambda;
  if (cfg.schedule_kind == StepSchedule::Kind::HorizonOptimal) {
    double lambda_out = cfg.lambda;
    StepSchedule::horizon_optimal(cfg.coupling_c, cfg.topology.n, cfg.horizon, lambda_out);
    spec.lambda = lambda_out;
  }
  spec.batch = cfg.batch;
  spec.horizon = cfg.horizon;
  spec.record_every = cfg.record_every;
  spec.tracker_init = cfg.tracker_init;
  spec.csgdm_mode = cfg.csgdm_mode;
  spec.exec = cfg.serial ? Exec::Seq : Exec::Par;
  spec.config_digest = digest_str;

  switch (cfg.algo) {
    case Algo::Smtpp:
    case Algo::Stpp:
      spec.pi_r = setup.mixing.perron.pi_r;
      spec.pi_c = setup.mixing.perron.pi_c;
      break;
    case Algo::PushDiging:
      spec.pi_c = setup.mixing.perron.pi_c;  // consensus weights stay uniform
      break;
    case Algo::Sgp:
    case Algo::Csgdm:
      break;  // uniform weights
  }
  return spec;
}

void verify_assumption(const RunConfig& cfg) {
  if (cfg.algo == Algo::Csgdm) return;
  const GraphDiagnostics diag = check_graph(cfg);
  if (!diag.assumption_ok)
    throw AssumptionError("graph assumption check failed: " + diag.failure_reason);
}

template <typename Job>
std::vector<MetricsTrace> run_jobs(const std::vector<std::uint64_t>& seeds, int workers,
                                   Job&& job) {
  std::vector<MetricsTrace> traces(seeds.size());
  if (workers <= 1 || seeds.size() <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) traces[i] = job(seeds[i]);
    return traces;
  }
  std::size_t next = 0;
  while (next < seeds.size()) {
    const std::size_t batch = std::min<std::size_t>(workers, seeds.size() - next);
    std::vector<std::future<MetricsTrace>> futures;
    futures.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b)
      futures.push_back(
          std::async(std::launch::async, [&job, seed = seeds[next + b]] { return job(seed); }));
    for (std::size_t b = 0; b < batch; ++b) traces[next + b] = futures[b].get();
    next += batch;
  }
  return traces;
}

std::string summary_json(const RunConfig& cfg, const ExperimentResult& result);

ExperimentResult run_one(const RunConfig& cfg, const GraphSetup& setup, const Oracle& oracle,
                         bool write_files) {
  const auto start = std::chrono::steady_clock::now();
  const std::string echo = config_echo(cfg);
  const std::string digest_str = digest(echo);
  const RunSpec spec = make_run_spec(cfg, setup, oracle, digest_str);

  ExperimentResult result;
  result.algo = to_string(cfg.algo);
  result.config_echo = echo;
  result.diagnostics = setup.mixing.perron;
  result.traces =
      run_jobs(cfg.seeds, cfg.workers, [&](std::uint64_t seed) { return run(spec, seed); });
  result.agg = aggregate(result.traces);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (write_files) {
    namespace fs = std::filesystem;
    try {
      for (const auto& trace : result.traces) {
        const std::string path = (fs::path(cfg.out_dir) /
                                  (result.algo + "_seed" + std::to_string(trace.seed) + ".csv"))
                                     .string();
        write_file_atomic(path, trace_to_csv(trace));
        result.files_written.push_back(path);
      }
      const std::string agg_path =
          (fs::path(cfg.out_dir) / (result.algo + "_aggregate.csv")).string();
      write_file_atomic(agg_path, aggregate_to_csv(result.agg));
      result.files_written.push_back(agg_path);
      const std::string summary_path = (fs::path(cfg.out_dir) / "summary.json").string();
      write_file_atomic(summary_path, summary_json(cfg, result));
      result.files_written.push_back(summary_path);
    } catch (...) {
      for (const auto& path : result.files_written) {
        std::error_code ec;
        fs::remove(path, ec);
      }
      throw;
    }
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, bool write_files) {
  verify_assumption(cfg);
  const GraphSetup setup = build_graphs(cfg);
  const Oracle oracle = build_oracle(cfg);
  return run_one(cfg, setup, oracle, write_files);
}

double tail_average_grad_norm(const MetricsTrace& trace, double window) {
  if (trace.records.empty()) throw ConfigError("tail average: empty trace");
  const auto len = trace.records.size();
  auto tail = static_cast<std::size_t>(std::ceil(len * window));
  tail = std::min(std::max<std::size_t>(tail, 1), len);
  double acc = 0.0;
  for (std::size_t i = len - tail; i < len; ++i) acc += trace.records[i].grad_norm_sq;
  return acc / static_cast<double>(tail);
}

std::vector<SweepCell> run_sweep(const RunConfig& cfg, bool write_files) {
  std::vector<Algo> algos = cfg.sweep_algos;
  if (algos.empty()) algos = {cfg.algo};
  std::vector<double> lambdas = cfg.sweep_lambda;
  if (lambdas.empty()) lambdas = {cfg.lambda};
  const bool coupled = cfg.sweep_coupling_c > 0.0;
  std::vector<double> etas = cfg.sweep_eta;
  if (etas.empty() && !coupled) etas = {cfg.eta};
  if (algos.empty() || lambdas.empty() || (etas.empty() && !coupled))
    throw ConfigError("sweep: empty grid");

  std::vector<SweepCell> cells;
  for (Algo algo : algos) {
    for (double lambda : lambdas) {
      std::vector<double> cell_etas = coupled
                                          ? std::vector<double>{cfg.sweep_coupling_c * lambda *
                                                                lambda}
                                          : etas;
      for (double eta : cell_etas) {
        RunConfig cell_cfg = cfg;
        cell_cfg.algo = algo;
        cell_cfg.lambda = lambda;
        cell_cfg.eta = eta;
        cell_cfg.sweep_lambda.clear();
        cell_cfg.sweep_eta.clear();
        cell_cfg.sweep_algos.clear();
        cell_cfg.sweep_coupling_c = 0.0;
        std::ostringstream dir;
        dir << cfg.out_dir << "/" << to_string(algo) << "_lam" << lambda << "_eta" << eta;
        cell_cfg.out_dir = dir.str();

        verify_assumption(cell_cfg);
        const GraphSetup setup = build_graphs(cell_cfg);
        const Oracle oracle = build_oracle(cell_cfg);
        SweepCell cell;
        cell.algo = algo;
        cell.lambda = lambda;
        cell.eta = eta;
        cell.result = run_one(cell_cfg, setup, oracle, write_files);

        Vector tails;
        tails.reserve(cell.result.traces.size());
        for (const auto& trace : cell.result.traces)
          tails.push_back(tail_average_grad_norm(trace, cfg.tail_window));
        double mean = 0.0;
        for (double t : tails) mean += t;
        mean /= tails.size();
        double var = 0.0;
        if (tails.size() > 1) {
          for (double t : tails) var += (t - mean) * (t - mean);
          var /= (tails.size() - 1);
        }
        cell.tail_mean_grad_norm_sq = mean;
        cell.tail_std_grad_norm_sq = std::sqrt(var);
        cells.push_back(std::move(cell));
      }
    }
  }
  if (write_files) {
    const std::string path =
        (std::filesystem::path(cfg.out_dir) / "sweep_table.csv").string();
    write_file_atomic(path, sweep_table_csv(cells));
  }
  return cells;
}

std::string sweep_table_csv(const std::vector<SweepCell>& cells) {
  std::string out = "algo,lambda,eta,tail_mean_grad_norm_sq,tail_std_grad_norm_sq\n";
  for (const auto& cell : cells) {
    out += to_string(cell.algo);
    out.push_back(',');
    out += format_double(cell.lambda);
    out.push_back(',');
    out += format_double(cell.eta);
    out.push_back(',');
    out += format_double(cell.tail_mean_grad_norm_sq);
    out.push_back(',');
    out += format_double(cell.tail_std_grad_norm_sq);
    out.push_back('\n');
  }
  return out;
}

std::string synth_libsvm(int samples, int dim, std::uint64_t seed, double noise) {
  if (samples < 1 || dim < 1) throw ConfigError("synth_libsvm: samples and dim must be >= 1");
  if (noise < 0) throw ConfigError("synth_libsvm: noise must be >= 0");
  RngStream wrng(seed, 0, 0);
  Vector w(dim);
  for (int k = 0; k < dim; ++k) w[k] = wrng.next_gaussian() / std::sqrt(static_cast<double>(dim));
  // Sparse binary features, roughly the density of typical categorical data.
  const double density = std::min(1.0, 14.0 / dim);
  // Centering the margin keeps the label split roughly balanced per seed.
  double offset = 0.0;
  for (int k = 0; k < dim; ++k) offset += density * w[k];
  std::string out;
  for (int s = 0; s < samples; ++s) {
    RngStream rng(seed, static_cast<std::uint64_t>(s) + 1, 0);
    double margin = 0.0;
    std::string feats;
    for (int k = 0; k < dim; ++k) {
      if (rng.next_uniform() < density) {
        margin += w[k];
        feats += " " + std::to_string(k + 1) + ":1";
      }
    }
    const double score = margin - offset + noise * rng.next_gaussian();
    out += (score >= 0.0 ? "+1" : "-1");
    out += feats;
    out.push_back('\n');
  }
  return out;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string summary_json(const RunConfig& cfg, const ExperimentResult& result) {
  const auto& last_mean = result.agg.mean.back();
  const auto& last_std = result.agg.stddev.back();
  std::ostringstream out;
  out << "{\n";
  out << "  \"algo\": \"" << result.algo << "\",\n";
  out << "  \"config_digest\": \"" << digest(result.config_echo) << "\",\n";
  out << "  \"seeds\": [";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
  out << "],\n";
  out << "  \"horizon\": " << cfg.horizon << ",\n";
  out << "  \"final_f_bar_mean\": " << format_double(last_mean.f_bar) << ",\n";
  out << "  \"final_f_bar_std\": " << format_double(last_std.f_bar) << ",\n";
  out << "  \"final_grad_norm_sq_mean\": " << format_double(last_mean.grad_norm_sq) << ",\n";
  out << "  \"final_grad_norm_sq_std\": " << format_double(last_std.grad_norm_sq) << ",\n";
  out << "  \"rho_r\": " << format_double(result.diagnostics.rho_r) << ",\n";
  out << "  \"rho_c\": " << format_double(result.diagnostics.rho_c) << ",\n";
  out << "  \"c_pi\": " << format_double(result.diagnostics.c_pi) << ",\n";
  out << "  \"perron_residual_r\": " << format_double(result.diagnostics.residual_r) << ",\n";
  out << "  \"perron_residual_c\": " << format_double(result.diagnostics.residual_c) << ",\n";
  out << "  \"wall_seconds\": " << format_double(result.wall_seconds) << ",\n";
  out << "  \"config\": \"" << json_escape(result.config_echo) << "\"\n";
  out << "}\n";
  return out.str();
}

}  // namespace

}  // namespace pushpull
