#include "pushpull/cli.hpp"

#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "pushpull/config.hpp"
#include "pushpull/errors.hpp"
#include "pushpull/harness.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/trace_io.hpp"

namespace pushpull {

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  int record_every = 0;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
  if (needs_config) opt->required();
  cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
  cmd->add_option("--workers", flags.workers, "concurrent jobs (overrides config)");
  cmd->add_option("--record-every", flags.record_every, "record cadence (overrides config)");
  cmd->add_flag("--serial", flags.serial, "force serial kernels");
}

RunConfig load_with_overrides(const CommonFlags& flags) {
  RunConfig cfg = load_config_file(flags.config_path);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (flags.record_every > 0) cfg.record_every = flags.record_every;
  if (flags.serial) cfg.serial = true;
  return cfg;
}

int do_check_graph(const CommonFlags& flags, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(flags);
  const GraphSetup setup = build_graphs(cfg);
  const GraphDiagnostics diag = check_graph(cfg);
  print_diagnostics(diag, setup, out);
  if (!flags.out_dir.empty()) {
    namespace fs = std::filesystem;
    const auto r_path = (fs::path(cfg.out_dir) / "R.csv").string();
    const auto c_path = (fs::path(cfg.out_dir) / "C.csv").string();
    write_file_atomic(r_path, matrix_to_csv(setup.mixing.r.w));
    write_file_atomic(c_path, matrix_to_csv(setup.mixing.c.w));
    out << "wrote " << r_path << "\n";
    out << "wrote " << c_path << "\n";
  }
  if (!diag.assumption_ok)
    throw AssumptionError("graph assumption check failed: " + diag.failure_reason);
  return 0;
}

int do_run(const CommonFlags& flags, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(flags);
  const ExperimentResult result = run_experiment(cfg, /*write_files=*/true);
  out << "algo " << result.algo << ", " << result.traces.size() << " seed(s), horizon "
      << cfg.horizon << "\n";
  out << "final grad_norm_sq mean " << format_double(result.agg.mean.back().grad_norm_sq)
      << " (std " << format_double(result.agg.stddev.back().grad_norm_sq) << ")\n";
  out << "wall time " << result.wall_seconds << " s\n";
  for (const auto& path : result.files_written) out << "wrote " << path << "\n";
  return 0;
}

int do_sweep(const CommonFlags& flags, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(flags);
  const auto cells = run_sweep(cfg, /*write_files=*/true);
  out << sweep_table_csv(cells);
  return 0;
}

int do_gen_data(const std::string& out_path, int samples, int dim, std::uint64_t seed,
                double noise, std::ostream& out) {
  write_file_atomic(out_path, synth_libsvm(samples, dim, seed, noise));
  out << "wrote " << out_path << " (" << samples << " samples, dim " << dim << ")\n";
  return 0;
}

}  // namespace

int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"push-pull decentralized optimization simulator"};
  app.require_subcommand(1);

  CommonFlags check_flags, run_flags, sweep_flags;
  auto* check_cmd =
      app.add_subcommand("check-graph", "build graphs and report mixing diagnostics");
  add_common(check_cmd, check_flags);
  auto* run_cmd = app.add_subcommand("run", "run the configured experiment, write CSV traces");
  add_common(run_cmd, run_flags);
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of runs with a comparison table");
  add_common(sweep_cmd, sweep_flags);

  std::string gen_out = "synth.libsvm";
  int gen_samples = 1000;
  int gen_dim = 123;
  std::uint64_t gen_seed = 1;
  double gen_noise = 0.3;
  auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic LIBSVM dataset");
  gen_cmd->add_option("--out", gen_out, "output file");
  gen_cmd->add_option("--samples", gen_samples, "sample count")->required();
  gen_cmd->add_option("--dim", gen_dim, "feature dimension")->required();
  gen_cmd->add_option("--seed", gen_seed, "generator seed")->required();
  gen_cmd->add_option("--noise", gen_noise, "label noise scale");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (check_cmd->parsed()) return do_check_graph(check_flags, out);
    if (run_cmd->parsed()) return do_run(run_flags, out);
    if (sweep_cmd->parsed()) return do_sweep(sweep_flags, out);
    if (gen_cmd->parsed())
      return do_gen_data(gen_out, gen_samples, gen_dim, gen_seed, gen_noise, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const AssumptionError& e) {
    err << "assumption failure: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pushpull
