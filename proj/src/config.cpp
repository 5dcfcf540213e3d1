#include "pushpull/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pushpull/errors.hpp"
#include "pushpull/trace_io.hpp"

namespace pushpull {

StepSchedule RunConfig::make_schedule(int n) const {
  switch (schedule_kind) {
    case StepSchedule::Kind::Constant:
      return StepSchedule::constant(eta);
    case StepSchedule::Kind::SteppedDecay:
      return StepSchedule::stepped_decay(eta, decay_factor, decay_period);
    case StepSchedule::Kind::TheoryCoupled:
      return StepSchedule::theory_coupled(coupling_c, lambda);
    case StepSchedule::Kind::HorizonOptimal: {
      double lambda_out = lambda;
      auto s = StepSchedule::horizon_optimal(coupling_c, n, horizon, lambda_out);
      return s;
    }
  }
  throw ConfigError("unknown schedule kind");
}

std::string to_string(StepSchedule::Kind kind) {
  switch (kind) {
    case StepSchedule::Kind::Constant:
      return "constant";
    case StepSchedule::Kind::SteppedDecay:
      return "step_decay";
    case StepSchedule::Kind::TheoryCoupled:
      return "theory_coupled";
    case StepSchedule::Kind::HorizonOptimal:
      return "horizon_optimal";
  }
  return "?";
}

StepSchedule::Kind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return StepSchedule::Kind::Constant;
  if (name == "step_decay") return StepSchedule::Kind::SteppedDecay;
  if (name == "theory_coupled") return StepSchedule::Kind::TheoryCoupled;
  if (name == "horizon_optimal") return StepSchedule::Kind::HorizonOptimal;
  throw ConfigError("unknown schedule '" + name +
                    "' (valid: constant, step_decay, theory_coupled, horizon_optimal)");
}

std::string to_string(GraphMode mode) {
  switch (mode) {
    case GraphMode::Auto:
      return "auto";
    case GraphMode::Trees:
      return "trees";
    case GraphMode::Full:
      return "full";
  }
  return "?";
}

std::string to_string(OracleKind kind) {
  return kind == OracleKind::Logistic ? "logistic" : "quadratic";
}

namespace {

struct RawConfig {
  std::map<std::string, std::pair<std::string, int>> values;  // key -> (value, line)

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::string v = it->second.first;
    values.erase(it);
    return v;
  }

  std::string require(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("config: missing required key '" + key + "'");
    std::string v = it->second.first;
    values.erase(it);
    return v;
  }
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("config: key '" + key + "': expected integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("config: key '" + key + "': expected number, got '" + v + "'");
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    const std::string item = trim(v.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(parse(key, item));
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "': empty list");
  return out;
}

void require_file(const std::string& key, const std::string& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("config: key '" + key + "': path does not exist: " + path);
}

}  // namespace

RunConfig load_config(std::istream& in) {
  RawConfig raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (raw.values.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                        "'");
    raw.values[key] = {value, lineno};
  }

  RunConfig cfg;
  cfg.topology.kind = topology_kind_from_string(raw.require("topology"));
  cfg.topology.n = static_cast<int>(parse_long("n", raw.take("n", "20")));
  if (cfg.topology.n < 1) throw ConfigError("config: key 'n': must be >= 1");
  cfg.topology.sub_rings = static_cast<int>(parse_long("sub_rings", raw.take("sub_rings", "2")));
  cfg.topology.root = static_cast<int>(parse_long("root", raw.take("root", "0")));
  cfg.graph_file = raw.take("graph_file", "");
  cfg.pull_graph_file = raw.take("pull_graph_file", "");
  cfg.push_graph_file = raw.take("push_graph_file", "");
  if (cfg.topology.kind == TopologyKind::Custom) {
    if (cfg.graph_file.empty())
      throw ConfigError("config: custom topology requires key 'graph_file'");
    require_file("graph_file", cfg.graph_file);
    auto parsed = parse_edge_list_file(cfg.graph_file);
    cfg.topology.n = parsed.n;
    cfg.topology.custom_edges = std::move(parsed.edges);
  }
  if (!cfg.pull_graph_file.empty()) require_file("pull_graph_file", cfg.pull_graph_file);
  if (!cfg.push_graph_file.empty()) require_file("push_graph_file", cfg.push_graph_file);

  {
    const std::string mode = raw.take("graph_mode", "auto");
    if (mode == "auto")
      cfg.graph_mode = GraphMode::Auto;
    else if (mode == "trees")
      cfg.graph_mode = GraphMode::Trees;
    else if (mode == "full")
      cfg.graph_mode = GraphMode::Full;
    else
      throw ConfigError("config: key 'graph_mode': unknown value '" + mode +
                        "' (valid: auto, trees, full)");
  }

  cfg.algo = algo_from_string(raw.require("algo"));
  cfg.lambda = parse_real("lambda", raw.take("lambda", "0.1"));
  if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0))
    throw ConfigError("config: key 'lambda': must be in (0, 1]");
  cfg.eta = parse_real("eta", raw.take("eta", "0.1"));
  if (!(cfg.eta > 0.0)) throw ConfigError("config: key 'eta': must be > 0");
  cfg.schedule_kind = schedule_kind_from_string(raw.take("schedule", "constant"));
  cfg.decay_factor = parse_real("decay_factor", raw.take("decay_factor", "0.1"));
  if (!(cfg.decay_factor > 0.0 && cfg.decay_factor < 1.0))
    throw ConfigError("config: key 'decay_factor': must be in (0, 1)");
  cfg.decay_period = static_cast<int>(parse_long("decay_period", raw.take("decay_period", "300")));
  if (cfg.decay_period < 1) throw ConfigError("config: key 'decay_period': must be >= 1");
  cfg.coupling_c = parse_real("coupling_c", raw.take("coupling_c", "1"));
  cfg.batch = static_cast<int>(parse_long("batch", raw.take("batch", "1")));
  if (cfg.batch < 1) throw ConfigError("config: key 'batch': must be >= 1");
  cfg.horizon = parse_long("horizon", raw.require("horizon"));
  if (cfg.horizon < 0) throw ConfigError("config: key 'horizon': must be >= 0");

  {
    const std::string init = raw.take("tracker_init", "zero");
    if (init == "zero")
      cfg.tracker_init = TrackerInit::Zero;
    else if (init == "gradient")
      cfg.tracker_init = TrackerInit::Gradient;
    else
      throw ConfigError("config: key 'tracker_init': unknown value '" + init +
                        "' (valid: zero, gradient)");
  }
  {
    const std::string mode = raw.take("csgdm_mode", "ema");
    if (mode == "ema")
      cfg.csgdm_mode = CsgdmMode::Ema;
    else if (mode == "classical")
      cfg.csgdm_mode = CsgdmMode::Classical;
    else
      throw ConfigError("config: key 'csgdm_mode': unknown value '" + mode +
                        "' (valid: ema, classical)");
  }

  {
    const std::string kind = raw.require("oracle");
    if (kind == "logistic")
      cfg.oracle_kind = OracleKind::Logistic;
    else if (kind == "quadratic")
      cfg.oracle_kind = OracleKind::Quadratic;
    else
      throw ConfigError("config: key 'oracle': unknown value '" + kind +
                        "' (valid: logistic, quadratic)");
  }
  cfg.data_path = raw.take("data", "");
  cfg.dim = static_cast<int>(parse_long("dim", raw.take("dim", "123")));
  if (cfg.dim < 1) throw ConfigError("config: key 'dim': must be >= 1");
  cfg.alpha = parse_real("alpha", raw.take("alpha", "0.01"));
  if (cfg.alpha < 0.0) throw ConfigError("config: key 'alpha': must be >= 0");
  cfg.partition_seed =
      static_cast<std::uint64_t>(parse_long("partition_seed", raw.take("partition_seed", "1")));
  cfg.sigma = parse_real("sigma", raw.take("sigma", "1"));
  if (cfg.sigma < 0.0) throw ConfigError("config: key 'sigma': must be >= 0");
  cfg.quad_dim = static_cast<int>(parse_long("quad_dim", raw.take("quad_dim", "10")));
  if (cfg.quad_dim < 1) throw ConfigError("config: key 'quad_dim': must be >= 1");
  cfg.quad_hetero = parse_real("quad_hetero", raw.take("quad_hetero", "1"));
  cfg.quad_seed = static_cast<std::uint64_t>(parse_long("quad_seed", raw.take("quad_seed", "7")));
  if (cfg.oracle_kind == OracleKind::Logistic) {
    if (cfg.data_path.empty())
      throw ConfigError("config: logistic oracle requires key 'data'");
    require_file("data", cfg.data_path);
  }

  if (raw.has("seeds"))
    cfg.seeds = parse_list<std::uint64_t>("seeds", raw.take("seeds", ""), [](auto& k, auto& v) {
      return static_cast<std::uint64_t>(parse_long(k, v));
    });
  if (cfg.seeds.empty()) throw ConfigError("config: key 'seeds': at least one seed required");
  cfg.record_every =
      static_cast<int>(parse_long("record_every", raw.take("record_every", "1")));
  if (cfg.record_every < 1) throw ConfigError("config: key 'record_every': must be >= 1");
  cfg.out_dir = raw.take("out", "results");
  cfg.workers = static_cast<int>(parse_long("workers", raw.take("workers", "1")));
  if (cfg.workers < 1) throw ConfigError("config: key 'workers': must be >= 1");
  cfg.tail_window = parse_real("tail_window", raw.take("tail_window", "0.2"));
  if (!(cfg.tail_window > 0.0 && cfg.tail_window <= 1.0))
    throw ConfigError("config: key 'tail_window': must be in (0, 1]");
  {
    const std::string exec = raw.take("exec", "parallel");
    if (exec == "serial")
      cfg.serial = true;
    else if (exec == "parallel")
      cfg.serial = false;
    else
      throw ConfigError("config: key 'exec': unknown value '" + exec +
                        "' (valid: parallel, serial)");
  }

  if (raw.has("sweep_lambda"))
    cfg.sweep_lambda =
        parse_list<double>("sweep_lambda", raw.take("sweep_lambda", ""), parse_real);
  if (raw.has("sweep_eta"))
    cfg.sweep_eta = parse_list<double>("sweep_eta", raw.take("sweep_eta", ""), parse_real);
  cfg.sweep_coupling_c =
      parse_real("sweep_coupling_c", raw.take("sweep_coupling_c", "0"));
  if (raw.has("sweep_algos"))
    cfg.sweep_algos = parse_list<Algo>("sweep_algos", raw.take("sweep_algos", ""),
                                       [](auto&, auto& v) { return algo_from_string(v); });
  for (double l : cfg.sweep_lambda)
    if (!(l > 0.0 && l <= 1.0))
      throw ConfigError("config: key 'sweep_lambda': values must be in (0, 1]");
  for (double e : cfg.sweep_eta)
    if (!(e > 0.0)) throw ConfigError("config: key 'sweep_eta': values must be > 0");

  if (!raw.values.empty()) {
    const auto& [key, rest] = *raw.values.begin();
    throw ConfigError("config line " + std::to_string(rest.second) + ": unknown key '" + key +
                      "'");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  return load_config(in);
}

std::string config_echo(const RunConfig& cfg) {
  std::ostringstream out;
  out << "topology = " << to_string(cfg.topology.kind) << "\n";
  out << "n = " << cfg.topology.n << "\n";
  out << "sub_rings = " << cfg.topology.sub_rings << "\n";
  out << "root = " << cfg.topology.root << "\n";
  if (!cfg.graph_file.empty()) out << "graph_file = " << cfg.graph_file << "\n";
  if (!cfg.pull_graph_file.empty()) out << "pull_graph_file = " << cfg.pull_graph_file << "\n";
  if (!cfg.push_graph_file.empty()) out << "push_graph_file = " << cfg.push_graph_file << "\n";
  out << "graph_mode = " << to_string(cfg.graph_mode) << "\n";
  out << "algo = " << to_string(cfg.algo) << "\n";
  out << "lambda = " << format_double(cfg.lambda) << "\n";
  out << "eta = " << format_double(cfg.eta) << "\n";
  out << "schedule = " << to_string(cfg.schedule_kind) << "\n";
  out << "decay_factor = " << format_double(cfg.decay_factor) << "\n";
  out << "decay_period = " << cfg.decay_period << "\n";
  out << "coupling_c = " << format_double(cfg.coupling_c) << "\n";
  out << "batch = " << cfg.batch << "\n";
  out << "horizon = " << cfg.horizon << "\n";
  out << "tracker_init = " << (cfg.tracker_init == TrackerInit::Zero ? "zero" : "gradient")
      << "\n";
  out << "csgdm_mode = " << (cfg.csgdm_mode == CsgdmMode::Ema ? "ema" : "classical") << "\n";
  out << "oracle = " << to_string(cfg.oracle_kind) << "\n";
  if (!cfg.data_path.empty()) out << "data = " << cfg.data_path << "\n";
  out << "dim = " << cfg.dim << "\n";
  out << "alpha = " << format_double(cfg.alpha) << "\n";
  out << "partition_seed = " << cfg.partition_seed << "\n";
  out << "sigma = " << format_double(cfg.sigma) << "\n";
  out << "quad_dim = " << cfg.quad_dim << "\n";
  out << "quad_hetero = " << format_double(cfg.quad_hetero) << "\n";
  out << "quad_seed = " << cfg.quad_seed << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    out << (i ? "," : "") << cfg.seeds[i];
  out << "\n";
  out << "record_every = " << cfg.record_every << "\n";
  out << "out = " << cfg.out_dir << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "tail_window = " << format_double(cfg.tail_window) << "\n";
  out << "exec = " << (cfg.serial ? "serial" : "parallel") << "\n";
  if (!cfg.sweep_lambda.empty()) {
    out << "sweep_lambda = ";
    for (std::size_t i = 0; i < cfg.sweep_lambda.size(); ++i)
      out << (i ? "," : "") << format_double(cfg.sweep_lambda[i]);
    out << "\n";
  }
  if (!cfg.sweep_eta.empty()) {
    out << "sweep_eta = ";
    for (std::size_t i = 0; i < cfg.sweep_eta.size(); ++i)
      out << (i ? "," : "") << format_double(cfg.sweep_eta[i]);
    out << "\n";
  }
  if (cfg.sweep_coupling_c != 0.0)
    out << "sweep_coupling_c = " << format_double(cfg.sweep_coupling_c) << "\n";
  if (!cfg.sweep_algos.empty()) {
    out << "sweep_algos = ";
    for (std::size_t i = 0; i < cfg.sweep_algos.size(); ++i)
      out << (i ? "," : "") << to_string(cfg.sweep_algos[i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace pushpull
