#include "pushpull/trace_io.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "pushpull/errors.hpp"

namespace pushpull {

namespace {

constexpr const char* kHeader =
    "k,eta,lambda,f_bar,grad_norm_sq,e_x,e_v,e_m,e_momentum_energy,cons_residual";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) next = line.size();
    parts.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

double parse_double(const std::string& s, int lineno) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("trace csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string trace_to_csv(const MetricsTrace& trace) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const auto& r : trace.records) {
    out += std::to_string(r.k);
    for (double v : {r.eta, r.lambda, r.f_bar, r.grad_norm_sq, r.e_x, r.e_v, r.e_m,
                     r.e_momentum_energy, r.cons_residual}) {
      out.push_back(',');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

MetricsTrace trace_from_csv(const std::string& text) {
  MetricsTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kHeader) throw ConfigError("trace csv: missing or wrong header");
      saw_header = true;
      continue;
    }
    const auto parts = split(line, ',');
    if (parts.size() != 10)
      throw ConfigError("trace csv line " + std::to_string(lineno) + ": expected 10 columns");
    IterationRecord r;
    r.k = std::stol(parts[0]);
    r.eta = parse_double(parts[1], lineno);
    r.lambda = parse_double(parts[2], lineno);
    r.f_bar = parse_double(parts[3], lineno);
    r.grad_norm_sq = parse_double(parts[4], lineno);
    r.e_x = parse_double(parts[5], lineno);
    r.e_v = parse_double(parts[6], lineno);
    r.e_m = parse_double(parts[7], lineno);
    r.e_momentum_energy = parse_double(parts[8], lineno);
    r.cons_residual = parse_double(parts[9], lineno);
    trace.records.push_back(r);
  }
  if (!saw_header) throw ConfigError("trace csv: empty input");
  return trace;
}

std::string aggregate_to_csv(const AggregateTrace& agg) {
  std::string out =
      "k,eta,lambda,f_bar_mean,f_bar_std,grad_norm_sq_mean,grad_norm_sq_std,e_x_mean,e_x_std,"
      "e_v_mean,e_v_std,e_m_mean,e_m_std,e_momentum_energy_mean,e_momentum_energy_std,"
      "cons_residual_mean,cons_residual_std\n";
  for (std::size_t i = 0; i < agg.k.size(); ++i) {
    const auto& m = agg.mean[i];
    const auto& s = agg.stddev[i];
    out += std::to_string(agg.k[i]);
    for (double v : {m.eta, m.lambda, m.f_bar, s.f_bar, m.grad_norm_sq, s.grad_norm_sq, m.e_x,
                     s.e_x, m.e_v, s.e_v, m.e_m, s.e_m, m.e_momentum_energy, s.e_momentum_energy,
                     m.cons_residual, s.cons_residual}) {
      out.push_back(',');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write: " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename failed for " + target.string() + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xF];
    h >>= 4;
  }
  return std::string(buf, 16);
}

}  // namespace pushpull
