#include "pushpull/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pushpull/errors.hpp"

namespace pushpull {

namespace {

// log(1 + exp(z)) without overflow.
double log1p_exp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 1 / (1 + exp(z)) without overflow.
double inv_logit(double z) {
  if (z > 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

int parse_label(const std::string& token, int lineno) {
  if (token == "+1" || token == "1") return 1;
  if (token == "-1") return -1;
  if (token == "0") return -1;
  throw ConfigError("libsvm line " + std::to_string(lineno) + ": bad label '" + token + "'");
}

}  // namespace

Dataset parse_libsvm(std::istream& in, int dim) {
  if (dim < 1) throw ConfigError("libsvm: dimension must be positive");
  Dataset ds;
  ds.dim = dim;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    Sample sample;
    sample.label = parse_label(token, lineno);
    std::vector<char> seen(dim, 0);
    while (ss >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= token.size())
        throw ConfigError("libsvm line " + std::to_string(lineno) + ": bad token '" + token + "'");
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoi(token.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("");
        const std::string vs = token.substr(colon + 1);
        val = std::stod(vs, &used);
        if (used != vs.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("libsvm line " + std::to_string(lineno) + ": bad token '" + token +
                          "'");
      }
      if (idx < 1 || idx > dim)
        throw ConfigError("libsvm line " + std::to_string(lineno) + ": index " +
                          std::to_string(idx) + " outside [1, " + std::to_string(dim) + "]");
      if (seen[idx - 1])
        throw ConfigError("libsvm line " + std::to_string(lineno) + ": duplicate index " +
                          std::to_string(idx));
      seen[idx - 1] = 1;
      sample.features.emplace_back(idx - 1, val);
    }
    std::sort(sample.features.begin(), sample.features.end());
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Dataset parse_libsvm_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  return parse_libsvm(in, dim);
}

Partition partition_even(int sample_count, int agents, std::uint64_t seed) {
  if (agents < 1) throw ConfigError("partition: agent count must be positive");
  if (sample_count < agents)
    throw ConfigError("partition: fewer samples (" + std::to_string(sample_count) +
                      ") than agents (" + std::to_string(agents) + ")");
  std::vector<int> order(sample_count);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, 0, 0);
  for (int i = sample_count - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  Partition part;
  part.agents = agents;
  part.members.resize(agents);
  const int base = sample_count / agents;
  const int extra = sample_count % agents;
  int pos = 0;
  for (int a = 0; a < agents; ++a) {
    const int len = base + (a < extra ? 1 : 0);
    part.members[a].assign(order.begin() + pos, order.begin() + pos + len);
    pos += len;
  }
  return part;
}

Oracle::Oracle(const Oracle& other)
    : kind_(other.kind_),
      agents_(other.agents_),
      dim_(other.dim_),
      dataset_(other.dataset_),
      partition_(other.partition_),
      alpha_(other.alpha_),
      a_(other.a_),
      b_(other.b_),
      sigma_(other.sigma_) {}

Oracle::Oracle(Oracle&& other) noexcept
    : kind_(other.kind_),
      agents_(other.agents_),
      dim_(other.dim_),
      dataset_(std::move(other.dataset_)),
      partition_(std::move(other.partition_)),
      alpha_(other.alpha_),
      a_(std::move(other.a_)),
      b_(std::move(other.b_)),
      sigma_(other.sigma_) {}

Oracle Oracle::logistic(Dataset dataset, Partition partition, double alpha) {
  if (alpha < 0) throw ConfigError("oracle: alpha must be >= 0");
  if (partition.agents < 1) throw ConfigError("oracle: empty partition");
  for (const auto& members : partition.members)
    if (members.empty()) throw ConfigError("oracle: agent with empty partition");
  Oracle o;
  o.kind_ = Kind::Logistic;
  o.agents_ = partition.agents;
  o.dim_ = dataset.dim;
  o.dataset_ = std::move(dataset);
  o.partition_ = std::move(partition);
  o.alpha_ = alpha;
  return o;
}

Oracle Oracle::quadratic(std::vector<Matrix> a, std::vector<Vector> b, double sigma) {
  if (a.empty() || a.size() != b.size()) throw ConfigError("oracle: quadratic size mismatch");
  if (sigma < 0) throw ConfigError("oracle: sigma must be >= 0");
  const int dim = a[0].rows();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != dim || a[i].cols() != dim || static_cast<int>(b[i].size()) != dim)
      throw ConfigError("oracle: quadratic shape mismatch at agent " + std::to_string(i));
  }
  Oracle o;
  o.kind_ = Kind::Quadratic;
  o.agents_ = static_cast<int>(a.size());
  o.dim_ = dim;
  o.a_ = std::move(a);
  o.b_ = std::move(b);
  o.sigma_ = sigma;
  return o;
}

Oracle Oracle::quadratic_random(int agents, int dim, double sigma, double hetero_scale,
                                std::uint64_t seed) {
  std::vector<Matrix> a;
  std::vector<Vector> b;
  a.reserve(agents);
  b.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i), 0);
    Matrix ai(dim, dim, 0.0);
    for (int k = 0; k < dim; ++k) ai(k, k) = 0.5 + rng.next_uniform();
    Vector bi(dim);
    for (int k = 0; k < dim; ++k) bi[k] = hetero_scale * rng.next_gaussian();
    a.push_back(std::move(ai));
    b.push_back(std::move(bi));
  }
  return quadratic(std::move(a), std::move(b), sigma);
}

double Oracle::local_loss(std::span<const double> x, int agent) const {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("local_loss: bad dimension");
  if (agent < 0 || agent >= agents_) throw std::invalid_argument("local_loss: bad agent");
  if (kind_ == Kind::Quadratic) {
    const Matrix& a = a_[agent];
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dim_; ++j) row += a(i, j) * x[j];
      acc += 0.5 * x[i] * row + b_[agent][i] * x[i];
    }
    return acc;
  }
  const auto& members = partition_.members[agent];
  double data = 0.0;
  for (int s : members) {
    const Sample& sample = dataset_.samples[s];
    double margin = 0.0;
    for (const auto& [j, v] : sample.features) margin += v * x[j];
    data += log1p_exp(-sample.label * margin);
  }
  data /= static_cast<double>(members.size());
  double reg = 0.0;
  for (int k = 0; k < dim_; ++k) {
    const double sq = x[k] * x[k];
    reg += sq / (1.0 + sq);
  }
  return data + alpha_ * reg;
}

void Oracle::sample_grad_accum(std::span<const double> x, int sample, double scale,
                               std::span<double> out) const {
  const Sample& s = dataset_.samples[sample];
  double margin = 0.0;
  for (const auto& [j, v] : s.features) margin += v * x[j];
  const double slope = -s.label * inv_logit(s.label * margin);
  for (const auto& [j, v] : s.features) out[j] += scale * slope * v;
}

void Oracle::local_grad(std::span<const double> x, int agent, std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim_ || static_cast<int>(out.size()) != dim_)
    throw std::invalid_argument("local_grad: bad dimension");
  if (agent < 0 || agent >= agents_) throw std::invalid_argument("local_grad: bad agent");
  exact_calls_.fetch_add(1, std::memory_order_relaxed);
  if (kind_ == Kind::Quadratic) {
    const Matrix& a = a_[agent];
    for (int i = 0; i < dim_; ++i) {
      double acc = b_[agent][i];
      for (int j = 0; j < dim_; ++j) acc += a(i, j) * x[j];
      out[i] = acc;
    }
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  const auto& members = partition_.members[agent];
  const double scale = 1.0 / static_cast<double>(members.size());
  for (int s : members) sample_grad_accum(x, s, scale, out);
  for (int k = 0; k < dim_; ++k) {
    const double denom = 1.0 + x[k] * x[k];
    out[k] += 2.0 * alpha_ * x[k] / (denom * denom);
  }
}

void Oracle::stochastic_grad(std::span<const double> x, int agent, int batch, RngStream& rng,
                             std::span<double> out) const {
  if (batch < 1) throw ConfigError("stochastic_grad: batch must be >= 1");
  if (static_cast<int>(x.size()) != dim_ || static_cast<int>(out.size()) != dim_)
    throw std::invalid_argument("stochastic_grad: bad dimension");
  if (agent < 0 || agent >= agents_) throw std::invalid_argument("stochastic_grad: bad agent");
  stochastic_calls_.fetch_add(1, std::memory_order_relaxed);
  if (kind_ == Kind::Quadratic) {
    const Matrix& a = a_[agent];
    for (int i = 0; i < dim_; ++i) {
      double acc = b_[agent][i];
      for (int j = 0; j < dim_; ++j) acc += a(i, j) * x[j];
      out[i] = acc;
    }
    if (sigma_ > 0.0) {
      // Per-coordinate std sigma/sqrt(d) makes E||noise||^2 = sigma^2 exactly.
      const double scale = sigma_ / std::sqrt(static_cast<double>(dim_));
      for (int k = 0; k < dim_; ++k) out[k] += scale * rng.next_gaussian();
    }
    return;
  }
  const auto& members = partition_.members[agent];
  if (members.empty()) throw ConfigError("stochastic_grad: agent has no samples");
  std::fill(out.begin(), out.end(), 0.0);
  const auto m = static_cast<int>(members.size());
  const double scale = 1.0 / static_cast<double>(batch);
  if (batch == m) {
    // Full batch: deterministic sweep, exactly the data part of local_grad.
    const double full = 1.0 / static_cast<double>(m);
    for (int s : members) sample_grad_accum(x, s, full, out);
  } else {
    for (int t = 0; t < batch; ++t) {
      const int pick = members[rng.next_index(static_cast<std::uint64_t>(m))];
      sample_grad_accum(x, pick, scale, out);
    }
  }
  for (int k = 0; k < dim_; ++k) {
    const double denom = 1.0 + x[k] * x[k];
    out[k] += 2.0 * alpha_ * x[k] / (denom * denom);
  }
}

double Oracle::smoothness_estimate() const {
  if (kind_ == Kind::Quadratic) {
    double worst = 0.0;
    for (const Matrix& a : a_) {
      for (int i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim_; ++j) row += std::abs(a(i, j));
        worst = std::max(worst, row);
      }
    }
    return worst;
  }
  double worst = 0.0;
  for (const auto& members : partition_.members) {
    double acc = 0.0;
    for (int s : members) {
      double sq = 0.0;
      for (const auto& [j, v] : dataset_.samples[s].features) sq += v * v;
      acc += sq;
    }
    worst = std::max(worst, acc / (4.0 * static_cast<double>(members.size())));
  }
  return worst + 2.0 * alpha_;
}

void gradient_matrix(const Oracle& oracle, const Matrix& x, Matrix& out, Exec exec) {
  if (out.rows() != x.rows() || out.cols() != x.cols())
    throw std::invalid_argument("gradient_matrix: shape mismatch");
  const int n = x.rows();
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int i = 0; i < n; ++i) oracle.local_grad(x.row(i), i, out.row(i));
}

void stochastic_gradient_matrix(const Oracle& oracle, const Matrix& x, int batch,
                                std::uint64_t seed, std::uint64_t iteration, Matrix& out,
                                Exec exec) {
  if (out.rows() != x.rows() || out.cols() != x.cols())
    throw std::invalid_argument("stochastic_gradient_matrix: shape mismatch");
  const int n = x.rows();
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i), iteration);
    oracle.stochastic_grad(x.row(i), i, batch, rng, out.row(i));
  }
}

Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f, const Vector& x,
                        double h) {
  if (!(h > 0)) throw ConfigError("finite_diff_grad: h must be positive");
  Vector probe = x;
  Vector grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace pushpull
