#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pushpull/matrix.hpp"
#include "pushpull/parallel.hpp"
#include "pushpull/rng.hpp"

namespace pushpull {

struct Sample {
  std::vector<std::pair<int, double>> features;  // (0-based index, value), ascending
  int label = 1;                                 // -1 or +1
};

struct Dataset {
  int dim = 0;
  std::vector<Sample> samples;
};

// LIBSVM text: "<label> <idx>:<val> ...", 1-based indices, labels {0,1} or
// {-1,+1}. '#' starts a comment.
Dataset parse_libsvm(std::istream& in, int dim);
Dataset parse_libsvm_file(const std::string& path, int dim);

struct Partition {
  int agents = 0;
  std::vector<std::vector<int>> members;  // sample indices per agent
};

// Deterministic seeded shuffle, then contiguous blocks whose sizes differ by
// at most one.
Partition partition_even(int sample_count, int agents, std::uint64_t seed);

// Local objective family. Logistic: mean log-loss over the agent's partition
// plus the bounded non-convex penalty sum_k alpha x_k^2 / (1 + x_k^2).
// Quadratic: 0.5 x^T A_i x + b_i^T x with additive Gaussian gradient noise of
// total variance sigma^2.
class Oracle {
 public:
  static Oracle logistic(Dataset dataset, Partition partition, double alpha);
  static Oracle quadratic(std::vector<Matrix> a, std::vector<Vector> b, double sigma);

  // Convenience generator: diagonal PSD A_i with entries in [0.5, 1.5] and
  // heterogeneous linear terms b_i of the given scale.
  static Oracle quadratic_random(int agents, int dim, double sigma, double hetero_scale,
                                 std::uint64_t seed);

  int agents() const { return agents_; }
  int dim() const { return dim_; }
  double noise_sigma() const { return sigma_; }
  bool is_quadratic() const { return kind_ == Kind::Quadratic; }

  double local_loss(std::span<const double> x, int agent) const;
  void local_grad(std::span<const double> x, int agent, std::span<double> out) const;
  void stochastic_grad(std::span<const double> x, int agent, int batch, RngStream& rng,
                       std::span<double> out) const;

  // Max-curvature heuristic: logistic uses the mean squared feature norm
  // bound, quadratic the max absolute row sum of any A_i.
  double smoothness_estimate() const;

  // Oracle-call accounting; metrics charge exact calls, algorithms
  // stochastic ones.
  long exact_calls() const { return exact_calls_.load(std::memory_order_relaxed); }
  long stochastic_calls() const { return stochastic_calls_.load(std::memory_order_relaxed); }

  Oracle(const Oracle&);
  Oracle& operator=(const Oracle&) = delete;
  Oracle(Oracle&&) noexcept;

 private:
  Oracle() = default;

  enum class Kind { Logistic, Quadratic };
  Kind kind_ = Kind::Logistic;
  int agents_ = 0;
  int dim_ = 0;

  Dataset dataset_;
  Partition partition_;
  double alpha_ = 0.0;

  std::vector<Matrix> a_;
  std::vector<Vector> b_;
  double sigma_ = 0.0;

  mutable std::atomic<long> exact_calls_{0};
  mutable std::atomic<long> stochastic_calls_{0};

  void sample_grad_accum(std::span<const double> x, int sample, double scale,
                         std::span<double> out) const;
};

// Exact per-row gradients of the local objectives at the rows of x.
void gradient_matrix(const Oracle& oracle, const Matrix& x, Matrix& out, Exec exec);

// Per-row stochastic gradients; agent i draws from the stream keyed
// (seed, i, iteration) regardless of thread assignment.
void stochastic_gradient_matrix(const Oracle& oracle, const Matrix& x, int batch,
                                std::uint64_t seed, std::uint64_t iteration, Matrix& out,
                                Exec exec);

// Central finite differences, one probe pair per coordinate.
Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f, const Vector& x,
                        double h);

}  // namespace pushpull
