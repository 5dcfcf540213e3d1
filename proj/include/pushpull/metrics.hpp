#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pushpull/algo.hpp"
#include "pushpull/matrix.hpp"
#include "pushpull/oracle.hpp"
#include "pushpull/schedule.hpp"

namespace pushpull {

// One recorded iteration. Column order matches the CSV schema exactly.
struct IterationRecord {
  long k = 0;
  double eta = 0.0;
  double lambda = 0.0;
  double f_bar = 0.0;              // F at the consensus average
  double grad_norm_sq = 0.0;       // ||grad F(x_bar)||^2
  double e_x = 0.0;                // consensus error
  double e_v = 0.0;                // tracking error
  double e_m = 0.0;                // momentum approximation error
  double e_momentum_energy = 0.0;  // ||m_bar at k-1||^2
  double cons_residual = 0.0;      // max|v_bar - m_bar|
};

struct MetricsTrace {
  std::string algo;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;
};

// ||X - 1 (pi^T X)||_F^2 : squared deviation from the weighted consensus.
double consensus_error(const Matrix& x, const Vector& pi_r, Exec exec = Exec::Seq);

// ||V - pi (1^T V)||_F^2 : squared deviation from the stationary-aligned
// rank-one projection.
double tracking_error(const Matrix& v, const Vector& pi_c, Exec exec = Exec::Seq);

// ||M - grad F(X)||_F^2 with exact per-agent gradients (one per row).
double momentum_error(const Matrix& m, const Matrix& x, const Oracle& oracle,
                      Exec exec = Exec::Seq);

// ||(1/n) sum_i grad f_i(x_bar)||^2 at x_bar = pi_r^T X.
double grad_norm_at_consensus(const Matrix& x, const Vector& pi_r, const Oracle& oracle,
                              Exec exec = Exec::Seq);

struct AggregateTrace {
  std::vector<long> k;
  // mean and sample std (count-1 denominator) per field, in CSV column order
  std::vector<IterationRecord> mean;
  std::vector<IterationRecord> stddev;
  int count = 0;
};

// Pointwise mean / sample standard deviation across seeds. All traces must
// share the recording schedule.
AggregateTrace aggregate(const std::vector<MetricsTrace>& traces);

struct RunSpec {
  Algo algo = Algo::Smtpp;
  const Matrix* r = nullptr;
  const Matrix* c = nullptr;
  Vector pi_r;  // consensus weights for metrics; empty -> uniform
  Vector pi_c;  // tracker weights for metrics; empty -> uniform
  const Oracle* oracle = nullptr;
  StepSchedule schedule;
  double lambda = 0.1;
  int batch = 1;
  long horizon = 0;
  int record_every = 1;
  Vector x0;  // empty -> origin
  TrackerInit tracker_init = TrackerInit::Zero;
  CsgdmMode csgdm_mode = CsgdmMode::Ema;
  Exec exec = Exec::Par;
  std::string config_digest;
};

// Executes `horizon` synchronous rounds, recording metrics at k = 0 and every
// record_every-th iteration thereafter (the final iterate is always
// recorded). Fully deterministic in (spec, seed).
MetricsTrace run(const RunSpec& spec, std::uint64_t seed);

}  // namespace pushpull
