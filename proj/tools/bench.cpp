// Kernel benchmark: times the iteration pipeline under the serial reference
// and the OpenMP path and checks that both produce bit-identical traces.
//
//   pushpull-bench [n] [d] [steps]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "pushpull/algo.hpp"
#include "pushpull/metrics.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/parallel.hpp"

using namespace pushpull;

namespace {

double time_run(const RunSpec& spec, std::uint64_t seed, MetricsTrace& trace) {
  const auto start = std::chrono::steady_clock::now();
  trace = run(spec, seed);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool traces_equal(const MetricsTrace& a, const MetricsTrace& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.k != rb.k || ra.f_bar != rb.f_bar || ra.grad_norm_sq != rb.grad_norm_sq ||
        ra.e_x != rb.e_x || ra.e_v != rb.e_v || ra.e_m != rb.e_m ||
        ra.cons_residual != rb.cons_residual)
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 32;
  const int d = argc > 2 ? std::atoi(argv[2]) : 512;
  const long steps = argc > 3 ? std::atol(argv[3]) : 200;

  const auto topo = gen_exponential(n);
  const MixingPair mixing = build_mixing_pair(topo, topo);
  const Oracle oracle = Oracle::quadratic_random(n, d, 1.0, 1.0, 9);

  RunSpec spec;
  spec.algo = Algo::Smtpp;
  spec.r = &mixing.r.w;
  spec.c = &mixing.c.w;
  spec.pi_r = mixing.perron.pi_r;
  spec.pi_c = mixing.perron.pi_c;
  spec.oracle = &oracle;
  spec.schedule = StepSchedule::constant(0.01);
  spec.lambda = 0.1;
  spec.horizon = steps;
  spec.record_every = 10;

  std::printf("smtpp benchmark: n=%d d=%d steps=%ld threads=%d\n", n, d, steps,
              hardware_threads());

  MetricsTrace serial_trace, parallel_trace;
  spec.exec = Exec::Seq;
  const double t_serial = time_run(spec, 1, serial_trace);
  spec.exec = Exec::Par;
  const double t_parallel = time_run(spec, 1, parallel_trace);

  std::printf("serial reference: %8.3f ms\n", t_serial * 1e3);
  std::printf("openmp kernels:   %8.3f ms  (speedup %.2fx)\n", t_parallel * 1e3,
              t_serial / t_parallel);
  if (!traces_equal(serial_trace, parallel_trace)) {
    std::printf("FAIL: serial and parallel traces differ\n");
    return 1;
  }
  std::printf("traces identical: yes\n");
  return 0;
}
