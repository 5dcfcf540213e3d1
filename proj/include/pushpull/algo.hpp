#pragma once

#include <cstdint>
#include <string>

#include "pushpull/matrix.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/oracle.hpp"
#include "pushpull/parallel.hpp"

namespace pushpull {

enum class Algo { Smtpp, Stpp, Sgp, PushDiging, Csgdm };

std::string to_string(Algo algo);
Algo algo_from_string(const std::string& name);

// Tracker/momentum initialization. Zero is the conservation-friendly default
// (average tracker equals average momentum from step 0); Gradient seeds both
// with the initial stochastic gradient, the classical tracking convention.
enum class TrackerInit { Zero, Gradient };

enum class CsgdmMode { Ema, Classical };

// One synchronous round of network state. Row i of each matrix belongs to
// agent i; the centralized baseline uses a single row.
struct AlgoState {
  long k = 0;
  Matrix x;       // models (raw push-sum numerators for sgp / push_diging)
  Matrix m;       // momentum buffers
  Matrix v;       // trackers (y for push_diging)
  Matrix g_prev;  // stochastic gradients from the latest oracle round
  Vector w;       // push-sum weights, where used
};

struct StepContext {
  const Matrix* r = nullptr;  // row-stochastic pull matrix
  const Matrix* c = nullptr;  // column-stochastic push matrix
  const Oracle* oracle = nullptr;
  int batch = 1;
  std::uint64_t seed = 0;
  Exec exec = Exec::Par;
};

// --- momentum-tracking push-pull ---
// x_{k+1} = R (x_k - eta v_k);  g at x_{k+1};
// m_{k+1} = (1-lambda) m_k + lambda g;  v_{k+1} = C v_k + m_{k+1} - m_k.
AlgoState smtpp_init(const Vector& x0, int n, const StepContext& ctx,
                     TrackerInit init = TrackerInit::Zero);
AlgoState smtpp_step(const AlgoState& state, const StepContext& ctx, double eta, double lambda);

// --- gradient-tracking push-pull (momentum-free) ---
// x_{k+1} = R (x_k - eta v_k);  v_{k+1} = C v_k + g_{k+1} - g_k.
AlgoState stpp_init(const Vector& x0, int n, const StepContext& ctx,
                    TrackerInit init = TrackerInit::Zero);
AlgoState stpp_step(const AlgoState& state, const StepContext& ctx, double eta);

// --- stochastic gradient push ---
// z = x / w;  x_{k+1} = C (x - eta g(z));  w_{k+1} = C w.
AlgoState sgp_init(const Vector& x0, int n, const StepContext& ctx);
AlgoState sgp_step(const AlgoState& state, const StepContext& ctx, double eta);

// --- push-sum gradient tracking ---
// u_{k+1} = C (u - eta y);  w_{k+1} = C w;  z = u_{k+1}/w_{k+1};
// y_{k+1} = C y + g(z) - g_prev.
AlgoState push_diging_init(const Vector& x0, int n, const StepContext& ctx);
AlgoState push_diging_step(const AlgoState& state, const StepContext& ctx, double eta);

// --- centralized SGD with momentum ---
// x_{k+1} = x - eta m;  g = mean over agents at x_{k+1};
// ema: m_{k+1} = (1-lambda) m + lambda g;  classical: m_{k+1} = lambda m + g.
AlgoState csgdm_init(const Vector& x0, const StepContext& ctx);
AlgoState csgdm_step(const AlgoState& state, const StepContext& ctx, double eta, double lambda,
                     CsgdmMode mode = CsgdmMode::Ema);

// De-biased model matrix exposed for metrics: x for smtpp/stpp/csgdm, x/w
// rowwise for the push-sum methods.
void model_matrix(Algo algo, const AlgoState& state, Matrix& out, Exec exec);

}  // namespace pushpull
