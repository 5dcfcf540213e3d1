#include "pushpull/algo.hpp"

#include <cmath>

#include "pushpull/errors.hpp"

namespace pushpull {

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::Smtpp:
      return "smtpp";
    case Algo::Stpp:
      return "stpp";
    case Algo::Sgp:
      return "sgp";
    case Algo::PushDiging:
      return "push_diging";
    case Algo::Csgdm:
      return "csgdm";
  }
  return "?";
}

Algo algo_from_string(const std::string& name) {
  if (name == "smtpp") return Algo::Smtpp;
  if (name == "stpp") return Algo::Stpp;
  if (name == "sgp") return Algo::Sgp;
  if (name == "push_diging") return Algo::PushDiging;
  if (name == "csgdm") return Algo::Csgdm;
  throw ConfigError("unknown algorithm '" + name +
                    "' (valid: smtpp, stpp, sgp, push_diging, csgdm)");
}

namespace {

Matrix broadcast_rows(const Vector& x0, int n) {
  Matrix x(n, static_cast<int>(x0.size()));
  for (int i = 0; i < n; ++i) {
    auto row = x.row(i);
    std::copy(x0.begin(), x0.end(), row.begin());
  }
  return x;
}

void require_finite(const Matrix& a, long k, const char* what, Exec exec) {
  if (!all_finite(a, exec))
    throw NumericError(std::string("non-finite ") + what + " at iteration " + std::to_string(k));
}

void check_ctx(const StepContext& ctx, bool needs_r, bool needs_c) {
  if (ctx.oracle == nullptr) throw std::invalid_argument("step: missing oracle");
  if (needs_r && ctx.r == nullptr) throw std::invalid_argument("step: missing pull matrix");
  if (needs_c && ctx.c == nullptr) throw std::invalid_argument("step: missing push matrix");
}

}  // namespace

AlgoState smtpp_init(const Vector& x0, int n, const StepContext& ctx, TrackerInit init) {
  check_ctx(ctx, false, false);
  AlgoState s;
  const int d = static_cast<int>(x0.size());
  s.x = broadcast_rows(x0, n);
  s.m = Matrix(n, d, 0.0);
  s.v = Matrix(n, d, 0.0);
  s.g_prev = Matrix(n, d, 0.0);
  stochastic_gradient_matrix(*ctx.oracle, s.x, ctx.batch, ctx.seed, 0, s.g_prev, ctx.exec);
  if (init == TrackerInit::Gradient) {
    s.m = s.g_prev;
    s.v = s.g_prev;
  }
  return s;
}

AlgoState smtpp_step(const AlgoState& state, const StepContext& ctx, double eta, double lambda) {
  check_ctx(ctx, true, true);
  if (!(eta > 0)) throw ConfigError("smtpp_step: eta must be > 0");
  if (!(lambda > 0 && lambda <= 1)) throw ConfigError("smtpp_step: lambda must be in (0,1]");
  const int n = state.x.rows();
  const int d = state.x.cols();
  AlgoState next;
  next.k = state.k + 1;
  next.x = Matrix(n, d);
  next.m = Matrix(n, d);
  next.v = Matrix(n, d);
  next.g_prev = Matrix(n, d);

  mix_descend(*ctx.r, state.x, state.v, eta, next.x, ctx.exec);                       // pull
  stochastic_gradient_matrix(*ctx.oracle, next.x, ctx.batch, ctx.seed,
                             static_cast<std::uint64_t>(next.k), next.g_prev, ctx.exec);
  ema_update(state.m, next.g_prev, lambda, next.m, ctx.exec);                         // filter
  tracker_push(*ctx.c, state.v, next.m, state.m, next.v, ctx.exec);                   // push

  require_finite(next.x, next.k, "model", ctx.exec);
  require_finite(next.v, next.k, "tracker", ctx.exec);
  return next;
}

AlgoState stpp_init(const Vector& x0, int n, const StepContext& ctx, TrackerInit init) {
  check_ctx(ctx, false, false);
  AlgoState s;
  const int d = static_cast<int>(x0.size());
  s.x = broadcast_rows(x0, n);
  s.v = Matrix(n, d, 0.0);
  s.m = Matrix(n, d, 0.0);  // stands in for the previous gradient round
  s.g_prev = Matrix(n, d, 0.0);
  Matrix g0(n, d);
  stochastic_gradient_matrix(*ctx.oracle, s.x, ctx.batch, ctx.seed, 0, g0, ctx.exec);
  if (init == TrackerInit::Gradient) {
    s.v = g0;
    s.m = g0;
    s.g_prev = g0;
  }
  return s;
}

AlgoState stpp_step(const AlgoState& state, const StepContext& ctx, double eta) {
  check_ctx(ctx, true, true);
  if (!(eta > 0)) throw ConfigError("stpp_step: eta must be > 0");
  const int n = state.x.rows();
  const int d = state.x.cols();
  AlgoState next;
  next.k = state.k + 1;
  next.x = Matrix(n, d);
  next.g_prev = Matrix(n, d);
  next.v = Matrix(n, d);

  mix_descend(*ctx.r, state.x, state.v, eta, next.x, ctx.exec);
  stochastic_gradient_matrix(*ctx.oracle, next.x, ctx.batch, ctx.seed,
                             static_cast<std::uint64_t>(next.k), next.g_prev, ctx.exec);
  tracker_push(*ctx.c, state.v, next.g_prev, state.g_prev, next.v, ctx.exec);
  next.m = next.g_prev;

  require_finite(next.x, next.k, "model", ctx.exec);
  require_finite(next.v, next.k, "tracker", ctx.exec);
  return next;
}

AlgoState sgp_init(const Vector& x0, int n, const StepContext& ctx) {
  check_ctx(ctx, false, false);
  AlgoState s;
  s.x = broadcast_rows(x0, n);
  s.w.assign(n, 1.0);
  return s;
}

AlgoState sgp_step(const AlgoState& state, const StepContext& ctx, double eta) {
  check_ctx(ctx, false, true);
  if (!(eta > 0)) throw ConfigError("sgp_step: eta must be > 0");
  const int n = state.x.rows();
  const int d = state.x.cols();
  for (int i = 0; i < n; ++i)
    if (state.w[i] < 1e-12)
      throw NumericError("sgp: push-sum weight degenerate (w[" + std::to_string(i) + "] = " +
                         std::to_string(state.w[i]) + ") at iteration " + std::to_string(state.k));

  Matrix z(n, d);
#pragma omp parallel for schedule(static) if (ctx.exec == Exec::Par)
  for (int i = 0; i < n; ++i) {
    const double inv = 1.0 / state.w[i];
    const double* xi = state.x.row(i).data();
    double* zi = z.row(i).data();
    for (int j = 0; j < d; ++j) zi[j] = xi[j] * inv;
  }
  Matrix g(n, d);
  stochastic_gradient_matrix(*ctx.oracle, z, ctx.batch, ctx.seed,
                             static_cast<std::uint64_t>(state.k), g, ctx.exec);

  AlgoState next;
  next.k = state.k + 1;
  next.x = Matrix(n, d);
  mix_descend(*ctx.c, state.x, g, eta, next.x, ctx.exec);
  next.w.assign(n, 0.0);
  const Matrix& c = *ctx.c;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += c(i, j) * state.w[j];
    next.w[i] = acc;
  }
  require_finite(next.x, next.k, "model", ctx.exec);
  return next;
}

AlgoState push_diging_init(const Vector& x0, int n, const StepContext& ctx) {
  check_ctx(ctx, false, false);
  AlgoState s;
  const int d = static_cast<int>(x0.size());
  s.x = broadcast_rows(x0, n);
  s.w.assign(n, 1.0);
  s.v = Matrix(n, d);
  stochastic_gradient_matrix(*ctx.oracle, s.x, ctx.batch, ctx.seed, 0, s.v, ctx.exec);
  s.g_prev = s.v;
  return s;
}

AlgoState push_diging_step(const AlgoState& state, const StepContext& ctx, double eta) {
  check_ctx(ctx, false, true);
  if (!(eta > 0)) throw ConfigError("push_diging_step: eta must be > 0");
  const int n = state.x.rows();
  const int d = state.x.cols();
  for (int i = 0; i < n; ++i)
    if (state.w[i] < 1e-12)
      throw NumericError("push_diging: push-sum weight degenerate (w[" + std::to_string(i) +
                         "]) at iteration " + std::to_string(state.k));

  AlgoState next;
  next.k = state.k + 1;
  next.x = Matrix(n, d);
  mix_descend(*ctx.c, state.x, state.v, eta, next.x, ctx.exec);
  next.w.assign(n, 0.0);
  const Matrix& c = *ctx.c;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += c(i, j) * state.w[j];
    next.w[i] = acc;
  }

  Matrix z(n, d);
#pragma omp parallel for schedule(static) if (ctx.exec == Exec::Par)
  for (int i = 0; i < n; ++i) {
    const double inv = 1.0 / next.w[i];
    const double* xi = next.x.row(i).data();
    double* zi = z.row(i).data();
    for (int j = 0; j < d; ++j) zi[j] = xi[j] * inv;
  }
  next.g_prev = Matrix(n, d);
  stochastic_gradient_matrix(*ctx.oracle, z, ctx.batch, ctx.seed,
                             static_cast<std::uint64_t>(next.k), next.g_prev, ctx.exec);
  next.v = Matrix(n, d);
  tracker_push(*ctx.c, state.v, next.g_prev, state.g_prev, next.v, ctx.exec);

  require_finite(next.x, next.k, "model", ctx.exec);
  require_finite(next.v, next.k, "tracker", ctx.exec);
  return next;
}

AlgoState csgdm_init(const Vector& x0, const StepContext& ctx) {
  check_ctx(ctx, false, false);
  AlgoState s;
  const int d = static_cast<int>(x0.size());
  s.x = broadcast_rows(x0, 1);
  s.m = Matrix(1, d, 0.0);
  s.g_prev = Matrix(1, d, 0.0);
  Matrix per_agent(ctx.oracle->agents(), d);
  Matrix shared = broadcast_rows(x0, ctx.oracle->agents());
  stochastic_gradient_matrix(*ctx.oracle, shared, ctx.batch, ctx.seed, 0, per_agent, ctx.exec);
  Vector mean;
  mean_cols(per_agent, mean, ctx.exec);
  std::copy(mean.begin(), mean.end(), s.g_prev.row(0).begin());
  return s;
}

AlgoState csgdm_step(const AlgoState& state, const StepContext& ctx, double eta, double lambda,
                     CsgdmMode mode) {
  check_ctx(ctx, false, false);
  if (!(eta > 0)) throw ConfigError("csgdm_step: eta must be > 0");
  if (!(lambda > 0 && lambda <= 1)) throw ConfigError("csgdm_step: lambda must be in (0,1]");
  const int d = state.x.cols();
  const int agents = ctx.oracle->agents();

  AlgoState next;
  next.k = state.k + 1;
  next.x = Matrix(1, d);
  {
    const double* x = state.x.row(0).data();
    const double* m = state.m.row(0).data();
    double* dst = next.x.row(0).data();
    for (int j = 0; j < d; ++j) dst[j] = x[j] - eta * m[j];
  }

  Matrix shared(agents, d);
  for (int i = 0; i < agents; ++i) {
    auto row = shared.row(i);
    const auto src = next.x.row(0);
    std::copy(src.begin(), src.end(), row.begin());
  }
  Matrix per_agent(agents, d);
  stochastic_gradient_matrix(*ctx.oracle, shared, ctx.batch, ctx.seed,
                             static_cast<std::uint64_t>(next.k), per_agent, ctx.exec);
  next.g_prev = Matrix(1, d);
  Vector mean;
  mean_cols(per_agent, mean, ctx.exec);
  std::copy(mean.begin(), mean.end(), next.g_prev.row(0).begin());

  next.m = Matrix(1, d);
  {
    const double* m = state.m.row(0).data();
    const double* g = next.g_prev.row(0).data();
    double* dst = next.m.row(0).data();
    if (mode == CsgdmMode::Ema) {
      for (int j = 0; j < d; ++j) dst[j] = (1.0 - lambda) * m[j] + lambda * g[j];
    } else {
      for (int j = 0; j < d; ++j) dst[j] = lambda * m[j] + g[j];
    }
  }
  require_finite(next.x, next.k, "model", ctx.exec);
  return next;
}

void model_matrix(Algo algo, const AlgoState& state, Matrix& out, Exec exec) {
  const int n = state.x.rows();
  const int d = state.x.cols();
  if (out.rows() != n || out.cols() != d) out = Matrix(n, d);
  if (algo == Algo::Sgp || algo == Algo::PushDiging) {
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
    for (int i = 0; i < n; ++i) {
      const double inv = 1.0 / state.w[i];
      const double* xi = state.x.row(i).data();
      double* oi = out.row(i).data();
      for (int j = 0; j < d; ++j) oi[j] = xi[j] * inv;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const auto src = state.x.row(i);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
  }
}

}  // namespace pushpull
