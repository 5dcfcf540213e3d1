#include "pushpull/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "pushpull/errors.hpp"
#include "pushpull/parallel.hpp"

namespace pushpull {

double consensus_error(const Matrix& x, const Vector& pi_r, Exec exec) {
  if (static_cast<int>(pi_r.size()) != x.rows())
    throw std::invalid_argument("consensus_error: weight length mismatch");
  Vector xbar;
  weighted_col_sum(pi_r, x, xbar, exec);
  return rows_minus_vector_sq(x, xbar, exec);
}

double tracking_error(const Matrix& v, const Vector& pi_c, Exec exec) {
  if (static_cast<int>(pi_c.size()) != v.rows())
    throw std::invalid_argument("tracking_error: weight length mismatch");
  Vector colsum;
  Vector ones(v.rows(), 1.0);
  weighted_col_sum(ones, v, colsum, exec);
  return rank_one_residual_sq(v, pi_c, colsum, exec);
}

double momentum_error(const Matrix& m, const Matrix& x, const Oracle& oracle, Exec exec) {
  if (m.rows() != x.rows() || m.cols() != x.cols())
    throw std::invalid_argument("momentum_error: shape mismatch");
  Matrix grads(x.rows(), x.cols());
  gradient_matrix(oracle, x, grads, exec);
  return sq_distance(m, grads, exec);
}

double grad_norm_at_consensus(const Matrix& x, const Vector& pi_r, const Oracle& oracle,
                              Exec exec) {
  Vector xbar;
  weighted_col_sum(pi_r, x, xbar, exec);
  const int agents = oracle.agents();
  const int d = oracle.dim();
  Matrix per_agent(agents, d);
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int i = 0; i < agents; ++i) oracle.local_grad(xbar, i, per_agent.row(i));
  Vector mean;
  mean_cols(per_agent, mean, exec);
  double acc = 0.0;
  for (double g : mean) acc += g * g;
  return acc;
}

AggregateTrace aggregate(const std::vector<MetricsTrace>& traces) {
  if (traces.empty()) throw ConfigError("aggregate: no traces");
  const auto& first = traces.front();
  for (const auto& t : traces) {
    if (t.records.size() != first.records.size())
      throw ConfigError("aggregate: traces have different record counts");
    for (std::size_t i = 0; i < t.records.size(); ++i)
      if (t.records[i].k != first.records[i].k)
        throw ConfigError("aggregate: traces recorded at different iterations");
  }

  const int count = static_cast<int>(traces.size());
  const std::size_t len = first.records.size();
  AggregateTrace agg;
  agg.count = count;
  agg.k.reserve(len);
  agg.mean.resize(len);
  agg.stddev.resize(len);

  constexpr int kFields = 9;
  const auto fields = [](const IterationRecord& r) {
    return std::array<double, kFields>{r.eta,  r.lambda, r.f_bar,
                                       r.grad_norm_sq, r.e_x, r.e_v,
                                       r.e_m,  r.e_momentum_energy, r.cons_residual};
  };
  const auto assign = [](IterationRecord& r, const std::array<double, kFields>& f) {
    r.eta = f[0];
    r.lambda = f[1];
    r.f_bar = f[2];
    r.grad_norm_sq = f[3];
    r.e_x = f[4];
    r.e_v = f[5];
    r.e_m = f[6];
    r.e_momentum_energy = f[7];
    r.cons_residual = f[8];
  };

  for (std::size_t i = 0; i < len; ++i) {
    agg.k.push_back(first.records[i].k);
    std::array<double, kFields> mean{};
    for (const auto& t : traces) {
      const auto f = fields(t.records[i]);
      for (int j = 0; j < kFields; ++j) mean[j] += f[j];
    }
    for (int j = 0; j < kFields; ++j) mean[j] /= count;
    std::array<double, kFields> var{};
    if (count > 1) {
      for (const auto& t : traces) {
        const auto f = fields(t.records[i]);
        for (int j = 0; j < kFields; ++j) {
          const double dev = f[j] - mean[j];
          var[j] += dev * dev;
        }
      }
      for (int j = 0; j < kFields; ++j) var[j] = std::sqrt(var[j] / (count - 1));
    }
    agg.mean[i].k = first.records[i].k;
    agg.stddev[i].k = first.records[i].k;
    assign(agg.mean[i], mean);
    assign(agg.stddev[i], var);
  }
  return agg;
}

namespace {

struct MetricsContext {
  const RunSpec* spec;
  Vector pi_r;  // consensus weights sized to the state
  Vector pi_c;
  Vector prev_momentum_mean;  // m_bar at k-1
  bool has_prev = false;
};

double f_at(const Oracle& oracle, const Vector& x) {
  double acc = 0.0;
  for (int i = 0; i < oracle.agents(); ++i) acc += oracle.local_loss(x, i);
  return acc / oracle.agents();
}

IterationRecord record_state(const MetricsContext& mctx, const AlgoState& state, Matrix& models,
                             double eta_k) {
  const RunSpec& spec = *mctx.spec;
  const Oracle& oracle = *spec.oracle;
  const Exec exec = spec.exec;
  model_matrix(spec.algo, state, models, exec);

  IterationRecord rec;
  rec.k = state.k;
  rec.eta = eta_k;
  rec.lambda = spec.lambda;

  Vector xbar;
  weighted_col_sum(mctx.pi_r, models, xbar, exec);
  rec.f_bar = f_at(oracle, xbar);
  rec.grad_norm_sq = grad_norm_at_consensus(models, mctx.pi_r, oracle, exec);
  rec.e_x = consensus_error(models, mctx.pi_r, exec);

  const bool has_tracker =
      spec.algo == Algo::Smtpp || spec.algo == Algo::Stpp || spec.algo == Algo::PushDiging;
  if (has_tracker) rec.e_v = tracking_error(state.v, mctx.pi_c, exec);

  // Momentum proxy: the EMA buffer for smtpp/csgdm, the latest gradient round
  // for the tracking baselines.
  const Matrix* momentum = nullptr;
  switch (spec.algo) {
    case Algo::Smtpp:
    case Algo::Csgdm:
    case Algo::Stpp:
      momentum = &state.m;
      break;
    case Algo::PushDiging:
      momentum = &state.g_prev;
      break;
    case Algo::Sgp:
      break;
  }
  if (spec.algo == Algo::Csgdm) {
    // Single model: compare the momentum buffer with the full gradient of F.
    Matrix per_agent(oracle.agents(), models.cols());
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
    for (int i = 0; i < oracle.agents(); ++i)
      oracle.local_grad(models.row(0), i, per_agent.row(i));
    Vector mean;
    mean_cols(per_agent, mean, exec);
    double acc = 0.0;
    for (int j = 0; j < models.cols(); ++j) {
      const double t = state.m(0, j) - mean[j];
      acc += t * t;
    }
    rec.e_m = acc;
  } else if (momentum != nullptr && !momentum->empty()) {
    rec.e_m = momentum_error(*momentum, models, oracle, exec);
  }

  rec.e_momentum_energy = 0.0;
  if (mctx.has_prev) {
    double acc = 0.0;
    for (double v : mctx.prev_momentum_mean) acc += v * v;
    rec.e_momentum_energy = acc;
  }

  if (spec.algo == Algo::Sgp) {
    double wsum = 0.0;
    for (double w : state.w) wsum += w;
    rec.cons_residual = std::abs(wsum / state.w.size() - 1.0);
  } else if (momentum != nullptr && !state.v.empty()) {
    Vector vbar, mbar;
    mean_cols(state.v, vbar, exec);
    mean_cols(*momentum, mbar, exec);
    double worst = 0.0;
    for (std::size_t j = 0; j < vbar.size(); ++j)
      worst = std::max(worst, std::abs(vbar[j] - mbar[j]));
    rec.cons_residual = worst;
  }
  return rec;
}

void update_prev_momentum(MetricsContext& mctx, const AlgoState& state, Exec exec) {
  const Matrix* momentum = nullptr;
  switch (mctx.spec->algo) {
    case Algo::Smtpp:
    case Algo::Csgdm:
    case Algo::Stpp:
      momentum = &state.m;
      break;
    case Algo::PushDiging:
      momentum = &state.g_prev;
      break;
    case Algo::Sgp:
      return;
  }
  if (momentum->empty()) return;
  mean_cols(*momentum, mctx.prev_momentum_mean, exec);
  mctx.has_prev = true;
}

}  // namespace

MetricsTrace run(const RunSpec& spec, std::uint64_t seed) {
  if (spec.oracle == nullptr) throw std::invalid_argument("run: missing oracle");
  if (spec.horizon < 0) throw ConfigError("run: horizon must be >= 0");
  if (spec.record_every < 1) throw ConfigError("run: record_every must be >= 1");
  if (!(spec.lambda > 0 && spec.lambda <= 1))
    throw ConfigError("run: lambda must be in (0,1]");

  const Oracle& oracle = *spec.oracle;
  const int d = oracle.dim();
  Vector x0 = spec.x0.empty() ? Vector(d, 0.0) : spec.x0;
  if (static_cast<int>(x0.size()) != d) throw ConfigError("run: x0 dimension mismatch");

  StepContext ctx;
  ctx.r = spec.r;
  ctx.c = spec.c;
  ctx.oracle = spec.oracle;
  ctx.batch = spec.batch;
  ctx.seed = seed;
  ctx.exec = spec.exec;

  AlgoState state;
  switch (spec.algo) {
    case Algo::Smtpp:
      state = smtpp_init(x0, spec.r ? spec.r->rows() : oracle.agents(), ctx, spec.tracker_init);
      break;
    case Algo::Stpp:
      state = stpp_init(x0, spec.r ? spec.r->rows() : oracle.agents(), ctx, spec.tracker_init);
      break;
    case Algo::Sgp:
      state = sgp_init(x0, spec.c ? spec.c->rows() : oracle.agents(), ctx);
      break;
    case Algo::PushDiging:
      state = push_diging_init(x0, spec.c ? spec.c->rows() : oracle.agents(), ctx);
      break;
    case Algo::Csgdm:
      state = csgdm_init(x0, ctx);
      break;
  }

  MetricsContext mctx;
  mctx.spec = &spec;
  const int rows = state.x.rows();
  mctx.pi_r = spec.pi_r.empty() ? Vector(rows, 1.0 / rows) : spec.pi_r;
  mctx.pi_c = spec.pi_c.empty() ? Vector(rows, 1.0 / rows) : spec.pi_c;
  if (static_cast<int>(mctx.pi_r.size()) != rows || static_cast<int>(mctx.pi_c.size()) != rows)
    throw ConfigError("run: metric weight length mismatch");

  MetricsTrace trace;
  trace.algo = to_string(spec.algo);
  trace.config_digest = spec.config_digest;
  trace.seed = seed;

  Matrix models(rows, d);
  trace.records.push_back(record_state(mctx, state, models, spec.schedule.eta(0)));

  for (long k = 0; k < spec.horizon; ++k) {
    const double eta_k = spec.schedule.eta(k);
    update_prev_momentum(mctx, state, spec.exec);
    switch (spec.algo) {
      case Algo::Smtpp:
        state = smtpp_step(state, ctx, eta_k, spec.lambda);
        break;
      case Algo::Stpp:
        state = stpp_step(state, ctx, eta_k);
        break;
      case Algo::Sgp:
        state = sgp_step(state, ctx, eta_k);
        break;
      case Algo::PushDiging:
        state = push_diging_step(state, ctx, eta_k);
        break;
      case Algo::Csgdm:
        state = csgdm_step(state, ctx, eta_k, spec.lambda, spec.csgdm_mode);
        break;
    }
    if (state.k % spec.record_every == 0 || state.k == spec.horizon)
      trace.records.push_back(
          record_state(mctx, state, models, spec.schedule.eta(state.k)));
  }
  return trace;
}

}  // namespace pushpull
