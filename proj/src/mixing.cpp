#include "pushpull/mixing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "pushpull/errors.hpp"
#include "pushpull/rng.hpp"

namespace pushpull {

RowStochastic build_row_stochastic(const DirectedGraph& g) {
  Matrix w(g.n, g.n, 0.0);
  const auto in = in_neighbors(g);
  for (int i = 0; i < g.n; ++i) {
    int deg = 0;
    for (int j : in[i])
      if (j != i) ++deg;
    const double weight = 1.0 / (deg + 1);
    w(i, i) = weight;
    for (int j : in[i])
      if (j != i) w(i, j) = weight;
  }
  return RowStochastic{std::move(w)};
}

ColStochastic build_col_stochastic(const DirectedGraph& g) {
  Matrix w(g.n, g.n, 0.0);
  const auto out = out_neighbors(g);
  for (int j = 0; j < g.n; ++j) {
    int deg = 0;
    for (int i : out[j])
      if (i != j) ++deg;
    const double weight = 1.0 / (deg + 1);
    w(j, j) = weight;
    for (int i : out[j])
      if (i != j) w(i, j) = weight;
  }
  return ColStochastic{std::move(w)};
}

namespace {

int effective_max_iter(const PowerOptions& opts, int n) {
  return opts.max_iter > 0 ? opts.max_iter : std::max(2000, 100 * n);
}

// Power iteration for the stationary vector of a stochastic operator given
// as y = apply(x). Iterates from uniform, renormalizes to sum 1.
PerronResult stationary_power(int n, const PowerOptions& opts,
                              const std::function<void(const Vector&, Vector&)>& apply) {
  const int max_iter = effective_max_iter(opts, n);
  Vector pi(n, 1.0 / n), next(n, 0.0);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    apply(pi, next);
    double sum = 0.0;
    for (double v : next) sum += v;
    for (double& v : next) v /= sum;
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - pi[i]));
    pi.swap(next);
    if (diff <= opts.tol) break;
  }
  apply(pi, next);
  double residual = 0.0;
  for (int i = 0; i < n; ++i) residual = std::max(residual, std::abs(next[i] - pi[i]));
  if (iter >= max_iter && residual > opts.tol)
    throw NumericError("perron: power iteration did not converge (residual " +
                       std::to_string(residual) + " after " + std::to_string(max_iter) +
                       " iterations); matrix may be reducible");
  return PerronResult{std::move(pi), residual, iter + 1};
}

}  // namespace

PerronResult perron_left(const RowStochastic& r, PowerOptions opts) {
  const Matrix& m = r.w;
  const int n = m.rows();
  return stationary_power(n, opts, [&](const Vector& x, Vector& y) {
    // y = R^T x
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += m(i, j) * x[i];
      y[j] = acc;
    }
  });
}

PerronResult perron_right(const ColStochastic& c, PowerOptions opts) {
  const Matrix& m = c.w;
  const int n = m.rows();
  return stationary_power(n, opts, [&](const Vector& x, Vector& y) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += m(i, j) * x[j];
      y[i] = acc;
    }
  });
}

namespace {

// Removes the dominant eigencomponent: row side projects out the all-ones
// right eigenvector via its left weights pi, column side the pi right
// eigenvector via the all-ones left weights.
void deflate(Vector& x, const Vector& pi, Side side) {
  const int n = static_cast<int>(x.size());
  if (side == Side::Row) {
    double coeff = 0.0;
    for (int i = 0; i < n; ++i) coeff += pi[i] * x[i];
    for (int i = 0; i < n; ++i) x[i] -= coeff;
  } else {
    double coeff = 0.0;
    for (int i = 0; i < n; ++i) coeff += x[i];
    for (int i = 0; i < n; ++i) x[i] -= coeff * pi[i];
  }
}

double norm2(const Vector& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

ContractionEstimate contraction_estimate(const Matrix& m, const Vector& pi, Side side,
                                         PowerOptions opts) {
  const int n = m.rows();
  if (n != m.cols() || static_cast<int>(pi.size()) != n)
    throw std::invalid_argument("contraction_estimate: shape mismatch");
  if (n == 1) return {0.0, true};

  const double tol = opts.tol > 0 ? std::max(opts.tol, 1e-13) : 1e-12;
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : std::max(5000, 200 * n);

  const auto apply = [&](const Vector& x, Vector& y) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += m(i, j) * x[j];
      y[i] = acc;
    }
    deflate(y, pi, side);
  };

  // Deterministic start vector. A structured start (e.g. alternating signs)
  // can be an exact eigenvector of the deflated operator on circulant
  // graphs, so draw from a fixed stream and restart if the iterate
  // collapses into the kernel.
  Vector u(n), v(n), w(n);
  double rho = 0.0;
  for (std::uint64_t attempt = 0; attempt < 3; ++attempt) {
    RngStream rng(0x5eedu + attempt, 0, 0);
    for (int i = 0; i < n; ++i) u[i] = rng.next_gaussian();
    deflate(u, pi, side);
    const double nu = norm2(u);
    if (nu < 1e-300) continue;
    for (double& x : u) x /= nu;
    apply(u, v);
    if (norm2(v) >= 1e-14) break;
    if (attempt == 2) return {0.0, true};  // operator vanishes on the complement
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    apply(u, v);
    const double nv = norm2(v);
    if (nv < 1e-152) return {0.0, true};  // deflated operator annihilates u
    apply(v, w);

    // Real dominant eigenvalue: Rayleigh quotient on v.
    const double vv = dot(v, v);
    const double theta = dot(v, w) / vv;
    double resid = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = w[i] - theta * v[i];
      resid += t * t;
    }
    if (std::sqrt(resid) <= tol * std::sqrt(vv) * std::max(1.0, std::abs(theta))) {
      return {std::abs(theta), true};
    }

    // Complex pair (or two close real eigenvalues): fit w = a v + b u and
    // take the largest root modulus of z^2 - a z - b.
    const double uu = dot(u, u);
    const double uv = dot(u, v);
    const double det = vv * uu - uv * uv;
    if (det > 1e-30 * vv * uu) {
      const double vw = dot(v, w);
      const double uw = dot(u, w);
      const double a = (uu * vw - uv * uw) / det;
      const double b = (vv * uw - uv * vw) / det;
      double fit = 0.0, wsq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double t = w[i] - a * v[i] - b * u[i];
        fit += t * t;
        wsq += w[i] * w[i];
      }
      if (wsq > 0 && std::sqrt(fit) <= tol * std::sqrt(wsq)) {
        const double disc = a * a + 4.0 * b;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          rho = std::max(std::abs((a + sq) / 2.0), std::abs((a - sq) / 2.0));
        } else {
          rho = std::sqrt(-b);
        }
        return {rho, true};
      }
    }

    rho = nv;  // latest one-step growth factor as the running estimate
    u = v;
    for (double& x : u) x /= nv;
  }
  return {rho, false};
}

double topology_constant(const Vector& pi_r, const Vector& pi_c, int n) {
  if (static_cast<int>(pi_r.size()) != n || static_cast<int>(pi_c.size()) != n)
    throw std::invalid_argument("topology_constant: length mismatch");
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += pi_r[i] * pi_c[i];
  const double c_pi = n * acc;
  if (!(c_pi > 0.0))
    throw NumericError("topology_constant: non-positive c_pi contradicts stationary positivity");
  return c_pi;
}

PerronData analyze_mixing(const RowStochastic& r, const ColStochastic& c, PowerOptions opts) {
  PerronData data;
  auto left = perron_left(r, opts);
  auto right = perron_right(c, opts);
  data.residual_r = left.residual;
  data.residual_c = right.residual;
  const auto est_r = contraction_estimate(r.w, left.pi, Side::Row, opts);
  const auto est_c = contraction_estimate(c.w, right.pi, Side::Col, opts);
  data.rho_r = est_r.rho;
  data.rho_c = est_c.rho;
  data.rho_r_converged = est_r.converged;
  data.rho_c_converged = est_c.converged;
  data.c_pi = topology_constant(left.pi, right.pi, r.w.rows());
  data.pi_r = std::move(left.pi);
  data.pi_c = std::move(right.pi);
  return data;
}

MixingPair build_mixing_pair(const DirectedGraph& g_r, const DirectedGraph& g_c,
                             PowerOptions opts) {
  if (g_r.n != g_c.n) throw ConfigError("mixing pair: graphs have different node counts");
  MixingPair pair{build_row_stochastic(g_r), build_col_stochastic(g_c), {}};
  pair.perron = analyze_mixing(pair.r, pair.c, opts);
  return pair;
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      const auto res =
          std::to_chars(buf, buf + sizeof buf, m(i, j), std::chars_format::general, 17);
      out.append(buf, res.ptr);
      out.push_back(j + 1 == m.cols() ? '\n' : ',');
    }
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text) {
  std::vector<Vector> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Vector row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      double value = 0.0;
      const auto res = std::from_chars(line.data() + pos, line.data() + comma, value);
      if (res.ec != std::errc{})
        throw ConfigError("matrix csv: bad number at row " + std::to_string(rows.size() + 1));
      row.push_back(value);
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError("matrix csv: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace pushpull
