#include "pushpull/parallel.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pushpull {

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

void check_product_shapes(const Matrix& w, const Matrix& y, const Matrix& out) {
  if (w.cols() != y.rows() || out.rows() != w.rows() || out.cols() != y.cols())
    throw std::invalid_argument("mat_product: shape mismatch");
}

inline void product_row(const Matrix& w, const Matrix& y, Matrix& out, int i) {
  const int n = w.cols();
  const int d = y.cols();
  double* dst = out.row(i).data();
  for (int j = 0; j < d; ++j) dst[j] = 0.0;
  for (int k = 0; k < n; ++k) {
    const double wik = w(i, k);
    if (wik == 0.0) continue;
    const double* src = y.row(k).data();
    for (int j = 0; j < d; ++j) dst[j] += wik * src[j];
  }
}

inline void mix_descend_row(const Matrix& w, const Matrix& x, const Matrix& v, double eta,
                            Matrix& out, int i) {
  const int n = w.cols();
  const int d = x.cols();
  double* dst = out.row(i).data();
  for (int j = 0; j < d; ++j) dst[j] = 0.0;
  for (int k = 0; k < n; ++k) {
    const double wik = w(i, k);
    if (wik == 0.0) continue;
    const double* xk = x.row(k).data();
    const double* vk = v.row(k).data();
    for (int j = 0; j < d; ++j) dst[j] += wik * (xk[j] - eta * vk[j]);
  }
}

}  // namespace

void mat_product(const Matrix& w, const Matrix& y, Matrix& out, Exec exec) {
  check_product_shapes(w, y, out);
  const int n = w.rows();
  if (exec == Exec::Par) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) product_row(w, y, out, i);
  } else {
    for (int i = 0; i < n; ++i) product_row(w, y, out, i);
  }
}

void mix_descend(const Matrix& w, const Matrix& x, const Matrix& v, double eta, Matrix& out,
                 Exec exec) {
  check_product_shapes(w, x, out);
  if (v.rows() != x.rows() || v.cols() != x.cols())
    throw std::invalid_argument("mix_descend: shape mismatch");
  const int n = w.rows();
  if (exec == Exec::Par) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) mix_descend_row(w, x, v, eta, out, i);
  } else {
    for (int i = 0; i < n; ++i) mix_descend_row(w, x, v, eta, out, i);
  }
}

void ema_update(const Matrix& m, const Matrix& g, double lambda, Matrix& out, Exec exec) {
  if (m.rows() != g.rows() || m.cols() != g.cols())
    throw std::invalid_argument("ema_update: shape mismatch");
  const int n = m.rows();
  const int d = m.cols();
  const double keep = 1.0 - lambda;
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int i = 0; i < n; ++i) {
    const double* mi = m.row(i).data();
    const double* gi = g.row(i).data();
    double* dst = out.row(i).data();
    for (int j = 0; j < d; ++j) dst[j] = keep * mi[j] + lambda * gi[j];
  }
}

void tracker_push(const Matrix& w, const Matrix& v, const Matrix& m_new, const Matrix& m_old,
                  Matrix& out, Exec exec) {
  check_product_shapes(w, v, out);
  const int n = w.rows();
  const int d = v.cols();
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int i = 0; i < n; ++i) {
    product_row(w, v, out, i);
    const double* mn = m_new.row(i).data();
    const double* mo = m_old.row(i).data();
    double* dst = out.row(i).data();
    for (int j = 0; j < d; ++j) dst[j] += mn[j] - mo[j];
  }
}

void weighted_col_sum(std::span<const double> pi, const Matrix& x, Vector& out, Exec exec) {
  if (static_cast<int>(pi.size()) != x.rows())
    throw std::invalid_argument("weighted_col_sum: weight length mismatch");
  const int n = x.rows();
  const int d = x.cols();
  out.assign(d, 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += pi[i] * x(i, j);
    out[j] = acc;
  }
}

void mean_cols(const Matrix& x, Vector& out, Exec exec) {
  const int n = x.rows();
  const int d = x.cols();
  out.assign(d, 0.0);
  const double inv = 1.0 / n;
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x(i, j);
    out[j] = acc * inv;
  }
}

namespace {

// Reductions: per-row partials land in a buffer, then a serial index-order
// sum. Keeps the result independent of the thread count.
template <typename RowFn>
double rowwise_reduce(int n, Exec exec, RowFn&& fn) {
  Vector partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::Par)
  for (int i = 0; i < n; ++i) partial[i] = fn(i);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += partial[i];
  return total;
}

}  // namespace

double frobenius_sq(const Matrix& a, Exec exec) {
  const int d = a.cols();
  return rowwise_reduce(a.rows(), exec, [&](int i) {
    const double* ai = a.row(i).data();
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += ai[j] * ai[j];
    return acc;
  });
}

double sq_distance(const Matrix& a, const Matrix& b, Exec exec) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("sq_distance: shape mismatch");
  const int d = a.cols();
  return rowwise_reduce(a.rows(), exec, [&](int i) {
    const double* ai = a.row(i).data();
    const double* bi = b.row(i).data();
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double t = ai[j] - bi[j];
      acc += t * t;
    }
    return acc;
  });
}

double rows_minus_vector_sq(const Matrix& a, std::span<const double> c, Exec exec) {
  if (static_cast<int>(c.size()) != a.cols())
    throw std::invalid_argument("rows_minus_vector_sq: vector length mismatch");
  const int d = a.cols();
  return rowwise_reduce(a.rows(), exec, [&](int i) {
    const double* ai = a.row(i).data();
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double t = ai[j] - c[j];
      acc += t * t;
    }
    return acc;
  });
}

double rank_one_residual_sq(const Matrix& a, std::span<const double> s, std::span<const double> u,
                            Exec exec) {
  if (static_cast<int>(s.size()) != a.rows() || static_cast<int>(u.size()) != a.cols())
    throw std::invalid_argument("rank_one_residual_sq: shape mismatch");
  const int d = a.cols();
  return rowwise_reduce(a.rows(), exec, [&](int i) {
    const double* ai = a.row(i).data();
    const double si = s[i];
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double t = ai[j] - si * u[j];
      acc += t * t;
    }
    return acc;
  });
}

bool all_finite(const Matrix& a, Exec exec) {
  const int d = a.cols();
  const double bad = rowwise_reduce(a.rows(), exec, [&](int i) {
    const double* ai = a.row(i).data();
    for (int j = 0; j < d; ++j)
      if (!std::isfinite(ai[j])) return 1.0;
    return 0.0;
  });
  return bad == 0.0;
}

}  // namespace pushpull
