#pragma once

#include <span>
#include <vector>

#include "pushpull/matrix.hpp"

namespace pushpull {

// Execution policy for the iteration kernels. Par runs row-parallel OpenMP
// loops when compiled with OpenMP; Seq is the plain-loop reference used by
// the equivalence tests and the benchmark. Both produce bit-identical
// results: every output row is computed by a single thread in a fixed
// per-row operation order, and reductions accumulate per-row partials in
// index order.
enum class Exec { Seq, Par };

int hardware_threads();

// out = w * y  (w: n x n, y: n x d)
void mat_product(const Matrix& w, const Matrix& y, Matrix& out, Exec exec);

// out = w * (x - eta * v)
void mix_descend(const Matrix& w, const Matrix& x, const Matrix& v, double eta, Matrix& out,
                 Exec exec);

// out = (1 - lambda) * m + lambda * g
void ema_update(const Matrix& m, const Matrix& g, double lambda, Matrix& out, Exec exec);

// out = w * v + m_new - m_old
void tracker_push(const Matrix& w, const Matrix& v, const Matrix& m_new, const Matrix& m_old,
                  Matrix& out, Exec exec);

// out_j = sum_i pi_i * x(i, j)   (pi^T X)
void weighted_col_sum(std::span<const double> pi, const Matrix& x, Vector& out, Exec exec);

void mean_cols(const Matrix& x, Vector& out, Exec exec);

// ||a||_F^2 with a fixed row-major accumulation order.
double frobenius_sq(const Matrix& a, Exec exec);

// ||a - b||_F^2
double sq_distance(const Matrix& a, const Matrix& b, Exec exec);

// ||a - 1 c^T||_F^2 : squared deviation of every row of a from the vector c.
double rows_minus_vector_sq(const Matrix& a, std::span<const double> c, Exec exec);

// ||a - s u^T||_F^2 with rank-one s u^T (s: n-vector, u: d-vector).
double rank_one_residual_sq(const Matrix& a, std::span<const double> s, std::span<const double> u,
                            Exec exec);

bool all_finite(const Matrix& a, Exec exec);

}  // namespace pushpull
