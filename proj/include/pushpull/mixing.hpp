#pragma once

#include <string>

#include "pushpull/graph.hpp"
#include "pushpull/matrix.hpp"

namespace pushpull {

// Row-stochastic pull matrix: rows sum to 1, positive diagonal, off-diagonal
// support exactly the in-edges of the source graph.
struct RowStochastic {
  Matrix w;
};

// Column-stochastic push matrix: columns sum to 1, positive diagonal,
// off-diagonal support exactly the out-edges of the source graph.
struct ColStochastic {
  Matrix w;
};

// Uniform weights over in-neighbors plus self: R_ij = 1/(indeg_i + 1).
// A node with no in-neighbors gets the identity row.
RowStochastic build_row_stochastic(const DirectedGraph& g);

// Uniform weights over out-neighbors plus self: C_ij = 1/(outdeg_j + 1).
ColStochastic build_col_stochastic(const DirectedGraph& g);

struct PerronResult {
  Vector pi;        // positive, sums to 1
  double residual;  // max-norm fixed-point residual
  int iterations;
};

struct PowerOptions {
  double tol = 1e-12;
  int max_iter = 0;  // 0: max(2000, 100 n)
};

// Left stationary vector: pi^T R = pi^T, via power iteration on R^T from the
// uniform vector, renormalized to sum 1 each step. Throws NumericError
// carrying the residual if the fixed point is not reached.
PerronResult perron_left(const RowStochastic& r, PowerOptions opts = {});

// Right stationary vector: C pi = pi.
PerronResult perron_right(const ColStochastic& c, PowerOptions opts = {});

enum class Side { Row, Col };

struct ContractionEstimate {
  double rho = 0.0;      // second-largest eigenvalue modulus
  bool converged = true;  // false: max_iter hit, estimate is low-confidence
};

// Second-largest eigenvalue modulus of a stochastic matrix, by power
// iteration on the deflated operator M - Pi (Pi = 1 pi^T for the row side,
// pi 1^T for the column side). Deterministic alternating-sign start vector,
// re-orthogonalized against the dominant direction every step. Handles a
// complex second pair through a two-term recurrence fit.
ContractionEstimate contraction_estimate(const Matrix& m, const Vector& pi, Side side,
                                         PowerOptions opts = {});

// n * pi_r . pi_c, the tracking projection constant. Strictly positive for
// valid stationary vectors.
double topology_constant(const Vector& pi_r, const Vector& pi_c, int n);

// Spectral diagnostics for a mixing pair.
struct PerronData {
  Vector pi_r;
  Vector pi_c;
  double residual_r = 0.0;
  double residual_c = 0.0;
  double rho_r = 0.0;
  double rho_c = 0.0;
  bool rho_r_converged = true;
  bool rho_c_converged = true;
  double c_pi = 1.0;
};

struct MixingPair {
  RowStochastic r;
  ColStochastic c;
  PerronData perron;
};

PerronData analyze_mixing(const RowStochastic& r, const ColStochastic& c, PowerOptions opts = {});
MixingPair build_mixing_pair(const DirectedGraph& g_r, const DirectedGraph& g_c,
                             PowerOptions opts = {});

// CSV with 17 significant digits per entry (round-trips doubles exactly).
std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(const std::string& text);

}  // namespace pushpull
