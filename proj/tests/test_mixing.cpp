#include <cmath>
#include <set>

#include "doctest.h"
#include "pushpull/errors.hpp"
#include "pushpull/metrics.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/parallel.hpp"
#include "pushpull/rng.hpp"

using namespace pushpull;

namespace {

double row_sum_residual(const Matrix& w) {
  double worst = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < w.cols(); ++j) sum += w(i, j);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double col_sum_residual(const Matrix& w) {
  double worst = 0.0;
  for (int j = 0; j < w.cols(); ++j) {
    double sum = 0.0;
    for (int i = 0; i < w.rows(); ++i) sum += w(i, j);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

}  // namespace

TEST_SUITE("mixing") {

TEST_CASE("row-stochastic construction") {
  const auto single = build_row_stochastic(gen_ring(1));
  CHECK(single.w(0, 0) == 1.0);

  const auto ring = build_row_stochastic(gen_ring(3));
  for (int i = 0; i < 3; ++i) {
    CHECK(ring.w(i, i) == 0.5);
    CHECK(ring.w(i, (i + 2) % 3) == 0.5);  // in-neighbor of i is i-1
    CHECK(ring.w(i, (i + 1) % 3) == 0.0);
  }

  const auto complete = build_row_stochastic(gen_complete(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(complete.w(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  // nodes without in-neighbors keep an identity row
  const auto isolated = build_row_stochastic(make_graph(3, {{0, 1}}));
  CHECK(isolated.w(0, 0) == 1.0);
  CHECK(isolated.w(2, 2) == 1.0);
  CHECK(isolated.w(1, 1) == 0.5);
  CHECK(isolated.w(1, 0) == 0.5);
}

TEST_CASE("column-stochastic construction and transpose relation") {
  const auto single = build_col_stochastic(gen_ring(1));
  CHECK(single.w(0, 0) == 1.0);

  const auto ring = build_col_stochastic(gen_ring(3));
  for (int j = 0; j < 3; ++j) {
    CHECK(ring.w(j, j) == 0.5);
    CHECK(ring.w((j + 1) % 3, j) == 0.5);  // out-neighbor of j
  }

  // C(g) equals R(reverse(g))^T entry-for-entry: in-degree in reverse(g)
  // equals out-degree in g, so the uniform weights coincide exactly.
  for (const auto& g : {gen_ring(6), gen_complete(4), gen_exponential(8)}) {
    const auto c = build_col_stochastic(g);
    const auto rt = transpose(build_row_stochastic(reverse(g)).w);
    CHECK(c.w == rt);
  }
}

TEST_CASE("stochasticity and support invariants") {
  RngStream rng(5, 0, 0);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_index(14));
    std::set<std::pair<int, int>> edges;
    const int extra = static_cast<int>(rng.next_index(3 * n));
    for (int t = 0; t < extra; ++t) {
      const int src = static_cast<int>(rng.next_index(n));
      const int dst = static_cast<int>(rng.next_index(n));
      if (src != dst) edges.insert({src, dst});
    }
    const auto g = make_graph(n, {edges.begin(), edges.end()});
    const auto r = build_row_stochastic(g);
    const auto c = build_col_stochastic(g);
    CHECK(row_sum_residual(r.w) <= 1e-12);
    CHECK(col_sum_residual(c.w) <= 1e-12);
    for (int i = 0; i < n; ++i) {
      CHECK(r.w(i, i) > 0.0);
      CHECK(c.w(i, i) > 0.0);
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK((r.w(i, j) > 0.0) == g.has_edge(j, i));
        CHECK((c.w(i, j) > 0.0) == g.has_edge(j, i));
      }
    }
  }
}

TEST_CASE("explicit self-loops do not perturb the uniform weights") {
  // the diagonal is owned by the weight construction, not the edge set
  const auto with_loop = build_row_stochastic(make_graph(2, {{0, 0}, {0, 1}}));
  const auto without = build_row_stochastic(make_graph(2, {{0, 1}}));
  CHECK(with_loop.w == without.w);
  CHECK(with_loop.w(0, 0) == 1.0);
  CHECK(with_loop.w(1, 1) == 0.5);
}

TEST_CASE("left stationary vector") {
  const auto single = perron_left(RowStochastic{Matrix(1, 1, 1.0)});
  CHECK(single.pi[0] == 1.0);
  CHECK(single.residual == 0.0);

  // stationary equations solved by hand: pi = (1/3, 2/3)
  Matrix m(2, 2);
  m(0, 0) = 0.5;
  m(0, 1) = 0.5;
  m(1, 0) = 0.25;
  m(1, 1) = 0.75;
  const auto two = perron_left(RowStochastic{m});
  CHECK(two.pi[0] == doctest::Approx(1.0 / 3).epsilon(1e-10));
  CHECK(two.pi[1] == doctest::Approx(2.0 / 3).epsilon(1e-10));
  CHECK(two.residual <= 1e-10);

  // doubly stochastic: uniform (the uniform start is already the answer)
  const auto ring = perron_left(build_row_stochastic(gen_ring(5)));
  for (double p : ring.pi) CHECK(p == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("right stationary vector") {
  const auto single = perron_right(ColStochastic{Matrix(1, 1, 1.0)});
  CHECK(single.pi[0] == 1.0);

  Matrix m(2, 2);  // transpose of the 2x2 above
  m(0, 0) = 0.5;
  m(1, 0) = 0.5;
  m(0, 1) = 0.25;
  m(1, 1) = 0.75;
  const auto two = perron_right(ColStochastic{m});
  CHECK(two.pi[0] == doctest::Approx(1.0 / 3).epsilon(1e-10));
  CHECK(two.pi[1] == doctest::Approx(2.0 / 3).epsilon(1e-10));

  const auto ring = perron_right(build_col_stochastic(gen_ring(4)));
  for (double p : ring.pi) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("stationary positivity on strongly connected graphs") {
  for (const auto& g : {gen_ring(9), gen_exponential(20), gen_multi_sub_ring(20, 2, 0).first}) {
    const auto left = perron_left(build_row_stochastic(g));
    const auto right = perron_right(build_col_stochastic(g));
    for (double p : left.pi) CHECK(p > 0.0);
    for (double p : right.pi) CHECK(p > 0.0);
    double sum_l = 0.0, sum_r = 0.0;
    for (double p : left.pi) sum_l += p;
    for (double p : right.pi) sum_r += p;
    CHECK(std::abs(sum_l - 1.0) <= 1e-12);
    CHECK(std::abs(sum_r - 1.0) <= 1e-12);
  }
}

TEST_CASE("non-convergence raises with the residual") {
  const auto r = build_row_stochastic(gen_multi_sub_ring(20, 2, 0).first);
  PowerOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 2;
  CHECK_THROWS_AS(perron_left(r, opts), NumericError);
}

TEST_CASE("contraction estimates") {
  CHECK(contraction_estimate(Matrix(1, 1, 1.0), {1.0}, Side::Row).rho == 0.0);

  Matrix m(2, 2);
  m(0, 0) = 0.5;
  m(0, 1) = 0.5;
  m(1, 0) = 0.25;
  m(1, 1) = 0.75;
  const auto two = contraction_estimate(m, {1.0 / 3, 2.0 / 3}, Side::Row);
  CHECK(two.converged);
  CHECK(two.rho == doctest::Approx(0.25).epsilon(1e-9));

  const auto uniform = build_row_stochastic(gen_complete(6));
  const auto pi = perron_left(uniform);
  const auto est = contraction_estimate(uniform.w, pi.pi, Side::Row);
  CHECK(est.rho <= 1e-12);

  // circulant ring: eigenvalues (1 + exp(2 pi i k/n))/2, modulus cos(pi k/n)
  const auto ring = build_row_stochastic(gen_ring(20));
  const auto pr = perron_left(ring);
  const auto ring_est = contraction_estimate(ring.w, pr.pi, Side::Row);
  CHECK(ring_est.converged);
  CHECK(ring_est.rho == doctest::Approx(std::cos(M_PI / 20)).epsilon(1e-6));

  const auto ring_c = build_col_stochastic(gen_ring(20));
  const auto prc = perron_right(ring_c);
  const auto col_est = contraction_estimate(ring_c.w, prc.pi, Side::Col);
  CHECK(col_est.rho == doctest::Approx(std::cos(M_PI / 20)).epsilon(1e-6));
}

TEST_CASE("topology constant") {
  const Vector u2{0.5, 0.5};
  CHECK(topology_constant(u2, u2, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(topology_constant({1.0}, {1.0}, 1) == 1.0);
  CHECK(topology_constant({1.0 / 3, 2.0 / 3}, {2.0 / 3, 1.0 / 3}, 2) ==
        doctest::Approx(8.0 / 9).epsilon(1e-14));
  // inconsistent inputs (signed entries) must be rejected, not returned
  CHECK_THROWS_AS(topology_constant({-1.0, 2.0}, {1.0, 0.0}, 2), NumericError);
}

TEST_CASE("defective spectra are reported with a low-confidence flag") {
  // bare out-tree: every non-root eigenvalue is 0.5 with nontrivial Jordan
  // blocks, so the estimate converges only algebraically
  const auto tree = extract_spanning_tree(gen_multi_sub_ring(20, 2, 0).first, 0);
  const auto r = build_row_stochastic(tree);
  const auto pr = perron_left(r);
  const auto est = contraction_estimate(r.w, pr.pi, Side::Row);
  CHECK_FALSE(est.converged);
  CHECK(est.rho == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("section-IV topologies: residuals, doubly stochastic c_pi") {
  for (const auto& g : {gen_ring(20), gen_exponential(20), gen_complete(20),
                        gen_multi_sub_ring(20, 2, 0).first}) {
    const auto pair = build_mixing_pair(g, g);
    CHECK(pair.perron.residual_r <= 1e-10);
    CHECK(pair.perron.residual_c <= 1e-10);
    CHECK(pair.perron.c_pi > 0.0);
  }
  // regular graphs make both matrices doubly stochastic, so c_pi = 1
  for (const auto& g : {gen_ring(20), gen_exponential(20), gen_complete(20)}) {
    const auto pair = build_mixing_pair(g, g);
    CHECK(pair.perron.c_pi == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("empirical geometric mixing matches the SLEM estimate") {
  for (const auto& g : {gen_ring(20), gen_exponential(20), gen_complete(20),
                        gen_multi_sub_ring(20, 2, 0).first}) {
    const auto r = build_row_stochastic(g);
    const auto pr = perron_left(r);
    const auto est = contraction_estimate(r.w, pr.pi, Side::Row);
    const int n = g.n, d = 5;
    Matrix x(n, d), next(n, d);
    RngStream rng(11, 0, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = rng.next_gaussian();
    double prev = std::sqrt(consensus_error(x, pr.pi));
    for (int t = 0; t < 260; ++t) {
      mat_product(r.w, x, next, Exec::Seq);
      std::swap(x, next);
      const double a = std::sqrt(consensus_error(x, pr.pi));
      if (t >= 20 && a * a > 1e-24) CHECK(a / prev <= est.rho + 0.05);
      prev = a;
      if (a * a <= 1e-24) break;
    }
  }
}

TEST_CASE("matrix csv round trip") {
  Matrix m(3, 4);
  RngStream rng(9, 0, 0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.next_gaussian() * std::pow(10.0, (int)rng.next_index(6) - 3);
  const auto parsed = matrix_from_csv(matrix_to_csv(m));
  CHECK(parsed == m);
}

}  // TEST_SUITE
