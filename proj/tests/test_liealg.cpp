#include <doctest.h>

#include <curvlab/liealg.hpp>

using namespace curvlab;

namespace {

// Oracle: exponential by scaling-and-squaring on a plain Taylor series,
// independent of the implementation's matrix-function path.
CMat series_exp(const CMat& M) {
  int squarings = 0;
  CMat A = M;
  while (A.norm() > 0.5) {
    A /= 2.0;
    ++squarings;
  }
  CMat out = CMat::Identity(M.rows(), M.cols());
  CMat term = CMat::Identity(M.rows(), M.cols());
  for (int k = 1; k <= 30; ++k) {
    term = term * A / static_cast<double>(k);
    out += term;
  }
  for (int s = 0; s < squarings; ++s) out = out * out;
  return out;
}

Vec basis_vec(int dim, int i) {
  Vec v = Vec::Zero(dim);
  v(i) = 1.0;
  return v;
}

} // namespace

TEST_CASE("algebra dimensions and orthonormal frames") {
  struct Row {
    Family f;
    int n, dim, rep;
  } rows[] = {
      {Family::su, 2, 3, 2}, {Family::su, 3, 8, 3},  {Family::su, 4, 15, 4},
      {Family::so, 5, 10, 5}, {Family::sp, 2, 10, 4},
  };
  for (const auto& row : rows) {
    const LieAlgebraBasis alg = build_algebra(row.f, row.n);
    CHECK(alg.dim == row.dim);
    CHECK(alg.rep_dim == row.rep);
    for (int i = 0; i < alg.dim; ++i)
      for (int j = 0; j < alg.dim; ++j)
        CHECK(std::abs(q_inner(alg.basis[i], alg.basis[j]) - (i == j ? 1.0 : 0.0)) < 1e-12);
  }
  CHECK_THROWS_AS(build_algebra(Family::su, 1), std::invalid_argument);
}

TEST_CASE("su(2) structure constants against raw matrix commutators") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 2);
  // Identify the standard frame: E1 = i*diag(1,-1), E2 = [[0,1],[-1,0]],
  // E3 = i*offdiag(1,1).  All three are unit for Q and appear (up to sign)
  // in the built basis; locate them by inner products.
  const std::complex<double> I(0.0, 1.0);
  CMat E1 = CMat::Zero(2, 2), E2 = CMat::Zero(2, 2), E3 = CMat::Zero(2, 2);
  E1(0, 0) = I;
  E1(1, 1) = -I;
  E2(0, 1) = 1.0;
  E2(1, 0) = -1.0;
  E3(0, 1) = I;
  E3(1, 0) = I;
  const Vec e1 = from_matrix(alg, E1), e2 = from_matrix(alg, E2), e3 = from_matrix(alg, E3);

  // Oracle: commutators computed directly on matrices.
  CHECK((E1 * E2 - E2 * E1 - 2.0 * E3).norm() < 1e-14);
  CHECK((E2 * E3 - E3 * E2 - 2.0 * E1).norm() < 1e-14);
  CHECK((E3 * E1 - E1 * E3 - 2.0 * E2).norm() < 1e-14);

  CHECK((bracket(alg, e1, e2) - 2.0 * e3).norm() < 1e-12);
  CHECK((bracket(alg, e2, e3) - 2.0 * e1).norm() < 1e-12);
  CHECK((bracket(alg, e3, e1) - 2.0 * e2).norm() < 1e-12);
  CHECK(std::abs(e1.dot(e1) - 1.0) < 1e-12);
  CHECK(std::abs(e1.dot(e2)) < 1e-12);
}

TEST_CASE("bracket matches matrix commutator on random elements") {
  for (Family f : {Family::su, Family::so, Family::sp}) {
    const int n = (f == Family::so) ? 5 : 3;
    const LieAlgebraBasis alg = build_algebra(f, n);
    Rng r = Rng::stream(7, "bracket-test", f == Family::su ? 0 : (f == Family::so ? 1 : 2));
    Vec x(alg.dim), y(alg.dim);
    for (int i = 0; i < alg.dim; ++i) {
      x(i) = r.normal();
      y(i) = r.normal();
    }
    const CMat X = to_matrix(alg, x), Y = to_matrix(alg, y);
    const Vec b = bracket(alg, x, y);
    CHECK((to_matrix(alg, b) - (X * Y - Y * X)).norm() < 1e-10);
    CHECK((ad_matrix(alg, x) * y - b).norm() < 1e-12);
  }
}

TEST_CASE("structure tensor is fully antisymmetric and satisfies Jacobi") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  for (int i = 0; i < alg.dim; ++i)
    for (int j = 0; j < alg.dim; ++j)
      for (int k = 0; k < alg.dim; ++k) {
        const double c_ijk = alg.ad[i](k, j);
        CHECK(std::abs(c_ijk + alg.ad[j](k, i)) < 1e-12);  // swap arguments
        CHECK(std::abs(c_ijk + alg.ad[i](j, k)) < 1e-12);  // Q(ad x rotates)
      }
  // Jacobi on all basis triples (build_algebra would already have thrown).
  for (int i = 0; i < alg.dim; ++i)
    for (int j = i + 1; j < alg.dim; ++j)
      for (int k = j + 1; k < alg.dim; ++k) {
        const Vec jac = alg.ad[i] * alg.ad[j].col(k) + alg.ad[j] * alg.ad[k].col(i) +
                        alg.ad[k] * alg.ad[i].col(j);
        CHECK(jac.norm() < 1e-12);
      }
}

TEST_CASE("adjoint: identity, Q-isometry, series-exp oracle") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  Rng r(11);
  Vec x(alg.dim), z(alg.dim);
  for (int i = 0; i < alg.dim; ++i) {
    x(i) = r.normal();
    z(i) = 0.3 * r.normal();
  }
  const CMat id = CMat::Identity(3, 3);
  CHECK((adjoint(alg, id, x) - x).norm() < 1e-12);

  const CMat g = series_exp(to_matrix(alg, z));
  const Vec ax = adjoint(alg, g, x);
  CHECK(std::abs(ax.norm() - x.norm()) < 1e-9);  // Ad preserves Q
  // Oracle: conjugation with the series exponential.
  const CMat expected = g * to_matrix(alg, x) * g.adjoint();
  CHECK((to_matrix(alg, ax) - expected).norm() < 1e-9);

  // Ad-invariance of the bracket: Ad(g)[x,y] = [Ad(g)x, Ad(g)y].
  Vec y(alg.dim);
  for (int i = 0; i < alg.dim; ++i) y(i) = r.normal();
  const Vec lhs = adjoint(alg, g, bracket(alg, x, y));
  const Vec rhs = bracket(alg, adjoint(alg, g, x), adjoint(alg, g, y));
  CHECK((lhs - rhs).norm() < 1e-9);

  CMat bad = CMat::Identity(3, 3);
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(adjoint(alg, bad, x), std::invalid_argument);
}

TEST_CASE("named subalgebras close under the bracket") {
  const LieAlgebraBasis su3 = build_algebra(Family::su, 3);
  const LieAlgebraBasis so5 = build_algebra(Family::so, 5);
  const LieAlgebraBasis su4 = build_algebra(Family::su, 4);

  const Subalgebra torus = named_subalgebra(su3, "torus");
  CHECK(torus.span.cols() == 2);
  // torus is abelian
  CHECK(bracket(su3, torus.span.col(0), torus.span.col(1)).norm() < 1e-12);

  for (const char* name : {"u2_block_12", "u2_block_13", "u2_block_23"}) {
    const Subalgebra u2 = named_subalgebra(su3, name);
    CHECK(u2.span.cols() == 4);
    CHECK(closure_residual(su3, u2.span) < 1e-10);
  }
  CHECK(named_subalgebra(su3, "su2_block").span.cols() == 3);

  const Subalgebra so3 = named_subalgebra(so5, "so3_irreducible");
  CHECK(so3.span.cols() == 3);
  CHECK(closure_residual(so5, so3.span) < 1e-10);

  const Subalgebra circ = named_subalgebra(su3, "diag_circle(1,1,-2)");
  CHECK(circ.span.cols() == 1);
  // span is i*diag(1,1,-2) normalized; check against the torus projection
  const Vec v = circ.span.col(0);
  CHECK((project(torus, v) - v).norm() < 1e-12);

  const Subalgebra dsu2 = named_subalgebra(su4, "diagonal_su2");
  const Subalgebra both = named_subalgebra(su4, "su2_plus_su2");
  CHECK(dsu2.span.cols() == 3);
  CHECK(both.span.cols() == 6);
  CHECK(closure_residual(su4, dsu2.span) < 1e-10);
  CHECK(closure_residual(su4, both.span) < 1e-10);
  // diagonal su(2) sits inside su(2)+su(2)
  for (int c = 0; c < 3; ++c) {
    const Vec w = dsu2.span.col(c);
    CHECK((project(both, w) - w).norm() < 1e-12);
  }

  CHECK_THROWS_AS(named_subalgebra(su3, "nonsense"), std::invalid_argument);
  CHECK_THROWS_AS(named_subalgebra(su3, "diag_circle(1,1,1)"), std::invalid_argument);
}

TEST_CASE("projection is idempotent, self-adjoint, norm-decreasing") {
  const LieAlgebraBasis su3 = build_algebra(Family::su, 3);
  const Subalgebra u2 = named_subalgebra(su3, "u2_block_12");
  Rng r(23);
  Vec x(su3.dim), y(su3.dim);
  for (int i = 0; i < su3.dim; ++i) {
    x(i) = r.normal();
    y(i) = r.normal();
  }
  const Vec px = project(u2, x);
  CHECK((project(u2, px) - px).norm() < 1e-12);
  CHECK(std::abs(px.dot(y) - x.dot(project(u2, y))) < 1e-12);
  // Pythagoras
  CHECK(std::abs(px.squaredNorm() + (x - px).squaredNorm() - x.squaredNorm()) < 1e-12);
}

TEST_CASE("complement frame is orthonormal and spans the complement") {
  const LieAlgebraBasis su3 = build_algebra(Family::su, 3);
  const Subalgebra u2 = named_subalgebra(su3, "u2_block_12");
  const Mat m = complement_frame(su3.dim, u2.span);
  CHECK(m.cols() == 4);
  CHECK((m.transpose() * m - Mat::Identity(4, 4)).norm() < 1e-12);
  CHECK((u2.span.transpose() * m).norm() < 1e-12);
}

TEST_CASE("random group elements are deterministic, in-group, unbiased") {
  const LieAlgebraBasis su3 = build_algebra(Family::su, 3);
  const CMat g1 = random_group_element(su3, 42);
  const CMat g2 = random_group_element(su3, 42);
  CHECK((g1 - g2).norm() == 0.0);
  const CMat g3 = random_group_element(su3, 43);
  CHECK((g1 - g3).norm() > 1e-3);
  CHECK(is_group_element(su3, g1));

  // Empirical mean of a fixed linear matrix functional over 10^4 draws.
  double mean = 0.0;
  const int N = 10000;
  for (int i = 0; i < N; ++i)
    mean += random_group_element(su3, 1000 + static_cast<std::uint64_t>(i))(0, 1).real();
  mean /= N;
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("so(5) and sp(2) group membership checks") {
  const LieAlgebraBasis so5 = build_algebra(Family::so, 5);
  const CMat h = random_group_element(so5, 5);
  CHECK(is_group_element(so5, h));
  CHECK(h.imag().norm() < 1e-8);  // SO(5) elements are real

  const LieAlgebraBasis sp2 = build_algebra(Family::sp, 2);
  const CMat s = random_group_element(sp2, 5);
  CHECK(is_group_element(sp2, s));
  // and it is unitary of size 4
  CHECK((s * s.adjoint() - CMat::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("from_matrix rejects elements outside the algebra") {
  const LieAlgebraBasis su3 = build_algebra(Family::su, 3);
  CMat M = CMat::Zero(3, 3);
  M(0, 0) = 1.0;  // Hermitian, not skew
  CHECK_THROWS_AS(from_matrix(su3, M), std::invalid_argument);
}

TEST_CASE("basis vectors roundtrip through matrices") {
  const LieAlgebraBasis so5 = build_algebra(Family::so, 5);
  for (int i = 0; i < so5.dim; ++i) {
    const Vec v = basis_vec(so5.dim, i);
    CHECK((from_matrix(so5, to_matrix(so5, v)) - v).norm() < 1e-12);
  }
}
