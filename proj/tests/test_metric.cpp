#include <doctest.h>

#include <curvlab/metric.hpp>

using namespace curvlab;

namespace {

// Independent oracle: curvature of a left-invariant metric through the
// connection coefficients.  nabla_X Y = 1/2 [X,Y] - 1/2 (ad*_X Y + ad*_Y X)
// with ad*_X = P^{-1} ad_X^T P, then
// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z and the
// numerator is <R(X,Y)Y, X>_P.  This path never touches the closed-form
// implementation.
struct ConnectionOracle {
  const LieAlgebraBasis& alg;
  Mat P, Pinv;

  Vec nabla(const Vec& x, const Vec& y) const {
    const Mat Mx = ad_matrix(alg, x), My = ad_matrix(alg, y);
    const Vec adsx_y = Pinv * (Mx.transpose() * (P * y));
    const Vec adsy_x = Pinv * (My.transpose() * (P * x));
    return 0.5 * (Mx * y) - 0.5 * (adsx_y + adsy_x);
  }

  double numerator(const Vec& x, const Vec& y) const {
    const Vec r = nabla(x, nabla(y, y)) - nabla(y, nabla(x, y)) -
                  nabla(bracket(alg, x, y), y);
    return r.dot(P * x);
  }
};

Vec rand_vec(Rng& r, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = r.normal();
  return v;
}

} // namespace

TEST_CASE("curvature formula agrees with the connection oracle") {
  for (int which = 0; which < 2; ++which) {
    const LieAlgebraBasis alg =
        which == 0 ? build_algebra(Family::su, 3) : build_algebra(Family::so, 5);
    Rng r(100 + which);
    // random SPD operator, moderately conditioned
    Mat A(alg.dim, alg.dim);
    for (int i = 0; i < alg.dim; ++i)
      for (int j = 0; j < alg.dim; ++j) A(i, j) = r.normal();
    const Mat P = 0.1 * Mat::Identity(alg.dim, alg.dim) + A.transpose() * A / alg.dim;
    const LeftInvariantMetric m = make_metric(P);
    const ConnectionOracle oracle{alg, m.P, m.Pinv};
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = rand_vec(r, alg.dim), y = rand_vec(r, alg.dim);
      const double got = unnormalized_curvature(alg, m, x, y);
      const double want = oracle.numerator(x, y);
      CHECK(std::abs(got - want) < 1e-9 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("biinvariant metric reduces to quarter norm of the bracket") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  const LeftInvariantMetric m = biinvariant_metric(alg);
  Rng r(3);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = rand_vec(r, alg.dim), y = rand_vec(r, alg.dim);
    const double expected = 0.25 * bracket(alg, x, y).squaredNorm();
    CHECK(std::abs(unnormalized_curvature(alg, m, x, y) - expected) < 1e-10 * (1.0 + expected));
  }
}

TEST_CASE("round sphere: biinvariant su(2) has constant curvature 1") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 2);
  const LeftInvariantMetric m = biinvariant_metric(alg);
  Rng r(5);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = rand_vec(r, 3), y = rand_vec(r, 3);
    CHECK(std::abs(sectional_curvature(alg, m, x, y) - 1.0) < 1e-10);
  }
}

TEST_CASE("left-invariant su(2) metric scaled along a circle: 4 - 3t law") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 2);
  const std::complex<double> I(0.0, 1.0);
  CMat E1 = CMat::Zero(2, 2), E2 = CMat::Zero(2, 2), E3 = CMat::Zero(2, 2);
  E1(0, 0) = I;
  E1(1, 1) = -I;
  E2(0, 1) = 1.0;
  E2(1, 0) = -1.0;
  E3(0, 1) = I;
  E3(1, 0) = I;
  const Vec e1 = from_matrix(alg, E1), e2 = from_matrix(alg, E2), e3 = from_matrix(alg, E3);
  const Subalgebra circle = make_subalgebra(alg, "e1", e1);

  for (double t : {0.25, 0.5, 1.0, 4.0 / 3.0, 1.5, 2.0}) {
    const LeftInvariantMetric m = subalgebra_scaled(alg, circle, t);
    CHECK(std::abs(sectional_curvature(alg, m, e2, e3) - (4.0 - 3.0 * t)) < 1e-9);
  }
  // sign change across t = 4/3
  const Subalgebra c = circle;
  CHECK(sectional_curvature(alg, subalgebra_scaled(alg, c, 1.2), e2, e3) > 0.0);
  CHECK(std::abs(sectional_curvature(alg, subalgebra_scaled(alg, c, 4.0 / 3.0), e2, e3)) < 1e-9);
  CHECK(sectional_curvature(alg, subalgebra_scaled(alg, c, 1.5), e2, e3) < 0.0);
}

TEST_CASE("commuting planes are flat in any left-invariant metric scale") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  const Subalgebra torus = named_subalgebra(alg, "torus");
  const Vec x = torus.span.col(0), y = torus.span.col(1);
  for (double t : {0.3, 1.0, 1.3}) {
    const LeftInvariantMetric m = subalgebra_scaled(alg, torus, t);
    CHECK(std::abs(unnormalized_curvature(alg, m, x, y)) < 1e-12);
  }
}

TEST_CASE("unnormalized curvature scales as a^2 b^2; sectional is plane-invariant") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  Rng r(17);
  Mat A(alg.dim, alg.dim);
  for (int i = 0; i < alg.dim; ++i)
    for (int j = 0; j < alg.dim; ++j) A(i, j) = r.normal();
  const LeftInvariantMetric m =
      make_metric(0.2 * Mat::Identity(alg.dim, alg.dim) + A.transpose() * A / alg.dim);
  const Vec x = rand_vec(r, alg.dim), y = rand_vec(r, alg.dim);
  const double base = unnormalized_curvature(alg, m, x, y);
  CHECK(std::abs(unnormalized_curvature(alg, m, 2.0 * x, 3.0 * y) - 36.0 * base) <
        1e-9 * (1.0 + std::abs(base)));

  const double sec = sectional_curvature(alg, m, x, y);
  // substitute a different basis of the same plane
  const Vec u = 1.7 * x - 0.4 * y, v = 0.3 * x + 2.2 * y;
  CHECK(std::abs(sectional_curvature(alg, m, u, v) - sec) < 1e-9 * (1.0 + std::abs(sec)));
  // symmetry in the arguments
  CHECK(std::abs(sectional_curvature(alg, m, y, x) - sec) < 1e-9 * (1.0 + std::abs(sec)));
}

TEST_CASE("cheeger deformation: identity case, semigroup, eigenvalue law") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  const LeftInvariantMetric id = biinvariant_metric(alg);
  const LeftInvariantMetric half = cheeger_deform(id, 1.0);
  CHECK((half.P - 0.5 * Mat::Identity(alg.dim, alg.dim)).norm() < 1e-12);

  // t = 0 is the identity deformation
  Rng r(29);
  Mat A(alg.dim, alg.dim);
  for (int i = 0; i < alg.dim; ++i)
    for (int j = 0; j < alg.dim; ++j) A(i, j) = r.normal();
  const LeftInvariantMetric m =
      make_metric(0.3 * Mat::Identity(alg.dim, alg.dim) + A.transpose() * A / alg.dim);
  CHECK((cheeger_deform(m, 0.0).P - m.P).norm() < 1e-12);

  // semigroup property
  const Mat two_step = cheeger_deform(cheeger_deform(m, 0.4), 0.7).P;
  const Mat one_step = cheeger_deform(m, 1.1).P;
  CHECK((two_step - one_step).norm() < 1e-12 * (1.0 + one_step.norm()));

  // eigenvalues map to lambda / (1 + t lambda)
  const double t = 0.8;
  Eigen::SelfAdjointEigenSolver<Mat> before(m.P), after(cheeger_deform(m, t).P);
  for (int i = 0; i < alg.dim; ++i) {
    const double lam = before.eigenvalues()(i);
    CHECK(std::abs(after.eigenvalues()(i) - lam / (1.0 + t * lam)) < 1e-12);
  }
  CHECK_THROWS_AS(cheeger_deform(m, -0.1), std::invalid_argument);
}

TEST_CASE("subalgebra scaling matches the Cheeger picture for the full algebra") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  const Subalgebra whole = make_subalgebra(alg, "all", Mat::Identity(alg.dim, alg.dim));
  const double s = 0.6;
  const Mat via_scale = subalgebra_scaled(alg, whole, 1.0 / (1.0 + s)).P;
  const Mat via_cheeger = cheeger_deform(biinvariant_metric(alg), s).P;
  CHECK((via_scale - via_cheeger).norm() < 1e-12);

  // restricted to a subalgebra k the deformed operator is 1/(1+s) on k, 1 on m
  const Subalgebra u2 = named_subalgebra(alg, "u2_block_12");
  const Mat P = subalgebra_scaled(alg, u2, 1.0 / (1.0 + s)).P;
  const Mat expected = Mat::Identity(alg.dim, alg.dim) +
                       (1.0 / (1.0 + s) - 1.0) * u2.span * u2.span.transpose();
  CHECK((P - expected).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  int small = 0;
  for (int i = 0; i < alg.dim; ++i)
    if (std::abs(es.eigenvalues()(i) - 1.0 / (1.0 + s)) < 1e-12) ++small;
  CHECK(small == 4);
}

TEST_CASE("interpolated metrics stay nonnegative in the guaranteed ranges") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  // abelian subalgebra: nonnegative up to t = 4/3
  const Subalgebra torus = named_subalgebra(alg, "torus");
  const LeftInvariantMetric at_limit = subalgebra_scaled(alg, torus, 4.0 / 3.0);
  Rng r(31);
  for (int trial = 0; trial < 400; ++trial) {
    const Vec x = rand_vec(r, alg.dim), y = rand_vec(r, alg.dim);
    CHECK(sectional_curvature(alg, at_limit, x, y) > -1e-8);
  }
  // arbitrary subalgebra: nonnegative for t <= 1
  const Subalgebra u2 = named_subalgebra(alg, "u2_block_12");
  const LeftInvariantMetric mild = subalgebra_scaled(alg, u2, 0.7);
  for (int trial = 0; trial < 400; ++trial) {
    const Vec x = rand_vec(r, alg.dim), y = rand_vec(r, alg.dim);
    CHECK(sectional_curvature(alg, mild, x, y) > -1e-8);
  }
  // Cheeger deformations preserve the nonnegative examples
  const LeftInvariantMetric deformed = cheeger_deform(at_limit, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = rand_vec(r, alg.dim), y = rand_vec(r, alg.dim);
    CHECK(sectional_curvature(alg, deformed, x, y) > -1e-8);
  }
}

TEST_CASE("flat plane conditions for an interpolation subalgebra") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 3);
  const Subalgebra u2 = named_subalgebra(alg, "u2_block_12");
  const Subalgebra torus = named_subalgebra(alg, "torus");

  // torus planes are flat and sit inside the symmetric-pair subalgebra
  const Vec x = torus.span.col(0), y = torus.span.col(1);
  const FlatPlaneReport rep = flat_plane_conditions(alg, u2, x, y);
  CHECK(rep.flat);
  CHECK(std::abs(sectional_curvature(alg, subalgebra_scaled(alg, u2, 0.7), x, y)) < 1e-9);

  // a generic plane is not flat and the report carries the witnesses
  Rng r(37);
  const Vec u = rand_vec(r, alg.dim), v = rand_vec(r, alg.dim);
  const FlatPlaneReport generic = flat_plane_conditions(alg, u2, u, v);
  CHECK(!generic.flat);
  CHECK(generic.bracket_norm > 1e-3);

  // non-symmetric pair is rejected: [m,m] escapes the su(2) block
  const Subalgebra su2 = named_subalgebra(alg, "su2_block");
  CHECK_THROWS_AS(flat_plane_conditions(alg, su2, x, y), std::invalid_argument);
}

TEST_CASE("metric construction rejects bad operators and degenerate planes") {
  const LieAlgebraBasis alg = build_algebra(Family::su, 2);
  Mat bad = Mat::Identity(3, 3);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(make_metric(bad), std::invalid_argument);
  Mat asym = Mat::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(make_metric(asym), std::invalid_argument);
  CHECK_THROWS_AS(subalgebra_scaled(alg, named_subalgebra(alg, "torus"), 0.0),
                  std::invalid_argument);

  const LeftInvariantMetric m = biinvariant_metric(alg);
  Vec x(3);
  x << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(sectional_curvature(alg, m, x, 2.0 * x), NumericError);
}
