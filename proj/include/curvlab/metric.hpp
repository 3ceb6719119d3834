#ifndef CURVLAB_METRIC_HPP
#define CURVLAB_METRIC_HPP

#include "liealg.hpp"

namespace curvlab {

/// Left-invariant metric Q(P.,.) given by a symmetric positive-definite
/// operator P in the Q-orthonormal basis.  The inverse is cached because the
/// curvature formula needs it in its quartic terms.
struct LeftInvariantMetric {
  Mat P;
  Mat Pinv;
};

inline LeftInvariantMetric make_metric(const Mat& P) {
  if (P.rows() != P.cols()) throw std::invalid_argument("make_metric: P must be square");
  if ((P - P.transpose()).norm() > 1e-10 * (1.0 + P.norm()))
    throw std::invalid_argument("make_metric: P must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("make_metric: P must be positive definite");
  return LeftInvariantMetric{P, P.inverse()};
}

inline LeftInvariantMetric biinvariant_metric(const LieAlgebraBasis& alg) {
  return LeftInvariantMetric{Mat::Identity(alg.dim, alg.dim), Mat::Identity(alg.dim, alg.dim)};
}

/// Metric equal to t*Q on the subalgebra and Q on its complement.
inline LeftInvariantMetric subalgebra_scaled(const LieAlgebraBasis& alg, const Subalgebra& sub,
                                             double t) {
  if (!(t > 0.0)) throw std::invalid_argument("subalgebra_scaled: need t > 0");
  const Mat proj = sub.span * sub.span.transpose();
  return make_metric(Mat::Identity(alg.dim, alg.dim) + (t - 1.0) * proj);
}

/// Cheeger deformation P_t = (P^{-1} + t Id)^{-1}.  Shrinks every eigenvalue
/// to lambda/(1 + t*lambda); t = 0 is the identity deformation.
inline LeftInvariantMetric cheeger_deform(const LeftInvariantMetric& metric, double t) {
  if (t < 0.0) throw std::invalid_argument("cheeger_deform: need t >= 0");
  const int d = metric.P.rows();
  const Mat Pt = (metric.Pinv + t * Mat::Identity(d, d)).inverse();
  return make_metric(0.5 * (Pt + Pt.transpose()));
}

/// Unnormalized sectional curvature <R(X,Y)Y,X> of a left-invariant metric:
///
///   1/2 Q([PX,Y] + [X,PY], [X,Y]) - 3/4 Q(P[X,Y], [X,Y])
///     + Q(B(X,Y), P^{-1} B(X,Y)) - Q(B(X,X), P^{-1} B(Y,Y)),
///
/// with B(X,Y) = 1/2 ([X,PY] - [PX,Y]).
inline double unnormalized_curvature(const LieAlgebraBasis& alg, const LeftInvariantMetric& m,
                                     const Vec& x, const Vec& y) {
  const Vec Px = m.P * x, Py = m.P * y;
  const Mat Mx = ad_matrix(alg, x), My = ad_matrix(alg, y);
  const Vec b = Mx * y;          // [X,Y]
  const Vec bPxy = -(My * Px);   // [PX,Y]
  const Vec bxPy = Mx * Py;      // [X,PY]
  const Vec Bxy = 0.5 * (bxPy - bPxy);
  const Vec Bxx = Mx * Px;       // B(X,X) = [X,PX]
  const Vec Byy = My * Py;
  return 0.5 * (bPxy + bxPy).dot(b) - 0.75 * (m.P * b).dot(b) + Bxy.dot(m.Pinv * Bxy) -
         Bxx.dot(m.Pinv * Byy);
}

inline double metric_gram(const LeftInvariantMetric& m, const Vec& x, const Vec& y) {
  const double xx = x.dot(m.P * x), yy = y.dot(m.P * y), xy = x.dot(m.P * y);
  return xx * yy - xy * xy;
}

/// Sectional curvature of the plane spanned by x and y.  Degenerate planes
/// (Gram determinant below 1e-14 relative scale) are rejected.
inline double sectional_curvature(const LieAlgebraBasis& alg, const LeftInvariantMetric& m,
                                  const Vec& x, const Vec& y) {
  const double xx = x.dot(m.P * x), yy = y.dot(m.P * y);
  const double gram = metric_gram(m, x, y);
  if (!(gram > 1e-14 * std::max(1.0, xx * yy)))
    throw NumericError("sectional_curvature: degenerate plane (Gram determinant too small)");
  return unnormalized_curvature(alg, m, x, y) / gram;
}

struct FlatPlaneReport {
  bool flat = false;
  double bracket_norm = 0.0;    // |[X,Y]|
  double k_part_norm = 0.0;     // |[X_k, Y_k]|
  double m_part_norm = 0.0;     // |[X_m, Y_m]|
};

/// Zero-curvature test for the interpolated metrics t*Q|_k + Q|_m attached to
/// a subalgebra k with [m,m] contained in k (m the Q-complement): the plane
/// (X, Y) is flat for every t in (0,1] iff [X,Y], [X_k,Y_k] and [X_m,Y_m] all
/// vanish.  The predicate itself is independent of t.
inline FlatPlaneReport flat_plane_conditions(const LieAlgebraBasis& alg, const Subalgebra& k,
                                             const Vec& x, const Vec& y, double tol = 1e-9) {
  const Mat m_frame = complement_frame(alg.dim, k.span);
  const Mat proj_m = m_frame * m_frame.transpose();
  // Symmetric-pair precondition: [m, m] must land in k.
  for (int a = 0; a < m_frame.cols(); ++a)
    for (int b = a + 1; b < m_frame.cols(); ++b) {
      const Vec br = bracket(alg, m_frame.col(a), m_frame.col(b));
      const double escape = (proj_m * br).norm();
      if (escape > 1e-10) {
        std::ostringstream os;
        os << "flat_plane_conditions: [m,m] escapes k at complement pair (" << a << "," << b
           << "), residual " << escape;
        throw std::invalid_argument(os.str());
      }
    }
  const Vec xk = project(k, x), yk = project(k, y);
  const Vec xm = x - xk, ym = y - yk;
  FlatPlaneReport rep;
  rep.bracket_norm = bracket(alg, x, y).norm();
  rep.k_part_norm = bracket(alg, xk, yk).norm();
  rep.m_part_norm = bracket(alg, xm, ym).norm();
  rep.flat = rep.bracket_norm < tol && rep.k_part_norm < tol && rep.m_part_norm < tol;
  return rep;
}

} // namespace curvlab

#endif
