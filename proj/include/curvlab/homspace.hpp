#pragma once

#include <optional>
#include <string>

#include <curvlab/metric.hpp>
#include <curvlab/optimize.hpp>

namespace curvlab {

/// Quotient G/H, optionally with an intermediate subgroup H < K < G (the
/// total space of the fibration K/H -> G/H -> G/K).  Frames:
///   m = orthogonal complement of k in g (base directions; of h when K absent)
///   p = orthogonal complement of h inside k (fiber directions; empty without K)
/// All frames are Q-orthonormal and orthogonal to h.
struct HomogeneousSpec {
  LieAlgebraBasis G;
  Subalgebra H;
  std::optional<Subalgebra> K;
  Mat p_frame;
  Mat m_frame;
  bool symmetric_base = false;  // [m,m] contained in k (resp. h) to 1e-10
};

namespace detail {

// Orthonormal basis of (span of `outer`) minus (span of `inner`); both inputs
// have orthonormal columns and inner is contained in outer.
inline Mat complement_within(const Mat& outer, const Mat& inner) {
  std::vector<Vec> cols;
  for (int j = 0; j < outer.cols(); ++j) {
    Vec v = outer.col(j) - inner * (inner.transpose() * outer.col(j));
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& u : cols) v -= u.dot(v) * u;
    const double n = v.norm();
    if (n > 1e-8) cols.push_back(v / n);
  }
  Mat out(outer.rows(), static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<int>(j)) = cols[j];
  return out;
}

inline bool brackets_land_in(const LieAlgebraBasis& alg, const Mat& frame, const Mat& target,
                             double tol = 1e-10) {
  for (int i = 0; i < frame.cols(); ++i)
    for (int j = i + 1; j < frame.cols(); ++j) {
      const Vec b = bracket(alg, frame.col(i), frame.col(j));
      if ((b - target * (target.transpose() * b)).norm() > tol) return false;
    }
  return true;
}

} // namespace detail

inline HomogeneousSpec make_homspace(const LieAlgebraBasis& alg, const Subalgebra& h) {
  HomogeneousSpec spec{alg, h, std::nullopt, Mat(alg.dim, 0), Mat(), false};
  spec.m_frame = complement_frame(alg.dim, h.span);
  spec.symmetric_base = detail::brackets_land_in(alg, spec.m_frame, h.span);
  return spec;
}

inline HomogeneousSpec make_homspace(const LieAlgebraBasis& alg, const Subalgebra& h,
                                     const Subalgebra& k) {
  for (int j = 0; j < h.span.cols(); ++j) {
    const Vec c = h.span.col(j);
    if ((c - k.span * (k.span.transpose() * c)).norm() > 1e-10)
      throw std::invalid_argument("make_homspace: h is not contained in k");
  }
  HomogeneousSpec spec{alg, h, k, Mat(), Mat(), false};
  spec.p_frame = detail::complement_within(k.span, h.span);
  if (spec.p_frame.cols() != k.span.cols() - h.span.cols())
    throw NumericError("make_homspace: fiber frame has unexpected dimension");
  spec.m_frame = complement_frame(alg.dim, k.span);
  spec.symmetric_base = detail::brackets_land_in(alg, spec.m_frame, k.span);
  return spec;
}

/// Combined fiber+base frame spanning the tangent space of G/H at the coset.
inline Mat horizontal_frame(const HomogeneousSpec& spec) {
  Mat W(spec.G.dim, spec.p_frame.cols() + spec.m_frame.cols());
  W.leftCols(spec.p_frame.cols()) = spec.p_frame;
  W.rightCols(spec.m_frame.cols()) = spec.m_frame;
  return W;
}

/// True iff P commutes with ad(Z) for every frame vector Z of h — the
/// infinitesimal condition for the metric to descend to G/H.
inline bool validate_right_invariance(const LieAlgebraBasis& alg, const LeftInvariantMetric& m,
                                      const Subalgebra& h) {
  for (int j = 0; j < h.span.cols(); ++j) {
    const Mat ad = ad_matrix(alg, h.span.col(j));
    if ((m.P * ad - ad * m.P).norm() > 1e-10 * (1.0 + m.P.norm())) return false;
  }
  return true;
}

/// Sectional curvature of the quotient metric on G/H at the identity coset,
/// via the submersion formula: unnormalized total-space curvature plus 3/4 of
/// the squared vertical component of [x,y], over the metric Gram determinant.
/// The vertical projection is metric-orthogonal (P-orthogonal), which differs
/// from the Q-orthogonal one whenever P does not preserve h.
class QuotientEvaluator {
public:
  QuotientEvaluator(const LieAlgebraBasis& alg, const LeftInvariantMetric& m,
                    const Subalgebra& h)
      : alg_(alg), m_(m), S_(h.span) {
    if (!validate_right_invariance(alg_, m_, h))
      throw std::invalid_argument("quotient metric: P does not commute with ad(h)");
    PS_ = m_.P * S_;
    gram_h_ = Eigen::LDLT<Mat>(S_.transpose() * PS_);
  }

  // P-orthogonal projection onto h
  Vec vertical_part(const Vec& v) const { return S_ * gram_h_.solve(PS_.transpose() * v); }
  Vec horizontalize(const Vec& v) const { return v - vertical_part(v); }

  bool horizontal(const Vec& v, double tol = 1e-8) const {
    return (PS_.transpose() * v).norm() <= tol * (1.0 + (m_.P * v).norm());
  }

  double operator()(const Vec& x, const Vec& y) const {
    if (!horizontal(x) || !horizontal(y))
      throw std::invalid_argument("quotient curvature: plane is not horizontal");
    const double xx = x.dot(m_.P * x), yy = y.dot(m_.P * y);
    const double gram = metric_gram(m_, x, y);
    if (!(gram > 1e-14 * std::max(1.0, xx * yy)))
      throw NumericError("quotient curvature: degenerate plane");
    const Vec v = vertical_part(bracket(alg_, x, y));
    return (unnormalized_curvature(alg_, m_, x, y) + 0.75 * v.dot(m_.P * v)) / gram;
  }

  const LeftInvariantMetric& metric() const { return m_; }
  const LieAlgebraBasis& algebra() const { return alg_; }

private:
  LieAlgebraBasis alg_;
  LeftInvariantMetric m_;
  Mat S_, PS_;
  Eigen::LDLT<Mat> gram_h_;
};

inline double quotient_sectional(const LieAlgebraBasis& alg, const LeftInvariantMetric& m,
                                 const Subalgebra& h, const Vec& x, const Vec& y) {
  return QuotientEvaluator(alg, m, h)(x, y);
}

/// Closed form for P = Id: quarter of the squared complement part plus the
/// full squared h-part of [x,y].  Agrees with quotient_sectional(Id) — the two
/// are kept as independent code paths on purpose.
inline double normal_homogeneous_sectional(const HomogeneousSpec& spec, const Vec& x,
                                           const Vec& y) {
  const double gram = x.squaredNorm() * y.squaredNorm() - std::pow(x.dot(y), 2);
  if (!(gram > 1e-14 * std::max(1.0, x.squaredNorm() * y.squaredNorm())))
    throw NumericError("normal_homogeneous_sectional: degenerate plane");
  const Vec b = bracket(spec.G, x, y);
  const Vec bh = spec.H.span * (spec.H.span.transpose() * b);
  return (0.25 * (b - bh).squaredNorm() + bh.squaredNorm()) / gram;
}

/// Evaluator for the fibration metrics g_t = t Q|_p + Q|_m on G/H (K scaled
/// by t upstairs; the projection is a Riemannian submersion).
inline QuotientEvaluator make_gt_evaluator(const HomogeneousSpec& spec, double t) {
  if (!spec.K) throw std::invalid_argument("g_t metric requires an intermediate subgroup");
  return QuotientEvaluator(spec.G, subalgebra_scaled(spec.G, *spec.K, t), spec.H);
}

inline double g_t_quotient_sectional(const HomogeneousSpec& spec, double t, const Vec& x,
                                     const Vec& y) {
  return make_gt_evaluator(spec, t)(x, y);
}

namespace detail {

// Minimize |[X,Y]|^2 over unit X in p, unit Y in m.  The bracket is bilinear
// in the frame coefficients (a,b), so each half-step is an exact unit-sphere
// minimization: the smallest eigenvector of J^T J where w = J(b)·a = J(a)·b.
// Alternating those solves decreases the value monotonically and converges
// cleanly even when the minimum is exactly zero (a commuting pair).
class FatnessObjective {
public:
  explicit FatnessObjective(const HomogeneousSpec& spec) : spec_(spec) {
    for (int i = 0; i < spec.p_frame.cols(); ++i)
      ad_p_.push_back(ad_matrix(spec.G, spec.p_frame.col(i)));
  }

  double value(const Vec& a, const Vec& b) const { return residual(a, b).squaredNorm(); }

  Vec residual(const Vec& a, const Vec& b) const {
    return bracket(spec_.G, spec_.p_frame * a, spec_.m_frame * b);
  }

  Mat jac_a(const Vec& b) const {  // w as a linear map of a
    const Vec y = spec_.m_frame * b;
    Mat J(spec_.G.dim, static_cast<int>(ad_p_.size()));
    for (std::size_t i = 0; i < ad_p_.size(); ++i) J.col(static_cast<int>(i)) = ad_p_[i] * y;
    return J;
  }

  Mat jac_b(const Vec& a) const {  // w as a linear map of b
    Mat Mx = Mat::Zero(spec_.G.dim, spec_.G.dim);
    for (std::size_t i = 0; i < ad_p_.size(); ++i) Mx += a(i) * ad_p_[i];
    return Mx * spec_.m_frame;
  }

private:
  const HomogeneousSpec& spec_;
  std::vector<Mat> ad_p_;
};

inline double fatness_alternate(const FatnessObjective& obj, Vec& a, Vec& b, int max_iters) {
  a /= a.norm();
  b /= b.norm();
  double f = obj.value(a, b);
  for (int it = 0; it < max_iters; ++it) {
    {
      const Mat J = obj.jac_a(b);
      Eigen::SelfAdjointEigenSolver<Mat> es(J.transpose() * J);
      a = es.eigenvectors().col(0);
    }
    const Mat J = obj.jac_b(a);
    Eigen::SelfAdjointEigenSolver<Mat> es(J.transpose() * J);
    b = es.eigenvectors().col(0);
    const double nf = es.eigenvalues()(0);
    if (f - nf < 1e-16 + 1e-12 * std::abs(f)) return std::min(f, nf);
    f = nf;
  }
  return f;
}

// Gauss-Newton polish toward an exact commuting pair.  Only improving steps
// are accepted, so the result never exceeds the alternating minimum; when a
// zero exists nearby this converges quadratically instead of stalling on the
// degenerate valley floor.
inline double fatness_polish(const FatnessObjective& obj, Vec a, Vec b, int max_iters = 30) {
  const int dp = static_cast<int>(a.size());
  double f = obj.value(a, b);
  for (int it = 0; it < max_iters; ++it) {
    const Vec w = obj.residual(a, b);
    Mat J(w.size(), a.size() + b.size());
    J.leftCols(a.size()) = obj.jac_a(b);
    J.rightCols(b.size()) = obj.jac_b(a);
    const Vec delta = J.colPivHouseholderQr().solve(-w);
    bool improved = false;
    double lam = 1.0;
    for (int trial = 0; trial < 8; ++trial, lam *= 0.5) {
      Vec na = a + lam * delta.head(dp), nb = b + lam * delta.tail(b.size());
      const double nna = na.norm(), nnb = nb.norm();
      if (nna < 1e-12 || nnb < 1e-12) continue;
      na /= nna;
      nb /= nnb;
      const double nf = obj.value(na, nb);
      if (nf < f) {
        a = na;
        b = nb;
        f = nf;
        improved = true;
        break;
      }
    }
    if (!improved || f < 1e-28) break;
  }
  return f;
}

} // namespace detail

/// Numerical minimum of |[X,Y]|^2 over unit X in the fiber directions p and
/// unit Y in the base directions m.  A positive margin certifies the fatness
/// condition of the fibration; a vanishing one exhibits a commuting pair.
inline double fatness_margin(const HomogeneousSpec& spec, std::size_t samples, int restarts,
                             std::uint64_t seed) {
  if (!spec.K) throw std::invalid_argument("fatness_margin requires an intermediate subgroup");
  const int dp = static_cast<int>(spec.p_frame.cols()),
            dm = static_cast<int>(spec.m_frame.cols());
  if (dp < 1 || dm < 1)
    throw std::invalid_argument("fatness_margin: empty fiber or base frame");
  const detail::FatnessObjective obj(spec);

  double best = std::numeric_limits<double>::infinity();
  Vec best_a, best_b;
  for (std::size_t j = 0; j < samples; ++j) {
    Rng r = Rng::stream(seed, "fat-sample", j);
    Vec a = detail::sample_dir(r, dp), b = detail::sample_dir(r, dm);
    if (a.norm() < 1e-12 || b.norm() < 1e-12) continue;
    a /= a.norm();
    b /= b.norm();
    const double f = obj.value(a, b);
    if (f < best) {
      best = f;
      best_a = a;
      best_b = b;
    }
  }
  if (best_a.size() > 0) {
    best = std::min(best, detail::fatness_alternate(obj, best_a, best_b, 200));
    best = std::min(best, detail::fatness_polish(obj, best_a, best_b));
  }
  for (int rix = 0; rix < restarts; ++rix) {
    Rng r = Rng::stream(seed, "fat-restart", static_cast<std::uint64_t>(rix));
    Vec a = detail::sample_dir(r, dp), b = detail::sample_dir(r, dm);
    if (a.norm() < 1e-12 || b.norm() < 1e-12) continue;
    best = std::min(best, detail::fatness_alternate(obj, a, b, 200));
    best = std::min(best, detail::fatness_polish(obj, a, b));
  }
  return best;
}

/// Positivity report for the fibration metrics g_t, following the sufficient
/// conditions: symmetric base, positively curved fiber, fat fibration, t < 1.
/// The verdict is cross-checked by direct curvature sampling (sampled_min).
struct WallachReport {
  bool symmetric_base = false;
  double fiber_min = 0.0;    // min normal-homogeneous curvature of K/H planes
  double fatness = 0.0;      // fatness_margin
  double sampled_min = 0.0;  // sampled min of g_t quotient curvature
  bool positive = false;
  std::string rank_note = "rank-one base assumed (not machine-checked)";
};

inline WallachReport wallach_check(const HomogeneousSpec& spec, double t,
                                   std::uint64_t seed = 0) {
  if (!spec.K) throw std::invalid_argument("wallach_check requires an intermediate subgroup");
  if (!(t > 0.0)) throw std::invalid_argument("wallach_check: t must be positive");
  WallachReport rep;
  rep.symmetric_base = spec.symmetric_base;

  const int dp = static_cast<int>(spec.p_frame.cols());
  const Budget small{20000, 8, 200};
  if (dp >= 2) {
    // fiber curvature: normal homogeneous formula inside k = h + p
    const Mat& Pf = spec.p_frame;
    const Mat& Sh = spec.H.span;
    PlaneFn fiber = [&](const Vec& a, const Vec& b) {
      const Vec x = Pf * a, y = Pf * b;
      const double gram = x.squaredNorm() * y.squaredNorm() - std::pow(x.dot(y), 2);
      if (!(gram > 1e-14)) throw NumericError("degenerate fiber plane");
      const Vec br = bracket(spec.G, x, y);
      const Vec bh = Sh * (Sh.transpose() * br);
      return (0.25 * (br - bh).squaredNorm() + bh.squaredNorm()) / gram;
    };
    rep.fiber_min = min_sectional(fiber, dp, small, seed).min_value;
  } else {
    rep.fiber_min = std::numeric_limits<double>::infinity();  // no fiber 2-planes
  }

  rep.fatness = fatness_margin(spec, 20000, 8, seed);

  const QuotientEvaluator ev = make_gt_evaluator(spec, t);
  const Mat W = horizontal_frame(spec);
  PlaneFn fn = [&](const Vec& a, const Vec& b) { return ev(W * a, W * b); };
  rep.sampled_min = min_sectional(fn, static_cast<int>(W.cols()), small, seed).min_value;

  rep.positive = rep.symmetric_base && rep.fiber_min > 1e-9 && rep.fatness > 1e-6 && t < 1.0;
  return rep;
}

} // namespace curvlab
