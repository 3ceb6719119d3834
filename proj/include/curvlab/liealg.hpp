#ifndef CURVLAB_LIEALG_HPP
#define CURVLAB_LIEALG_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "common.hpp"
#include "rng.hpp"

namespace curvlab {

enum class Family { su, so, sp };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::su: return "su";
    case Family::so: return "so";
    case Family::sp: return "sp";
  }
  return "?";
}

/// Ad-invariant inner product on the defining representation.
/// Normalized so that the biinvariant metric on SU(2) has constant
/// sectional curvature exactly 1.
inline double q_inner(const CMat& X, const CMat& Y) {
  return -0.5 * (X * Y).trace().real();
}

/// A compact matrix Lie algebra carried as a Q-orthonormal basis of its
/// defining representation plus the structure tensor expressed in that basis.
///
/// With the basis orthonormal, coefficient vectors satisfy Q(X,Y) = x . y and
/// ad[i] * y gives the coefficients of [e_i, Y].
struct LieAlgebraBasis {
  Family family = Family::su;
  int n = 0;        // family parameter
  int dim = 0;      // dimension of the algebra
  int rep_dim = 0;  // size of the defining matrices
  std::vector<CMat> basis;
  std::vector<Mat> ad;  // ad[i](k, j) = Q([e_i, e_j], e_k)
};

inline CMat to_matrix(const LieAlgebraBasis& alg, const Vec& x) {
  CMat M = CMat::Zero(alg.rep_dim, alg.rep_dim);
  for (int i = 0; i < alg.dim; ++i) M += x(i) * alg.basis[i];
  return M;
}

/// Expands M over the basis; rejects matrices outside the algebra.
inline Vec from_matrix(const LieAlgebraBasis& alg, const CMat& M, double tol = 1e-9) {
  Vec x(alg.dim);
  for (int i = 0; i < alg.dim; ++i) x(i) = q_inner(M, alg.basis[i]);
  const double residual = (M - to_matrix(alg, x)).norm();
  if (residual > tol * (1.0 + M.norm())) {
    std::ostringstream os;
    os << "from_matrix: expansion residual " << residual << " exceeds tolerance; "
       << "matrix is not in " << family_name(alg.family) << "(" << alg.n << ")";
    throw std::invalid_argument(os.str());
  }
  return x;
}

inline Vec bracket(const LieAlgebraBasis& alg, const Vec& x, const Vec& y) {
  Vec out = Vec::Zero(alg.dim);
  for (int i = 0; i < alg.dim; ++i)
    if (x(i) != 0.0) out += x(i) * (alg.ad[i] * y);
  return out;
}

/// Matrix of ad_X acting on coefficient vectors: ad_matrix(x) * y = [X, Y].
inline Mat ad_matrix(const LieAlgebraBasis& alg, const Vec& x) {
  Mat M = Mat::Zero(alg.dim, alg.dim);
  for (int i = 0; i < alg.dim; ++i)
    if (x(i) != 0.0) M += x(i) * alg.ad[i];
  return M;
}

namespace detail {

inline CMat unit_entry(int n, int r, int c) {
  CMat E = CMat::Zero(n, n);
  E(r, c) = 1.0;
  return E;
}

/// Modified Gram-Schmidt with a re-orthogonalization pass.  Columns of the
/// result are Q-orthonormal; near-dependent generators are dropped.
inline std::vector<CMat> orthonormalize(const std::vector<CMat>& raw, double tol = 1e-12) {
  std::vector<CMat> out;
  for (CMat v : raw) {
    for (int pass = 0; pass < 2; ++pass)
      for (const CMat& e : out) v -= q_inner(v, e) * e;
    const double nrm = std::sqrt(std::max(q_inner(v, v), 0.0));
    if (nrm > 1e-8) out.push_back(v / nrm);
    (void)tol;
  }
  return out;
}

inline std::vector<CMat> raw_generators(Family f, int n) {
  std::vector<CMat> gen;
  const std::complex<double> I(0.0, 1.0);
  switch (f) {
    case Family::su: {
      for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s) {
          gen.push_back(unit_entry(n, r, s) - unit_entry(n, s, r));
          gen.push_back(I * (unit_entry(n, r, s) + unit_entry(n, s, r)));
        }
      for (int j = 0; j + 1 < n; ++j)
        gen.push_back(I * (unit_entry(n, j, j) - unit_entry(n, j + 1, j + 1)));
      break;
    }
    case Family::so: {
      for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s)
          gen.push_back(unit_entry(n, r, s) - unit_entry(n, s, r));
      break;
    }
    case Family::sp: {
      // Realized inside su(2n): X = [[A, B], [-conj(B), conj(A)]] with
      // A skew-Hermitian and B symmetric.
      const int m = 2 * n;
      auto emb_a = [&](const CMat& A) {
        CMat X = CMat::Zero(m, m);
        X.topLeftCorner(n, n) = A;
        X.bottomRightCorner(n, n) = A.conjugate();
        return X;
      };
      auto emb_b = [&](const CMat& B) {
        CMat X = CMat::Zero(m, m);
        X.topRightCorner(n, n) = B;
        X.bottomLeftCorner(n, n) = -B.conjugate();
        return X;
      };
      for (int r = 0; r < n; ++r) gen.push_back(emb_a(I * unit_entry(n, r, r)));
      for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s) {
          gen.push_back(emb_a(unit_entry(n, r, s) - unit_entry(n, s, r)));
          gen.push_back(emb_a(I * (unit_entry(n, r, s) + unit_entry(n, s, r))));
        }
      for (int r = 0; r < n; ++r) {
        gen.push_back(emb_b(unit_entry(n, r, r)));
        gen.push_back(emb_b(I * unit_entry(n, r, r)));
      }
      for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s) {
          gen.push_back(emb_b(unit_entry(n, r, s) + unit_entry(n, s, r)));
          gen.push_back(emb_b(I * (unit_entry(n, r, s) + unit_entry(n, s, r))));
        }
      break;
    }
  }
  return gen;
}

inline CMat sp_form(int n) {
  CMat J = CMat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = CMat::Identity(n, n);
  J.bottomLeftCorner(n, n) = -CMat::Identity(n, n);
  return J;
}

inline void check_defining_relations(const LieAlgebraBasis& alg) {
  const double tol = 1e-12;
  for (const CMat& X : alg.basis) {
    if ((X + X.adjoint()).norm() > tol)
      throw NumericError("basis element is not skew-Hermitian");
    switch (alg.family) {
      case Family::su:
        if (std::abs(X.trace()) > tol) throw NumericError("su element has nonzero trace");
        break;
      case Family::so:
        if (X.imag().norm() > tol) throw NumericError("so element is not real");
        break;
      case Family::sp: {
        const CMat J = sp_form(alg.n);
        if ((X * J - J * X.conjugate()).norm() > tol)
          throw NumericError("sp element violates the quaternionic symmetry");
        break;
      }
    }
  }
}

} // namespace detail

/// Builds the Q-orthonormal basis and structure tensor for su(n), so(n) or
/// sp(n) (the latter realized inside su(2n)).
inline LieAlgebraBasis build_algebra(Family f, int n) {
  if ((f == Family::su || f == Family::so) && n < 2)
    throw std::invalid_argument("build_algebra: need n >= 2 for su/so");
  if (f == Family::sp && n < 1)
    throw std::invalid_argument("build_algebra: need n >= 1 for sp");

  LieAlgebraBasis alg;
  alg.family = f;
  alg.n = n;
  alg.rep_dim = (f == Family::sp) ? 2 * n : n;
  alg.basis = detail::orthonormalize(detail::raw_generators(f, n));

  int expected = 0;
  if (f == Family::su) expected = n * n - 1;
  if (f == Family::so) expected = n * (n - 1) / 2;
  if (f == Family::sp) expected = n * (2 * n + 1);
  alg.dim = static_cast<int>(alg.basis.size());
  if (alg.dim != expected)
    throw NumericError("build_algebra: basis has wrong dimension");

  for (int i = 0; i < alg.dim; ++i)
    for (int j = i; j < alg.dim; ++j) {
      const double g = q_inner(alg.basis[i], alg.basis[j]);
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-12)
        throw NumericError("build_algebra: basis fails orthonormality");
    }
  detail::check_defining_relations(alg);

  alg.ad.assign(alg.dim, Mat::Zero(alg.dim, alg.dim));
  for (int i = 0; i < alg.dim; ++i)
    for (int j = 0; j < alg.dim; ++j) {
      const CMat b = alg.basis[i] * alg.basis[j] - alg.basis[j] * alg.basis[i];
      CMat rec = CMat::Zero(alg.rep_dim, alg.rep_dim);
      for (int k = 0; k < alg.dim; ++k) {
        const double c = q_inner(b, alg.basis[k]);
        alg.ad[i](k, j) = c;
        rec += c * alg.basis[k];
      }
      if ((b - rec).norm() > 1e-10)
        throw NumericError("build_algebra: bracket does not close in the basis");
    }

  // Jacobi identity in coefficient space.
  for (int i = 0; i < alg.dim; ++i)
    for (int j = i + 1; j < alg.dim; ++j)
      for (int k = j + 1; k < alg.dim; ++k) {
        const Vec jac = alg.ad[i] * alg.ad[j].col(k) + alg.ad[j] * (alg.ad[k].col(i))
                      + alg.ad[k] * (alg.ad[i].col(j));
        if (jac.norm() > 1e-12)
          throw NumericError("build_algebra: Jacobi identity violated");
      }
  return alg;
}

/// Checks that g lies in the group of the defining representation.
inline bool is_group_element(const LieAlgebraBasis& alg, const CMat& g, double tol = 1e-10) {
  const int m = alg.rep_dim;
  if (g.rows() != m || g.cols() != m) return false;
  if ((g * g.adjoint() - CMat::Identity(m, m)).norm() > tol * m) return false;
  if (std::abs(g.determinant() - 1.0) > tol * m) return false;
  if (alg.family == Family::so && g.imag().norm() > tol * m) return false;
  if (alg.family == Family::sp) {
    const CMat J = detail::sp_form(alg.n);
    if ((g.transpose() * J * g - J).norm() > tol * m) return false;
  }
  return true;
}

/// Ad(g) X expressed over the basis.  Rejects g outside the group.
inline Vec adjoint(const LieAlgebraBasis& alg, const CMat& g, const Vec& x) {
  if (!is_group_element(alg, g))
    throw std::invalid_argument("adjoint: g fails the group membership check");
  return from_matrix(alg, g * to_matrix(alg, x) * g.adjoint());
}

inline CMat exp_matrix(const LieAlgebraBasis& alg, const Vec& x) {
  return to_matrix(alg, x).exp();
}

/// Deterministic quasi-uniform group element: a product of three exponentials
/// of independent Gaussian algebra vectors.
inline CMat random_group_element(const LieAlgebraBasis& alg, std::uint64_t seed) {
  CMat g = CMat::Identity(alg.rep_dim, alg.rep_dim);
  for (int j = 0; j < 3; ++j) {
    Rng r = Rng::stream(seed, "group-factor", static_cast<std::uint64_t>(j));
    Vec v(alg.dim);
    for (int i = 0; i < alg.dim; ++i) v(i) = 0.8 * r.normal();
    g = g * exp_matrix(alg, v);
  }
  return g;
}

/// A subalgebra stored as a frame of Q-orthonormal coefficient columns.
struct Subalgebra {
  std::string name;
  Mat span;  // parent_dim x r
};

inline Vec project(const Subalgebra& sub, const Vec& x) {
  return sub.span * (sub.span.transpose() * x);
}

/// Largest bracket-closure residual over frame pairs (0 for a subalgebra).
inline double closure_residual(const LieAlgebraBasis& alg, const Mat& span) {
  double worst = 0.0;
  const Mat proj = span * span.transpose();
  for (int a = 0; a < span.cols(); ++a)
    for (int b = a + 1; b < span.cols(); ++b) {
      const Vec br = bracket(alg, span.col(a), span.col(b));
      worst = std::max(worst, (br - proj * br).norm());
    }
  return worst;
}

inline Subalgebra make_subalgebra(const LieAlgebraBasis& alg, std::string name, Mat span,
                                  double tol = 1e-10) {
  const double res = closure_residual(alg, span);
  if (res > tol) {
    std::ostringstream os;
    os << "make_subalgebra(" << name << "): bracket closure residual " << res;
    throw NumericError(os.str());
  }
  return Subalgebra{std::move(name), std::move(span)};
}

namespace detail {

inline Mat span_from_matrices(const LieAlgebraBasis& alg, const std::vector<CMat>& raw) {
  const std::vector<CMat> ortho = orthonormalize(raw);
  Mat span(alg.dim, static_cast<int>(ortho.size()));
  for (int c = 0; c < span.cols(); ++c) span.col(c) = from_matrix(alg, ortho[c]);
  return span;
}

/// u(2) block on rows/columns {a, b} of su(3): 2x2 unitary block with the
/// remaining diagonal entry compensating the trace.
inline std::vector<CMat> u2_block_matrices(int a, int b, int t) {
  const std::complex<double> I(0.0, 1.0);
  std::vector<CMat> raw;
  raw.push_back(unit_entry(3, a, b) - unit_entry(3, b, a));
  raw.push_back(I * (unit_entry(3, a, b) + unit_entry(3, b, a)));
  raw.push_back(I * (unit_entry(3, a, a) - unit_entry(3, b, b)));
  raw.push_back(I * (unit_entry(3, a, a) + unit_entry(3, b, b) - 2.0 * unit_entry(3, t, t)));
  return raw;
}

/// so(3) acting on traceless symmetric 3x3 matrices gives the irreducible
/// 5-dimensional representation; its image is a subalgebra of so(5).
/// Sym-basis order: two diagonal, then the three off-diagonal directions.
inline std::vector<CMat> so3_irreducible_matrices() {
  const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
  std::vector<Eigen::Matrix3d> sym(5);
  sym[0] = Eigen::Vector3d(1, -1, 0).asDiagonal();
  sym[0] /= s2;
  sym[1] = Eigen::Vector3d(1, 1, -2).asDiagonal();
  sym[1] /= s6;
  auto off = [](int r, int c) {
    Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
    S(r, c) = S(c, r) = 1.0 / std::sqrt(2.0);
    return S;
  };
  sym[2] = off(0, 1);
  sym[3] = off(0, 2);
  sym[4] = off(1, 2);

  std::vector<Eigen::Matrix3d> rot;
  for (int r = 0; r < 3; ++r)
    for (int s = r + 1; s < 3; ++s) {
      Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
      L(r, s) = 1.0;
      L(s, r) = -1.0;
      rot.push_back(L);
    }

  std::vector<CMat> out;
  for (const auto& L : rot) {
    Eigen::Matrix<double, 5, 5> M;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        M(a, b) = ((L * sym[b] - sym[b] * L).cwiseProduct(sym[a])).sum();
    out.push_back(M.cast<std::complex<double>>());
  }
  return out;
}

inline std::vector<long long> parse_int_list(const std::string& s) {
  std::vector<long long> vals;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, ','))
    vals.push_back(std::stoll(token));
  return vals;
}

} // namespace detail

/// Circle subalgebra spanned by i*diag(w) in su(n); w must sum to zero.
inline Subalgebra diag_circle(const LieAlgebraBasis& alg, const std::vector<long long>& w) {
  if (alg.family != Family::su || static_cast<int>(w.size()) != alg.n)
    throw std::invalid_argument("diag_circle: expects su(n) and an n-vector");
  long long sum = 0;
  for (long long v : w) sum += v;
  if (sum != 0) throw std::invalid_argument("diag_circle: entries must sum to zero");
  bool all_zero = true;
  for (long long v : w) all_zero = all_zero && v == 0;
  if (all_zero) throw std::invalid_argument("diag_circle: zero vector spans nothing");
  CMat D = CMat::Zero(alg.n, alg.n);
  for (int j = 0; j < alg.n; ++j) D(j, j) = std::complex<double>(0.0, static_cast<double>(w[j]));
  std::ostringstream os;
  os << "diag_circle(";
  for (size_t j = 0; j < w.size(); ++j) os << (j ? "," : "") << w[j];
  os << ")";
  return make_subalgebra(alg, os.str(), detail::span_from_matrices(alg, {D}));
}

/// Named subalgebras used throughout: torus, the three u(2) blocks and the
/// su(2) block of su(3), the irreducible so(3) in so(5), diag_circle(...) in
/// su(n), and the diagonal su(2) inside su(2)+su(2) (block-embedded in su(4)).
inline Subalgebra named_subalgebra(const LieAlgebraBasis& alg, const std::string& name) {
  const std::complex<double> I(0.0, 1.0);
  using detail::unit_entry;

  if (name == "torus") {
    if (alg.family != Family::su)
      throw std::invalid_argument("named_subalgebra: torus is defined for su(n)");
    std::vector<CMat> raw;
    for (int j = 0; j + 1 < alg.n; ++j)
      raw.push_back(I * (unit_entry(alg.n, j, j) - unit_entry(alg.n, j + 1, j + 1)));
    return make_subalgebra(alg, name, detail::span_from_matrices(alg, raw));
  }
  if (name == "su2_block") {
    if (alg.family != Family::su || alg.n != 3)
      throw std::invalid_argument("named_subalgebra: su2_block is defined for su(3)");
    std::vector<CMat> raw = {unit_entry(3, 0, 1) - unit_entry(3, 1, 0),
                             I * (unit_entry(3, 0, 1) + unit_entry(3, 1, 0)),
                             I * (unit_entry(3, 0, 0) - unit_entry(3, 1, 1))};
    return make_subalgebra(alg, name, detail::span_from_matrices(alg, raw));
  }
  if (name == "u2_block_12" || name == "u2_block_13" || name == "u2_block_23") {
    if (alg.family != Family::su || alg.n != 3)
      throw std::invalid_argument("named_subalgebra: u2 blocks are defined for su(3)");
    int a = name[9] - '1', b = name[10] - '1';
    int t = 3 - a - b;
    return make_subalgebra(alg, name,
                           detail::span_from_matrices(alg, detail::u2_block_matrices(a, b, t)));
  }
  if (name == "so3_irreducible") {
    if (alg.family != Family::so || alg.n != 5)
      throw std::invalid_argument("named_subalgebra: so3_irreducible is defined for so(5)");
    return make_subalgebra(alg, name,
                           detail::span_from_matrices(alg, detail::so3_irreducible_matrices()));
  }
  if (name.rfind("diag_circle(", 0) == 0 && name.back() == ')') {
    const std::string body = name.substr(12, name.size() - 13);
    return diag_circle(alg, detail::parse_int_list(body));
  }
  if (name == "su2_plus_su2" || name == "diagonal_su2") {
    // su(2)+su(2) realized block-diagonally inside su(4).
    if (alg.family != Family::su || alg.n != 4)
      throw std::invalid_argument("named_subalgebra: " + name + " is defined for su(4)");
    const LieAlgebraBasis su2 = build_algebra(Family::su, 2);
    std::vector<CMat> raw;
    for (const CMat& X : su2.basis) {
      CMat top = CMat::Zero(4, 4), bot = CMat::Zero(4, 4);
      top.topLeftCorner(2, 2) = X;
      bot.bottomRightCorner(2, 2) = X;
      if (name == "diagonal_su2") {
        raw.push_back(top + bot);
      } else {
        raw.push_back(top);
        raw.push_back(bot);
      }
    }
    return make_subalgebra(alg, name, detail::span_from_matrices(alg, raw));
  }
  throw std::invalid_argument(
      "named_subalgebra: unknown name '" + name +
      "' (known: torus, su2_block, u2_block_12/13/23, so3_irreducible, "
      "diag_circle(w1,...,wn), su2_plus_su2, diagonal_su2)");
}

/// Orthonormal frame of the Q-orthogonal complement of the given frame.
inline Mat complement_frame(int dim, const Mat& span) {
  if (span.cols() == 0) return Mat::Identity(dim, dim);
  Eigen::HouseholderQR<Mat> qr(span);
  const Mat Q = qr.householderQ();
  return Q.rightCols(dim - span.cols());
}

} // namespace curvlab

#endif
