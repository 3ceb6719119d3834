#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <curvlab/liealg.hpp>
#include <curvlab/rng.hpp>

namespace curvlab {

/// Circle biquotient of SU(3): z acts by diag(z^k) on the left and diag(z^l)
/// on the right.  The two exponent triples must have equal sums.
struct EschenburgParams {
  std::array<long long, 3> k{};
  std::array<long long, 3> l{};
};

/// 13-dimensional biquotient of SU(5) indexed by five integers (freeness
/// requires them odd; that is a predicate, not a type invariant).
struct BazaikinParams {
  std::array<long long, 5> q{};
};

namespace detail {

inline long long gcd_ll(long long a, long long b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);  // gcd(0,0) == 0
}

inline void esch_validate(const EschenburgParams& p) {
  if (p.k[0] + p.k[1] + p.k[2] != p.l[0] + p.l[1] + p.l[2])
    throw std::invalid_argument("eschenburg parameters: sum of k must equal sum of l");
}

} // namespace detail

/// Freeness of the circle action: gcd(k1 - l_i, k2 - l_j) = 1 for all i != j.
/// gcd(0,0) counts as 0, so a tuple whose first two projections coincide with
/// two slots of l fails (the full circle then fixes points).
inline bool esch_is_free(const EschenburgParams& p) {
  detail::esch_validate(p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      if (detail::gcd_ll(p.k[0] - p.l[i], p.k[1] - p.l[j]) != 1) return false;
    }
  return true;
}

/// Raw interval criterion on arbitrary triples: every k_i avoids
/// [min(l), max(l)].  Sufficient for positive curvature of the standard
/// metric family (and necessary for torus-invariant ones).
inline bool esch_positive_criterion(const std::array<long long, 3>& k,
                                    const std::array<long long, 3>& l) {
  const long long lo = std::min({l[0], l[1], l[2]}), hi = std::max({l[0], l[1], l[2]});
  for (long long ki : k)
    if (lo <= ki && ki <= hi) return false;
  return true;
}

/// Per-block positivity flags.  Block t scales the u(2) embedding whose 2x2
/// part lives on the two indices other than t; the flag requires k_t outside
/// the l-hull and the hull of the remaining two k-entries disjoint from it.
inline std::array<bool, 3> esch_positive_blocks(const EschenburgParams& p) {
  detail::esch_validate(p);
  const long long lo = std::min({p.l[0], p.l[1], p.l[2]}),
                  hi = std::max({p.l[0], p.l[1], p.l[2]});
  std::array<bool, 3> flags{};
  for (int t = 0; t < 3; ++t) {
    const long long ka = p.k[(t + 1) % 3], kb = p.k[(t + 2) % 3], kt = p.k[t];
    const bool kt_out = kt < lo || kt > hi;
    const bool pair_out = std::max(ka, kb) < lo || std::min(ka, kb) > hi;
    flags[t] = kt_out && pair_out;
  }
  return flags;
}

/// Positivity verdict: the disjunction of the per-block flags.  Equivalent to
/// the raw interval criterion (all k_i on one side, or the isolated entry
/// takes the block role).
inline bool esch_is_positive(const EschenburgParams& p) {
  const auto flags = esch_positive_blocks(p);
  return flags[0] || flags[1] || flags[2];
}

/// |H^4| generator order: r = sigma_2(k) - sigma_2(l), kept signed.
inline long long esch_order_h4(const EschenburgParams& p) {
  detail::esch_validate(p);
  auto s2 = [](const std::array<long long, 3>& a) {
    return a[0] * a[1] + a[0] * a[2] + a[1] * a[2];
  };
  return s2(p.k) - s2(p.l);
}

/// Warning flag for tuples whose failure of the displayed freeness condition
/// stems from a circle subgroup acting through the center: gcd of all nine
/// differences k_i - l_j is 0 (identical tuples) or at least 2, so a finite
/// cyclic kernel acts trivially and the effective action may still be free.
inline bool esch_scalar_kernel_candidate(const EschenburgParams& p) {
  detail::esch_validate(p);
  long long g = 0;
  for (long long ki : p.k)
    for (long long lj : p.l) g = detail::gcd_ll(g, ki - lj);
  return g == 0 || g >= 2;
}

/// Homogeneous (l = 0) slice: W_{p,q} has positive curvature iff
/// p q (p + q) != 0.  Requires gcd(p,q) = 1 so the action is free.
inline bool aloff_wallach_positive(long long p, long long q) {
  if (detail::gcd_ll(p, q) != 1)
    throw std::invalid_argument("aloff_wallach_positive: p and q must be coprime");
  return p * q * (p + q) != 0;
}

/// Left-translated tangent of the circle orbit through g, as a coefficient
/// vector over the su(3) basis.
inline Vec esch_vertical_vector(const LieAlgebraBasis& alg, const EschenburgParams& p,
                                const CMat& g) {
  detail::esch_validate(p);
  if (alg.family != Family::su || alg.n != 3)
    throw std::invalid_argument("esch_vertical_vector: expects su(3)");
  const std::complex<double> I(0.0, 1.0);
  CMat X1 = CMat::Zero(3, 3), X2 = CMat::Zero(3, 3);
  for (int j = 0; j < 3; ++j) {
    X1(j, j) = I * static_cast<double>(p.k[j]);
    X2(j, j) = I * static_cast<double>(p.l[j]);
  }
  const CMat M = g.adjoint() * X1 * g - X2;
  return from_matrix(alg, M);
}

/// Flat-plane screen report for the scaled-block metrics (0 < t < 1).
///
/// Any zero-curvature plane of such a metric contains a distinguished vector:
/// the block-central direction i*diag(1,1,-2)-type, or a block conjugate of
/// i*diag(-2,1,1)-type.  A horizontal flat plane at g therefore forces the
/// orbit tangent to be metric-orthogonal to one of those candidates, so the
/// minimum absolute pairing over sampled g is a soundness margin: bounded
/// away from zero means no horizontal flat plane was detectable.  The pairing
/// against the conjugate family is minimized in closed form (the adjoint
/// orbit of a traceless 2x2 direction is a full sphere), which is what an
/// infinitely fine block grid would return.  Each block is screened with its
/// own metric; the overall margin is the best block's.
struct EschSamplerReport {
  double margin = 0.0;               // max over blocks of the per-block minima
  int best_block = 0;                // index t of the block achieving margin
  std::array<double, 3> block_margin{};
  std::array<bool, 3> integer_check{};  // exact per-block interval test
  bool integer_positive = false;        // disjunction; equals esch_is_positive
  double t = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

inline EschSamplerReport esch_horizontal_flat_sampler(const LieAlgebraBasis& alg,
                                                      const EschenburgParams& p, double t,
                                                      std::size_t samples,
                                                      std::uint64_t seed) {
  detail::esch_validate(p);
  if (alg.family != Family::su || alg.n != 3)
    throw std::invalid_argument("esch_horizontal_flat_sampler: expects su(3)");
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("esch_horizontal_flat_sampler: t must lie in (0,1)");
  if (samples == 0)
    throw std::invalid_argument("esch_horizontal_flat_sampler: need at least one sample");

  const std::complex<double> I(0.0, 1.0);
  // per-block probe data: central direction, fixed part of the conjugated
  // family, and the block's own traceless frame for the sphere radius
  std::array<Vec, 3> zc, cfix;
  std::array<std::array<Vec, 3>, 3> block_frame;
  for (int bt = 0; bt < 3; ++bt) {
    const int a = (bt + 1) % 3, b = (bt + 2) % 3;
    CMat Z = CMat::Zero(3, 3), C = CMat::Zero(3, 3);
    Z(a, a) = I;
    Z(b, b) = I;
    Z(bt, bt) = -2.0 * I;
    C(a, a) = -0.5 * I;  // i*diag(-2,1,1) minus its block-traceless part
    C(b, b) = -0.5 * I;
    C(bt, bt) = I;
    zc[bt] = from_matrix(alg, Z);
    cfix[bt] = from_matrix(alg, C);
    CMat A = CMat::Zero(3, 3), S = CMat::Zero(3, 3), D = CMat::Zero(3, 3);
    A(a, b) = 1.0;
    A(b, a) = -1.0;
    S(a, b) = I;
    S(b, a) = I;
    D(a, a) = I;
    D(b, b) = -I;
    block_frame[bt] = {from_matrix(alg, A), from_matrix(alg, S), from_matrix(alg, D)};
  }

  EschSamplerReport rep;
  rep.t = t;
  rep.samples = samples;
  rep.seed = seed;
  rep.integer_check = esch_positive_blocks(p);
  rep.integer_positive = esch_is_positive(p);

  std::array<double, 3> margin;
  margin.fill(std::numeric_limits<double>::infinity());
  // The screen pairs probes against Ad(g^{-1}) X_l - X_k.  For the probe in
  // block t the critical values of the first branch are l_r + l_s - 2 l_j, so
  // this orientation vanishes exactly when k_t lies in the hull of l; the
  // literal orbit direction Ad(g^{-1}) X_k - X_l admits zeros even on
  // positively curved tuples and is useless as a screen.
  const EschenburgParams swapped{p.l, p.k};
  for (std::size_t j = 0; j < samples; ++j) {
    const CMat g = random_group_element(alg, Rng::stream(seed, "esch-sample", j).u64());
    const Vec v = esch_vertical_vector(alg, swapped, g);
    for (int bt = 0; bt < 3; ++bt) {
      // the probes live in the scaled block, so the metric pairing is t * Q
      const double central = t * std::abs(v.dot(zc[bt]));
      double w2 = 0.0;
      for (const Vec& e : block_frame[bt]) w2 += std::pow(v.dot(e), 2);
      const double conj_family =
          t * std::max(0.0, std::abs(v.dot(cfix[bt])) - 1.5 * std::sqrt(w2));
      margin[bt] = std::min(margin[bt], std::min(central, conj_family));
    }
  }
  rep.block_margin = margin;
  rep.best_block = 0;
  for (int bt = 1; bt < 3; ++bt)
    if (margin[bt] > margin[rep.best_block]) rep.best_block = bt;
  rep.margin = margin[rep.best_block];
  return rep;
}

/// All q_i odd, and every pair of disjoint index-pair sums has gcd exactly 2.
inline bool baz_is_free(const BazaikinParams& p) {
  for (long long qi : p.q)
    if (((qi % 2) + 2) % 2 != 1) return false;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int m = i; m < 5; ++m)
        for (int n = m + 1; n < 5; ++n) {
          if (m == i && n <= j) continue;
          if (m == i || m == j || n == i || n == j) continue;
          if (detail::gcd_ll(p.q[i] + p.q[j], p.q[m] + p.q[n]) != 2) return false;
        }
  return true;
}

/// Positivity: all ten pair sums strictly share one sign.
inline bool baz_is_positive(const BazaikinParams& p) {
  bool pos = true, neg = true;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      const long long s = p.q[i] + p.q[j];
      pos = pos && s > 0;
      neg = neg && s < 0;
    }
  return pos || neg;
}

/// |H^6| generator order via 8r = sigma_3(q) - sigma_1(q) sigma_2(q).
inline long long baz_order_h6(const BazaikinParams& p) {
  long long s1 = 0, s2 = 0, s3 = 0;
  for (int i = 0; i < 5; ++i) {
    s1 += p.q[i];
    for (int j = i + 1; j < 5; ++j) {
      s2 += p.q[i] * p.q[j];
      for (int m = j + 1; m < 5; ++m) s3 += p.q[i] * p.q[j] * p.q[m];
    }
  }
  const long long raw = s3 - s1 * s2;
  if (((raw % 8) + 8) % 8 != 0)
    throw NumericError("baz_order_h6: " + std::to_string(raw) +
                       " is not divisible by 8 (freeness/parity inconsistency)");
  return raw / 8;
}

/// Order of H^4 of the principal S^3-bundle P_{r,s}: |r^2 - s^2| / 8, defined
/// for r and s both congruent to 1 mod 4.
inline long long ps_bundle_order(long long r, long long s) {
  auto mod4 = [](long long v) { return ((v % 4) + 4) % 4; };
  if (mod4(r) != 1 || mod4(s) != 1)
    throw std::invalid_argument("ps_bundle_order: r and s must be 1 mod 4");
  const long long d = r * r - s * s;
  return (d < 0 ? -d : d) / 8;
}

} // namespace curvlab
