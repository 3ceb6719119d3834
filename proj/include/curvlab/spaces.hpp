#pragma once

#include <algorithm>
#include <cctype>
#include <complex>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <curvlab/biquot.hpp>
#include <curvlab/homspace.hpp>
#include <curvlab/optimize.hpp>

namespace curvlab {

/// A parsed space descriptor: a plane -> curvature evaluator over R^dim
/// coordinates, plus enough structure for metric-family searches.
///
/// Grammar: `<family>:<metric>[?key=val&...]` with families
///   su2 | su3 | so5            metrics: biinvariant, qt (keys: k, t)
///   berger7                    normal homogeneous SO(5)/SO(3), no keys
///   flag:su3/t2                fibration metric g_t (key: t, default 0.5)
///   aw:<p>,<q>                 W_{p,q} with g_t (key: t, default 0.5)
struct CurvatureProblem {
  std::string echo;       // the descriptor as given
  std::string family_id;  // su2 | su3 | so5 | berger7 | flag | aw
  int dim = 0;            // plane coordinate dimension
  double t = 0.0;         // scaling parameter when the metric has one
  bool has_t = false;
  std::string scaled_part;  // subalgebra name for qt metrics
  PlaneFn fn;
  std::optional<HomogeneousSpec> hom;  // present for berger7 / flag / aw
};

namespace detail {

inline double parse_double_strict(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("space descriptor: " + what + " expects a number, got '" + s +
                                "'");
  }
}

inline long long parse_int_strict(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("space descriptor: " + what + " expects an integer, got '" + s +
                                "'");
  }
}

inline std::map<std::string, std::string> parse_query(const std::string& query) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= query.size()) {
    const std::size_t amp = std::min(query.find('&', pos), query.size());
    const std::string item = query.substr(pos, amp - pos);
    if (!item.empty()) {
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("space descriptor: malformed parameter '" + item + "'");
      if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
        throw std::invalid_argument("space descriptor: duplicate parameter '" +
                                    item.substr(0, eq) + "'");
    }
    pos = amp + 1;
  }
  return out;
}

inline void reject_unknown_keys(const std::map<std::string, std::string>& params,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument("space descriptor: unknown parameter '" + key + "'");
  }
}

inline Subalgebra scaled_span(const LieAlgebraBasis& alg, const std::string& name) {
  if (name.size() >= 2 && name[0] == 'e') {
    bool digits = true;
    for (std::size_t i = 1; i < name.size(); ++i) digits = digits && std::isdigit(name[i]);
    if (digits) {
      const long long idx = parse_int_strict(name.substr(1), "k index");
      if (idx < 1 || idx > alg.dim)
        throw std::invalid_argument("space descriptor: basis index " + name +
                                    " out of range for dimension " + std::to_string(alg.dim));
      Mat span = Mat::Zero(alg.dim, 1);
      span(static_cast<int>(idx) - 1, 0) = 1.0;
      return make_subalgebra(alg, name, span);
    }
  }
  return named_subalgebra(alg, name);
}

} // namespace detail

inline CurvatureProblem parse_space(const std::string& spec) {
  CurvatureProblem prob;
  prob.echo = spec;
  const std::size_t qmark = spec.find('?');
  const std::string head = spec.substr(0, qmark == std::string::npos ? spec.size() : qmark);
  const auto params =
      detail::parse_query(qmark == std::string::npos ? "" : spec.substr(qmark + 1));

  auto take_t = [&params, &prob](double fallback, bool required) {
    const auto it = params.find("t");
    if (it == params.end()) {
      if (required) throw std::invalid_argument("space descriptor: metric qt requires t=...");
      prob.t = fallback;
    } else {
      prob.t = detail::parse_double_strict(it->second, "t");
    }
    if (!(prob.t > 0.0))
      throw std::invalid_argument("space descriptor: t must be positive");
    prob.has_t = true;
  };

  if (head == "berger7") {
    detail::reject_unknown_keys(params, {});
    prob.family_id = "berger7";
    const LieAlgebraBasis alg = build_algebra(Family::so, 5);
    const HomogeneousSpec spec_b = make_homspace(alg, named_subalgebra(alg, "so3_irreducible"));
    const Mat W = horizontal_frame(spec_b);
    prob.dim = static_cast<int>(W.cols());
    prob.hom = spec_b;
    prob.fn = [spec_b, W](const Vec& a, const Vec& b) {
      return normal_homogeneous_sectional(spec_b, W * a, W * b);
    };
    return prob;
  }

  if (head == "flag:su3/t2") {
    detail::reject_unknown_keys(params, {"t"});
    prob.family_id = "flag";
    take_t(0.5, false);
    const LieAlgebraBasis alg = build_algebra(Family::su, 3);
    const HomogeneousSpec spec_f = make_homspace(alg, named_subalgebra(alg, "torus"),
                                                 named_subalgebra(alg, "u2_block_12"));
    const Mat W = horizontal_frame(spec_f);
    const QuotientEvaluator eval = make_gt_evaluator(spec_f, prob.t);
    prob.dim = static_cast<int>(W.cols());
    prob.hom = spec_f;
    prob.fn = [eval, W](const Vec& a, const Vec& b) { return eval(W * a, W * b); };
    return prob;
  }

  if (head.rfind("aw:", 0) == 0) {
    detail::reject_unknown_keys(params, {"t"});
    prob.family_id = "aw";
    take_t(0.5, false);
    const std::string body = head.substr(3);
    const std::size_t comma = body.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("space descriptor: aw expects aw:<p>,<q>");
    const long long p = detail::parse_int_strict(body.substr(0, comma), "p");
    const long long q = detail::parse_int_strict(body.substr(comma + 1), "q");
    if (detail::gcd_ll(p, q) != 1)
      throw std::invalid_argument("space descriptor: aw requires coprime p, q");
    const LieAlgebraBasis alg = build_algebra(Family::su, 3);
    const Subalgebra h = diag_circle(alg, {p, q, -p - q});
    const HomogeneousSpec spec_w =
        make_homspace(alg, h, named_subalgebra(alg, "u2_block_12"));
    const Mat W = horizontal_frame(spec_w);
    const QuotientEvaluator eval = make_gt_evaluator(spec_w, prob.t);
    prob.dim = static_cast<int>(W.cols());
    prob.hom = spec_w;
    prob.fn = [eval, W](const Vec& a, const Vec& b) { return eval(W * a, W * b); };
    return prob;
  }

  const std::size_t colon = head.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("space descriptor: expected <family>:<metric>, got '" + spec +
                                "'");
  const std::string family = head.substr(0, colon), metric = head.substr(colon + 1);
  LieAlgebraBasis alg;
  if (family == "su2") {
    alg = build_algebra(Family::su, 2);
  } else if (family == "su3") {
    alg = build_algebra(Family::su, 3);
  } else if (family == "so5") {
    alg = build_algebra(Family::so, 5);
  } else {
    throw std::invalid_argument("space descriptor: unknown family '" + family + "'");
  }
  prob.family_id = family;
  prob.dim = alg.dim;

  if (metric == "biinvariant") {
    detail::reject_unknown_keys(params, {});
    const LeftInvariantMetric m = biinvariant_metric(alg);
    prob.fn = [alg, m](const Vec& x, const Vec& y) { return sectional_curvature(alg, m, x, y); };
    return prob;
  }
  if (metric == "qt") {
    detail::reject_unknown_keys(params, {"k", "t"});
    const auto kit = params.find("k");
    if (kit == params.end())
      throw std::invalid_argument("space descriptor: metric qt requires k=...");
    take_t(0.0, true);
    const Subalgebra sub = detail::scaled_span(alg, kit->second);
    prob.scaled_part = sub.name;
    const LeftInvariantMetric m = subalgebra_scaled(alg, sub, prob.t);
    prob.fn = [alg, m](const Vec& x, const Vec& y) { return sectional_curvature(alg, m, x, y); };
    return prob;
  }
  throw std::invalid_argument("space descriptor: unknown metric '" + metric + "'");
}

/// Metric-family search around a parsed space.
///
/// "gt":       one-parameter fibration scale t on a space with an intermediate
///             subgroup; grid over (0, 4/3).
/// "diagonal": independent scales (x1, x2, x3) on the three root 2-planes of
///             su(3) relative to the torus, evaluated on the flag quotient.
///             Pinching is invariant under uniform rescaling, so the grid
///             fixes x2 = 1; refinement then moves all three coordinates.
struct FamilySearch {
  FamilyResult search;        // best parameters and objective value found
  CurvatureExtrema extrema;   // re-evaluation at the optimum with the full budget
};

namespace detail {

inline double guarded_pinching(const PlaneFn& fn, int dim, const Budget& budget,
                               std::uint64_t seed, int threads) {
  try {
    return pinching(fn, dim, budget, seed, threads);
  } catch (const NumericError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Two-stage search over a metric family.  Cheap pinching estimates rank the
// grid; the leaders are re-ranked with the full budget before refinement, and
// the refined point must beat the best leader at the full budget to be kept.
// The guard matters: small-budget pinching estimates are biased upward (a
// missed extremal plane inflates the ratio), and golden-section refinement
// happily maximizes that bias.
inline FamilySearch family_tournament(const std::function<PlaneFn(const Vec&)>& instantiate,
                                      int dim, const std::vector<Vec>& grid,
                                      double refine_radius, const std::string& family,
                                      const Budget& search_budget, const Budget& final_budget,
                                      std::uint64_t seed, int threads) {
  auto cheap = [&](const Vec& x) {
    try {
      return guarded_pinching(instantiate(x), dim, search_budget, seed, threads);
    } catch (const std::invalid_argument&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  auto full = [&](const Vec& x) {
    try {
      return guarded_pinching(instantiate(x), dim, final_budget, seed, threads);
    } catch (const std::invalid_argument&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < grid.size(); ++i) ranked.emplace_back(cheap(grid[i]), i);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  Vec best_grid = grid[ranked.front().second];
  double best_grid_value = -std::numeric_limits<double>::infinity();
  const std::size_t leaders = std::min<std::size_t>(8, ranked.size());
  for (std::size_t i = 0; i < leaders; ++i) {
    const Vec& p = grid[ranked[i].second];
    const double v = full(p);
    if (v > best_grid_value) {
      best_grid_value = v;
      best_grid = p;
    }
  }

  const FamilyResult refined =
      optimize_family(cheap, {best_grid}, refine_radius, 2, family);
  const double refined_value = full(refined.best_params);

  FamilySearch out;
  out.search.family = family;
  if (refined_value > best_grid_value) {
    out.search.best_params = refined.best_params;
    out.search.best_value = refined_value;
  } else {
    out.search.best_params = best_grid;
    out.search.best_value = best_grid_value;
  }
  out.extrema =
      min_sectional(instantiate(out.search.best_params), dim, final_budget, seed, threads);
  return out;
}

} // namespace detail

inline FamilySearch optimize_metric_family(const CurvatureProblem& prob,
                                           const std::string& family,
                                           const Budget& search_budget,
                                           const Budget& final_budget, std::uint64_t seed,
                                           int threads = 0) {
  if (family == "gt") {
    if (!prob.hom || !prob.hom->K)
      throw std::invalid_argument("family gt: space has no fibration scale");
    const HomogeneousSpec spec = *prob.hom;
    const Mat W = horizontal_frame(spec);
    const int dim = static_cast<int>(W.cols());
    auto instantiate = [spec, W](const Vec& v) -> PlaneFn {
      if (!(v(0) > 1e-3)) throw std::invalid_argument("gt: scale out of range");
      const QuotientEvaluator eval = make_gt_evaluator(spec, v(0));
      return [eval, W](const Vec& a, const Vec& b) { return eval(W * a, W * b); };
    };
    std::vector<Vec> grid;
    for (double t = 0.1; t < 1.3; t += 0.1) grid.push_back(Vec::Constant(1, t));
    return detail::family_tournament(instantiate, dim, grid, 0.05, "gt", search_budget,
                                     final_budget, seed, threads);
  }

  if (family == "diagonal") {
    if (prob.family_id != "flag")
      throw std::invalid_argument("family diagonal: defined for the flag quotient");
    const LieAlgebraBasis alg = build_algebra(Family::su, 3);
    const Subalgebra torus = named_subalgebra(alg, "torus");
    // projectors onto the three root 2-planes, via their matrix generators
    const std::complex<double> I(0.0, 1.0);
    std::vector<Mat> projs;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        CMat A = CMat::Zero(3, 3), S = CMat::Zero(3, 3);
        A(a, b) = 1.0;
        A(b, a) = -1.0;
        S(a, b) = I;
        S(b, a) = I;
        const Vec va = from_matrix(alg, A), vs = from_matrix(alg, S);
        projs.push_back(va * va.transpose() + vs * vs.transpose());
      }
    const Mat proj_h = torus.span * torus.span.transpose();
    const HomogeneousSpec spec_f = make_homspace(alg, torus);
    const Mat W = horizontal_frame(spec_f);
    const int dim = static_cast<int>(W.cols());
    auto instantiate = [alg, torus, projs, proj_h, W](const Vec& x) -> PlaneFn {
      for (int i = 0; i < 3; ++i)
        if (!(x(i) > 1e-3)) throw std::invalid_argument("diagonal: scale out of range");
      Mat P = proj_h;
      for (int i = 0; i < 3; ++i) P += x(i) * projs[i];
      const QuotientEvaluator eval(alg, make_metric(P), torus);
      return [eval, W](const Vec& a, const Vec& b) { return eval(W * a, W * b); };
    };
    // pinching is scale invariant, so the x2 = 1 slice meets every ray
    std::vector<Vec> grid;
    for (double x1 = 0.2; x1 < 1.55; x1 += 0.1)
      for (double x3 = 0.2; x3 < 1.55; x3 += 0.1) {
        Vec p(3);
        p << x1, 1.0, x3;
        grid.push_back(p);
      }
    return detail::family_tournament(instantiate, dim, grid, 0.1, "diagonal", search_budget,
                                     final_budget, seed, threads);
  }

  throw std::invalid_argument("unknown metric family '" + family + "'");
}

} // namespace curvlab
