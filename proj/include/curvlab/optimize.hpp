#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <curvlab/common.hpp>
#include <curvlab/rng.hpp>

namespace curvlab {

/// Plane evaluator: maps a pair of frame-coefficient vectors to a real number.
/// Must be pure and thread-safe; may throw NumericError on degenerate planes
/// (such planes are skipped by the search).
using PlaneFn = std::function<double(const Vec&, const Vec&)>;

struct TwoPlane {
  Vec X, Y;
};

struct Budget {
  std::size_t samples = 200000;
  int restarts = 64;
  int max_iters = 500;
};

struct CurvatureExtrema {
  double min_value = 0.0;
  double max_value = 0.0;
  TwoPlane argmin, argmax;
  std::size_t samples = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
  double pinching = 0.0;  // min/max when max > 0, else NaN
};

inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CURVLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

// Orthonormalize the pair in place (Euclidean Gram-Schmidt).  Returns false
// for numerically dependent pairs.
inline bool gs_pair(Vec& x, Vec& y) {
  const double nx = x.norm();
  if (nx < 1e-12) return false;
  x /= nx;
  y -= x.dot(y) * x;
  const double ny = y.norm();
  if (ny < 1e-9) return false;
  y /= ny;
  return true;
}

// One candidate evaluation with its deterministic merge rank.  Merging keeps
// the strictly better value; ties keep the lower rank, so the reduction is
// associative and independent of evaluation order.
struct Best {
  double value = 0.0;
  std::uint64_t rank = 0;
  Vec x, y;
  bool valid = false;

  void offer(double v, std::uint64_t r, const Vec& px, const Vec& py, bool minimize) {
    const bool better =
        !valid || (minimize ? v < value : v > value) || (v == value && r < rank);
    if (better) {
      value = v;
      rank = r;
      x = px;
      y = py;
      valid = true;
    }
  }
  void merge(const Best& o, bool minimize) {
    if (o.valid) offer(o.value, o.rank, o.x, o.y, minimize);
  }
};

inline Vec sample_dir(Rng& r, int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = r.normal();
  return v;
}

// Local refinement of one start by projected finite-difference descent.
// Every objective evaluation is offered to `track` so the returned extrema
// cover the full evaluation set.
inline void descend(const PlaneFn& fn, Vec x, Vec y, bool minimize, int max_iters,
                    std::uint64_t rank_base, Best& track) {
  const int dim = static_cast<int>(x.size());
  const double sgn = minimize ? 1.0 : -1.0;
  const double fd_h = 1e-5;
  auto eval = [&](const Vec& px, const Vec& py, double& out) -> bool {
    try {
      out = fn(px, py);
    } catch (const NumericError&) {
      return false;
    }
    track.offer(out, rank_base, px, py, minimize);
    return true;
  };
  if (!gs_pair(x, y)) return;
  double f = 0.0;
  if (!eval(x, y, f)) return;
  double step = 0.05;
  for (int it = 0; it < max_iters; ++it) {
    Vec grad = Vec::Zero(2 * dim);
    bool ok = true;
    for (int i = 0; i < 2 * dim && ok; ++i) {
      Vec xp = x, yp = y, xm = x, ym = y;
      (i < dim ? xp(i) : yp(i - dim)) += fd_h;
      (i < dim ? xm(i) : ym(i - dim)) -= fd_h;
      double fp = 0.0, fm = 0.0;
      ok = eval(xp, yp, fp) && eval(xm, ym, fm);
      grad(i) = (fp - fm) / (2.0 * fd_h);
    }
    if (!ok) return;
    const double gn = grad.norm();
    if (gn < 1e-12) return;
    bool moved = false;
    while (step > 1e-10) {
      Vec nx = x - sgn * (step / gn) * grad.head(dim);
      Vec ny = y - sgn * (step / gn) * grad.tail(dim);
      double nf = 0.0;
      if (gs_pair(nx, ny) && eval(nx, ny, nf) && sgn * nf < sgn * f - 1e-15) {
        x = nx;
        y = ny;
        f = nf;
        step *= 1.3;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return;
  }
}

} // namespace detail

/// Multistart search for the extrema of a plane evaluator over the
/// Grassmannian of 2-planes in R^dim: dense seeded sampling, then local
/// descent from dedicated per-restart starting points.  Restart starts are
/// drawn from their own seed streams (never from the sampled candidates), so
/// growing either budget component only adds evaluations — the reported
/// minimum is monotone in the budget.  Results are bitwise-identical for a
/// given (seed, budget) regardless of thread count.
inline CurvatureExtrema min_sectional(const PlaneFn& fn, int dim, const Budget& budget,
                                      std::uint64_t seed, int threads = 0) {
  if (budget.samples == 0 && budget.restarts == 0)
    throw std::invalid_argument("min_sectional: budget is zero");
  if (dim < 2) throw std::invalid_argument("min_sectional: dim must be at least 2");

  const int nthreads = resolve_threads(threads);
  constexpr std::size_t kChunk = 4096;
  const std::size_t nchunks = (budget.samples + kChunk - 1) / kChunk;

  std::vector<detail::Best> chunk_min(nchunks), chunk_max(nchunks);
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= nchunks) return;
        const std::size_t lo = c * kChunk, hi = std::min(budget.samples, lo + kChunk);
        for (std::size_t j = lo; j < hi; ++j) {
          Rng r = Rng::stream(seed, "plane-sample", j);
          Vec x = detail::sample_dir(r, dim), y = detail::sample_dir(r, dim);
          if (!detail::gs_pair(x, y)) continue;
          double v = 0.0;
          try {
            v = fn(x, y);
          } catch (const NumericError&) {
            continue;
          }
          chunk_min[c].offer(v, j, x, y, true);
          chunk_max[c].offer(v, j, x, y, false);
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  detail::Best best_min, best_max;
  for (std::size_t c = 0; c < nchunks; ++c) {
    best_min.merge(chunk_min[c], true);
    best_max.merge(chunk_max[c], false);
  }

  // dedicated restart streams; ranks sit above all sample indices
  const std::uint64_t rank0 = budget.samples;
  std::vector<detail::Best> restart_min(std::max(budget.restarts, 0)),
      restart_max(std::max(budget.restarts, 0));
  {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int rix = next.fetch_add(1);
        if (rix >= budget.restarts) return;
        {
          Rng r = Rng::stream(seed, "restart-min", static_cast<std::uint64_t>(rix));
          detail::descend(fn, detail::sample_dir(r, dim), detail::sample_dir(r, dim), true,
                          budget.max_iters, rank0 + 2 * rix, restart_min[rix]);
        }
        {
          Rng r = Rng::stream(seed, "restart-max", static_cast<std::uint64_t>(rix));
          detail::descend(fn, detail::sample_dir(r, dim), detail::sample_dir(r, dim), false,
                          budget.max_iters, rank0 + 2 * rix + 1, restart_max[rix]);
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  for (int rix = 0; rix < budget.restarts; ++rix) {
    best_min.merge(restart_min[rix], true);
    best_max.merge(restart_max[rix], false);
  }

  if (!best_min.valid)
    throw NumericError("min_sectional: no valid plane evaluation in budget");
  CurvatureExtrema out;
  out.min_value = best_min.value;
  out.max_value = best_max.value;
  out.argmin = {best_min.x, best_min.y};
  out.argmax = {best_max.x, best_max.y};
  out.samples = budget.samples;
  out.restarts = budget.restarts;
  out.seed = seed;
  out.pinching = out.max_value > 0.0 ? out.min_value / out.max_value
                                     : std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// min/max ratio; errors out when the estimated maximum is not positive.
inline double pinching(const PlaneFn& fn, int dim, const Budget& budget, std::uint64_t seed,
                       int threads = 0) {
  const CurvatureExtrema e = min_sectional(fn, dim, budget, seed, threads);
  if (!(e.max_value > 0.0))
    throw NumericError("pinching: estimated maximum curvature is not positive");
  return e.min_value / e.max_value;
}

struct FamilyResult {
  Vec best_params;
  double best_value = 0.0;
  std::string family;  // which parameter family was searched
};

/// Coarse grid scan followed by per-coordinate golden-section refinement of a
/// parameter-family objective (maximized).  Deterministic.
inline FamilyResult optimize_family(const std::function<double(const Vec&)>& objective,
                                    const std::vector<Vec>& grid, double refine_radius,
                                    int refine_passes = 2, const std::string& family = "") {
  if (grid.empty()) throw std::invalid_argument("optimize_family: empty grid");
  FamilyResult res;
  res.family = family;
  bool have = false;
  for (const Vec& p : grid) {
    const double v = objective(p);
    if (!have || v > res.best_value) {
      res.best_value = v;
      res.best_params = p;
      have = true;
    }
  }
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int pass = 0; pass < refine_passes; ++pass) {
    for (int i = 0; i < res.best_params.size(); ++i) {
      double a = res.best_params(i) - refine_radius, b = res.best_params(i) + refine_radius;
      auto at = [&](double t) {
        Vec p = res.best_params;
        p(i) = t;
        return objective(p);
      };
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = at(x1), f2 = at(x2);
      for (int it = 0; it < 24; ++it) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = at(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = at(x1);
        }
      }
      const double t = f1 > f2 ? x1 : x2, ft = std::max(f1, f2);
      if (ft > res.best_value) {
        res.best_value = ft;
        res.best_params(i) = t;
      }
    }
    refine_radius *= 0.25;
  }
  return res;
}

/// Richardson consistency of finite-difference directional derivatives of the
/// plane objective: worst relative mismatch between steps h and h/2 over
/// seeded random planes and directions.  Degenerate planes are skipped.
inline double gradient_consistency_check(const PlaneFn& fn, int dim, int trials,
                                         std::uint64_t seed, double h = 1e-3) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng r = Rng::stream(seed, "grad-check", static_cast<std::uint64_t>(t));
    Vec x = detail::sample_dir(r, dim), y = detail::sample_dir(r, dim);
    if (!detail::gs_pair(x, y)) continue;
    Vec dx = detail::sample_dir(r, dim), dy = detail::sample_dir(r, dim);
    const double dn = std::sqrt(dx.squaredNorm() + dy.squaredNorm());
    dx /= dn;
    dy /= dn;
    auto phi = [&](double s) { return fn(x + s * dx, y + s * dy); };
    try {
      const double d1 = (phi(h) - phi(-h)) / (2.0 * h);
      const double d2 = (phi(0.5 * h) - phi(-0.5 * h)) / h;
      worst = std::max(worst, std::abs(d1 - d2) / (1.0 + std::abs(d2)));
    } catch (const NumericError&) {
      continue;
    }
  }
  return worst;
}

} // namespace curvlab
