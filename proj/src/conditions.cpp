#include "sqc/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqc/errors.hpp"
#include "sqc/local_search.hpp"
#include "sqc/parallel.hpp"

namespace sqc {

std::vector<double> default_lambda_grid(std::size_t points) {
  if (points < 1) throw UsageError("lambda grid needs at least one point");
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = static_cast<double>(k + 1) / static_cast<double>(points + 1);
  return g;
}

void CheckConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw UsageError("sigma must be finite and >= 0");
  if (!(tol > 0.0)) throw UsageError("tol must be positive");
  if (!(min_sep > 0.0)) throw UsageError("min_sep must be positive");
  if (lambda_grid.empty()) throw UsageError("lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const double l = lambda_grid[i];
    if (!(l > 0.0 && l < 1.0)) throw UsageError("lambda grid must lie inside (0,1)");
    if (i && !(l > lambda_grid[i - 1])) throw UsageError("lambda grid must be strictly increasing");
  }
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Holds: return "holds";
    case Status::Violated: return "violated";
    case Status::Vacuous: return "vacuous";
    case Status::Skipped: return "skipped";
  }
  return "?";
}

Status classify(double margin, double tol) { return margin < -tol ? Status::Violated : Status::Holds; }

namespace {

double sq_dist(const Vec& x, const Vec& y, Norm p) {
  const double d = pnorm(x - y, p);
  return d * d;
}

void require_separated(const Vec& x, const Vec& y, const CheckConfig& cfg) {
  require_same_dim(x, y);
  if (pnorm(x - y, cfg.penalty_norm) < cfg.min_sep)
    throw UsageError("pair closer than min_sep");
}

bool separated(const Vec& x, const Vec& y, const CheckConfig& cfg) {
  return x.size() == y.size() && pnorm(x - y, cfg.penalty_norm) >= cfg.min_sep;
}

}  // namespace

double sigma_penalty(const Vec& x, const Vec& y, double lambda, const CheckConfig& cfg) {
  return 0.5 * cfg.sigma * lambda * (1.0 - lambda) * sq_dist(x, y, cfg.penalty_norm);
}

double margin_a(const ScalarField& f, const Vec& x, const Vec& y, double lambda,
                const CheckConfig& cfg) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw UsageError("lambda must lie in (0,1)");
  require_separated(x, y, cfg);
  const double fx = f.evaluate(x);
  const double fy = f.evaluate(y);
  const double fz = f.evaluate(segment_point(x, y, lambda));
  return std::max(fx, fy) - sigma_penalty(x, y, lambda, cfg) - fz;
}

Verdict check_b(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg) {
  Verdict v;
  if (!separated(x, y, cfg)) return v;
  try {
    Witness w{x, y, std::nullopt, f.evaluate(x), f.evaluate(y), std::nullopt, std::nullopt};
    if (w.fx > w.fy) {
      v.status = Status::Vacuous;
      v.witness = std::move(w);
      return v;
    }
    const GradientResult gy = f.grad(y);
    if (!gy.differentiable) return v;
    const double d2 = sq_dist(x, y, cfg.penalty_norm);
    w.pairing_y = inner(gy.grad, x - y);
    v.margin = -0.5 * cfg.sigma * d2 - *w.pairing_y;
    v.status = classify(v.margin, cfg.tol);
    v.witness = std::move(w);
  } catch (const EvalError&) {
    return Verdict{};
  }
  return v;
}

Verdict check_c(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg) {
  Verdict v;
  if (!separated(x, y, cfg)) return v;
  try {
    const GradientResult gx = f.grad(x);
    if (!gx.differentiable) return v;
    Witness w{x, y, std::nullopt, f.evaluate(x), f.evaluate(y), std::nullopt, std::nullopt};
    const double d2 = sq_dist(x, y, cfg.penalty_norm);
    const double threshold = -0.5 * cfg.sigma * d2;
    w.pairing_x = inner(gx.grad, y - x);
    if (!(*w.pairing_x > threshold + cfg.tol)) {
      v.status = Status::Vacuous;
      v.witness = std::move(w);
      return v;
    }
    const GradientResult gy = f.grad(y);
    if (!gy.differentiable) return v;
    w.pairing_y = inner(gy.grad, x - y);
    v.margin = threshold - *w.pairing_y;
    v.status = classify(v.margin, cfg.tol);
    v.witness = std::move(w);
  } catch (const EvalError&) {
    return Verdict{};
  }
  return v;
}

namespace {

SegmentSigma segment_sigma_ordered(const ScalarField& f, const Vec& x, const Vec& y,
                                   const CheckConfig& cfg) {
  const double fmax = std::max(f.evaluate(x), f.evaluate(y));
  const double d2 = sq_dist(x, y, cfg.penalty_norm);
  SegmentSigma out{std::numeric_limits<double>::infinity(), 0.5, 0};
  bool any = false;
  for (double l : cfg.lambda_grid) {
    double fz = 0.0;
    try {
      fz = f.evaluate(segment_point(x, y, l));
    } catch (const EvalError&) {
      ++out.skipped_lambdas;
      continue;
    }
    const double s = 2.0 * (fmax - fz) / (l * (1.0 - l) * d2);
    if (!any || s < out.value) {
      out.value = s;
      out.lambda = l;
    }
    any = true;
  }
  if (!any) throw EvalError("every lambda on the segment failed to evaluate");
  return out;
}

}  // namespace

SegmentSigma sigma_star_segment_detail(const ScalarField& f, const Vec& x, const Vec& y,
                                       const CheckConfig& cfg) {
  require_separated(x, y, cfg);
  // Evaluate in a canonical order so the value is exactly symmetric in (x, y);
  // lambda is reported relative to the caller's order.
  if (std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end())) {
    SegmentSigma s = segment_sigma_ordered(f, y, x, cfg);
    s.lambda = 1.0 - s.lambda;
    return s;
  }
  return segment_sigma_ordered(f, x, y, cfg);
}

double sigma_star_segment(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg) {
  return sigma_star_segment_detail(f, x, y, cfg).value;
}

namespace {

struct PairSigma {
  bool ok = false;
  double value = 0.0;
  double lambda = 0.5;
};

// Local descent of the segment value over (x, y), normalized to the unit box.
PairSigma refine_pair(const ScalarField& f, const Vec& x0, const Vec& y0, double start_value,
                      const CheckConfig& cfg, const SigmaRefineOptions& opts, Vec& x_out,
                      Vec& y_out) {
  const std::size_t n = f.dimension;
  const Vec lo = f.domain.lower;
  const Vec w = f.domain.width();
  const double floor = std::max(cfg.min_sep, 0.25 * pnorm(x0 - y0, cfg.penalty_norm));

  auto unpack = [&](const Vec& z, Vec& x, Vec& y) {
    x.resize(n);
    y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = lo[k] + z[k] * w[k];
      y[k] = lo[k] + z[n + k] * w[k];
    }
  };
  auto objective = [&](const Vec& z) {
    Vec x, y;
    unpack(z, x, y);
    if (pnorm(x - y, cfg.penalty_norm) < floor) return std::numeric_limits<double>::infinity();
    try {
      return sigma_star_segment(f, x, y, cfg);
    } catch (const EvalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Vec z0(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    z0[k] = (x0[k] - lo[k]) / w[k];
    z0[n + k] = (y0[k] - lo[k]) / w[k];
  }
  std::size_t used = 0;
  LocalSearchOptions lso;
  lso.initial_step = 1e-2;
  lso.min_step = 1e-14;
  lso.max_iters = opts.max_iters;
  auto res = minimize_in_unit_box(objective, z0, start_value, lso,
                                  [&] { return used++ < opts.max_segment_evals; });
  unpack(res.point, x_out, y_out);
  PairSigma out;
  if (!std::isfinite(res.value)) return out;
  try {
    const SegmentSigma seg = sigma_star_segment_detail(f, x_out, y_out, cfg);
    out.value = seg.value;
    out.lambda = seg.lambda;
    out.ok = true;
  } catch (const EvalError&) {
  }
  return out;
}

}  // namespace

SigmaEstimate sigma_star_estimate(const ScalarField& f, const Sampler& sampler,
                                  const CheckConfig& cfg, const SigmaRefineOptions& refine,
                                  unsigned threads) {
  cfg.validate();
  const auto pairs = sample_pairs(sampler, cfg.min_sep, cfg.penalty_norm);

  std::vector<PairSigma> vals(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    try {
      const auto& [x, y] = pairs[i];
      const double v = sigma_star_segment(f, x, y, cfg);
      vals[i] = {true, v, 0.5};
    } catch (const EvalError&) {
    }
  });

  SigmaEstimate est;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (vals[i].ok) order.push_back(i);
    else ++est.skipped;
  }
  if (order.empty()) throw EvalError("no sampled pair could be evaluated");
  est.pairs = order.size();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vals[a].value < vals[b].value; });

  std::size_t best = order.front();
  est.sampled_min = vals[best].value;
  est.raw = est.sampled_min;
  Vec bx = pairs[best].first, by = pairs[best].second;

  if (refine.enabled && refine.starts > 0) {
    const std::size_t starts = std::min(refine.starts, order.size());
    std::vector<PairSigma> polished(starts);
    std::vector<Vec> px(starts), py(starts);
    parallel_for(starts, threads, [&](std::size_t s) {
      const std::size_t i = order[s];
      polished[s] = refine_pair(f, pairs[i].first, pairs[i].second, vals[i].value, cfg, refine,
                                px[s], py[s]);
    });
    for (std::size_t s = 0; s < starts; ++s) {
      if (polished[s].ok && polished[s].value < est.raw) {
        est.raw = polished[s].value;
        bx = px[s];
        by = py[s];
      }
    }
  }

  const SegmentSigma seg = sigma_star_segment_detail(f, bx, by, cfg);
  est.witness = Witness{bx, by, seg.lambda, f.evaluate(bx), f.evaluate(by), std::nullopt, std::nullopt};
  est.reported = std::max(est.raw, 0.0);
  return est;
}

// ---------------------------------------------------------------------------
// Scalar lemma

std::vector<double> lemma_grid(double a, double b, std::size_t points) {
  if (points < 1) throw UsageError("lemma grid needs at least one point");
  if (!(a < b)) throw UsageError("lemma interval needs a < b");
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(points + 1);
  return g;
}

Verdict check_lemma(const ScalarField& phi, const std::vector<double>& grid, double tol) {
  if (phi.dimension != 1) throw UsageError("lemma checker needs a one-dimensional field");
  if (grid.empty()) throw UsageError("lemma grid is empty");
  const double a = phi.domain.lower[0];
  const double b = phi.domain.upper[0];
  for (double t : grid)
    if (!(t > a && t < b)) throw UsageError("lemma grid must lie strictly inside (a, b)");

  Verdict v;
  try {
    const double fa = phi.evaluate({a});
    const double fb = phi.evaluate({b});
    for (double t : grid) {
      const double ft = phi.evaluate({t});
      const GradientResult g = phi.grad({t});
      if (!g.differentiable) return Verdict{};
      const double slope = g.grad[0];
      if (slope > tol && ft > fa + tol) {
        v.status = Status::Vacuous;
        v.witness = Witness{{t}, {a}, std::nullopt, ft, fa, slope, std::nullopt};
        return v;
      }
    }
    v.margin = fa - fb;
    v.status = classify(v.margin, tol);
    v.witness = Witness{{b}, {a}, std::nullopt, fb, fa, std::nullopt, std::nullopt};
  } catch (const EvalError&) {
    return Verdict{};
  }
  return v;
}

LemmaResult check_lemma_refined(const ScalarField& phi, std::size_t initial_points,
                                std::size_t max_points, double tol) {
  if (phi.dimension != 1) throw UsageError("lemma checker needs a one-dimensional field");
  if (initial_points < 1 || max_points < initial_points)
    throw UsageError("lemma grid sizes must satisfy 1 <= initial <= max");
  const double a = phi.domain.lower[0];
  const double b = phi.domain.upper[0];
  LemmaResult r;
  std::size_t points = initial_points;
  std::optional<Status> previous;
  while (true) {
    r.verdict = check_lemma(phi, lemma_grid(a, b, points), tol);
    r.grid_points = points;
    ++r.levels;
    if (previous && *previous == r.verdict.status) break;
    previous = r.verdict.status;
    if (2 * points + 1 > max_points) break;
    points = 2 * points + 1;
  }
  r.candidate_contradiction = r.verdict.status == Status::Violated;
  return r;
}

ContrapositiveCheck check_contrapositive(const ScalarField& f, const Vec& x, const Vec& y,
                                         const CheckConfig& cfg) {
  ContrapositiveCheck r;
  const Verdict c = check_c(f, x, y, cfg);
  if (c.status != Status::Violated) return r;
  r.applicable = true;
  r.b_xy = check_b(f, x, y, cfg);
  r.b_yx = check_b(f, y, x, cfg);
  r.holds = r.b_xy.status == Status::Violated || r.b_yx.status == Status::Violated;
  return r;
}

}  // namespace sqc
