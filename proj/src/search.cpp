#include "sqc/search.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "sqc/errors.hpp"
#include "sqc/local_search.hpp"
#include "sqc/parallel.hpp"
#include "sqc/random.hpp"

namespace sqc {

Condition parse_condition(std::string_view text) {
  if (text == "a") return Condition::A;
  if (text == "b") return Condition::B;
  if (text == "c") return Condition::C;
  throw UsageError("unknown condition '" + std::string(text) + "' (expected a, b or c)");
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::A: return "a";
    case Condition::B: return "b";
    case Condition::C: return "c";
  }
  return "?";
}

void SearchBudget::validate() const {
  if (max_evals == 0 || restarts == 0 || iters == 0)
    throw UsageError("search budget fields must be positive");
  if (!(initial_step > 0.0) || !(decay > 0.0 && decay < 1.0) || !(min_step > 0.0))
    throw UsageError("step schedule needs initial_step > 0, decay in (0,1), min_step > 0");
}

SearchBudget SearchBudget::scaled(std::size_t factor) const {
  SearchBudget b = *this;
  b.max_evals *= factor;
  b.iters *= factor;
  return b;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Added to the premise deficit at vacuous points so any pair satisfying the
// premise ranks below every pair that does not.
constexpr double kVacuousPenalty = 1e12;
constexpr std::size_t kStartCandidates = 16;
constexpr std::size_t kMaxCallsPerMerit = 4;

struct Layout {
  std::size_t n;
  bool with_lambda;
  Vec lower, width;
  double lambda_lo, lambda_hi;

  std::size_t size() const { return 2 * n + (with_lambda ? 1 : 0); }

  void unpack(const Vec& u, Vec& x, Vec& y, double& lambda) const {
    x.resize(n);
    y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = lower[k] + u[k] * width[k];
      y[k] = lower[k] + u[n + k] * width[k];
    }
    lambda = with_lambda ? lambda_lo + u[2 * n] * (lambda_hi - lambda_lo) : 0.5;
  }
};

ScalarField counted(const ScalarField& f, std::size_t& counter) {
  ScalarField c = f;
  c.value = [&f, &counter](const Vec& x) {
    ++counter;
    return f.value(x);
  };
  c.gradient = [&f, &counter](const Vec& x) {
    ++counter;
    return f.gradient(x);
  };
  return c;
}

// Merit to minimize: the margin where the premise holds, a large penalty plus
// the premise deficit where it does not, +inf where nothing is defined.
double merit(const ScalarField& f, Condition target, const Vec& x, const Vec& y, double lambda,
             const CheckConfig& cfg) {
  if (pnorm(x - y, cfg.penalty_norm) < cfg.min_sep) return kInf;
  switch (target) {
    case Condition::A:
      try {
        return margin_a(f, x, y, lambda, cfg);
      } catch (const EvalError&) {
        return kInf;
      }
    case Condition::B: {
      const Verdict v = check_b(f, x, y, cfg);
      if (v.status == Status::Skipped) return kInf;
      if (v.status == Status::Vacuous) return kVacuousPenalty + (v.witness->fx - v.witness->fy);
      return v.margin;
    }
    case Condition::C: {
      const Verdict v = check_c(f, x, y, cfg);
      if (v.status == Status::Skipped) return kInf;
      if (v.status == Status::Vacuous) {
        const double d = pnorm(x - y, cfg.penalty_norm);
        const double needed = -0.5 * cfg.sigma * d * d + cfg.tol;
        return kVacuousPenalty + std::max(0.0, needed - *v.witness->pairing_x);
      }
      return v.margin;
    }
  }
  return kInf;
}

struct RestartOutcome {
  Vec point;
  double value = kInf;
  std::size_t evaluations = 0;
};

}  // namespace

std::optional<double> reevaluate(const ScalarField& f, Condition target, const Witness& w,
                                 const CheckConfig& cfg) {
  switch (target) {
    case Condition::A:
      if (!w.lambda) return std::nullopt;
      try {
        return margin_a(f, w.x, w.y, *w.lambda, cfg);
      } catch (const EvalError&) {
        return std::nullopt;
      }
    case Condition::B:
    case Condition::C: {
      const Verdict v = target == Condition::B ? check_b(f, w.x, w.y, cfg) : check_c(f, w.x, w.y, cfg);
      if (v.status == Status::Holds || v.status == Status::Violated) return v.margin;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

FalsificationResult falsify(const ScalarField& f, Condition target, const CheckConfig& cfg,
                            const SearchBudget& budget, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  budget.validate();
  f.domain.validate();

  const Layout layout{f.dimension, target == Condition::A, f.domain.lower, f.domain.width(),
                      cfg.lambda_grid.front(), cfg.lambda_grid.back()};
  const std::size_t per_restart = budget.max_evals / budget.restarts;

  std::vector<RestartOutcome> outcomes(budget.restarts);
  parallel_for(budget.restarts, threads, [&](std::size_t r) {
    RestartOutcome& out = outcomes[r];
    std::size_t calls = 0;
    const ScalarField cf = counted(f, calls);
    auto may_evaluate = [&] { return calls + kMaxCallsPerMerit <= per_restart; };
    auto objective = [&](const Vec& u) {
      Vec x, y;
      double lambda = 0.5;
      layout.unpack(u, x, y, lambda);
      return merit(cf, target, x, y, lambda, cfg);
    };

    CounterRng rng(seed, r);
    Vec best;
    double best_value = kInf;
    for (std::size_t k = 0; k < kStartCandidates && may_evaluate(); ++k) {
      Vec u(layout.size());
      for (double& v : u) v = rng.uniform();
      const double val = objective(u);
      if (val < best_value || best.empty()) {
        best = std::move(u);
        best_value = val;
      }
    }
    if (std::isfinite(best_value)) {
      LocalSearchOptions opts{budget.initial_step, budget.decay, budget.min_step, budget.iters};
      LocalSearchResult res = minimize_in_unit_box(objective, best, best_value, opts, may_evaluate);
      best = std::move(res.point);
      best_value = res.value;
    }
    out.point = std::move(best);
    out.value = best_value;
    out.evaluations = calls;
  });

  FalsificationResult result;
  result.target = target;
  result.sigma = cfg.sigma;
  std::optional<std::size_t> winner;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.evaluations += outcomes[r].evaluations;
    if (outcomes[r].value < kVacuousPenalty / 2 &&
        (!winner || outcomes[r].value < outcomes[*winner].value))
      winner = r;
  }
  if (!winner) return result;

  Vec x, y;
  double lambda = 0.5;
  layout.unpack(outcomes[*winner].point, x, y, lambda);
  Witness w{x, y, std::nullopt, f.evaluate(x), f.evaluate(y), std::nullopt, std::nullopt};
  if (target == Condition::A) {
    w.lambda = lambda;
  } else {
    const Verdict v = target == Condition::B ? check_b(f, x, y, cfg) : check_c(f, x, y, cfg);
    w = *v.witness;
  }
  result.margin = outcomes[*winner].value;
  result.witness = std::move(w);
  result.violation = *result.margin < -cfg.tol;
  return result;
}

// ---------------------------------------------------------------------------
// Implication harness

namespace {

Verdict evaluate_a(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg) {
  Verdict v;
  double fx = 0.0, fy = 0.0;
  try {
    fx = f.evaluate(x);
    fy = f.evaluate(y);
  } catch (const EvalError&) {
    return v;
  }
  const double fmax = std::max(fx, fy);
  bool any = false;
  double worst = 0.0, worst_lambda = 0.5;
  for (double l : cfg.lambda_grid) {
    double fz = 0.0;
    try {
      fz = f.evaluate(segment_point(x, y, l));
    } catch (const EvalError&) {
      continue;
    }
    const double m = fmax - sigma_penalty(x, y, l, cfg) - fz;
    if (!any || m < worst) {
      worst = m;
      worst_lambda = l;
    }
    any = true;
  }
  if (!any) return v;
  v.margin = worst;
  v.status = classify(worst, cfg.tol);
  v.witness = Witness{x, y, worst_lambda, fx, fy, std::nullopt, std::nullopt};
  return v;
}

void tally(ConditionTally& t, const Verdict& v, std::size_t index) {
  switch (v.status) {
    case Status::Holds: ++t.holds; break;
    case Status::Violated: ++t.violated; break;
    case Status::Vacuous: ++t.vacuous; return;
    case Status::Skipped: ++t.skipped; return;
  }
  if (!t.worst_margin || v.margin < *t.worst_margin) {
    t.worst_margin = v.margin;
    t.worst_witness = v.witness;
    t.worst_index = index;
  }
}

}  // namespace

HarnessReport implication_harness(const ScalarField& f, const CheckConfig& cfg, const Sampler& s,
                                  unsigned threads, bool keep_rows) {
  cfg.validate();
  const auto pairs = sample_pairs(s, cfg.min_sep, cfg.penalty_norm);

  struct PairOutcome {
    Verdict a, b, c;
    bool contra_applicable = false;
    bool contra_holds = true;
  };
  std::vector<PairOutcome> out(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const auto& [x, y] = pairs[i];
    PairOutcome& o = out[i];
    o.a = evaluate_a(f, x, y, cfg);
    o.b = check_b(f, x, y, cfg);
    o.c = check_c(f, x, y, cfg);
    if (o.c.status == Status::Violated) {
      o.contra_applicable = true;
      o.contra_holds = o.b.status == Status::Violated ||
                       check_b(f, y, x, cfg).status == Status::Violated;
    }
    // Keep only what the report needs.
    if (o.a.status != Status::Violated && o.a.status != Status::Holds) o.a.witness.reset();
  });

  HarnessReport rep;
  rep.samples = pairs.size();
  rep.sigma = cfg.sigma;
  rep.seed = s.seed;
  for (std::size_t i = 0; i < out.size(); ++i) {
    tally(rep.a, out[i].a, i);
    tally(rep.b, out[i].b, i);
    tally(rep.c, out[i].c, i);
    if (out[i].contra_applicable) {
      ++rep.contrapositive_checked;
      if (!out[i].contra_holds) ++rep.contrapositive_exceptions;
    }
    if (keep_rows) {
      rep.rows.push_back({i, Condition::A, out[i].a.margin, out[i].a.status});
      rep.rows.push_back({i, Condition::B, out[i].b.margin, out[i].b.status});
      rep.rows.push_back({i, Condition::C, out[i].c.margin, out[i].c.status});
    }
  }
  if (rep.a.violated == 0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].b.status == Status::Violated || out[i].c.status == Status::Violated) {
        ++rep.theorem_tension;
        if (rep.tension_examples.size() < 10) rep.tension_examples.push_back(i);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Families

std::vector<Family> shipped_families() {
  return {
      {"psd_quadratic", "(p1 x1)^2 + (p2 x1 + p3 x2)^2: convex for every parameter", 2,
       "({p1}*x1)^2 + ({p2}*x1 + {p3}*x2)^2", DomainBox::cube(3, -2, 2), DomainBox::cube(2, -1, 1)},
      {"perturbed_norm", "|x|^2 + p1 sin(p2 x1 + p3 x2)", 2,
       "x1^2 + x2^2 + {p1}*sin({p2}*x1 + {p3}*x2)", {{0.0, -4.0, -4.0}, {0.5, 4.0, 4.0}},
       DomainBox::cube(2, -1, 1)},
      {"bump_sum", "two negative Gaussian bumps with centres (p1,p2), (p4,p5) and weight p3", 2,
       "-exp(-((x1 - {p1})^2 + (x2 - {p2})^2)) - {p3}*exp(-((x1 - {p4})^2 + (x2 - {p5})^2))",
       {{-1.0, -1.0, 0.0, -1.0, -1.0}, {1.0, 1.0, 1.0, 1.0, 1.0}}, DomainBox::cube(2, -1.5, 1.5)},
      {"cubic", "x^3 + p1 x^2 + p2 x", 1, "x1^3 + {p1}*x1^2 + {p2}*x1", DomainBox::cube(2, -3, 3),
       DomainBox::cube(1, -2, 2)},
  };
}

Family find_family(std::string_view name) {
  for (auto& fam : shipped_families())
    if (fam.name == name) return fam;
  throw UsageError("unknown family '" + std::string(name) + "'");
}

std::string instantiate_pattern(const Family& family, const Vec& theta) {
  if (theta.size() != family.params.dimension())
    throw UsageError("family '" + family.name + "' expects " +
                     std::to_string(family.params.dimension()) + " parameters");
  std::string out;
  const std::string& p = family.pattern;
  std::size_t i = 0;
  while (i < p.size()) {
    if (p[i] == '{' && i + 1 < p.size() && p[i + 1] == 'p') {
      const std::size_t close = p.find('}', i);
      if (close == std::string::npos) throw UsageError("unterminated placeholder in family pattern");
      std::size_t k = 0;
      auto [ptr, ec] = std::from_chars(p.data() + i + 2, p.data() + close, k);
      if (ec != std::errc() || ptr != p.data() + close || k == 0 || k > theta.size())
        throw UsageError("bad placeholder in family pattern");
      std::array<char, 64> buf{};
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(theta[k - 1]));
      const std::string num(buf.data(), res.ptr);
      out += theta[k - 1] < 0 ? "(-" + num + ")" : num;
      i = close + 1;
    } else {
      out += p[i++];
    }
  }
  return out;
}

ScalarField instantiate(const Family& family, const Vec& theta) {
  const std::string text = instantiate_pattern(family, theta);
  return make_field_from_expr(parse(text, family.dimension), family.dimension, family.domain,
                              family.name);
}

OpenQuestionReport open_question_search(const Family& family, const CheckConfig& cfg,
                                        const OpenQuestionOptions& opts, std::uint64_t seed,
                                        unsigned threads) {
  cfg.validate();
  opts.budget.validate();
  family.params.validate();
  family.domain.validate();
  if (opts.members == 0) throw UsageError("open-question search needs at least one member");

  OpenQuestionReport rep;
  rep.family = family.name;
  rep.sigma = cfg.sigma;
  const std::size_t per_call = opts.budget.max_evals;

  for (std::size_t m = 0; m < opts.members; ++m) {
    if (rep.evaluations + 2 * per_call > opts.total_budget) {
      rep.members_not_run = opts.members - m;
      break;
    }
    CounterRng rng(seed, m);
    MemberOutcome mo;
    mo.theta.resize(family.params.dimension());
    for (std::size_t k = 0; k < mo.theta.size(); ++k)
      mo.theta[k] = rng.uniform(family.params.lower[k], family.params.upper[k]);
    mo.formula = instantiate_pattern(family, mo.theta);
    const ScalarField f = instantiate(family, mo.theta);
    const std::uint64_t member_seed = mix64(seed ^ (0x5851f42d4c957f2dULL * (m + 1)));

    mo.c = falsify(f, Condition::C, cfg, opts.budget, member_seed, threads);
    rep.evaluations += mo.c.evaluations;
    if (mo.c.violation) {
      const auto cc = check_contrapositive(f, mo.c.witness->x, mo.c.witness->y, cfg);
      if (cc.applicable && !cc.holds) ++rep.contrapositive_exceptions;
    } else {
      mo.a = falsify(f, Condition::A, cfg, opts.budget, member_seed, threads);
      rep.evaluations += mo.a->evaluations;
      if (mo.a->margin && *mo.a->margin <= -10.0 * cfg.tol) {
        mo.candidate = true;
        const SearchBudget bigger = opts.budget.scaled(10);
        if (rep.evaluations + bigger.max_evals > opts.total_budget) {
          ++rep.unverified;
        } else {
          mo.recheck_c = falsify(f, Condition::C, cfg, bigger, member_seed, threads);
          rep.evaluations += mo.recheck_c->evaluations;
          const auto again = reevaluate(f, Condition::A, *mo.a->witness, cfg);
          if (mo.recheck_c->violation) {
            ++rep.refuted;
          } else if (again && *again <= -10.0 * cfg.tol) {
            mo.verified = true;
            rep.candidates.push_back({family.name, mo.theta, mo.formula, *mo.a, *mo.recheck_c});
          } else {
            ++rep.unverified;
          }
        }
      }
    }
    rep.members.push_back(std::move(mo));
    ++rep.members_examined;
  }
  std::stable_sort(rep.candidates.begin(), rep.candidates.end(),
                   [](const Candidate& l, const Candidate& r) { return *l.a.margin < *r.a.margin; });
  return rep;
}

}  // namespace sqc
