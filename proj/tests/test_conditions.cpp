#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sqc/conditions.hpp"
#include "sqc/errors.hpp"
#include "support.hpp"

using namespace sqc;

namespace {

CheckConfig with_sigma(double sigma) {
  CheckConfig c;
  c.sigma = sigma;
  return c;
}

ScalarField expr_field(const char* src, double lo, double hi, std::size_t n = 1) {
  return make_field_from_expr(parse(src, n), n, DomainBox::cube(n, lo, hi), src);
}

}  // namespace

TEST_CASE("lambda grid") {
  const auto g = default_lambda_grid();
  REQUIRE(g.size() == 63);
  CHECK(g.front() == 1.0 / 64);
  CHECK(g.back() == 63.0 / 64);
  CHECK(default_lambda_grid(1) == std::vector<double>{0.5});
}

TEST_CASE("margin (a) on closed forms") {
  const ScalarField sq = find_catalog("sqnorm", 1);
  // max{1,1} - (sigma/2)(1/4)(4) - 0
  CHECK(margin_a(sq, {1}, {-1}, 0.5, with_sigma(0)) == 1.0);
  CHECK(margin_a(sq, {1}, {-1}, 0.5, with_sigma(2)) == 0.0);
  CHECK(margin_a(sq, {1}, {-1}, 0.5, with_sigma(3)) == -0.5);

  const ScalarField s = find_catalog("sin", 1);
  const double pi = std::numbers::pi;
  // Segment from pi/2 to 3pi/2 would pass, 0 to pi dips above the endpoints.
  const double m = margin_a(s, {0.0}, {pi}, 0.5, with_sigma(0));
  CHECK(m == doctest::Approx(std::max(std::sin(0.0), std::sin(pi)) - std::sin(pi / 2)).epsilon(1e-15));

  CHECK_THROWS_AS(margin_a(sq, {1}, {-1}, 0.0, with_sigma(0)), UsageError);
  CHECK_THROWS_AS(margin_a(sq, {1}, {-1}, 1.0, with_sigma(0)), UsageError);
  CHECK_THROWS_AS(margin_a(sq, {0.5}, {0.5}, 0.5, with_sigma(0)), UsageError);
}

TEST_CASE("penalty norms") {
  CheckConfig c = with_sigma(2);
  c.penalty_norm = Norm::L1;
  CHECK(sigma_penalty({0, 0}, {1, 1}, 0.5, c) == 0.25 * 4);
  c.penalty_norm = Norm::Linf;
  CHECK(sigma_penalty({0, 0}, {1, 1}, 0.5, c) == 0.25);
  c.penalty_norm = Norm::L2;
  CHECK(sigma_penalty({0, 0}, {1, 1}, 0.5, c) == doctest::Approx(0.5));
}

TEST_CASE("condition (b) verdicts") {
  const ScalarField s = find_catalog("sin", 1);
  const CheckConfig c0 = with_sigma(0);

  // f(0) = 0 <= f(2.5); grad f(2.5) (0 - 2.5) = -2.5 cos(2.5) > 0.
  Verdict v = check_b(s, {0.0}, {2.5}, c0);
  CHECK(v.status == Status::Violated);
  CHECK(v.margin == doctest::Approx(2.5 * std::cos(2.5)).epsilon(1e-14));
  REQUIRE(v.witness);
  CHECK(v.witness->pairing_y == doctest::Approx(-2.5 * std::cos(2.5)));

  v = check_b(s, {0.0}, {1.0}, c0);
  CHECK(v.status == Status::Holds);
  CHECK(v.margin == doctest::Approx(std::cos(1.0)).epsilon(1e-14));

  v = check_b(s, {1.0}, {0.0}, c0);  // f(1) > f(0): premise fails
  CHECK(v.status == Status::Vacuous);
  CHECK(v.margin == 0.0);

  v = check_b(s, {1.0}, {1.0 + 1e-9}, c0);
  CHECK(v.status == Status::Skipped);

  const ScalarField sq = find_catalog("sqnorm", 2);
  // Equal values: premise holds with equality and the conclusion is tight at sigma 2.
  v = check_b(sq, {1, 0}, {0, 1}, with_sigma(2));
  CHECK(v.status == Status::Holds);
  CHECK(std::abs(v.margin) <= 1e-15);
}

TEST_CASE("condition (c) verdicts") {
  const ScalarField s = find_catalog("sin", 1);
  const CheckConfig c0 = with_sigma(0);
  Verdict v = check_c(s, {0.0}, {2.5}, c0);
  CHECK(v.status == Status::Violated);
  CHECK(v.margin == doctest::Approx(2.5 * std::cos(2.5)).epsilon(1e-14));
  REQUIRE(v.witness);
  CHECK(v.witness->pairing_x == doctest::Approx(2.5));

  v = check_c(s, {2.5}, {0.0}, c0);
  CHECK(v.status == Status::Violated);
  CHECK(v.margin == doctest::Approx(-2.5).epsilon(1e-14));

  v = check_c(s, {0.5}, {1.0}, c0);
  CHECK(v.status == Status::Holds);
  CHECK(v.margin == doctest::Approx(0.5 * std::cos(1.0)).epsilon(1e-14));

  v = check_c(s, {3.0}, {4.0}, c0);  // cos(3) < 0: premise fails
  CHECK(v.status == Status::Vacuous);

  const ScalarField k = find_catalog("const", 1);
  CHECK(check_c(k, {0.0}, {0.5}, c0).status == Status::Vacuous);
}

TEST_CASE("non-differentiable points are skipped") {
  const ScalarField f = expr_field("abs(x1)", -1, 1);
  CHECK(check_b(f, {0.5}, {0.0}, with_sigma(0)).status == Status::Vacuous);
  CHECK(check_b(f, {0.0}, {0.5}, with_sigma(0)).status == Status::Holds);
  CHECK(check_c(f, {0.0}, {0.5}, with_sigma(0)).status == Status::Skipped);
}

TEST_CASE("segment sigma on closed forms") {
  const ScalarField sq = find_catalog("sqnorm", 2);
  const CheckConfig c = with_sigma(0);
  // Equal endpoint values give exactly 2 at every lambda.
  CHECK(std::abs(sigma_star_segment(sq, {1, 0}, {0, 1}, c) - 2.0) <= 1e-12);
  // Otherwise strictly more: oracle recomputed on the same grid.
  const Vec x{0.9, -0.2}, y{-0.1, 0.3};
  double oracle = INFINITY;
  for (double l : default_lambda_grid()) {
    const double z0 = l * x[0] + (1 - l) * y[0], z1 = l * x[1] + (1 - l) * y[1];
    const double fx = x[0] * x[0] + x[1] * x[1], fy = y[0] * y[0] + y[1] * y[1];
    const double d2 = (x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]);
    oracle = std::min(oracle, 2 * (std::max(fx, fy) - (z0 * z0 + z1 * z1)) / (l * (1 - l) * d2));
  }
  const double got = sigma_star_segment(sq, x, y, c);
  CHECK(got > 2.0);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-12));

  const ScalarField k = find_catalog("const", 3);
  CHECK(sigma_star_segment(k, {0, 0, 0}, {0.5, 0.1, -0.3}, c) == 0.0);

  const ScalarField s = find_catalog("sin", 1);
  CHECK(sigma_star_segment(s, {0.0}, {std::numbers::pi}, c) < 0.0);
}

TEST_CASE("property: (a) margin symmetry and sigma monotonicity") {
  const auto fields = catalog(2);
  for (std::uint64_t i = 0; i < 500; ++i) {
    CounterRng rng(71, i);
    const ScalarField& f = fields[rng.next() % fields.size()];
    const Vec x = testing::random_vec(rng, 2, f.domain.lower[0], f.domain.upper[0]);
    const Vec y = testing::random_vec(rng, 2, f.domain.lower[0], f.domain.upper[0]);
    const double l = rng.uniform(0.01, 0.99);
    const double s1 = rng.uniform(0, 3), s2 = s1 + rng.uniform(0, 3);
    const double m1 = margin_a(f, x, y, l, with_sigma(s1));
    const double m2 = margin_a(f, x, y, l, with_sigma(s2));
    REQUIRE(m2 <= m1);
    const double swapped = margin_a(f, y, x, 1.0 - l, with_sigma(s1));
    REQUIRE(std::abs(m1 - swapped) <= 1e-12 * std::max(1.0, std::abs(m1)));
    REQUIRE(sigma_star_segment(f, x, y, with_sigma(0)) == sigma_star_segment(f, y, x, with_sigma(0)));
  }
}

TEST_CASE("property: conditions hold on known-quasiconvex catalog fields") {
  CheckConfig cfg;
  cfg.tol = 1e-8;
  for (std::size_t n : {1u, 2u, 3u}) {
    for (const ScalarField& f : catalog(n)) {
      if (!f.has_known_quasiconvexity()) continue;
      CAPTURE(f.name);
      cfg.sigma = f.theorem_sigma();
      for (std::uint64_t i = 0; i < 300; ++i) {
        CounterRng rng(72, i);
        Vec x(n), y(n);
        for (std::size_t k = 0; k < n; ++k) {
          x[k] = rng.uniform(f.domain.lower[k], f.domain.upper[k]);
          y[k] = rng.uniform(f.domain.lower[k], f.domain.upper[k]);
        }
        for (double l : {0.1, 0.5, 0.9}) REQUIRE(margin_a(f, x, y, l, cfg) >= -cfg.tol);
        REQUIRE(check_b(f, x, y, cfg).status != Status::Violated);
        REQUIRE(check_c(f, x, y, cfg).status != Status::Violated);
      }
    }
  }
}

TEST_CASE("property: every (c) violation comes with a (b) violation") {
  const std::size_t n = 2;
  std::size_t applicable = 0;
  for (const Expr& e : testing::tame_smooth_exprs(73, 30, n)) {
    const ScalarField f = make_field_from_expr(e, n, DomainBox::cube(n, -1, 1));
    for (std::uint64_t i = 0; i < 100; ++i) {
      CounterRng rng(74, i);
      const Vec x = testing::random_vec(rng, n), y = testing::random_vec(rng, n);
      for (double sigma : {0.0, 1.0}) {
        const auto cp = check_contrapositive(f, x, y, with_sigma(sigma));
        if (cp.applicable) ++applicable;
        REQUIRE(cp.holds);
      }
    }
  }
  CHECK(applicable > 100);
}

TEST_CASE("sigma estimate") {
  Sampler s;
  s.count = 2000;
  s.seed = 5;
  for (std::size_t n : {1u, 2u, 5u}) {
    const ScalarField sq = find_catalog("sqnorm", n);
    s.domain = sq.domain;
    const SigmaEstimate e = sigma_star_estimate(sq, s, with_sigma(0));
    CHECK(e.reported == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(e.raw <= e.sampled_min);
    CHECK(e.pairs == 2000);
  }
  const ScalarField k = find_catalog("const", 2);
  s.domain = k.domain;
  CHECK(sigma_star_estimate(k, s, with_sigma(0)).reported == 0.0);

  const ScalarField sn = find_catalog("sin", 1);
  s.domain = sn.domain;
  const SigmaEstimate se = sigma_star_estimate(sn, s, with_sigma(0));
  CHECK(se.raw < 0.0);
  CHECK(se.reported == 0.0);
  CHECK(sigma_star_segment(sn, se.witness.x, se.witness.y, with_sigma(0)) == se.raw);
}

TEST_CASE("sigma estimate does not depend on thread count") {
  const ScalarField f = find_catalog("neg_gauss", 2);
  Sampler s{Strategy::UniformBox, 3, 500, f.domain};
  const SigmaEstimate a = sigma_star_estimate(f, s, with_sigma(0), {}, 1);
  const SigmaEstimate b = sigma_star_estimate(f, s, with_sigma(0), {}, 3);
  CHECK(a.raw == b.raw);
  CHECK(a.witness.x == b.witness.x);
}

TEST_CASE("scalar lemma") {
  const double tol = 1e-9;
  auto verdict = [&](const char* src, double lo, double hi) {
    return check_lemma_refined(expr_field(src, lo, hi), 63, 4095, tol);
  };
  LemmaResult r = verdict("(x1 - 1)^2", 0, 2);
  CHECK(r.verdict.status == Status::Holds);
  CHECK(std::abs(r.verdict.margin) <= tol);
  r = verdict("x1", 0, 1);
  CHECK(r.verdict.status == Status::Vacuous);
  REQUIRE(r.verdict.witness);
  CHECK(r.verdict.witness->x[0] > 0.0);
  r = verdict("-x1", 0, 1);
  CHECK(r.verdict.status == Status::Holds);
  CHECK(r.verdict.margin == 1.0);
  CHECK_FALSE(r.candidate_contradiction);
  CHECK(r.levels == 2);

  CHECK_THROWS_AS(check_lemma(expr_field("x1", 0, 1), {1.0}, tol), UsageError);
  CHECK_THROWS_AS(check_lemma(expr_field("x1 + x2", 0, 1, 2), {0.5}, tol), UsageError);
  CHECK(lemma_grid(0, 1, 3) == std::vector<double>{0.25, 0.5, 0.75});
}

TEST_CASE("scalar lemma detects a sign-flipped derivative") {
  ScalarField phi = expr_field("x1", 0, 1);
  const Status before = check_lemma(phi, lemma_grid(0, 1, 63), 1e-9).status;
  const auto good = phi.gradient;
  phi.gradient = [good](const Vec& t) {
    GradientResult g = good(t);
    g.grad[0] = -g.grad[0];
    return g;
  };
  const Status after = check_lemma(phi, lemma_grid(0, 1, 63), 1e-9).status;
  CHECK(before == Status::Vacuous);
  CHECK(after == Status::Violated);
}
