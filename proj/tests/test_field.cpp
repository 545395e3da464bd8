#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sqc/errors.hpp"
#include "sqc/field.hpp"
#include "support.hpp"

using namespace sqc;

TEST_CASE("box parsing") {
  const DomainBox b = parse_box("-1:2", 3);
  CHECK(b.lower == Vec{-1, -1, -1});
  CHECK(b.upper == Vec{2, 2, 2});
  const DomainBox c = parse_box("0:1,-2:3", 2);
  CHECK(c.lower == Vec{0, -2});
  CHECK(c.upper == Vec{1, 3});
  CHECK(parse_box(format_box(c), 2).lower == c.lower);
  CHECK_THROWS_AS(parse_box("1:0", 1), UsageError);
  CHECK_THROWS_AS(parse_box("0:1,0:1", 3), UsageError);
  CHECK_THROWS_AS(parse_box("abc", 1), UsageError);
  CHECK(b.contains({0, 0, 0}));
  CHECK_FALSE(b.contains({0, 3, 0}));
}

TEST_CASE("finite differences on closed forms") {
  const ScalarField sq = find_catalog("sqnorm", 2);
  // Central differences are exact for quadratics up to rounding.
  const Vec g = fd_grad(sq, {0.3, -0.4}, 1e-5);
  CHECK(std::abs(g[0] - 0.6) <= 1e-9);
  CHECK(std::abs(g[1] + 0.8) <= 1e-9);

  const ScalarField cube = find_catalog("cubic", 1);
  // (3x^2 h... ) error term is h^2 = 1e-10 for x^3.
  const Vec gc = fd_grad(cube, {0.5}, 1e-5);
  CHECK(std::abs(gc[0] - 0.75) <= 1e-9);

  CHECK(default_fd_step({0.1, -0.2}) == 1e-5);
  CHECK(default_fd_step({3.0, -4.0}) == doctest::Approx(4e-5));
  CHECK_THROWS_AS(fd_grad(sq, {1.0, 0.0}, 1e-5), UsageError);
}

TEST_CASE("catalog lookups") {
  CHECK(find_catalog("sqnorm", 5).dimension == 5);
  CHECK(find_catalog("sqnorm", 5).known_sigma == 2.0);
  CHECK(find_catalog("sin", 1).known_status == KnownStatus::NotQuasiconvex);
  CHECK_THROWS_AS(find_catalog("sin", 2), UsageError);
  CHECK_THROWS_AS(find_catalog("affine", 1), UsageError);
  CHECK_THROWS_AS(find_catalog("nope", 1), UsageError);
  CHECK(catalog(1).size() == 7);
  CHECK(catalog(2).size() == 5);
  const ScalarField s = find_catalog("sin", 1);
  CHECK(s.domain.upper[0] == doctest::Approx(2 * std::numbers::pi));
}

TEST_CASE("catalog closed forms agree with their expression text") {
  for (std::size_t n : {1u, 2u, 3u}) {
    for (const ScalarField& f : catalog(n)) {
      CAPTURE(f.name);
      REQUIRE_FALSE(f.formula.empty());
      const ScalarField e = make_field_from_expr(parse(f.formula, n), n, f.domain);
      for (std::uint64_t i = 0; i < 100; ++i) {
        CounterRng rng(51, i);
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k) x[k] = rng.uniform(f.domain.lower[k], f.domain.upper[k]);
        const double fv = f.evaluate(x), ev = e.evaluate(x);
        REQUIRE(std::abs(fv - ev) <= 1e-12 * std::max(1.0, std::abs(fv)));
        const Vec fg = f.grad(x).grad, eg = e.grad(x).grad;
        for (std::size_t k = 0; k < n; ++k)
          REQUIRE(std::abs(fg[k] - eg[k]) <= 1e-12 * std::max(1.0, std::abs(fg[k])));
      }
    }
  }
}

TEST_CASE("gradient validation on the catalog") {
  for (std::size_t n : {1u, 2u, 5u}) {
    for (const ScalarField& f : catalog(n)) {
      CAPTURE(f.name);
      const GradReport r = validate_grad(f, 7, 100);
      CHECK(r.pass);
      CHECK(r.checked == 100);
      CHECK(r.max_deviation <= 1e-6);
    }
  }
  const GradReport c = validate_grad(find_catalog("const", 3), 7, 100);
  CHECK(c.max_deviation <= 1e-12);
}

TEST_CASE("gradient validation catches a planted wrong gradient") {
  ScalarField f = find_catalog("sqnorm", 2);
  const auto good = f.gradient;
  f.gradient = [good](const Vec& x) {
    GradientResult g = good(x);
    g.grad = 2.0 * g.grad;
    return g;
  };
  const GradReport r = validate_grad(f, 7, 100);
  CHECK_FALSE(r.pass);
  CHECK(r.max_deviation > 1e-3);
  CHECK_FALSE(r.worst_point.empty());
}

TEST_CASE("gradient validation is independent of thread count") {
  const ScalarField f = find_catalog("neg_gauss", 3);
  const GradReport a = validate_grad(f, 9, 200, 1e-5, 1e-6, 1);
  const GradReport b = validate_grad(f, 9, 200, 1e-5, 1e-6, 4);
  CHECK(a.max_deviation == b.max_deviation);
  CHECK(a.worst_point == b.worst_point);
}

TEST_CASE("property: random smooth expression fields pass gradient validation") {
  const std::size_t n = 3;
  for (const Expr& e : testing::tame_smooth_exprs(61, 20, n)) {
    CAPTURE(pretty_print(e));
    const ScalarField f = make_field_from_expr(e, n, DomainBox::cube(n, -1, 1));
    const GradReport r = validate_grad(f, 3, 100);
    REQUIRE(r.max_deviation <= 1e-6);
  }
}

TEST_CASE("expression fields report kinks and domain errors") {
  const ScalarField f = make_field_from_expr(parse("abs(x1)", 1), 1, DomainBox::cube(1, -1, 1));
  CHECK_FALSE(f.grad({0.0}).differentiable);
  CHECK(f.grad({0.5}).differentiable);
  const ScalarField g = make_field_from_expr(parse("log(x1)", 1), 1, DomainBox::cube(1, -1, 1));
  CHECK_THROWS_AS(g.evaluate({-0.5}), EvalError);
  CHECK_THROWS_AS(f.evaluate({0.1, 0.2}), UsageError);
}
