#include <doctest.h>

#include <cmath>
#include <optional>
#include <string>

#include "sqc/errors.hpp"
#include "sqc/expr.hpp"
#include "parser_corpus.hpp"
#include "support.hpp"

using namespace sqc;

TEST_CASE("parser corpus") {
  std::size_t checked = 0;
  for (const auto& c : testing::kCorpus) {
    CAPTURE(c.source);
    if (c.printed) {
      const Expr e = parse(c.source, c.dim);
      CHECK(pretty_print(e) == c.printed);
    } else {
      std::optional<std::size_t> where;
      try {
        parse(c.source, c.dim);
      } catch (const ParseError& err) {
        where = err.position();
      }
      REQUIRE(where.has_value());
      CHECK(*where == c.error_offset);
    }
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("parse builds the documented tree") {
  const Expr e = parse("x1^2 + x2^2", 2);
  const Expr expected =
      Expr::binary(BinaryOp::Add, Expr::binary(BinaryOp::Pow, Expr::variable(1), Expr::constant(2)),
                   Expr::binary(BinaryOp::Pow, Expr::variable(2), Expr::constant(2)));
  CHECK(structurally_equal(e, expected));
  CHECK_FALSE(structurally_equal(e, parse("x1^2 + x1^2", 2)));
}

TEST_CASE("pretty print of hand-built trees") {
  CHECK(pretty_print(Expr::binary(BinaryOp::Add, Expr::variable(1), Expr::constant(2))) == "(x1 + 2)");
  CHECK(pretty_print(Expr::binary(BinaryOp::Pow, Expr::variable(1), Expr::constant(2))) == "(x1 ^ 2)");
  CHECK(pretty_print(Expr::negate(Expr::variable(3))) == "(-x3)");
  CHECK(pretty_print(Expr::call(Function::Max, {Expr::variable(1), Expr::constant(0.25)})) ==
        "max(x1, 0.25)");
  CHECK_THROWS_AS(Expr::call(Function::Sin, {}), UsageError);
}

TEST_CASE("parse error messages carry positions") {
  try {
    parse("sin(x1", 1);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unclosed parenthesis") != std::string::npos);
    CHECK(e.position() == 6);
  }
  try {
    parse("x3", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("exceeds dimension") != std::string::npos);
  }
}

TEST_CASE("property: pretty-print round trip on random trees") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    CounterRng rng(21, i);
    const std::size_t n = 1 + rng.next() % 4;
    const Expr e = testing::random_any_expr(rng, n, 5);
    const std::string text = pretty_print(e);
    CAPTURE(text);
    const Expr back = parse(text, n);
    REQUIRE(structurally_equal(e, back));
    REQUIRE(pretty_print(back) == text);
  }
}

TEST_CASE("evaluation") {
  CHECK(eval_expr(parse("x1^2", 1), {3}) == 9.0);
  CHECK(eval_expr(parse("sin(x1)", 1), {0}) == 0.0);
  CHECK(eval_expr(parse("(-x1)^3", 1), {2}) == -8.0);
  CHECK(eval_expr(parse("x1^-1", 1), {4}) == 0.25);
  CHECK(eval_expr(parse("min(x1, x2) + max(x1, x2)", 2), {2, 5}) == 7.0);
  CHECK(eval_expr(parse("pow(x1, 0.5)", 1), {9}) == doctest::Approx(3.0));
  CHECK(eval_expr(parse("x1^0.5", 1), {4}) == doctest::Approx(2.0));
}

TEST_CASE("evaluation domain errors") {
  auto offset_of = [](const char* src, const Vec& x) -> std::optional<std::size_t> {
    try {
      eval_expr(parse(src, x.size()), x);
    } catch (const EvalError& e) {
      return e.position();
    }
    return std::nullopt;
  };
  CHECK(offset_of("log(x1)", {0}) == std::optional<std::size_t>(0));
  CHECK(offset_of("1 + log(x1)", {-1}) == std::optional<std::size_t>(4));
  CHECK(offset_of("x1 / x2", {1, 0}) == std::optional<std::size_t>(3));
  CHECK(offset_of("sqrt(x1)", {-1}) == std::optional<std::size_t>(0));
  CHECK(offset_of("pow(x1, 2)", {-1}) == std::optional<std::size_t>(0));
  CHECK(offset_of("x1 ^ 0.5", {-1}) == std::optional<std::size_t>(3));
  CHECK(offset_of("x1 ^ 2", {-1}) == std::nullopt);
  CHECK(offset_of("exp(x1)", {1000}) == std::optional<std::size_t>(0));
  CHECK_THROWS_AS(eval_expr(parse("x2", 2), {1}), UsageError);
}

TEST_CASE("dual evaluation") {
  auto r = eval_dual(parse("x1^2", 1), {3}, {1});
  CHECK(r.value == 9.0);
  CHECK(r.dderiv == 6.0);
  CHECK_FALSE(r.nondifferentiable);

  r = eval_dual(parse("x1*x2", 2), {2, 5}, {0, 1});
  CHECK(r.value == 10.0);
  CHECK(r.dderiv == 2.0);

  r = eval_dual(parse("abs(x1)", 1), {0}, {1});
  CHECK(r.value == 0.0);
  CHECK(r.nondifferentiable);

  r = eval_dual(parse("max(x1, x2)", 2), {1, 1}, {1, 0});
  CHECK(r.nondifferentiable);
  CHECK(r.dderiv == 1.0);  // first argument's branch

  r = eval_dual(parse("abs(x1)", 1), {-2}, {1});
  CHECK(r.dderiv == -1.0);
  CHECK_FALSE(r.nondifferentiable);

  CHECK_THROWS_AS(eval_dual(parse("sqrt(x1)", 1), {0}, {1}), EvalError);
  CHECK_THROWS_AS(eval_dual(parse("log(x1)", 1), {0}, {1}), EvalError);
}

TEST_CASE("property: dual derivative matches central differences") {
  const std::size_t n = 3;
  const auto exprs = testing::tame_smooth_exprs(31, 60, n);
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    CAPTURE(pretty_print(exprs[k]));
    for (std::uint64_t i = 0; i < 20; ++i) {
      CounterRng rng(32 + k, i);
      const Vec x = testing::random_vec(rng, n);
      const Vec d = testing::random_vec(rng, n);
      const double h = 1e-5 * std::max(1.0, pnorm(x, Norm::Linf));
      const double fd = (eval_expr(exprs[k], x + h * d) - eval_expr(exprs[k], x - (h * d))) / (2 * h);
      const DualResult r = eval_dual(exprs[k], x, d);
      REQUIRE(std::abs(r.dderiv - fd) <= 1e-6);
      REQUIRE(r.value == eval_expr(exprs[k], x));
    }
  }
}

TEST_CASE("property: directional derivative is linear in the direction") {
  const std::size_t n = 3;
  const auto exprs = testing::tame_smooth_exprs(41, 40, n);
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    for (std::uint64_t i = 0; i < 10; ++i) {
      CounterRng rng(42 + k, i);
      const Vec x = testing::random_vec(rng, n);
      const Vec d1 = testing::random_vec(rng, n), d2 = testing::random_vec(rng, n);
      const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
      const double lhs = eval_dual(exprs[k], x, a * d1 + b * d2).dderiv;
      const double rhs = a * eval_dual(exprs[k], x, d1).dderiv + b * eval_dual(exprs[k], x, d2).dderiv;
      REQUIRE(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}
