#pragma once

// Test-only generators and brute-force oracles. Nothing here calls into the
// condition evaluators; oracles recompute margins from raw function values.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "sqc/expr.hpp"
#include "sqc/field.hpp"
#include "sqc/random.hpp"

namespace sqc::testing {

inline Vec random_vec(CounterRng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Vec v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Arbitrary tree over the whole grammar; constants are non-negative, as the
/// parser produces them.
inline Expr random_any_expr(CounterRng& rng, std::size_t n, int depth) {
  const auto leaf = [&]() -> Expr {
    if (rng.uniform() < 0.5) return Expr::variable(1 + rng.next() % n);
    switch (rng.next() % 4) {
      case 0: return Expr::constant(static_cast<double>(rng.next() % 10));
      case 1: return Expr::constant(rng.uniform(0.0, 100.0));
      case 2: return Expr::constant(rng.uniform() * 1e-7);
      default: return Expr::constant(std::ldexp(rng.uniform(), static_cast<int>(rng.next() % 80)));
    }
  };
  if (depth <= 0 || rng.uniform() < 0.2) return leaf();
  switch (rng.next() % 4) {
    case 0: return Expr::negate(random_any_expr(rng, n, depth - 1));
    case 1: {
      const auto op = static_cast<BinaryOp>(rng.next() % 5);
      return Expr::binary(op, random_any_expr(rng, n, depth - 1), random_any_expr(rng, n, depth - 1));
    }
    default: {
      const auto fn = static_cast<Function>(rng.next() % 9);
      std::vector<Expr> args;
      for (std::size_t i = 0; i < function_arity(fn); ++i)
        args.push_back(random_any_expr(rng, n, depth - 1));
      return Expr::call(fn, std::move(args));
    }
  }
}

/// Smooth expression on all of R^n: no division, kinks or restricted domains.
inline Expr random_smooth_expr(CounterRng& rng, std::size_t n, int depth) {
  if (depth <= 0 || rng.uniform() < 0.15) {
    if (rng.uniform() < 0.7) return Expr::variable(1 + rng.next() % n);
    return Expr::constant(std::round(rng.uniform(0.1, 2.0) * 100.0) / 100.0);
  }
  auto sub = [&] { return random_smooth_expr(rng, n, depth - 1); };
  switch (rng.next() % 10) {
    case 0: return Expr::binary(BinaryOp::Add, sub(), sub());
    case 1: return Expr::binary(BinaryOp::Sub, sub(), sub());
    case 2: return Expr::binary(BinaryOp::Mul, sub(), sub());
    case 3: return Expr::call(Function::Sin, {sub()});
    case 4: return Expr::call(Function::Cos, {sub()});
    case 5: return Expr::call(Function::Exp, {Expr::call(Function::Sin, {sub()})});
    case 6: {
      const Expr u = sub();
      return Expr::call(Function::Log,
                        {Expr::binary(BinaryOp::Add, Expr::constant(1.0),
                                      Expr::binary(BinaryOp::Pow, u, Expr::constant(2.0)))});
    }
    case 7: {
      const Expr u = sub();
      return Expr::call(Function::Sqrt,
                        {Expr::binary(BinaryOp::Add, Expr::constant(1.0),
                                      Expr::binary(BinaryOp::Pow, u, Expr::constant(2.0)))});
    }
    case 8: return Expr::binary(BinaryOp::Pow, sub(), Expr::constant(static_cast<double>(2 + rng.next() % 2)));
    default: return Expr::negate(sub());
  }
}

/// Smooth random expressions whose values and gradients stay below `bound`
/// on [-1,1]^n, so central differences at h ~ 1e-5 resolve them to ~1e-8.
inline std::vector<Expr> tame_smooth_exprs(std::uint64_t seed, std::size_t count, std::size_t n,
                                           double bound = 50.0) {
  std::vector<Expr> out;
  for (std::uint64_t k = 0; out.size() < count; ++k) {
    CounterRng rng(seed, k);
    Expr e = random_smooth_expr(rng, n, 4);
    if (e.max_variable() == 0) continue;
    bool ok = true;
    CounterRng probe(seed ^ 0xabcdefULL, k);
    for (int i = 0; i < 50 && ok; ++i) {
      const Vec x = random_vec(probe, n);
      try {
        if (std::abs(eval_expr(e, x)) > bound) ok = false;
        Vec dir(n, 0.0);
        for (std::size_t j = 0; j < n && ok; ++j) {
          dir[j] = 1.0;
          const DualResult d = eval_dual(e, x, dir);
          if (std::abs(d.dderiv) > bound) ok = false;
          dir[j] = 0.0;
        }
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (ok) out.push_back(std::move(e));
  }
  return out;
}

/// Brute-force minimum of max{f(x),f(y)} - f(lx+(1-l)y) - (sigma/2)l(1-l)(x-y)^2
/// over a (grid x grid x lambda) lattice of a one-dimensional function on [lo,hi].
inline double grid_min_margin_a_1d(const std::function<double(double)>& f, double lo, double hi,
                                   double sigma, int grid) {
  double best = INFINITY;
  for (int i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double y = lo + (hi - lo) * j / (grid - 1);
      if (i == j) continue;
      for (int k = 1; k <= grid; ++k) {
        const double l = static_cast<double>(k) / (grid + 1);
        const double z = l * x + (1 - l) * y;
        const double m = std::max(f(x), f(y)) - f(z) - 0.5 * sigma * l * (1 - l) * (x - y) * (x - y);
        best = std::min(best, m);
      }
    }
  }
  return best;
}

}  // namespace sqc::testing
