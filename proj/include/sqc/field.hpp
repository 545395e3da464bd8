#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqc/expr.hpp"
#include "sqc/vecmath.hpp"

namespace sqc {

/// Axis-aligned box standing in for the convex domain of f.
struct DomainBox {
  Vec lower;
  Vec upper;

  std::size_t dimension() const { return lower.size(); }
  bool contains(const Vec& x) const;
  Vec width() const { return upper - lower; }
  Vec center() const;
  /// Throws UsageError unless lower < upper coordinate-wise with finite bounds.
  void validate() const;

  static DomainBox cube(std::size_t n, double lo, double hi);
};

/// Parses `lo:hi[,lo:hi...]`. A single interval is broadcast to all n coordinates.
DomainBox parse_box(std::string_view text, std::size_t n);
std::string format_box(const DomainBox& box);

enum class KnownStatus { SigmaQuasiconvex, Quasiconvex, NotQuasiconvex, Unknown };

std::string to_string(KnownStatus s);

struct GradientResult {
  Vec grad;
  bool differentiable = true;  // false when a kink was hit exactly
};

/// Evaluatable scalar function with gradient on a box. Evaluation must be
/// reentrant; the same field is called concurrently from worker threads.
struct ScalarField {
  std::string name;
  std::size_t dimension = 0;
  std::function<double(const Vec&)> value;
  std::function<GradientResult(const Vec&)> gradient;
  DomainBox domain;
  std::optional<double> known_sigma;
  KnownStatus known_status = KnownStatus::Unknown;
  std::string formula;  // expression-language text, when one exists

  /// f(x); throws EvalError on a domain violation or non-finite value.
  double evaluate(const Vec& x) const;
  GradientResult grad(const Vec& x) const;

  /// True if the theory guarantees conditions (a)-(c) at `theorem_sigma()`.
  bool has_known_quasiconvexity() const {
    return known_status == KnownStatus::SigmaQuasiconvex || known_status == KnownStatus::Quasiconvex;
  }
  double theorem_sigma() const { return known_sigma.value_or(0.0); }
};

ScalarField make_field_from_expr(const Expr& e, std::size_t n, const DomainBox& box,
                                 std::string name = "expr");

/// Default central-difference step, 1e-5 * max(1, |x|_inf).
double default_fd_step(const Vec& x, double relative = 1e-5);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
Vec fd_grad(const ScalarField& f, const Vec& x, double h);

struct GradReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_deviation = 0.0;  // inf-norm of (grad - fd_grad), worst over points
  Vec worst_point;
  double step = 0.0;           // h used at the worst point
  double relative_step = 1e-5;
  double tol = 1e-6;
  bool pass = true;
};

GradReport validate_grad(const ScalarField& f, std::uint64_t seed, std::size_t count,
                         double relative_step = 1e-5, double tol = 1e-6, unsigned threads = 1);

struct CatalogEntry {
  std::string name;
  std::string description;
  std::size_t min_dim = 1;
  std::size_t max_dim = 0;  // 0 = unbounded
};

/// All catalog names with their supported dimensions.
std::vector<CatalogEntry> catalog_entries();

/// Catalog fields available in dimension n.
std::vector<ScalarField> catalog(std::size_t n);

/// Throws UsageError for unknown names or unsupported dimensions.
ScalarField find_catalog(std::string_view name, std::size_t n);

}  // namespace sqc
