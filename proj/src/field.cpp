#include "sqc/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sqc/errors.hpp"
#include "sqc/parallel.hpp"
#include "sqc/random.hpp"

namespace sqc {

bool DomainBox::contains(const Vec& x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

Vec DomainBox::center() const { return 0.5 * (lower + upper); }

void DomainBox::validate() const {
  if (lower.empty()) throw UsageError("domain box has dimension 0");
  if (lower.size() != upper.size()) throw UsageError("domain box bounds differ in dimension");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw UsageError("domain box bounds must be finite");
    if (!(lower[i] < upper[i]))
      throw UsageError("domain box needs lower < upper in coordinate " + std::to_string(i + 1));
  }
}

DomainBox DomainBox::cube(std::size_t n, double lo, double hi) {
  return {Vec(n, lo), Vec(n, hi)};
}

namespace {

double parse_double(std::string_view s, std::string_view context) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("malformed number '" + std::string(s) + "' in " + std::string(context));
  return v;
}

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

DomainBox parse_box(std::string_view text, std::size_t n) {
  std::vector<std::pair<double, double>> intervals;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(start, comma - start);
    std::size_t colon = part.find(':');
    if (colon == std::string_view::npos)
      throw UsageError("box interval '" + std::string(part) + "' must be lo:hi");
    intervals.emplace_back(parse_double(part.substr(0, colon), "box"),
                           parse_double(part.substr(colon + 1), "box"));
    start = comma + 1;
  }
  if (intervals.size() != 1 && intervals.size() != n)
    throw UsageError("box has " + std::to_string(intervals.size()) + " intervals for dimension " +
                     std::to_string(n));
  DomainBox box{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& iv = intervals.size() == 1 ? intervals[0] : intervals[i];
    box.lower[i] = iv.first;
    box.upper[i] = iv.second;
  }
  box.validate();
  return box;
}

std::string format_box(const DomainBox& box) {
  std::string out;
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    if (i) out += ",";
    out += fmt(box.lower[i]) + ":" + fmt(box.upper[i]);
  }
  return out;
}

std::string to_string(KnownStatus s) {
  switch (s) {
    case KnownStatus::SigmaQuasiconvex: return "sigma_quasiconvex";
    case KnownStatus::Quasiconvex: return "quasiconvex";
    case KnownStatus::NotQuasiconvex: return "not_quasiconvex";
    case KnownStatus::Unknown: return "unknown";
  }
  return "unknown";
}

double ScalarField::evaluate(const Vec& x) const {
  if (x.size() != dimension)
    throw UsageError("point dimension " + std::to_string(x.size()) + " does not match field '" +
                     name + "' of dimension " + std::to_string(dimension));
  const double v = value(x);
  if (!std::isfinite(v)) throw EvalError("non-finite value of '" + name + "'");
  return v;
}

GradientResult ScalarField::grad(const Vec& x) const {
  if (x.size() != dimension)
    throw UsageError("point dimension " + std::to_string(x.size()) + " does not match field '" +
                     name + "' of dimension " + std::to_string(dimension));
  GradientResult g = gradient(x);
  if (!all_finite(g.grad)) throw EvalError("non-finite gradient of '" + name + "'");
  return g;
}

ScalarField make_field_from_expr(const Expr& e, std::size_t n, const DomainBox& box,
                                 std::string name) {
  if (e.empty()) throw UsageError("empty expression");
  if (e.max_variable() > n)
    throw UsageError("expression uses x" + std::to_string(e.max_variable()) +
                     " but dimension is " + std::to_string(n));
  box.validate();
  if (box.dimension() != n) throw UsageError("box dimension does not match field dimension");
  ScalarField f;
  f.name = std::move(name);
  f.dimension = n;
  f.domain = box;
  f.formula = pretty_print(e);
  f.value = [e](const Vec& x) { return eval_expr(e, x); };
  f.gradient = [e, n](const Vec& x) {
    GradientResult r{Vec(n), true};
    Vec dir(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = 1.0;
      const DualResult d = eval_dual(e, x, dir);
      r.grad[i] = d.dderiv;
      r.differentiable = r.differentiable && !d.nondifferentiable;
      dir[i] = 0.0;
    }
    return r;
  };
  return f;
}

double default_fd_step(const Vec& x, double relative) {
  return relative * std::max(1.0, pnorm(x, Norm::Linf));
}

Vec fd_grad(const ScalarField& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw UsageError("finite-difference step must be positive");
  Vec g(x.size());
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    if (!f.domain.contains(probe)) throw UsageError("finite-difference probe leaves the domain");
    const double fp = f.evaluate(probe);
    probe[i] = x[i] - h;
    if (!f.domain.contains(probe)) throw UsageError("finite-difference probe leaves the domain");
    const double fm = f.evaluate(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

GradReport validate_grad(const ScalarField& f, std::uint64_t seed, std::size_t count,
                         double relative_step, double tol, unsigned threads) {
  if (count < 1) throw UsageError("gradient check needs at least one point");
  if (!(relative_step > 0.0) || !(tol > 0.0)) throw UsageError("step and tolerance must be positive");

  struct Slot {
    bool skipped = false;
    double deviation = 0.0;
    double step = 0.0;
    Vec x;
  };
  std::vector<Slot> slots(count);
  const Vec width = f.domain.width();
  constexpr double kInset = 1e-3;  // keep probes strictly inside the box

  parallel_for(count, threads, [&](std::size_t i) {
    CounterRng rng(seed, i);
    Slot& s = slots[i];
    s.x.resize(f.dimension);
    for (std::size_t k = 0; k < f.dimension; ++k)
      s.x[k] = f.domain.lower[k] + width[k] * (kInset + (1.0 - 2.0 * kInset) * rng.uniform());
    s.step = default_fd_step(s.x, relative_step);
    try {
      const GradientResult g = f.grad(s.x);
      if (!g.differentiable) {
        s.skipped = true;
        return;
      }
      const Vec fd = fd_grad(f, s.x, s.step);
      s.deviation = pnorm(g.grad - fd, Norm::Linf);
    } catch (const EvalError&) {
      s.skipped = true;
    } catch (const UsageError&) {
      s.skipped = true;
    }
  });

  GradReport rep;
  rep.relative_step = relative_step;
  rep.tol = tol;
  bool have_worst = false;
  for (const Slot& s : slots) {
    if (s.skipped) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    if (!have_worst || s.deviation > rep.max_deviation) {
      have_worst = true;
      rep.max_deviation = s.deviation;
      rep.worst_point = s.x;
      rep.step = s.step;
    }
  }
  rep.pass = rep.checked > 0 && rep.max_deviation <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Catalog. Quasiconvexity status depends on the box, so each entry fixes one.

namespace {

using Builder = ScalarField (*)(std::size_t n);

struct CatalogDef {
  CatalogEntry entry;
  Builder build;
};

ScalarField base(std::string name, std::size_t n, DomainBox box, KnownStatus status,
                 std::optional<double> sigma, std::string formula) {
  ScalarField f;
  f.name = std::move(name);
  f.dimension = n;
  f.domain = std::move(box);
  f.known_status = status;
  f.known_sigma = sigma;
  f.formula = std::move(formula);
  return f;
}

std::string var(std::size_t i) { return "x" + std::to_string(i + 1); }

constexpr double kConst = 1.5;

ScalarField make_const(std::size_t n) {
  ScalarField f = base("const", n, DomainBox::cube(n, -1, 1), KnownStatus::Quasiconvex, 0.0, "1.5");
  f.value = [](const Vec&) { return kConst; };
  f.gradient = [n](const Vec&) { return GradientResult{Vec(n, 0.0), true}; };
  return f;
}

// c_i = (-1)^i / (i + 1): 1, -1/2, 1/3, ...
Vec affine_coefficients(std::size_t n) {
  Vec c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = (i % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(i + 1);
  return c;
}

ScalarField make_affine(std::size_t n) {
  const Vec c = affine_coefficients(n);
  std::string formula;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) formula += c[i] < 0 ? " - " : " + ";
    formula += fmt(std::abs(c[i])) + "*" + var(i);
  }
  ScalarField f = base("affine", n, DomainBox::cube(n, -1, 1), KnownStatus::Quasiconvex, 0.0, formula);
  f.value = [c](const Vec& x) { return inner(c, x); };
  f.gradient = [c](const Vec&) { return GradientResult{c, true}; };
  return f;
}

ScalarField make_sqnorm(std::size_t n) {
  std::string formula;
  for (std::size_t i = 0; i < n; ++i) formula += (i ? " + " : "") + var(i) + "^2";
  ScalarField f = base("sqnorm", n, DomainBox::cube(n, -1, 1), KnownStatus::SigmaQuasiconvex, 2.0, formula);
  f.value = [](const Vec& x) { return inner(x, x); };
  f.gradient = [](const Vec& x) { return GradientResult{2.0 * x, true}; };
  return f;
}

ScalarField make_cubic(std::size_t n) {
  ScalarField f = base("cubic", n, DomainBox::cube(1, -1, 1), KnownStatus::Quasiconvex, 0.0, "x1^3");
  f.value = [](const Vec& x) { return x[0] * x[0] * x[0]; };
  f.gradient = [](const Vec& x) { return GradientResult{{3.0 * x[0] * x[0]}, true}; };
  return f;
}

ScalarField make_sin(std::size_t) {
  ScalarField f = base("sin", 1, {{0.0}, {2.0 * std::numbers::pi}}, KnownStatus::NotQuasiconvex,
                       std::nullopt, "sin(x1)");
  f.value = [](const Vec& x) { return std::sin(x[0]); };
  f.gradient = [](const Vec& x) { return GradientResult{{std::cos(x[0])}, true}; };
  return f;
}

ScalarField make_cubic_minus_linear(std::size_t) {
  ScalarField f = base("cubic_minus_linear", 1, DomainBox::cube(1, -2, 2), KnownStatus::NotQuasiconvex,
                       std::nullopt, "x1^3 - x1");
  f.value = [](const Vec& x) { return x[0] * x[0] * x[0] - x[0]; };
  f.gradient = [](const Vec& x) { return GradientResult{{3.0 * x[0] * x[0] - 1.0}, true}; };
  return f;
}

ScalarField make_sqrt_norm(std::size_t n) {
  std::string inside;
  for (std::size_t i = 0; i < n; ++i) inside += (i ? " + " : "") + var(i) + "^2";
  ScalarField f = base("sqrt_norm", n, DomainBox::cube(n, 0.5, 1.5), KnownStatus::Unknown,
                       std::nullopt, "sqrt(sqrt(" + inside + "))");
  f.value = [](const Vec& x) { return std::sqrt(std::sqrt(inner(x, x))); };
  f.gradient = [](const Vec& x) {
    const double r = std::sqrt(inner(x, x));
    return GradientResult{(0.5 / (r * std::sqrt(r))) * x, true};
  };
  return f;
}

ScalarField make_neg_gauss(std::size_t n) {
  std::string inside;
  for (std::size_t i = 0; i < n; ++i) inside += (i ? " + " : "") + var(i) + "^2";
  ScalarField f = base("neg_gauss", n, DomainBox::cube(n, -1, 1), KnownStatus::Quasiconvex,
                       std::nullopt, "-exp(-(" + inside + "))");
  f.value = [](const Vec& x) { return -std::exp(-inner(x, x)); };
  f.gradient = [](const Vec& x) { return GradientResult{(2.0 * std::exp(-inner(x, x))) * x, true}; };
  return f;
}

const std::vector<CatalogDef>& definitions() {
  static const std::vector<CatalogDef> defs{
      {{"const", "f = 1.5 on [-1,1]^n; quasiconvex, sigma 0", 1, 0}, make_const},
      {{"affine", "<c,x> with c_i = (-1)^(i-1)/i on [-1,1]^n; quasiconvex, sigma 0", 2, 0}, make_affine},
      {{"sqnorm", "|x|^2 on [-1,1]^n; sigma-quasiconvex with sigma 2", 1, 0}, make_sqnorm},
      {{"cubic", "x^3 on [-1,1]; quasiconvex (monotone), sigma 0", 1, 1}, make_cubic},
      {{"sin", "sin(x) on [0,2pi]; not quasiconvex", 1, 1}, make_sin},
      {{"cubic_minus_linear", "x^3 - x on [-2,2]; not quasiconvex", 1, 1}, make_cubic_minus_linear},
      {{"sqrt_norm", "sqrt(|x|) on [0.5,1.5]^n; status unknown", 1, 0}, make_sqrt_norm},
      {{"neg_gauss", "-exp(-|x|^2) on [-1,1]^n; quasiconvex, not convex", 1, 0}, make_neg_gauss},
  };
  return defs;
}

bool supports(const CatalogEntry& e, std::size_t n) {
  return n >= e.min_dim && (e.max_dim == 0 || n <= e.max_dim);
}

}  // namespace

std::vector<CatalogEntry> catalog_entries() {
  std::vector<CatalogEntry> out;
  for (const auto& d : definitions()) out.push_back(d.entry);
  return out;
}

std::vector<ScalarField> catalog(std::size_t n) {
  std::vector<ScalarField> out;
  for (const auto& d : definitions())
    if (supports(d.entry, n)) out.push_back(d.build(n));
  return out;
}

ScalarField find_catalog(std::string_view name, std::size_t n) {
  for (const auto& d : definitions()) {
    if (d.entry.name != name) continue;
    if (!supports(d.entry, n)) {
      std::ostringstream msg;
      msg << "catalog field '" << name << "' does not support dimension " << n;
      throw UsageError(msg.str());
    }
    return d.build(n);
  }
  throw UsageError("unknown catalog field '" + std::string(name) + "'");
}

}  // namespace sqc
