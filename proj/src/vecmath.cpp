#include "sqc/vecmath.hpp"

#include <algorithm>
#include <cmath>

#include "sqc/errors.hpp"

namespace sqc {

Norm parse_norm(std::string_view text) {
  if (text == "1" || text == "l1") return Norm::L1;
  if (text == "2" || text == "l2") return Norm::L2;
  if (text == "inf" || text == "linf" || text == "max") return Norm::Linf;
  throw UsageError("unknown norm selector '" + std::string(text) + "' (expected 1, 2 or inf)");
}

std::string to_string(Norm p) {
  switch (p) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    case Norm::Linf: return "inf";
  }
  return "?";
}

void require_same_dim(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw UsageError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
}

double inner(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double pnorm(const Vec& a, Norm p) {
  switch (p) {
    case Norm::L1: {
      double s = 0.0;
      for (double v : a) s += std::abs(v);
      return s;
    }
    case Norm::L2: {
      double s = 0.0;
      for (double v : a) s += v * v;
      return std::sqrt(s);
    }
    case Norm::Linf: {
      double m = 0.0;
      for (double v : a) m = std::max(m, std::abs(v));
      return m;
    }
  }
  throw UsageError("invalid norm selector");
}

Vec segment_point(const Vec& x, const Vec& y, double lambda) {
  require_same_dim(x, y);
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw UsageError("segment parameter outside [0,1]: " + std::to_string(lambda));
  Vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = lambda * x[i] + (1.0 - lambda) * y[i];
  return z;
}

Vec operator+(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec operator-(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec operator*(double s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

bool all_finite(const Vec& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace sqc
