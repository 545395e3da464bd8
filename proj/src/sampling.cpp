#include "sqc/sampling.hpp"

#include <cmath>

#include "sqc/errors.hpp"
#include "sqc/random.hpp"

namespace sqc {

Strategy parse_strategy(std::string_view text) {
  if (text == "uniform_box") return Strategy::UniformBox;
  if (text == "gaussian_interior") return Strategy::GaussianInterior;
  if (text == "segment_grid") return Strategy::SegmentGrid;
  throw UsageError("unknown sampler strategy '" + std::string(text) + "'");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::UniformBox: return "uniform_box";
    case Strategy::GaussianInterior: return "gaussian_interior";
    case Strategy::SegmentGrid: return "segment_grid";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxAttempts = 1000;

Vec draw_point(Strategy strategy, const DomainBox& box, CounterRng& rng, std::size_t& attempts) {
  const std::size_t n = box.dimension();
  Vec p(n);
  if (strategy == Strategy::UniformBox) {
    ++attempts;
    for (std::size_t k = 0; k < n; ++k) p[k] = rng.uniform(box.lower[k], box.upper[k]);
    return p;
  }
  while (attempts < kMaxAttempts) {
    ++attempts;
    bool inside = true;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = 0.5 * (box.lower[k] + box.upper[k]);
      const double sd = (box.upper[k] - box.lower[k]) / 6.0;
      p[k] = c + sd * rng.normal();
      inside = inside && p[k] >= box.lower[k] && p[k] <= box.upper[k];
    }
    if (inside) return p;
  }
  throw UsageError("sampler could not place a point inside the box");
}

std::vector<PointPair> random_pairs(const Sampler& s, double min_sep, Norm norm) {
  std::vector<PointPair> out;
  out.reserve(s.count);
  for (std::size_t i = 0; i < s.count; ++i) {
    CounterRng rng(s.seed, i);
    std::size_t attempts = 0;
    bool placed = false;
    while (attempts < kMaxAttempts) {
      Vec x = draw_point(s.strategy, s.domain, rng, attempts);
      Vec y = draw_point(s.strategy, s.domain, rng, attempts);
      if (pnorm(x - y, norm) >= min_sep) {
        out.emplace_back(std::move(x), std::move(y));
        placed = true;
        break;
      }
    }
    if (!placed)
      throw UsageError("rejection sampling failed for pair " + std::to_string(i) +
                       " (degenerate box for min_sep)");
  }
  return out;
}

std::vector<PointPair> grid_pairs(const Sampler& s, double min_sep, Norm norm) {
  std::size_t m = 2;
  while (m * (m - 1) / 2 < s.count) ++m;
  const std::size_t total = m * (m - 1) / 2;
  const Vec width = s.domain.width();
  auto grid_point = [&](std::size_t j) {
    const double t = static_cast<double>(j) / static_cast<double>(m - 1);
    Vec p(s.domain.dimension());
    for (std::size_t k = 0; k < p.size(); ++k)
      p[k] = j == m - 1 ? s.domain.upper[k] : s.domain.lower[k] + t * width[k];
    return p;
  };
  std::vector<PointPair> out;
  out.reserve(s.count);
  // Lexicographic (j, k), j < k; walk rows to find the strided flat index.
  for (std::size_t i = 0; i < s.count; ++i) {
    std::size_t flat = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(i) * total) / s.count);
    std::size_t j = 0;
    while (flat >= m - 1 - j) {
      flat -= m - 1 - j;
      ++j;
    }
    const std::size_t k = j + 1 + flat;
    Vec x = grid_point(j);
    Vec y = grid_point(k);
    if (pnorm(x - y, norm) < min_sep)
      throw UsageError("segment grid spacing falls below min_sep (degenerate box)");
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

}  // namespace

std::vector<PointPair> sample_pairs(const Sampler& s, double min_sep, Norm norm) {
  if (s.count < 1) throw UsageError("sampler count must be at least 1");
  s.domain.validate();
  if (s.strategy == Strategy::SegmentGrid) return grid_pairs(s, min_sep, norm);
  return random_pairs(s, min_sep, norm);
}

}  // namespace sqc
