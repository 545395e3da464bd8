#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqc/field.hpp"
#include "sqc/vecmath.hpp"

namespace sqc {

enum class Strategy { UniformBox, GaussianInterior, SegmentGrid };

Strategy parse_strategy(std::string_view text);
std::string to_string(Strategy s);

/// Deterministic pair generator: pair i depends only on (seed, i, strategy, domain).
struct Sampler {
  Strategy strategy = Strategy::UniformBox;
  std::uint64_t seed = 1;
  std::size_t count = 1;
  DomainBox domain;
};

using PointPair = std::pair<Vec, Vec>;

/// `count` pairs inside the box with |x - y| >= min_sep.
///
/// uniform_box draws both points uniformly. gaussian_interior draws around the
/// box centre with per-coordinate standard deviation width/6 and redraws points
/// that fall outside. segment_grid places m points on the box diagonal and
/// takes evenly strided (j < k) index pairs, where m is the smallest grid with
/// at least `count` pairs; it ignores the seed.
///
/// Throws UsageError if count is 0 or a pair needs more than 1000 draws.
std::vector<PointPair> sample_pairs(const Sampler& s, double min_sep = 1e-6, Norm norm = Norm::L2);

}  // namespace sqc
