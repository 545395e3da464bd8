#pragma once

#include <cstddef>
#include <functional>

#include "sqc/vecmath.hpp"

namespace sqc {

struct LocalSearchOptions {
  double initial_step = 0.1;  // in normalized [0,1] coordinates
  double decay = 0.5;         // step multiplier after a failed iteration
  double min_step = 1e-10;
  std::size_t max_iters = 1000;
};

struct LocalSearchResult {
  Vec point;
  double value = 0.0;
  std::size_t iterations = 0;
};

/// Projected descent on [0,1]^m. Each iteration tries a step along the
/// normalized negative central-difference gradient, then a compass poll of
/// +-step along each axis; if neither improves, the step decays. Objective
/// values of +inf mark infeasible points. `may_evaluate` is consulted before
/// every objective call and stops the search when it returns false, so a
/// larger allowance only ever extends the same trajectory.
LocalSearchResult minimize_in_unit_box(const std::function<double(const Vec&)>& objective,
                                       Vec start, double start_value,
                                       const LocalSearchOptions& opts,
                                       const std::function<bool()>& may_evaluate);

}  // namespace sqc
