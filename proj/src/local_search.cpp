#include "sqc/local_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqc {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

LocalSearchResult minimize_in_unit_box(const std::function<double(const Vec&)>& objective,
                                       Vec start, double start_value,
                                       const LocalSearchOptions& opts,
                                       const std::function<bool()>& may_evaluate) {
  LocalSearchResult best{std::move(start), start_value, 0};
  const std::size_t m = best.point.size();
  double step = opts.initial_step;
  bool stop = false;

  auto eval = [&](const Vec& z) {
    if (!may_evaluate()) {
      stop = true;
      return std::numeric_limits<double>::infinity();
    }
    return objective(z);
  };

  while (!stop && step >= opts.min_step && best.iterations < opts.max_iters) {
    ++best.iterations;
    const double h = std::clamp(0.01 * step, 1e-9, 1e-4);

    Vec g(m, 0.0);
    bool usable = std::isfinite(best.value);
    for (std::size_t i = 0; i < m && usable && !stop; ++i) {
      Vec hi = best.point, lo = best.point;
      hi[i] = clamp01(hi[i] + h);
      lo[i] = clamp01(lo[i] - h);
      const double span = hi[i] - lo[i];
      if (span <= 0.0) continue;
      const double fh = hi[i] == best.point[i] ? best.value : eval(hi);
      const double fl = lo[i] == best.point[i] ? best.value : eval(lo);
      if (std::isfinite(fh) && std::isfinite(fl)) g[i] = (fh - fl) / span;
    }
    if (stop) break;

    bool improved = false;
    const double gmax = pnorm(g, Norm::Linf);
    if (gmax > 0.0 && std::isfinite(gmax)) {
      Vec trial(m);
      for (std::size_t i = 0; i < m; ++i) trial[i] = clamp01(best.point[i] - step * g[i] / gmax);
      const double ft = eval(trial);
      if (ft < best.value) {
        best.point = std::move(trial);
        best.value = ft;
        improved = true;
      }
    }
    for (std::size_t i = 0; i < m && !improved && !stop; ++i) {
      for (double sign : {-1.0, 1.0}) {
        Vec trial = best.point;
        trial[i] = clamp01(trial[i] + sign * step);
        if (trial[i] == best.point[i]) continue;
        const double ft = eval(trial);
        if (ft < best.value) {
          best.point = std::move(trial);
          best.value = ft;
          improved = true;
          break;
        }
        if (stop) break;
      }
    }
    if (!improved) step *= opts.decay;
  }
  return best;
}

}  // namespace sqc
