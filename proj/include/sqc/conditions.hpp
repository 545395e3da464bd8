#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sqc/field.hpp"
#include "sqc/sampling.hpp"
#include "sqc/vecmath.hpp"

namespace sqc {

// Signed margins for the sigma-quasiconvexity inequality
//
//   (a)  f(lx + (1-l)y) <= max{f(x), f(y)} - (sigma/2) l(1-l) |x-y|^2,   l in (0,1)
//
// and the two first-order conditions
//
//   (b)  f(x) <= f(y)                              =>  <grad f(y), x-y> <= -(sigma/2)|x-y|^2
//   (c)  <grad f(x), y-x> > -(sigma/2)|x-y|^2      =>  <grad f(y), x-y> <= -(sigma/2)|x-y|^2
//
// A margin is the slack of the conclusion; negative means the condition fails.
// With sigma = 0 these are the classical first-order characterizations of
// quasiconvexity, and (a) => (b) => (c) holds for every sigma >= 0.

/// Interior lambda grid {k / (points + 1) : k = 1..points}.
std::vector<double> default_lambda_grid(std::size_t points = 63);

struct CheckConfig {
  double sigma = 0.0;
  double tol = 1e-9;
  double min_sep = 1e-6;
  std::vector<double> lambda_grid = default_lambda_grid();
  Norm penalty_norm = Norm::L2;

  void validate() const;
};

enum class Status { Holds, Violated, Vacuous, Skipped };
std::string to_string(Status s);

struct Witness {
  Vec x;
  Vec y;
  std::optional<double> lambda;
  double fx = 0.0;
  double fy = 0.0;
  std::optional<double> pairing_x;  // <grad f(x), y - x>
  std::optional<double> pairing_y;  // <grad f(y), x - y>
};

/// Vacuous and skipped verdicts carry margin 0.
struct Verdict {
  Status status = Status::Skipped;
  double margin = 0.0;
  std::optional<Witness> witness;
};

Status classify(double margin, double tol);

/// (sigma/2) * l(1-l) * |x-y|^2 in the configured penalty norm.
double sigma_penalty(const Vec& x, const Vec& y, double lambda, const CheckConfig& cfg);

/// max{f(x), f(y)} - (sigma/2) l(1-l) |x-y|^2 - f(lx + (1-l)y).
/// Throws UsageError when lambda is outside (0,1) or |x-y| < min_sep, and
/// EvalError when f cannot be evaluated.
double margin_a(const ScalarField& f, const Vec& x, const Vec& y, double lambda,
                const CheckConfig& cfg);

/// Condition (b) at the ordered pair (x, y). The premise f(x) <= f(y) is
/// compared without slack; see README for the rationale.
Verdict check_b(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg);

/// Condition (c) at (x, y); the strict premise is realized as
/// <grad f(x), y-x> > -(sigma/2)|x-y|^2 + tol.
Verdict check_c(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg);

struct SegmentSigma {
  double value = 0.0;   // min over the lambda grid
  double lambda = 0.5;  // argmin
  std::size_t skipped_lambdas = 0;
};

/// Largest sigma for which (a) holds on the segment [x, y] at every grid lambda:
///   min_l 2 (max{f(x),f(y)} - f(lx + (1-l)y)) / (l(1-l)|x-y|^2).
/// Negative values mean f is not quasiconvex on the segment.
SegmentSigma sigma_star_segment_detail(const ScalarField& f, const Vec& x, const Vec& y,
                                       const CheckConfig& cfg);
double sigma_star_segment(const ScalarField& f, const Vec& x, const Vec& y, const CheckConfig& cfg);

struct SigmaRefineOptions {
  std::size_t starts = 4;         // best sampled pairs to polish
  std::size_t max_iters = 400;
  std::size_t max_segment_evals = 20000;  // per start
  bool enabled = true;
};

struct SigmaEstimate {
  double raw = 0.0;       // min over examined pairs (an upper bound on the true sigma*)
  double reported = 0.0;  // max(raw, 0)
  double sampled_min = 0.0;  // before local refinement
  Witness witness;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
};

/// Minimum of sigma_star_segment over the sampler's pairs, followed by a local
/// descent from the best few pairs. Refinement keeps |x-y| >= max(min_sep,
/// |x0-y0|/4) so it cannot chase rounding noise on short segments.
/// Throws EvalError when no pair could be evaluated.
SigmaEstimate sigma_star_estimate(const ScalarField& f, const Sampler& sampler,
                                  const CheckConfig& cfg, const SigmaRefineOptions& refine = {},
                                  unsigned threads = 1);

/// Scalar lemma on [a, b] = phi.domain: if at every grid point phi'(t) <= tol
/// or phi(t) <= phi(a) + tol, then phi(b) <= phi(a) is expected. Returns
/// vacuous (with the failing grid point) when the hypothesis fails; violated
/// would contradict the lemma, up to grid coverage.
Verdict check_lemma(const ScalarField& phi, const std::vector<double>& grid, double tol);

/// Uniform interior grid on (a, b) with `points` nodes.
std::vector<double> lemma_grid(double a, double b, std::size_t points);

struct LemmaResult {
  Verdict verdict;
  std::size_t grid_points = 0;
  std::size_t levels = 0;
  bool candidate_contradiction = false;  // violated on the finest grid examined
};

/// Repeats check_lemma on nested grids (points -> 2 points + 1) until two
/// consecutive levels agree or the grid would exceed max_points.
LemmaResult check_lemma_refined(const ScalarField& phi, std::size_t initial_points,
                                std::size_t max_points, double tol);

struct ContrapositiveCheck {
  bool applicable = false;  // c was violated at (x, y)
  bool holds = true;        // some b verdict at (x, y) or (y, x) is violated
  Verdict b_xy;
  Verdict b_yx;
};

/// Whenever (c) fails at (x, y), (b) must fail at (x, y) or at (y, x).
ContrapositiveCheck check_contrapositive(const ScalarField& f, const Vec& x, const Vec& y,
                                         const CheckConfig& cfg);

}  // namespace sqc
