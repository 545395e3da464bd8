#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqc/conditions.hpp"
#include "sqc/field.hpp"
#include "sqc/sampling.hpp"

namespace sqc {

enum class Condition { A, B, C };

Condition parse_condition(std::string_view text);
std::string to_string(Condition c);

struct SearchBudget {
  std::size_t max_evals = 10000;  // field calls (value or gradient), split evenly across restarts
  std::size_t restarts = 8;
  std::size_t iters = 1000;       // per restart
  double initial_step = 0.1;      // fraction of the box width
  double decay = 0.5;
  double min_step = 1e-10;

  void validate() const;
  SearchBudget scaled(std::size_t factor) const;
};

struct FalsificationResult {
  Condition target = Condition::A;
  double sigma = 0.0;
  std::optional<double> margin;  // most negative margin found; empty if no premise ever held
  std::optional<Witness> witness;
  std::size_t evaluations = 0;
  bool violation = false;  // margin < -tol
};

/// Multi-start projected descent on the margin of the target condition over
/// (x, y[, lambda]). Restart r draws its starts from (seed, r) and spends
/// max_evals / restarts field calls. Never claims a violation does not exist.
FalsificationResult falsify(const ScalarField& f, Condition target, const CheckConfig& cfg,
                            const SearchBudget& budget, std::uint64_t seed, unsigned threads = 1);

/// Recomputes the target margin at a stored witness.
std::optional<double> reevaluate(const ScalarField& f, Condition target, const Witness& w,
                                 const CheckConfig& cfg);

struct ConditionTally {
  std::size_t holds = 0;
  std::size_t violated = 0;
  std::size_t vacuous = 0;
  std::size_t skipped = 0;
  std::optional<double> worst_margin;
  std::optional<Witness> worst_witness;
  std::optional<std::size_t> worst_index;

  std::size_t total() const { return holds + violated + vacuous + skipped; }
};

struct SampleRow {
  std::size_t pair_index;
  Condition condition;
  double margin;
  Status status;
};

struct HarnessReport {
  ConditionTally a, b, c;
  std::size_t samples = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  // Pairs violating (b) or (c) while no (a) violation was found in the run.
  std::size_t theorem_tension = 0;
  std::vector<std::size_t> tension_examples;  // first few pair indices
  // Every (c) violation must come with a (b) violation on (x,y) or (y,x).
  std::size_t contrapositive_checked = 0;
  std::size_t contrapositive_exceptions = 0;
  std::vector<SampleRow> rows;  // filled when requested

  bool any_violation() const { return a.violated + b.violated + c.violated > 0; }
};

/// Evaluates (a) over pairs x lambda grid and (b), (c) over pairs.
HarnessReport implication_harness(const ScalarField& f, const CheckConfig& cfg, const Sampler& s,
                                  unsigned threads = 1, bool keep_rows = false);

// ---------------------------------------------------------------------------
// Open-question campaign: search for functions satisfying (c) but not (a).

/// A parametrized expression. `{p1}`, `{p2}`, ... in `pattern` are replaced by
/// parameter values before parsing.
struct Family {
  std::string name;
  std::string description;
  std::size_t dimension = 1;
  std::string pattern;
  DomainBox params;
  DomainBox domain;
};

/// Shipped families: PSD quadratics, perturbed norms, Gaussian bump sums and
/// parametrized cubics.
std::vector<Family> shipped_families();
Family find_family(std::string_view name);

std::string instantiate_pattern(const Family& family, const Vec& theta);
ScalarField instantiate(const Family& family, const Vec& theta);

struct OpenQuestionOptions {
  std::size_t members = 6;        // parameter vectors sampled per family
  SearchBudget budget;            // per falsify call
  std::size_t total_budget = 1000000;
};

struct MemberOutcome {
  Vec theta;
  std::string formula;
  FalsificationResult c;
  std::optional<FalsificationResult> a;
  bool candidate = false;  // (a) violated while no (c) violation was found
  bool verified = false;   // survived the 10x re-verification
  std::optional<FalsificationResult> recheck_c;
};

struct Candidate {
  std::string family;
  Vec theta;
  std::string formula;
  FalsificationResult a;
  FalsificationResult recheck_c;
};

struct OpenQuestionReport {
  std::string family;
  double sigma = 0.0;
  std::size_t members_examined = 0;
  std::size_t members_not_run = 0;  // stopped by the total budget
  std::size_t evaluations = 0;
  std::size_t refuted = 0;          // candidates whose re-verification found a (c) violation
  std::size_t unverified = 0;       // candidates the budget could not re-verify; never reported
  std::size_t contrapositive_exceptions = 0;
  std::vector<MemberOutcome> members;
  std::vector<Candidate> candidates;  // ranked by (a) violation depth
};

OpenQuestionReport open_question_search(const Family& family, const CheckConfig& cfg,
                                        const OpenQuestionOptions& opts, std::uint64_t seed,
                                        unsigned threads = 1);

}  // namespace sqc
