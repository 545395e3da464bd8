#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqc/conditions.hpp"
#include "sqc/field.hpp"
#include "sqc/search.hpp"

namespace sqc {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

/// Everything a run depends on. Echoed into every report so a run can be
/// reproduced from its output alone.
struct RunConfig {
  std::string command = "check";  // check | sigma | falsify | gradcheck | lemma | catalog

  // Field source: exactly one of fn / expr (catalog and the open-question
  // campaign need none).
  std::optional<std::string> fn;
  std::optional<std::string> expr;
  std::size_t dim = 1;
  std::optional<std::string> box;

  double sigma = 0.0;
  double tol = 1e-9;
  double min_sep = 1e-6;
  std::size_t lambda_points = 63;
  std::string norm = "2";

  std::string strategy = "uniform_box";
  std::size_t pairs = 10000;
  std::uint64_t seed = 1;

  std::size_t max_evals = 10000;
  std::size_t restarts = 8;
  std::size_t iters = 1000;
  double initial_step = 0.1;
  double decay = 0.5;
  double min_step = 1e-10;
  std::string target = "a";

  bool open_question = false;
  std::vector<std::string> families;  // empty = all shipped families
  std::size_t members = 6;
  std::size_t campaign_budget = 1000000;

  double fd_step = 1e-5;  // relative: h = fd_step * max(1, |x|_inf)
  double grad_tol = 1e-6;

  std::size_t lemma_grid = 63;
  std::size_t lemma_max_grid = 4095;

  unsigned threads = 0;  // 0 = hardware concurrency; never changes results
  std::string output;
  std::string csv;

  CheckConfig check_config() const;
  SearchBudget search_budget() const;
  /// Throws UsageError when the command and field source do not fit together.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, RunConfig& c);

/// Resolves the field source, applying a box override if one was given. An
/// overridden catalog box drops the known status, which is box-dependent.
ScalarField resolve_field(const RunConfig& cfg);

struct RunOutcome {
  int exit_code = 0;          // 0 no violations, 1 violations found
  nlohmann::json report;      // full report document
  std::string csv;            // per-sample rows when the command produces them
};

/// Executes one command. Usage and parse problems propagate as UsageError /
/// ParseError; the CLI maps them to exit code 2.
RunOutcome run(const RunConfig& cfg);

nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const HarnessReport& r);
nlohmann::json to_json(const FalsificationResult& r);
nlohmann::json to_json(const SigmaEstimate& e);
nlohmann::json to_json(const GradReport& g);
nlohmann::json to_json(const OpenQuestionReport& r);

}  // namespace sqc
