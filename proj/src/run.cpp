#include "sqc/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "sqc/errors.hpp"
#include "sqc/random.hpp"

namespace sqc {

using nlohmann::json;

CheckConfig RunConfig::check_config() const {
  CheckConfig c;
  c.sigma = sigma;
  c.tol = tol;
  c.min_sep = min_sep;
  c.lambda_grid = default_lambda_grid(lambda_points);
  c.penalty_norm = parse_norm(norm);
  c.validate();
  return c;
}

SearchBudget RunConfig::search_budget() const {
  SearchBudget b{max_evals, restarts, iters, initial_step, decay, min_step};
  b.validate();
  return b;
}

void RunConfig::validate() const {
  static const std::vector<std::string> commands{"check", "sigma", "falsify", "gradcheck", "lemma", "catalog"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw UsageError("unknown command '" + command + "'");
  if (dim < 1) throw UsageError("dimension must be at least 1");
  const bool needs_field = command != "catalog" && !(command == "falsify" && open_question);
  if (needs_field) {
    if (fn.has_value() == expr.has_value())
      throw UsageError("specify exactly one field source: --fn <catalog name> or --expr <expression>");
  }
  if (command == "lemma" && dim != 1) throw UsageError("lemma needs a one-dimensional field (--dim 1)");
  if (pairs < 1) throw UsageError("--pairs must be at least 1");
  check_config();
  search_budget();
  parse_strategy(strategy);
  parse_condition(target);
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"fn", c.fn ? json(*c.fn) : json(nullptr)},
           {"expr", c.expr ? json(*c.expr) : json(nullptr)},
           {"dim", c.dim},
           {"box", c.box ? json(*c.box) : json(nullptr)},
           {"sigma", c.sigma},
           {"tol", c.tol},
           {"min_sep", c.min_sep},
           {"lambda_points", c.lambda_points},
           {"norm", c.norm},
           {"strategy", c.strategy},
           {"pairs", c.pairs},
           {"seed", c.seed},
           {"max_evals", c.max_evals},
           {"restarts", c.restarts},
           {"iters", c.iters},
           {"initial_step", c.initial_step},
           {"decay", c.decay},
           {"min_step", c.min_step},
           {"target", c.target},
           {"open_question", c.open_question},
           {"families", c.families},
           {"members", c.members},
           {"campaign_budget", c.campaign_budget},
           {"fd_step", c.fd_step},
           {"grad_tol", c.grad_tol},
           {"lemma_grid", c.lemma_grid},
           {"lemma_max_grid", c.lemma_max_grid},
           {"threads", c.threads},
           {"output", c.output},
           {"csv", c.csv}};
}

namespace {

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key)) {
    if (j.at(key).is_null()) dst.reset();
    else dst = j.at(key).get<T>();
  }
}

}  // namespace

void from_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::vector<std::string> keys{
      "command", "fn", "expr", "dim", "box", "sigma", "tol", "min_sep", "lambda_points", "norm",
      "strategy", "pairs", "seed", "max_evals", "restarts", "iters", "initial_step", "decay",
      "min_step", "target", "open_question", "families", "members", "campaign_budget", "fd_step",
      "grad_tol", "lemma_grid", "lemma_max_grid", "threads", "output", "csv"};
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw UsageError("unknown config key '" + k + "'");
  try {
    read(j, "command", c.command);
    read(j, "fn", c.fn);
    read(j, "expr", c.expr);
    read(j, "dim", c.dim);
    read(j, "box", c.box);
    read(j, "sigma", c.sigma);
    read(j, "tol", c.tol);
    read(j, "min_sep", c.min_sep);
    read(j, "lambda_points", c.lambda_points);
    read(j, "norm", c.norm);
    read(j, "strategy", c.strategy);
    read(j, "pairs", c.pairs);
    read(j, "seed", c.seed);
    read(j, "max_evals", c.max_evals);
    read(j, "restarts", c.restarts);
    read(j, "iters", c.iters);
    read(j, "initial_step", c.initial_step);
    read(j, "decay", c.decay);
    read(j, "min_step", c.min_step);
    read(j, "target", c.target);
    read(j, "open_question", c.open_question);
    read(j, "families", c.families);
    read(j, "members", c.members);
    read(j, "campaign_budget", c.campaign_budget);
    read(j, "fd_step", c.fd_step);
    read(j, "grad_tol", c.grad_tol);
    read(j, "lemma_grid", c.lemma_grid);
    read(j, "lemma_max_grid", c.lemma_max_grid);
    read(j, "threads", c.threads);
    read(j, "output", c.output);
    read(j, "csv", c.csv);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config type error: ") + e.what());
  }
}

ScalarField resolve_field(const RunConfig& cfg) {
  if (cfg.fn) {
    ScalarField f = find_catalog(*cfg.fn, cfg.dim);
    if (cfg.box) {
      const DomainBox box = parse_box(*cfg.box, cfg.dim);
      if (box.lower != f.domain.lower || box.upper != f.domain.upper) {
        f.domain = box;
        f.known_status = KnownStatus::Unknown;
        f.known_sigma.reset();
      }
    }
    return f;
  }
  if (!cfg.expr) throw UsageError("no field source given");
  const DomainBox box = cfg.box ? parse_box(*cfg.box, cfg.dim) : DomainBox::cube(cfg.dim, -1.0, 1.0);
  return make_field_from_expr(parse(*cfg.expr, cfg.dim), cfg.dim, box, "expr");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json field_json(const ScalarField& f) {
  return {{"name", f.name},
          {"dimension", f.dimension},
          {"formula", f.formula},
          {"box", format_box(f.domain)},
          {"known_status", to_string(f.known_status)},
          {"known_sigma", opt(f.known_sigma)}};
}

json tally_json(const ConditionTally& t) {
  json j{{"holds", t.holds},
         {"violated", t.violated},
         {"vacuous", t.vacuous},
         {"skipped", t.skipped},
         {"worst_margin", opt(t.worst_margin)},
         {"worst_index", t.worst_index ? json(*t.worst_index) : json(nullptr)},
         {"worst_witness", t.worst_witness ? to_json(*t.worst_witness) : json(nullptr)}};
  return j;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

json to_json(const Witness& w) {
  return {{"x", w.x},
          {"y", w.y},
          {"lambda", opt(w.lambda)},
          {"fx", w.fx},
          {"fy", w.fy},
          {"pairing_x", opt(w.pairing_x)},
          {"pairing_y", opt(w.pairing_y)}};
}

json to_json(const Verdict& v) {
  return {{"status", to_string(v.status)},
          {"margin", v.margin},
          {"witness", v.witness ? to_json(*v.witness) : json(nullptr)}};
}

json to_json(const HarnessReport& r) {
  return {{"samples", r.samples},
          {"sigma", r.sigma},
          {"seed", r.seed},
          {"a", tally_json(r.a)},
          {"b", tally_json(r.b)},
          {"c", tally_json(r.c)},
          {"theorem_tension", r.theorem_tension},
          {"tension_examples", r.tension_examples},
          {"contrapositive_checked", r.contrapositive_checked},
          {"contrapositive_exceptions", r.contrapositive_exceptions}};
}

json to_json(const FalsificationResult& r) {
  return {{"target", to_string(r.target)},
          {"sigma", r.sigma},
          {"margin", opt(r.margin)},
          {"violation", r.violation},
          {"evaluations", r.evaluations},
          {"witness", r.witness ? to_json(*r.witness) : json(nullptr)}};
}

json to_json(const SigmaEstimate& e) {
  return {{"sigma_star", e.reported},
          {"raw", e.raw},
          {"sampled_min", e.sampled_min},
          {"pairs", e.pairs},
          {"skipped", e.skipped},
          {"witness", to_json(e.witness)}};
}

json to_json(const GradReport& g) {
  return {{"checked", g.checked},
          {"skipped", g.skipped},
          {"max_deviation", g.max_deviation},
          {"worst_point", g.worst_point},
          {"step", g.step},
          {"relative_step", g.relative_step},
          {"tol", g.tol},
          {"pass", g.pass}};
}

json to_json(const OpenQuestionReport& r) {
  json members = json::array();
  for (const auto& m : r.members) {
    members.push_back({{"theta", m.theta},
                       {"formula", m.formula},
                       {"c", to_json(m.c)},
                       {"a", m.a ? to_json(*m.a) : json(nullptr)},
                       {"candidate", m.candidate},
                       {"verified", m.verified}});
  }
  json candidates = json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back({{"family", c.family},
                          {"theta", c.theta},
                          {"formula", c.formula},
                          {"a", to_json(c.a)},
                          {"recheck_c", to_json(c.recheck_c)}});
  }
  return {{"family", r.family},
          {"sigma", r.sigma},
          {"members_examined", r.members_examined},
          {"members_not_run", r.members_not_run},
          {"evaluations", r.evaluations},
          {"refuted", r.refuted},
          {"unverified", r.unverified},
          {"contrapositive_exceptions", r.contrapositive_exceptions},
          {"members", members},
          {"candidates", candidates}};
}

// ---------------------------------------------------------------------------
// Commands

namespace {

Sampler make_sampler(const RunConfig& cfg, const ScalarField& f) {
  return Sampler{parse_strategy(cfg.strategy), cfg.seed, cfg.pairs, f.domain};
}

RunOutcome cmd_check(const RunConfig& cfg) {
  const ScalarField f = resolve_field(cfg);
  const CheckConfig cc = cfg.check_config();
  const HarnessReport rep =
      implication_harness(f, cc, make_sampler(cfg, f), cfg.threads, !cfg.csv.empty());
  RunOutcome out;
  out.exit_code = rep.any_violation() ? 1 : 0;
  out.report["payload"] = {{"field", field_json(f)}, {"harness", to_json(rep)}};
  out.report["skipped"] = {{"a", rep.a.skipped}, {"b", rep.b.skipped}, {"c", rep.c.skipped}};
  if (!cfg.csv.empty()) {
    std::ostringstream os;
    os << std::setprecision(17) << "pair_index,condition,margin,status\n";
    for (const auto& row : rep.rows)
      os << row.pair_index << ',' << to_string(row.condition) << ',' << row.margin << ','
         << to_string(row.status) << '\n';
    out.csv = os.str();
  }
  return out;
}

RunOutcome cmd_sigma(const RunConfig& cfg) {
  const ScalarField f = resolve_field(cfg);
  const CheckConfig cc = cfg.check_config();
  const SigmaEstimate est = sigma_star_estimate(f, make_sampler(cfg, f), cc, {}, cfg.threads);
  RunOutcome out;
  out.exit_code = est.raw < -cc.tol ? 1 : 0;
  out.report["payload"] = {{"field", field_json(f)}, {"sigma", to_json(est)}};
  out.report["skipped"] = {{"pairs", est.skipped}};
  return out;
}

RunOutcome cmd_falsify_open(const RunConfig& cfg) {
  const CheckConfig cc = cfg.check_config();
  std::vector<Family> families;
  if (cfg.families.empty()) families = shipped_families();
  else for (const auto& name : cfg.families) families.push_back(find_family(name));

  OpenQuestionOptions opts;
  opts.members = cfg.members;
  opts.budget = cfg.search_budget();
  std::size_t used = 0;
  json per_family = json::array();
  json candidates = json::array();
  std::size_t n_candidates = 0, unverified = 0, refuted = 0, contra = 0;
  for (std::size_t i = 0; i < families.size(); ++i) {
    opts.total_budget = cfg.campaign_budget > used ? cfg.campaign_budget - used : 0;
    const OpenQuestionReport rep =
        open_question_search(families[i], cc, opts, mix64(cfg.seed + i), cfg.threads);
    used += rep.evaluations;
    n_candidates += rep.candidates.size();
    unverified += rep.unverified;
    refuted += rep.refuted;
    contra += rep.contrapositive_exceptions;
    json j = to_json(rep);
    for (const auto& c : j["candidates"]) candidates.push_back(c);
    per_family.push_back(std::move(j));
  }
  RunOutcome out;
  out.exit_code = n_candidates > 0 ? 1 : 0;
  out.report["payload"] = {
      {"mode", "open_question"},
      {"note", "candidates are sampling-based findings that survived a 10x re-verification, not proofs"},
      {"evaluations", used},
      {"campaign_budget", cfg.campaign_budget},
      {"candidates", candidates},
      {"refuted", refuted},
      {"unverified_dropped", unverified},
      {"contrapositive_exceptions", contra},
      {"families", per_family}};
  out.report["skipped"] = json::object();
  return out;
}

RunOutcome cmd_falsify(const RunConfig& cfg) {
  if (cfg.open_question) return cmd_falsify_open(cfg);
  const ScalarField f = resolve_field(cfg);
  const CheckConfig cc = cfg.check_config();
  const Condition target = parse_condition(cfg.target);
  const FalsificationResult r = falsify(f, target, cc, cfg.search_budget(), cfg.seed, cfg.threads);
  RunOutcome out;
  out.exit_code = r.violation ? 1 : 0;
  json payload{{"mode", "falsify"}, {"field", field_json(f)}, {"result", to_json(r)}};
  if (r.witness) {
    payload["reevaluated_margin"] = opt(reevaluate(f, target, *r.witness, cc));
    if (target == Condition::C && r.violation) {
      const auto cp = check_contrapositive(f, r.witness->x, r.witness->y, cc);
      payload["contrapositive_holds"] = cp.holds;
    }
  }
  out.report["payload"] = std::move(payload);
  out.report["skipped"] = json::object();
  return out;
}

RunOutcome cmd_gradcheck(const RunConfig& cfg) {
  const ScalarField f = resolve_field(cfg);
  const GradReport g = validate_grad(f, cfg.seed, cfg.pairs, cfg.fd_step, cfg.grad_tol, cfg.threads);
  RunOutcome out;
  out.exit_code = g.pass ? 0 : 1;
  out.report["payload"] = {{"field", field_json(f)}, {"gradcheck", to_json(g)}};
  out.report["skipped"] = {{"points", g.skipped}};
  return out;
}

RunOutcome cmd_lemma(const RunConfig& cfg) {
  const ScalarField f = resolve_field(cfg);
  const LemmaResult r = check_lemma_refined(f, cfg.lemma_grid, cfg.lemma_max_grid, cfg.tol);
  RunOutcome out;
  out.exit_code = r.verdict.status == Status::Violated ? 1 : 0;
  json payload{{"field", field_json(f)},
               {"verdict", to_json(r.verdict)},
               {"grid_points", r.grid_points},
               {"levels", r.levels}};
  if (r.candidate_contradiction)
    payload["note"] = "candidate contradiction, refine grid: the hypothesis was only checked on a grid";
  out.report["payload"] = std::move(payload);
  out.report["skipped"] = {{"verdict_skipped", r.verdict.status == Status::Skipped}};
  return out;
}

RunOutcome cmd_catalog(const RunConfig& cfg) {
  json entries = json::array();
  for (const auto& e : catalog_entries()) {
    json j{{"name", e.name},
           {"description", e.description},
           {"min_dim", e.min_dim},
           {"max_dim", e.max_dim == 0 ? json(nullptr) : json(e.max_dim)}};
    const bool ok = cfg.dim >= e.min_dim && (e.max_dim == 0 || cfg.dim <= e.max_dim);
    j["at_dim"] = ok ? field_json(find_catalog(e.name, cfg.dim)) : json(nullptr);
    entries.push_back(std::move(j));
  }
  RunOutcome out;
  out.report["payload"] = {{"dim", cfg.dim}, {"entries", entries}};
  out.report["skipped"] = json::object();
  return out;
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  cfg.validate();
  RunOutcome out;
  if (cfg.command == "check") out = cmd_check(cfg);
  else if (cfg.command == "sigma") out = cmd_sigma(cfg);
  else if (cfg.command == "falsify") out = cmd_falsify(cfg);
  else if (cfg.command == "gradcheck") out = cmd_gradcheck(cfg);
  else if (cfg.command == "lemma") out = cmd_lemma(cfg);
  else out = cmd_catalog(cfg);

  json report{{"schema", kReportSchema},
              {"tool", "sqc"},
              {"version", kToolVersion},
              {"timestamp", timestamp_utc()},
              {"command", cfg.command},
              {"config", cfg},
              {"defaults",
               {{"fd_step_rule", "h = fd_step * max(1, |x|_inf)"},
                {"lambda_grid", "k / (lambda_points + 1), k = 1..lambda_points"}}},
              {"payload", out.report["payload"]},
              {"skipped", out.report["skipped"]},
              {"exit_code", out.exit_code}};
  out.report = std::move(report);
  return out;
}

}  // namespace sqc
