// sqc: certify or falsify (strong) quasiconvexity of differentiable functions
// on boxes. See README.md for the command reference.

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqc/errors.hpp"
#include "sqc/run.hpp"

namespace {

constexpr int kExitUsage = 2;

struct Flags {
  std::string config;
  std::string fn, expr, box, norm, strategy, target, output, csv;
  std::size_t dim = 0, lambda_points = 0, pairs = 0, max_evals = 0, restarts = 0, iters = 0;
  std::size_t members = 0, campaign_budget = 0, lemma_grid = 0, lemma_max_grid = 0;
  double sigma = 0, tol = 0, min_sep = 0, fd_step = 0, grad_tol = 0;
  double initial_step = 0, decay = 0, min_step = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool open_question = false;
  std::vector<std::string> families;
};

// Registers the shared option set on a subcommand; values only override the
// config file when given explicitly.
void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run config; flags override its values");
  sub->add_option("--fn", f.fn, "catalog field name");
  sub->add_option("--expr", f.expr, "expression in x1..xn");
  sub->add_option("--dim", f.dim, "dimension n");
  sub->add_option("--box", f.box, "domain box lo:hi[,lo:hi...]");
  sub->add_option("--sigma", f.sigma, "sigma >= 0");
  sub->add_option("--tol", f.tol, "margin tolerance (default 1e-9)");
  sub->add_option("--min-sep", f.min_sep, "minimum |x-y| (default 1e-6)");
  sub->add_option("--lambda-points", f.lambda_points, "interior lambda grid size (default 63)");
  sub->add_option("--norm", f.norm, "penalty norm: 1, 2 or inf (default 2)");
  sub->add_option("--pairs", f.pairs, "number of sampled pairs (points for gradcheck)");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--strategy", f.strategy, "uniform_box | gaussian_interior | segment_grid");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_option("--out", f.output, "write the JSON report here instead of stdout");
  sub->add_option("--csv", f.csv, "write per-sample margin rows here");
}

void add_search(CLI::App* sub, Flags& f) {
  sub->add_option("--evals", f.max_evals, "function-evaluation budget");
  sub->add_option("--restarts", f.restarts, "multi-start count");
  sub->add_option("--iters", f.iters, "iteration cap per restart");
  sub->add_option("--initial-step", f.initial_step, "initial step as a fraction of box width");
  sub->add_option("--decay", f.decay, "step decay on failure");
  sub->add_option("--min-step", f.min_step, "terminating step size");
}

template <class T>
void apply(const CLI::App* sub, const char* flag, const T& value, T& dst) {
  if (sub->count(flag) > 0) dst = value;
}

sqc::RunConfig build_config(const std::string& command, const CLI::App* sub, const Flags& f) {
  sqc::RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw sqc::UsageError("cannot read config file '" + f.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw sqc::UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    from_json(j, cfg);
  }
  cfg.command = command;
  if (sub->count("--fn")) {
    cfg.fn = f.fn;
    cfg.expr.reset();
  }
  if (sub->count("--expr")) {
    cfg.expr = f.expr;
    if (!sub->count("--fn")) cfg.fn.reset();
  }
  if (sub->count("--box")) cfg.box = f.box;
  apply(sub, "--dim", f.dim, cfg.dim);
  apply(sub, "--sigma", f.sigma, cfg.sigma);
  apply(sub, "--tol", f.tol, cfg.tol);
  apply(sub, "--min-sep", f.min_sep, cfg.min_sep);
  apply(sub, "--lambda-points", f.lambda_points, cfg.lambda_points);
  apply(sub, "--norm", f.norm, cfg.norm);
  apply(sub, "--pairs", f.pairs, cfg.pairs);
  apply(sub, "--seed", f.seed, cfg.seed);
  apply(sub, "--strategy", f.strategy, cfg.strategy);
  apply(sub, "--threads", f.threads, cfg.threads);
  apply(sub, "--out", f.output, cfg.output);
  apply(sub, "--csv", f.csv, cfg.csv);
  if (command == "falsify") {
    apply(sub, "--evals", f.max_evals, cfg.max_evals);
    apply(sub, "--restarts", f.restarts, cfg.restarts);
    apply(sub, "--iters", f.iters, cfg.iters);
    apply(sub, "--initial-step", f.initial_step, cfg.initial_step);
    apply(sub, "--decay", f.decay, cfg.decay);
    apply(sub, "--min-step", f.min_step, cfg.min_step);
    apply(sub, "--target", f.target, cfg.target);
    if (sub->count("--open-question")) cfg.open_question = true;
    apply(sub, "--family", f.families, cfg.families);
    apply(sub, "--members", f.members, cfg.members);
    apply(sub, "--campaign-budget", f.campaign_budget, cfg.campaign_budget);
  }
  if (command == "gradcheck") {
    apply(sub, "--fd-step", f.fd_step, cfg.fd_step);
    apply(sub, "--grad-tol", f.grad_tol, cfg.grad_tol);
  }
  if (command == "lemma") {
    apply(sub, "--grid", f.lemma_grid, cfg.lemma_grid);
    apply(sub, "--max-grid", f.lemma_max_grid, cfg.lemma_max_grid);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqc: numerical checks of quasiconvexity and sigma-strong quasiconvexity"};
  app.require_subcommand(1);
  Flags flags;

  std::map<std::string, CLI::App*> subs;
  subs["check"] = app.add_subcommand("check", "conditions (a), (b), (c) over sampled pairs");
  subs["sigma"] = app.add_subcommand("sigma", "estimate the largest sigma for which (a) holds");
  subs["falsify"] = app.add_subcommand("falsify", "adversarial search for a violated condition");
  subs["gradcheck"] = app.add_subcommand("gradcheck", "compare gradients with central differences");
  subs["lemma"] = app.add_subcommand("lemma", "one-dimensional monotone-bound lemma on [a,b]");
  subs["catalog"] = app.add_subcommand("catalog", "list built-in fields");
  for (auto& [name, sub] : subs) add_common(sub, flags);

  add_search(subs["falsify"], flags);
  subs["falsify"]->add_option("--target", flags.target, "condition to attack: a, b or c");
  subs["falsify"]->add_flag("--open-question", flags.open_question,
                            "search the shipped families for (c) holding while (a) fails");
  subs["falsify"]->add_option("--family", flags.families, "restrict the campaign to these families");
  subs["falsify"]->add_option("--members", flags.members, "parameter samples per family");
  subs["falsify"]->add_option("--campaign-budget", flags.campaign_budget,
                              "total evaluation budget of the campaign");
  subs["gradcheck"]->add_option("--fd-step", flags.fd_step, "relative finite-difference step (default 1e-5)");
  subs["gradcheck"]->add_option("--grad-tol", flags.grad_tol, "max inf-norm deviation (default 1e-6)");
  subs["lemma"]->add_option("--grid", flags.lemma_grid, "initial interior grid size (default 63)");
  subs["lemma"]->add_option("--max-grid", flags.lemma_max_grid, "largest grid for refinement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const sqc::RunConfig cfg = build_config(name, sub, flags);
      const sqc::RunOutcome out = sqc::run(cfg);
      const std::string text = out.report.dump(2) + "\n";
      if (cfg.output.empty()) {
        std::cout << text;
      } else {
        std::ofstream os(cfg.output);
        if (!os) throw sqc::UsageError("cannot write report to '" + cfg.output + "'");
        os << text;
      }
      if (!cfg.csv.empty()) {
        std::ofstream os(cfg.csv);
        if (!os) throw sqc::UsageError("cannot write csv to '" + cfg.csv + "'");
        os << out.csv;
      }
      return out.exit_code;
    }
  } catch (const sqc::ParseError& e) {
    std::cerr << "sqc: parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sqc::UsageError& e) {
    std::cerr << "sqc: " << e.what() << '\n';
    return kExitUsage;
  } catch (const sqc::EvalError& e) {
    std::cerr << "sqc: evaluation error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
