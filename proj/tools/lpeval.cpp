#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lpeval/cli/commands.hpp"

namespace {

using namespace lpeval;
using namespace lpeval::cli;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::optional<std::string> lmax, mode, scores, predictors, policy, sampling, rate;
};

RunConfig build_config(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("--config", "cannot open " + f.config);
    load_config(c, in, std::filesystem::path(f.config).parent_path());
  }
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) apply_setting(c, key, *v);
  };
  set("stratify.lmax", f.lmax);
  set("stratify.mode", f.mode);
  set("run.scores", f.scores);
  set("predictors.list", f.predictors);
  set("predictors.policy", f.policy);
  set("sampling.mode", f.sampling);
  set("sampling.rate", f.rate);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  c.threads = resolve_threads(f.threads);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link prediction evaluation toolkit"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "Run configuration file");
  app.add_option("--seed", flags.seed, "Random seed");
  app.add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--lmax", flags.lmax, "Largest finite distance bucket");
  app.add_option("--mode", flags.mode, "Candidate generation: recommendation or query");
  app.add_option("--scores", flags.scores, "Scored-instance CSV to evaluate instead of predictors");
  app.add_option("--predictors", flags.predictors, "Comma-separated predictors (cn, aa, pa, propflow:N)");
  app.add_option("--policy", flags.policy, "Direction policy: list-both, mean, max, min");
  app.add_option("--sampling", flags.sampling, "Sampling: none, fair-random, kaggle-balanced");
  app.add_option("--rate", flags.rate, "Fair sampling rate");

  SyntheticParams synthetic;
  auto* gen = app.add_subcommand("generate", "Write a synthetic locality network");
  gen->add_option("--nodes", synthetic.nodes);
  gen->add_option("--late-nodes", synthetic.late_nodes);
  gen->add_option("--steps", synthetic.steps);
  gen->add_option("--mean-degree", synthetic.mean_degree);
  gen->add_option("--locality-decay", synthetic.locality_decay);
  gen->add_option("--long-range", synthetic.long_range);

  struct Entry {
    const char* name;
    const char* help;
    void (*fn)(Run&);
  };
  const Entry commands[] = {
      {"snapshot", "Build and export the four window snapshots", cmd_snapshot},
      {"score", "Enumerate and score test candidates", cmd_score},
      {"evaluate", "Per-distance AUROC/AUPR with ROC and PR curves", cmd_evaluate},
      {"variance", "AUROC spread under repeated fair sampling", cmd_variance},
      {"surrogate", "Sub-problem versus full-problem surrogate simulation", cmd_surrogate},
      {"kaggle-compare", "Fair random versus per-distance balanced sampling", cmd_kaggle_compare},
      {"temporal", "Evaluation over slices of the label window", cmd_temporal},
      {"distance-dist", "Prior distance distribution of new links", cmd_distance_dist},
  };
  for (const auto& e : commands) app.add_subcommand(e.name, e.help)->fallthrough();
  gen->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig config = build_config(flags);
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (flags.seed) synthetic.seed = *flags.seed;
    else synthetic.seed = config.seed;
    const bool needs_dataset =
        name != "surrogate" && name != "generate" && !(name == "evaluate" && config.scores);
    config.validate(needs_dataset);
    Run run(config, name);
    if (name == "generate") {
      cmd_generate(run, synthetic);
    } else {
      for (const auto& e : commands)
        if (name == e.name) e.fn(run);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
