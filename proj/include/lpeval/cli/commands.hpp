#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpeval/cli/config.hpp"
#include "lpeval/cli/manifest.hpp"
#include "lpeval/curve_io.hpp"
#include "lpeval/experiments.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/metrics.hpp"
#include "lpeval/predictors.hpp"
#include "lpeval/stratify.hpp"
#include "lpeval/synthetic.hpp"
#include "lpeval/text.hpp"

namespace lpeval::cli {

inline constexpr const char* kVersion = "1.0.0";

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string cell(const std::optional<double>& v) {
  return v ? text::format_double(*v) : std::string("undefined");
}

inline Json json_value(const std::optional<double>& v) {
  return v ? Json(*v) : Json("undefined");
}

/// File-name form of a predictor name ("propflow:3" becomes "propflow-3").
inline std::string file_stem(std::string name) {
  std::replace(name.begin(), name.end(), ':', '-');
  return name;
}

struct Loaded {
  EventLog log;
  std::string digest;
};

inline Loaded load_dataset(const RunConfig& c) {
  const auto bytes = read_file(c.dataset);
  return {ingest_events(std::string_view(bytes), c.format), sha256_hex(bytes)};
}

/// The test-phase feature snapshot and its labeled candidates.
struct TestPhase {
  Snapshot feature;
  std::vector<Instance> instances;
};

inline TestPhase test_phase(const RunConfig& c, const EventLog& log) {
  Snapshot feature = build_snapshot(log, c.window.test_feature, c.weight_rule);
  const Snapshot label = build_snapshot(log, c.window.test_label, c.weight_rule);
  const EnumerationOptions options{c.lmax, c.include_beyond, c.include_disconnected, c.threads};
  auto instances = generate_test_set(feature, label, c.mode, options);
  return {std::move(feature), std::move(instances)};
}

inline ScoringOptions scoring_options(const RunConfig& c) {
  return {c.policy,
          c.mode == GenerationMode::from_testing ? UnknownNodePolicy::query
                                                 : UnknownNodePolicy::strict,
          c.threads};
}

struct ScoredSet {
  std::string name;
  std::vector<Instance> instances;
};

/// Scored sets for every configured predictor, or the external score file.
inline std::vector<ScoredSet> scored_sets(const RunConfig& c, const EventLog* log,
                                          NodeTable& external_names) {
  std::vector<ScoredSet> out;
  if (c.scores) {
    std::ifstream in(*c.scores);
    if (!in) throw DataError("cannot open " + c.scores->string());
    auto instances = read_instances_csv(in, external_names);
    for (const auto& i : instances)
      if (i.label == Label::unknown) throw DataError("score file has unlabeled instances");
    out.push_back({"external", std::move(instances)});
    return out;
  }
  const auto phase = test_phase(c, *log);
  for (const auto& p : c.predictors)
    out.push_back({p.name(), score_candidates(phase.feature, phase.instances, p, scoring_options(c))});
  return out;
}

/// Reporting-guideline fields every evaluation artifact carries.
inline Json provenance(const RunConfig& c) {
  return {{"sampling_mode", to_string(c.sampling.mode)},
          {"sampling_rate", c.sampling.rate},
          {"direction_policy", to_string(c.policy)},
          {"generation_mode", to_string(c.mode)},
          {"tie_policy", kTiePolicy}};
}

inline std::vector<Instance> apply_sampling(const RunConfig& c, std::span<const Instance> in) {
  SamplingSpec spec = c.sampling;
  spec.seed = c.seed;
  switch (spec.mode) {
    case SamplingMode::none: return {in.begin(), in.end()};
    case SamplingMode::fair_random: return sample_fair(in, spec);
    case SamplingMode::kaggle_balanced: return sample_kaggle(in, spec.seed);
  }
  return {};
}

}  // namespace detail

/// One command invocation: the validated config, output directory and the
/// manifest written when the command finishes.
class Run {
 public:
  Run(RunConfig config, std::string command)
      : config_(std::move(config)), writer_(config_.out) {
    manifest_.version = kVersion;
    manifest_.command = std::move(command);
    manifest_.config = config_.echo();
    manifest_.seed = config_.seed;
  }

  const RunConfig& config() const { return config_; }
  ArtifactWriter& writer() { return writer_; }
  void set_input_digest(std::string digest) { manifest_.input_digest = std::move(digest); }

  /// Report skeleton: command, config and seed.
  Json report() const {
    Json j;
    j["command"] = manifest_.command;
    j["seed"] = config_.seed;
    j["config"] = manifest_.config;
    return j;
  }

  void finish() { atomic_write(writer_.dir() / "manifest.json", manifest_.to_json(writer_).dump(2) + "\n"); }

 private:
  RunConfig config_;
  ArtifactWriter writer_;
  RunManifest manifest_;
};

inline void cmd_snapshot(Run& run) {
  const auto& c = run.config();
  auto data = detail::load_dataset(c);
  run.set_input_digest(data.digest);
  Json report = run.report();
  Json parts = Json::array();
  const std::pair<const char*, Interval> windows[] = {{"train_feature", c.window.train_feature},
                                                      {"train_label", c.window.train_label},
                                                      {"test_feature", c.window.test_feature},
                                                      {"test_label", c.window.test_label}};
  for (const auto& [name, interval] : windows) {
    const auto s = build_snapshot(data.log, interval, c.weight_rule);
    std::ostringstream csv;
    write_snapshot_csv(csv, s);
    run.writer().write(std::string("snapshot_") + name + ".csv", csv.str());
    parts.push_back({{"window", name},
                     {"interval", lpeval::cli::detail::interval_text(interval)},
                     {"nodes", s.node_count()},
                     {"edges", s.edge_count()},
                     {"total_weight", s.total_weight()},
                     {"density", s.density()}});
  }
  report["snapshots"] = parts;
  run.writer().write_json("snapshots.json", report);
  run.finish();
}

inline void cmd_score(Run& run) {
  const auto& c = run.config();
  auto data = detail::load_dataset(c);
  run.set_input_digest(data.digest);
  const auto phase = detail::test_phase(c, data.log);
  const auto& names = *data.log.node_table();
  std::ostringstream base;
  write_instances_csv(base, phase.instances, &names, false);
  run.writer().write("instances.csv", base.str());
  Json report = run.report();
  report["provenance"] = detail::provenance(c);
  report["instances"] = phase.instances.size();
  Json files = Json::array();
  for (const auto& p : c.predictors) {
    const auto scored = score_candidates(phase.feature, phase.instances, p, detail::scoring_options(c));
    std::ostringstream csv;
    write_instances_csv(csv, scored, &names, true);
    const auto file = "scores_" + detail::file_stem(p.name()) + ".csv";
    run.writer().write(file, csv.str());
    files.push_back({{"predictor", p.name()}, {"file", file}, {"rows", scored.size()}});
  }
  report["scores"] = files;
  run.writer().write_json("score.json", report);
  run.finish();
}

/// Per-distance AUROC/AUPR table plus full ROC and PR curves per predictor.
inline void cmd_evaluate(Run& run) {
  const auto& c = run.config();
  std::optional<detail::Loaded> data;
  if (c.scores) {
    run.set_input_digest(sha256_hex(read_file(*c.scores)));
  } else {
    data = detail::load_dataset(c);
    run.set_input_digest(data->digest);
  }
  NodeTable external;
  const auto sets = detail::scored_sets(c, data ? &data->log : nullptr, external);
  std::ostringstream table;
  table << "predictor,distance,positives,negatives,auroc,aupr\n";
  Json report = run.report();
  report["provenance"] = detail::provenance(c);
  Json results = Json::array();
  for (const auto& set : sets) {
    const auto sampled = detail::apply_sampling(c, set.instances);
    const auto per = per_distance_eval(sampled);
    Json buckets = Json::array();
    auto row = [&](const std::string& label, const Evaluation& e) {
      table << set.name << ',' << label << ',' << e.positives << ',' << e.negatives << ','
            << detail::cell(e.auroc) << ',' << detail::cell(e.aupr) << '\n';
      buckets.push_back({{"distance", label},
                         {"positives", e.positives},
                         {"negatives", e.negatives},
                         {"auroc", detail::json_value(e.auroc)},
                         {"aupr", detail::json_value(e.aupr)}});
    };
    for (const auto& b : per.buckets) row(b.distance.to_string(), b.evaluation);
    row("all", per.overall.evaluation);
    Json entry{{"predictor", set.name}, {"instances", sampled.size()}, {"buckets", buckets}};
    const auto ranking = Ranking::from_instances(sampled);
    const auto stem = detail::file_stem(set.name);
    if (ranking.positives() > 0 && ranking.negatives() > 0) {
      for (const auto& curve : {roc_curve(ranking), pr_curve(ranking)}) {
        const std::string kind = curve.space == CurveSpace::roc ? "roc" : "pr";
        std::ostringstream csv, svg;
        write_curve_csv(csv, curve);
        write_curve_svg(svg, curve, set.name + " " + to_string(curve.space));
        run.writer().write(kind + "_" + stem + ".csv", csv.str());
        run.writer().write(kind + "_" + stem + ".svg", svg.str());
        entry[kind] = curve_summary(curve);
      }
    } else {
      entry["roc"] = "undefined";
      entry["pr"] = "undefined";
    }
    results.push_back(entry);
  }
  report["results"] = results;
  run.writer().write("evaluation.csv", table.str());
  run.writer().write_json("evaluation.json", report);
  run.finish();
}

inline void cmd_variance(Run& run) {
  const auto& c = run.config();
  auto data = detail::load_dataset(c);
  run.set_input_digest(data.digest);
  NodeTable unused;
  const auto sets = detail::scored_sets(c, &data.log, unused);
  std::ostringstream table;
  table << "predictor,rate,repeats,invalid,mean,min,max,variance,detectable_share_variance\n";
  Json report = run.report();
  report["provenance"] = detail::provenance(c);
  report["provenance"]["sampling_mode"] = "fair-random";
  Json results = Json::array();
  for (const auto& set : sets) {
    const VarianceOptions options{c.variance_rates, c.variance_repeats, c.seed,
                                  c.sampling.exact_count, c.threads};
    const auto v = variance_experiment(set.instances, options);
    Json rates = Json::array();
    for (const auto& r : v.rates) {
      auto stat = [&](double x, std::size_t needed) {
        std::optional<double> out;
        if (r.auroc.count >= needed) out = x;
        return out;
      };
      const auto variance = stat(r.auroc.variance, 2);
      table << set.name << ',' << text::format_double(r.rate) << ',' << v.repeats << ','
            << r.invalid_repeats << ',' << detail::cell(stat(r.auroc.mean, 1)) << ','
            << detail::cell(stat(r.auroc.min, 1)) << ',' << detail::cell(stat(r.auroc.max, 1)) << ','
            << detail::cell(variance) << ',' << detail::cell(r.analytic) << '\n';
      rates.push_back({{"rate", r.rate},
                       {"valid_repeats", r.auroc.count},
                       {"invalid_repeats", r.invalid_repeats},
                       {"mean", detail::json_value(stat(r.auroc.mean, 1))},
                       {"min", detail::json_value(stat(r.auroc.min, 1))},
                       {"max", detail::json_value(stat(r.auroc.max, 1))},
                       {"variance", detail::json_value(variance)},
                       {"detectable_share_variance", detail::json_value(r.analytic)}});
    }
    results.push_back({{"predictor", set.name},
                       {"full_auroc", v.full_auroc},
                       {"positives", v.positives},
                       {"negatives", v.negatives},
                       {"detectable_negatives", v.detectable},
                       {"rates", rates},
                       {"variance_vs_inverse_rate",
                        {{"slope", v.variance_vs_inverse_rate.slope},
                         {"intercept", v.variance_vs_inverse_rate.intercept},
                         {"r_squared", v.variance_vs_inverse_rate.r_squared},
                         {"points", v.variance_vs_inverse_rate.points}}}});
  }
  report["results"] = results;
  run.writer().write("variance.csv", table.str());
  run.writer().write_json("variance.json", report);
  run.finish();
}

/// Alpha by beta grid of sub-problem versus full-problem AUROC separation.
inline void cmd_surrogate(Run& run) {
  const auto& c = run.config();
  run.set_input_digest("");
  std::ostringstream table;
  table << "alpha,beta,sub_mean,sub_variance,full_mean,full_variance,sigma\n";
  Json report = run.report();
  report["sigma_formula"] = "(mean_full - mean_sub) / sqrt(var_full + var_sub)";
  Json grid = Json::array();
  for (double alpha : c.surrogate.alphas)
    for (double beta : c.surrogate.betas) {
      const SurrogateParams p{c.surrogate.sub_positives, c.surrogate.sub_negatives,
                              c.surrogate.full_positives, c.surrogate.full_negatives,
                              alpha, beta, c.surrogate.trials};
      const auto r = surrogate_simulation(p, c.seed, c.threads);
      table << text::format_double(alpha) << ',' << text::format_double(beta) << ','
            << text::format_double(r.sub.mean) << ',' << text::format_double(r.sub.variance) << ','
            << text::format_double(r.full.mean) << ',' << text::format_double(r.full.variance)
            << ',' << text::format_double(r.sigma) << '\n';
      grid.push_back({{"alpha", alpha},
                      {"beta", beta},
                      {"sub_mean", r.sub.mean},
                      {"sub_variance", r.sub.variance},
                      {"full_mean", r.full.mean},
                      {"full_variance", r.full.variance},
                      {"sigma", r.sigma}});
    }
  report["grid"] = grid;
  run.writer().write("surrogate.csv", table.str());
  run.writer().write_json("surrogate.json", report);
  run.finish();
}

inline void cmd_kaggle_compare(Run& run) {
  const auto& c = run.config();
  auto data = detail::load_dataset(c);
  run.set_input_digest(data.digest);
  NodeTable unused;
  const auto sets = detail::scored_sets(c, &data.log, unused);
  std::ostringstream table, dist;
  table << "predictor,fair_auroc,kaggle_auroc\n";
  dist << "predictor,distance,fair_count,kaggle_count\n";
  Json report = run.report();
  report["provenance"] = detail::provenance(c);
  report["provenance"]["sampling_mode"] = "fair-random vs kaggle-balanced";
  report["provenance"]["sampling_rate"] = c.kaggle_fair_rate;
  Json results = Json::array();
  for (const auto& set : sets) {
    const auto k = kaggle_compare(set.instances, c.kaggle_fair_rate, c.seed);
    table << set.name << ',' << detail::cell(k.fair_auroc) << ',' << detail::cell(k.kaggle_auroc)
          << '\n';
    std::map<Distance, std::pair<std::uint64_t, std::uint64_t>> merged;
    for (const auto& [d, n] : k.fair_distances) merged[d].first = n;
    for (const auto& [d, n] : k.kaggle_distances) merged[d].second = n;
    Json counts = Json::array();
    for (const auto& [d, n] : merged) {
      dist << set.name << ',' << d.to_string() << ',' << n.first << ',' << n.second << '\n';
      counts.push_back({{"distance", d.to_string()}, {"fair", n.first}, {"kaggle", n.second}});
    }
    results.push_back({{"predictor", set.name},
                       {"fair_auroc", detail::json_value(k.fair_auroc)},
                       {"kaggle_auroc", detail::json_value(k.kaggle_auroc)},
                       {"distance_counts", counts}});
  }
  report["results"] = results;
  run.writer().write("kaggle_compare.csv", table.str());
  run.writer().write("kaggle_distances.csv", dist.str());
  run.writer().write_json("kaggle_compare.json", report);
  run.finish();
}

inline void cmd_temporal(Run& run) {
  const auto& c = run.config();
  auto data = detail::load_dataset(c);
  run.set_input_digest(data.digest);
  std::ostringstream table;
  table << "predictor,slice,begin,end,positives,negatives,auroc,aupr\n";
  Json report = run.report();
  report["provenance"] = detail::provenance(c);
  Json results = Json::array();
  for (const auto& p : c.predictors) {
    TemporalOptions options;
    options.predictor = p;
    options.scoring = detail::scoring_options(c);
    options.scoring.unknown = UnknownNodePolicy::strict;
    options.enumeration = {c.lmax, c.include_beyond, c.include_disconnected, c.threads};
    options.weight_rule = c.weight_rule;
    const auto r = temporal_eval(c.window, data.log, c.temporal, options);
    Json slices = Json::array();
    for (const auto& s : r.slices) {
      table << p.name() << ',' << s.index << ',' << s.label_window.begin << ','
            << s.label_window.end << ',';
      if (s.empty) {
        table << "0,0,undefined,undefined\n";
        slices.push_back({{"slice", s.index}, {"empty", true}});
        continue;
      }
      const auto& e = s.evaluation;
      table << e.positives << ',' << e.negatives << ',' << detail::cell(e.auroc) << ','
            << detail::cell(e.aupr) << '\n';
      slices.push_back({{"slice", s.index},
                        {"begin", s.label_window.begin},
                        {"end", s.label_window.end},
                        {"positives", e.positives},
                        {"negatives", e.negatives},
                        {"auroc", detail::json_value(e.auroc)},
                        {"aupr", detail::json_value(e.aupr)}});
    }
    results.push_back({{"predictor", p.name()},
                       {"candidates", r.candidates},
                       {"remainder", r.remainder},
                       {"slices", slices}});
  }
  report["results"] = results;
  run.writer().write("temporal.csv", table.str());
  run.writer().write_json("temporal.json", report);
  run.finish();
}

/// Distribution of prior distance over links new in the test label window.
inline void cmd_distance_dist(Run& run) {
  const auto& c = run.config();
  auto data = detail::load_dataset(c);
  run.set_input_digest(data.digest);
  const auto feature = build_snapshot(data.log, c.window.test_feature, c.weight_rule);
  const auto label = build_snapshot(data.log, c.window.test_label, c.weight_rule);
  const auto h = new_link_distance_distribution(feature, label);
  std::ostringstream table;
  table << "distance,count,probability\n";
  Json rows = Json::array();
  for (const auto& [d, n] : h.counts) {
    table << d.to_string() << ',' << n << ',' << text::format_double(h.probability(d)) << '\n';
    rows.push_back({{"distance", d.to_string()}, {"count", n}, {"probability", h.probability(d)}});
  }
  Json report = run.report();
  report["new_links"] = h.total;
  report["histogram"] = rows;
  run.writer().write("distance_distribution.csv", table.str());
  run.writer().write_json("distance_distribution.json", report);
  run.finish();
}

/// Writes a synthetic locality network as a pair-format event file.
inline void write_events_tsv(std::ostream& out, const EventLog& log) {
  const auto& names = *log.node_table();
  for (const auto& e : log.events()) {
    const auto& p = e.participants;
    out << names.name(p[0]) << '\t' << names.name(p[1]) << '\t' << e.timestamp;
    if (e.weight_override) out << '\t' << text::format_double(*e.weight_override);
    out << '\n';
  }
}

inline void cmd_generate(Run& run, const SyntheticParams& params) {
  params.validate();
  run.set_input_digest("");
  std::ostringstream events;
  write_events_tsv(events, generate_locality_network(params));
  run.writer().write("events.tsv", events.str());
  run.finish();
}

}  // namespace lpeval::cli
