#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lpeval/error.hpp"
#include "lpeval/experiments.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/predictors.hpp"
#include "lpeval/stratify.hpp"
#include "lpeval/text.hpp"

namespace lpeval::cli {

struct SurrogateGrid {
  std::uint64_t sub_positives = 1196;
  std::uint64_t sub_negatives = 214616;
  std::uint64_t full_positives = 29898;
  std::uint64_t full_negatives = 148200000;
  std::vector<double> alphas{0.2, 0.9};
  std::vector<double> betas{10.0, 50.0};
  std::size_t trials = 100000;
};

/// Everything a run needs. Validated before any computation and echoed into
/// every output.
struct RunConfig {
  std::filesystem::path dataset;
  EventFormat format = EventFormat::pair;
  WeightRule weight_rule = WeightRule::inverse_k_minus_1;
  WindowConfig window;
  std::vector<PredictorId> predictors{PredictorId::preferential_attachment()};
  DirectionPolicy policy = DirectionPolicy::mean;
  GenerationMode mode = GenerationMode::from_training;
  std::uint32_t lmax = 2;
  bool include_beyond = true;
  bool include_disconnected = true;
  SamplingSpec sampling;
  TemporalSliceSpec temporal;
  std::vector<double> variance_rates = default_sampling_rates();
  std::size_t variance_repeats = 100;
  double kaggle_fair_rate = 1.0;
  SurrogateGrid surrogate;
  std::optional<std::filesystem::path> scores;  // external scored-instance file
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  unsigned threads = 0;  // execution only; not echoed

  void validate(bool dataset_required) const;
  nlohmann::ordered_json echo() const;
};

namespace detail {

inline std::string weight_rule_name(WeightRule r) {
  switch (r) {
    case WeightRule::inverse_k_minus_1: return "inverse-k-minus-1";
    case WeightRule::inverse_k: return "inverse-k";
    case WeightRule::unit: return "unit";
  }
  return "";
}

inline WeightRule parse_weight_rule(std::string_view s) {
  if (s == "inverse-k-minus-1") return WeightRule::inverse_k_minus_1;
  if (s == "inverse-k") return WeightRule::inverse_k;
  if (s == "unit") return WeightRule::unit;
  throw ConfigError("dataset.weight_rule", "expected inverse-k-minus-1, inverse-k or unit");
}

inline Interval parse_interval(const std::string& field, std::string_view s) {
  const auto parts = text::split(text::trim(s), ':');
  if (parts.size() != 2) throw ConfigError(field, "expected begin:end");
  auto b = text::parse_int(text::trim(parts[0]));
  auto e = text::parse_int(text::trim(parts[1]));
  if (!b || !e) throw ConfigError(field, "interval bounds must be integers");
  return {*b, *e};
}

inline std::string interval_text(Interval i) {
  return std::to_string(i.begin) + ":" + std::to_string(i.end);
}

inline std::vector<std::string_view> list_items(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto item : text::split(s, ',')) {
    item = text::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& field, std::string_view s) {
  std::vector<double> out;
  for (auto item : list_items(s)) {
    auto v = text::parse_double(item);
    if (!v) throw ConfigError(field, "bad number '" + std::string(item) + "'");
    out.push_back(*v);
  }
  return out;
}

inline std::uint64_t parse_count(const std::string& field, std::string_view s) {
  auto v = text::parse_int(text::trim(s));
  if (!v || *v < 0) throw ConfigError(field, "expected a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

inline double parse_number(const std::string& field, std::string_view s) {
  auto v = text::parse_double(text::trim(s));
  if (!v) throw ConfigError(field, "expected a number");
  return *v;
}

inline bool parse_bool(const std::string& field, std::string_view s) {
  s = text::trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(field, "expected true or false");
}

}  // namespace detail

/// Applies one `section.key = value` setting.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "dataset.path") c.dataset = value;
  else if (key == "dataset.format") {
    if (value == "pair") c.format = EventFormat::pair;
    else if (value == "clique") c.format = EventFormat::clique;
    else throw ConfigError(key, "expected pair or clique");
  } else if (key == "dataset.weight_rule") c.weight_rule = parse_weight_rule(value);
  else if (key == "window.train_feature") c.window.train_feature = parse_interval(key, value);
  else if (key == "window.train_label") c.window.train_label = parse_interval(key, value);
  else if (key == "window.test_feature") c.window.test_feature = parse_interval(key, value);
  else if (key == "window.test_label") c.window.test_label = parse_interval(key, value);
  else if (key == "predictors.list") {
    c.predictors.clear();
    for (auto item : list_items(value)) {
      try {
        c.predictors.push_back(PredictorId::parse(item));
      } catch (const ConfigError& e) {
        throw ConfigError(key, e.what());
      }
    }
  } else if (key == "predictors.policy") {
    try {
      c.policy = parse_direction_policy(value);
    } catch (const ConfigError& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "stratify.lmax") c.lmax = static_cast<std::uint32_t>(parse_count(key, value));
  else if (key == "stratify.mode") {
    try {
      c.mode = parse_generation_mode(value);
    } catch (const ConfigError& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "stratify.beyond") c.include_beyond = parse_bool(key, value);
  else if (key == "stratify.disconnected") c.include_disconnected = parse_bool(key, value);
  else if (key == "sampling.mode") c.sampling.mode = parse_sampling_mode(value);
  else if (key == "sampling.rate") c.sampling.rate = parse_number(key, value);
  else if (key == "sampling.exact_count") c.sampling.exact_count = parse_bool(key, value);
  else if (key == "temporal.slices") c.temporal.slices = parse_count(key, value);
  else if (key == "temporal.mode") c.temporal.mode = parse_slice_mode(value);
  else if (key == "variance.rates") c.variance_rates = parse_doubles(key, value);
  else if (key == "variance.repeats") c.variance_repeats = parse_count(key, value);
  else if (key == "kaggle.fair_rate") c.kaggle_fair_rate = parse_number(key, value);
  else if (key == "surrogate.sub_positives") c.surrogate.sub_positives = parse_count(key, value);
  else if (key == "surrogate.sub_negatives") c.surrogate.sub_negatives = parse_count(key, value);
  else if (key == "surrogate.full_positives") c.surrogate.full_positives = parse_count(key, value);
  else if (key == "surrogate.full_negatives") c.surrogate.full_negatives = parse_count(key, value);
  else if (key == "surrogate.alphas") c.surrogate.alphas = parse_doubles(key, value);
  else if (key == "surrogate.betas") c.surrogate.betas = parse_doubles(key, value);
  else if (key == "surrogate.trials") c.surrogate.trials = parse_count(key, value);
  else if (key == "run.scores") c.scores = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
  else if (key == "run.seed") c.seed = parse_count(key, value);
  else if (key == "run.out") c.out = value;
  else throw ConfigError(key, "unknown setting");
}

/// Reads an INI-style file of `[section]` headers and `key = value` lines.
/// Relative dataset and score paths resolve against `base_dir`.
inline void load_config(RunConfig& c, std::istream& in,
                        const std::filesystem::path& base_dir = {}) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "setting outside a section");
    for (const auto& [key, value] : body) apply_setting(c, section + "." + key, value.data());
  }
  auto rebase = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
  };
  rebase(c.dataset);
  if (c.scores) rebase(*c.scores);
}

inline void RunConfig::validate(bool dataset_required) const {
  if (dataset_required && dataset.empty()) throw ConfigError("dataset.path", "missing");
  if (dataset_required) window.validate();
  if (predictors.empty()) throw ConfigError("predictors.list", "at least one predictor required");
  if (lmax < 2) throw ConfigError("stratify.lmax", "must be >= 2");
  sampling.validate();
  if (temporal.slices == 0) throw ConfigError("temporal.slices", "must be >= 1");
  if (variance_rates.empty()) throw ConfigError("variance.rates", "at least one rate required");
  for (double r : variance_rates)
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("variance.rates", "rates must be in (0, 1]");
  if (variance_repeats == 0) throw ConfigError("variance.repeats", "must be positive");
  if (!(kaggle_fair_rate > 0.0 && kaggle_fair_rate <= 1.0))
    throw ConfigError("kaggle.fair_rate", "must be in (0, 1]");
  if (surrogate.alphas.empty() || surrogate.betas.empty())
    throw ConfigError("surrogate.alphas", "alpha and beta grids must be non-empty");
  for (double a : surrogate.alphas)
    for (double b : surrogate.betas) {
      SurrogateParams p{surrogate.sub_positives, surrogate.sub_negatives, surrogate.full_positives,
                        surrogate.full_negatives, a, b, surrogate.trials};
      p.validate();
    }
}

inline nlohmann::ordered_json RunConfig::echo() const {
  using detail::interval_text;
  nlohmann::ordered_json j;
  j["dataset"] = {{"path", dataset.filename().string()},
                  {"format", format == EventFormat::pair ? "pair" : "clique"},
                  {"weight_rule", detail::weight_rule_name(weight_rule)}};
  j["window"] = {{"train_feature", interval_text(window.train_feature)},
                 {"train_label", interval_text(window.train_label)},
                 {"test_feature", interval_text(window.test_feature)},
                 {"test_label", interval_text(window.test_label)}};
  auto names = nlohmann::ordered_json::array();
  for (const auto& p : predictors) names.push_back(p.name());
  j["predictors"] = {{"list", names}, {"policy", to_string(policy)}};
  j["stratify"] = {{"lmax", lmax},
                   {"mode", to_string(mode)},
                   {"beyond", include_beyond},
                   {"disconnected", include_disconnected}};
  j["sampling"] = {{"mode", to_string(sampling.mode)},
                   {"rate", sampling.rate},
                   {"exact_count", sampling.exact_count}};
  j["temporal"] = {{"slices", temporal.slices}, {"mode", to_string(temporal.mode)}};
  j["variance"] = {{"rates", variance_rates}, {"repeats", variance_repeats}};
  j["kaggle"] = {{"fair_rate", kaggle_fair_rate}};
  j["surrogate"] = {{"sub_positives", surrogate.sub_positives},
                    {"sub_negatives", surrogate.sub_negatives},
                    {"full_positives", surrogate.full_positives},
                    {"full_negatives", surrogate.full_negatives},
                    {"alphas", surrogate.alphas},
                    {"betas", surrogate.betas},
                    {"trials", surrogate.trials}};
  j["run"] = {{"seed", seed}, {"scores", scores ? scores->filename().string() : ""}};
  j["tie_policy"] = "tie-groups-atomic";
  return j;
}

}  // namespace lpeval::cli
