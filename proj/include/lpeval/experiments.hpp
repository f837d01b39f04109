#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/metrics.hpp"
#include "lpeval/parallel.hpp"
#include "lpeval/predictors.hpp"
#include "lpeval/rng.hpp"
#include "lpeval/stats.hpp"
#include "lpeval/stratify.hpp"

namespace lpeval {

// ---------------------------------------------------------------------------
// Negative sampling

enum class SamplingMode { none, fair_random, kaggle_balanced };

inline std::string to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::none: return "none";
    case SamplingMode::fair_random: return "fair-random";
    case SamplingMode::kaggle_balanced: return "kaggle-balanced";
  }
  return "";
}

inline SamplingMode parse_sampling_mode(std::string_view s) {
  if (s == "none") return SamplingMode::none;
  if (s == "fair-random" || s == "fair") return SamplingMode::fair_random;
  if (s == "kaggle-balanced" || s == "kaggle") return SamplingMode::kaggle_balanced;
  throw ConfigError("sampling.mode", "unknown sampling mode '" + std::string(s) + "'");
}

struct SamplingSpec {
  SamplingMode mode = SamplingMode::none;
  double rate = 1.0;         // fraction of negatives kept (fair-random)
  std::uint64_t seed = 0;
  bool exact_count = false;  // keep exactly round(rate * N) negatives instead of Bernoulli

  void validate() const {
    if (mode == SamplingMode::fair_random && !(rate > 0.0 && rate <= 1.0))
      throw ConfigError("sampling.rate", "must be in (0, 1]");
  }
};

namespace detail {

// Selection sampling: keeps exactly `keep` of the flagged items, uniformly,
// preserving order.
inline std::vector<char> choose_exactly(std::size_t total, std::size_t keep, Rng& rng) {
  std::vector<char> chosen(total, 0);
  std::size_t needed = keep;
  for (std::size_t i = 0; i < total && needed > 0; ++i) {
    if (rng.below(total - i) < needed) {
      chosen[i] = 1;
      --needed;
    }
  }
  return chosen;
}

}  // namespace detail

/// Keeps every positive; keeps each negative with probability `rate`
/// (or exactly round(rate * N) negatives when `exact_count`). Order preserved.
inline std::vector<Instance> sample_fair(std::span<const Instance> instances,
                                         const SamplingSpec& spec) {
  if (spec.mode != SamplingMode::fair_random)
    throw ConfigError("sampling.mode", "sample_fair requires fair-random");
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Instance> out;
  if (spec.exact_count) {
    std::size_t negatives = 0;
    for (const auto& i : instances) negatives += !i.positive();
    const auto keep = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(negatives)));
    auto chosen = detail::choose_exactly(negatives, keep, rng);
    std::size_t k = 0;
    for (const auto& i : instances)
      if (i.positive() || chosen[k++]) out.push_back(i);
    return out;
  }
  for (const auto& i : instances)
    if (i.positive() || spec.rate >= 1.0 || rng.bernoulli(spec.rate)) out.push_back(i);
  return out;
}

/// Per distance bucket, keeps all positives and a uniform subset of negatives
/// the size of the positive count. Buckets without positives are dropped.
inline std::vector<Instance> sample_kaggle(std::span<const Instance> instances, std::uint64_t seed) {
  std::map<Distance, std::pair<std::size_t, std::size_t>> buckets;  // positives, negatives
  for (const auto& i : instances) {
    auto& b = buckets[i.distance];
    (i.positive() ? b.first : b.second) += 1;
  }
  Rng rng(seed);
  std::map<Distance, std::vector<char>> chosen;
  std::size_t bucket_index = 0;
  for (const auto& [d, counts] : buckets) {
    auto sub = rng.split(bucket_index++);
    chosen[d] = detail::choose_exactly(counts.second, std::min(counts.first, counts.second), sub);
  }
  std::map<Distance, std::size_t> cursor;
  std::vector<Instance> out;
  for (const auto& i : instances) {
    if (buckets[i.distance].first == 0) continue;
    if (i.positive()) {
      out.push_back(i);
    } else if (chosen[i.distance][cursor[i.distance]++]) {
      out.push_back(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling variance

struct AnalyticVariance {
  double value = 0.0;
  double effective_rate = 0.0;
  bool rounded = false;  // N * p was not integral; rate adjusted to round(N p) / N
};

/// Variance of the detectable fraction X / (N p) when N p of N negatives are
/// drawn without replacement and C of the N are detectable:
/// C (N - C)(1 - p) / (N^2 (N - 1) p).
inline AnalyticVariance analytic_sampling_variance(std::uint64_t n, std::uint64_t c, double p) {
  if (n <= 1) throw UndefinedMetricError("sampling variance needs N > 1");
  if (c > n) throw ConfigError("C", "must not exceed N");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("p", "must be in (0, 1)");
  AnalyticVariance out;
  const double N = static_cast<double>(n), C = static_cast<double>(c);
  const double drawn = N * p;
  out.effective_rate = p;
  if (std::abs(drawn - std::round(drawn)) > 1e-9) {
    out.rounded = true;
    out.effective_rate = std::round(drawn) / N;
    if (out.effective_rate <= 0.0 || out.effective_rate >= 1.0)
      throw ConfigError("p", "N * p rounds to 0 or N");
  }
  const double q = out.effective_rate;
  out.value = C * (N - C) * (1.0 - q) / (N * N * (N - 1.0) * q);
  return out;
}

struct RateStats {
  double rate = 1.0;
  SummaryStats auroc;
  std::size_t invalid_repeats = 0;  // samples left with no negative
  std::optional<double> analytic;  // variance of the retained share of detectable negatives
};

struct VarianceReport {
  double full_auroc = 0.0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  std::uint64_t negatives = 0;
  std::uint64_t positives = 0;
  std::uint64_t detectable = 0;  // C estimate: negatives ranked below the median positive
  std::vector<RateStats> rates;
  LinearFit variance_vs_inverse_rate;
};

inline std::vector<double> default_sampling_rates() { return {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}; }

struct VarianceOptions {
  std::vector<double> rates = default_sampling_rates();
  std::size_t repeats = 100;
  std::uint64_t seed = 0;
  bool exact_count = false;
  unsigned threads = 1;
};

/// AUROC spread under repeated fair negative sampling at each rate.
inline VarianceReport variance_experiment(std::span<const Instance> instances,
                                          const VarianceOptions& options) {
  if (options.repeats == 0) throw ConfigError("variance.repeats", "must be positive");
  for (double r : options.rates)
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("variance.rates", "rates must be in (0, 1]");
  const Ranking full = Ranking::from_instances(instances);
  VarianceReport report;
  report.full_auroc = auroc(full);
  report.repeats = options.repeats;
  report.seed = options.seed;
  report.positives = full.positives();
  report.negatives = full.negatives();
  {
    // C: negatives ranked strictly below the median positive.
    std::uint64_t seen_pos = 0, neg_above = 0;
    const std::uint64_t median_rank = (full.positives() + 1) / 2;
    for (const auto& g : full.groups()) {
      if (seen_pos + g.positives >= median_rank) {
        neg_above += g.negatives;
        break;
      }
      seen_pos += g.positives;
      neg_above += g.negatives;
    }
    report.detectable = full.negatives() - neg_above;
  }
  const auto entries = full.entries();
  const std::size_t tasks = options.rates.size() * options.repeats;
  std::vector<double> values(tasks, 0.0);
  std::vector<char> valid(tasks, 0);
  const Rng base(options.seed);
  parallel_blocks(tasks, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<TieGroup> groups;
    std::vector<char> chosen;
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t r = t / options.repeats, k = t % options.repeats;
      const double p = options.rates[r];
      Rng rng = base.split({r, k});
      groups.clear();
      if (options.exact_count) {
        const auto keep = static_cast<std::size_t>(
            std::llround(p * static_cast<double>(report.negatives)));
        chosen = detail::choose_exactly(report.negatives, keep, rng);
        std::size_t n = 0;
        for (const auto& e : entries)
          if (e.positive || chosen[n++]) push_ranked(groups, e.score, e.positive);
      } else {
        for (const auto& e : entries)
          if (e.positive || p >= 1.0 || rng.bernoulli(p)) push_ranked(groups, e.score, e.positive);
      }
      std::uint64_t pos = 0, neg = 0;
      detail::count_classes(groups, pos, neg);
      if (neg == 0 || pos == 0) continue;
      values[t] = auroc(groups);
      valid[t] = 1;
    }
  });
  std::vector<double> xs, ys;
  for (std::size_t r = 0; r < options.rates.size(); ++r) {
    RateStats rs;
    rs.rate = options.rates[r];
    std::vector<double> kept;
    for (std::size_t k = 0; k < options.repeats; ++k) {
      const std::size_t t = r * options.repeats + k;
      if (valid[t])
        kept.push_back(values[t]);
      else
        ++rs.invalid_repeats;
    }
    rs.auroc = summarize(kept);
    if (rs.rate < 1.0 && report.negatives > 1) {
      try {
        rs.analytic = analytic_sampling_variance(report.negatives, report.detectable, rs.rate).value;
      } catch (const Error&) {
      }
    }
    if (kept.size() > 1) {
      xs.push_back(1.0 / rs.rate);
      ys.push_back(rs.auroc.variance);
    }
    report.rates.push_back(rs);
  }
  report.variance_vs_inverse_rate = fit_line(xs, ys);
  return report;
}

// ---------------------------------------------------------------------------
// Surrogate ranking simulation

struct SurrogateParams {
  std::uint64_t sub_positives = 0;   // p_s
  std::uint64_t sub_negatives = 0;   // n_s
  std::uint64_t full_positives = 0;  // p_f
  std::uint64_t full_negatives = 0;  // n_f
  double alpha = 0.2;                // positives fall in the top alpha fraction
  double beta = 10.0;                // spread of sub-problem positives in the full ranking
  std::size_t trials = 100000;

  std::uint64_t sub_slots() const {
    return static_cast<std::uint64_t>(std::ceil(alpha * static_cast<double>(sub_positives + sub_negatives) - 1e-9));
  }
  std::uint64_t full_sub_slots() const {
    return static_cast<std::uint64_t>(
        std::ceil(alpha * static_cast<double>(sub_positives + sub_negatives) * beta - 1e-9));
  }
  std::uint64_t full_slots() const {
    return static_cast<std::uint64_t>(
        std::ceil(alpha * static_cast<double>(full_positives + full_negatives) - 1e-9));
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("surrogate.alpha", "must be in (0, 1]");
    if (!(beta >= 1.0)) throw ConfigError("surrogate.beta", "must be >= 1");
    if (sub_positives == 0 || sub_negatives == 0)
      throw ConfigError("surrogate.sub", "needs at least one positive and one negative");
    if (sub_positives > full_positives || sub_negatives > full_negatives)
      throw ConfigError("surrogate.full", "full counts must contain the sub-problem counts");
    if (trials == 0) throw ConfigError("surrogate.trials", "must be positive");
    const auto full_total = full_positives + full_negatives;
    if (full_sub_slots() > full_total)
      throw ConfigError("surrogate.beta", "alpha * (p_s + n_s) * beta exceeds p_f + n_f");
    if (sub_slots() < sub_positives || full_sub_slots() < sub_positives)
      throw ConfigError("surrogate.alpha", "too few slots for the sub-problem positives");
    if (full_slots() < full_positives)
      throw ConfigError("surrogate.alpha", "too few slots for the full-problem positives");
  }
};

struct SurrogateResult {
  SurrogateParams params;
  std::uint64_t seed = 0;
  SummaryStats sub;   // AUROC of the sub-problem arrangement
  SummaryStats full;  // AUROC of the full-problem arrangement
  double sigma = 0.0; // (mean_full - mean_sub) / sqrt(var_full + var_sub)
};

namespace detail {

/// Set of slot indices with rejection sampling of fresh ones. Small ranges use
/// a bitmap, large ranges an open-addressing hash table.
class SlotSet {
 public:
  void reset(std::uint64_t range, std::size_t expected) {
    clear();
    use_bitmap_ = range <= (std::uint64_t{1} << 22);
    if (use_bitmap_) {
      if (bitmap_.size() < range) bitmap_.assign(range, 0);
    } else {
      std::size_t cap = 16;
      while (cap < 2 * expected + 16) cap <<= 1;
      if (table_.size() < cap) table_.assign(cap, kEmpty);
      mask_ = cap - 1;
    }
  }

  bool insert(std::uint64_t s) {
    std::size_t pos = 0;
    if (use_bitmap_) {
      if (bitmap_[s]) return false;
      bitmap_[s] = 1;
      pos = static_cast<std::size_t>(s);
    } else {
      pos = static_cast<std::size_t>(mix64(s)) & mask_;
      while (table_[pos] != kEmpty) {
        if (table_[pos] == s) return false;
        pos = (pos + 1) & mask_;
      }
      table_[pos] = s;
    }
    used_.push_back(pos);
    return true;
  }

  /// Draws `count` fresh slots uniformly from [0, limit) and returns their sum.
  std::uint64_t draw(std::uint64_t count, std::uint64_t limit, Rng& rng) {
    std::uint64_t sum = 0;
    for (std::uint64_t i = 0; i < count;) {
      const auto s = rng.below(limit);
      if (insert(s)) {
        sum += s;
        ++i;
      }
    }
    return sum;
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

  void clear() {
    for (auto pos : used_) {
      if (use_bitmap_)
        bitmap_[pos] = 0;
      else
        table_[pos] = kEmpty;
    }
    used_.clear();
  }

  bool use_bitmap_ = true;
  std::size_t mask_ = 0;
  std::vector<char> bitmap_;
  std::vector<std::uint64_t> table_;
  std::vector<std::size_t> used_;
};

// AUROC of a ranking of size `positives + negatives` whose positives sit at
// 0-based slots summing to `slot_sum`: a positive at slot r with i positives
// above it has r - i negatives above it.
inline double auroc_from_slot_sum(std::uint64_t slot_sum, std::uint64_t positives,
                                  std::uint64_t negatives) {
  const auto above = static_cast<long double>(slot_sum) -
                     static_cast<long double>(positives) * static_cast<long double>(positives - 1) / 2.0L;
  return static_cast<double>(1.0L - above / (static_cast<long double>(positives) *
                                             static_cast<long double>(negatives)));
}

}  // namespace detail

/// Simulates the AUROC of a distance sub-problem against the full problem.
///
/// Each trial places the sub-problem positives uniformly among the top
/// ceil(alpha (p_s + n_s)) slots of a (p_s + n_s) ranking. In the full
/// ranking the same p_s positives fall among the top ceil(alpha (p_s + n_s) beta)
/// slots and the remaining p_f - p_s among the top ceil(alpha (p_f + n_f)).
inline SurrogateResult surrogate_simulation(const SurrogateParams& params, std::uint64_t seed,
                                            unsigned threads = 1) {
  params.validate();
  SurrogateResult result;
  result.params = params;
  result.seed = seed;
  std::vector<double> sub(params.trials), full(params.trials);
  const Rng base(seed);
  const auto ps = params.sub_positives, ns = params.sub_negatives;
  const auto pf = params.full_positives, nf = params.full_negatives;
  const auto sub_slots = params.sub_slots();
  const auto full_sub_slots = params.full_sub_slots();
  const auto full_slots = params.full_slots();
  parallel_blocks(params.trials, threads, [&](std::size_t begin, std::size_t end) {
    detail::SlotSet slots;
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng = base.split(t);
      slots.reset(sub_slots, ps);
      sub[t] = detail::auroc_from_slot_sum(slots.draw(ps, sub_slots, rng), ps, ns);
      slots.reset(std::max(full_sub_slots, full_slots), pf);
      std::uint64_t sum = slots.draw(ps, full_sub_slots, rng);
      sum += slots.draw(pf - ps, full_slots, rng);
      full[t] = detail::auroc_from_slot_sum(sum, pf, nf);
    }
  });
  result.sub = summarize(sub);
  result.full = summarize(full);
  const double spread = std::sqrt(result.sub.variance + result.full.variance);
  result.sigma = spread > 0.0 ? (result.full.mean - result.sub.mean) / spread : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// Stratified evaluation

/// Overall AUROC/AUPR of a labeled, scored set; undefined areas are nullopt.
struct Evaluation {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  std::optional<double> auroc;
  std::optional<double> aupr;
};

inline Evaluation evaluate(std::span<const Instance> instances) {
  Evaluation e;
  const Ranking r = Ranking::from_instances(instances);
  e.positives = r.positives();
  e.negatives = r.negatives();
  if (e.positives > 0 && e.negatives > 0) e.auroc = auroc(r);
  if (e.positives > 0) e.aupr = aupr(r);
  return e;
}

struct FilteredResult {
  std::uint32_t cut = 0;          // negatives with finite distance < cut removed
  std::uint64_t removed = 0;
  std::uint64_t negatives_left = 0;
  std::optional<double> auroc;    // nullopt when no negative survives
};

struct FilteredReport {
  std::optional<double> baseline;
  std::vector<FilteredResult> cuts;
};

/// AUROC after removing every negative closer than each cut; positives stay.
inline FilteredReport filtered_negative_eval(std::span<const Instance> instances,
                                             std::span<const std::uint32_t> cuts) {
  for (const auto& i : instances)
    if (!i.distance.known()) throw DataError("filtered evaluation needs instance distances");
  FilteredReport report;
  report.baseline = evaluate(instances).auroc;
  for (auto cut : cuts) {
    FilteredResult fr;
    fr.cut = cut;
    std::vector<Instance> kept;
    kept.reserve(instances.size());
    for (const auto& i : instances) {
      if (!i.positive() && i.distance.finite() && i.distance.value() < cut) {
        ++fr.removed;
        continue;
      }
      kept.push_back(i);
    }
    auto e = evaluate(kept);
    fr.negatives_left = e.negatives;
    fr.auroc = e.auroc;
    report.cuts.push_back(fr);
  }
  return report;
}

struct BucketResult {
  Distance distance;  // unknown Distance marks the overall row
  Evaluation evaluation;
  bool insufficient = false;  // lacks a positive or a negative
};

struct PerDistanceReport {
  std::vector<BucketResult> buckets;
  BucketResult overall;
};

/// Per distance bucket AUROC and AUPR, plus the overall row over everything.
inline PerDistanceReport per_distance_eval(std::span<const Instance> instances) {
  std::map<Distance, std::vector<Instance>> groups;
  for (const auto& i : instances) groups[i.distance].push_back(i);
  PerDistanceReport report;
  for (auto& [d, members] : groups) {
    BucketResult b{d, evaluate(members), false};
    b.insufficient = b.evaluation.positives == 0 || b.evaluation.negatives == 0;
    report.buckets.push_back(b);
  }
  report.overall.evaluation = evaluate(instances);
  report.overall.insufficient =
      report.overall.evaluation.positives == 0 || report.overall.evaluation.negatives == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Fair versus per-bucket balanced sampling

struct KaggleComparison {
  std::optional<double> fair_auroc;
  std::optional<double> kaggle_auroc;
  std::map<Distance, std::uint64_t> fair_distances;    // instance counts per bucket
  std::map<Distance, std::uint64_t> kaggle_distances;
};

inline KaggleComparison kaggle_compare(std::span<const Instance> instances, double fair_rate,
                                       std::uint64_t seed) {
  KaggleComparison c;
  const Rng base(seed);
  const auto fair = sample_fair(instances, {SamplingMode::fair_random, fair_rate, base.split(0).seed()});
  const auto kaggle = sample_kaggle(instances, base.split(1).seed());
  c.fair_auroc = evaluate(fair).auroc;
  c.kaggle_auroc = evaluate(kaggle).auroc;
  for (const auto& i : fair) ++c.fair_distances[i.distance];
  for (const auto& i : kaggle) ++c.kaggle_distances[i.distance];
  return c;
}

// ---------------------------------------------------------------------------
// Temporal sub-problems

enum class SliceMode { disjoint, cumulative };

inline std::string to_string(SliceMode m) { return m == SliceMode::disjoint ? "disjoint" : "cumulative"; }

inline SliceMode parse_slice_mode(std::string_view s) {
  if (s == "disjoint") return SliceMode::disjoint;
  if (s == "cumulative") return SliceMode::cumulative;
  throw ConfigError("temporal.mode", "expected disjoint or cumulative");
}

struct TemporalSliceSpec {
  std::size_t slices = 1;
  SliceMode mode = SliceMode::disjoint;
};

/// Splits `interval` into `count` equal-length parts; the remainder goes to the last.
inline std::vector<Interval> slice_interval(Interval interval, std::size_t count) {
  if (count == 0) throw ConfigError("temporal.slices", "must be >= 1");
  const auto length = interval.length();
  if (length < static_cast<Timestamp>(count))
    throw ConfigError("temporal.slices", "more slices than time units in the label interval");
  const Timestamp base = length / static_cast<Timestamp>(count);
  std::vector<Interval> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Timestamp b = interval.begin + static_cast<Timestamp>(i) * base;
    out.push_back({b, i + 1 == count ? interval.end : b + base - 1});
  }
  return out;
}

struct SliceResult {
  std::size_t index = 0;
  Interval label_window;
  Evaluation evaluation;
  bool empty = false;  // no events in the window; excluded
};

struct TemporalReport {
  TemporalSliceSpec spec;
  Timestamp remainder = 0;  // extra time units absorbed by the last slice
  std::size_t candidates = 0;
  std::vector<SliceResult> slices;
};

struct TemporalOptions {
  PredictorId predictor = PredictorId::preferential_attachment();
  ScoringOptions scoring{};
  EnumerationOptions enumeration{2, true, true, 1};
  WeightRule weight_rule = WeightRule::inverse_k_minus_1;
};

/// Evaluates fixed test candidates against successive slices of the label
/// period. Disjoint slices label positives from their own window; cumulative
/// slices from the union of windows up to and including their own.
inline TemporalReport temporal_eval(const WindowConfig& window, const EventLog& log,
                                    const TemporalSliceSpec& spec, const TemporalOptions& options) {
  window.validate();
  const auto windows = slice_interval(window.test_label, spec.slices);
  TemporalReport report;
  report.spec = spec;
  report.remainder = window.test_label.length() % static_cast<Timestamp>(spec.slices);
  const Snapshot feature = build_snapshot(log, window.test_feature, options.weight_rule);
  const auto candidates = geodesic_bucket_enumerate(feature, options.enumeration);
  const auto scored = score_candidates(feature, candidates, options.predictor, options.scoring);
  report.candidates = candidates.size();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    SliceResult sr;
    sr.index = i;
    sr.label_window =
        spec.mode == SliceMode::disjoint ? windows[i] : Interval{windows.front().begin, windows[i].end};
    if (log.events_in(windows[i]).empty()) {
      sr.empty = true;
      report.slices.push_back(sr);
      continue;
    }
    const Snapshot label = build_snapshot(log, sr.label_window, options.weight_rule);
    auto labeled = scored;
    for (auto& inst : labeled)
      inst.label = label.has_edge(inst.u, inst.v) ? Label::positive : Label::negative;
    sr.evaluation = evaluate(labeled);
    report.slices.push_back(sr);
  }
  return report;
}

}  // namespace lpeval
