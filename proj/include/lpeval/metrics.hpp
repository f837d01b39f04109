#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/parallel.hpp"

namespace lpeval {

struct RankedEntry {
  double score;
  bool positive;
};

/// A run of equal scores. Curves treat each group as one atomic step.
struct TieGroup {
  double score;
  std::uint64_t positives;
  std::uint64_t negatives;
};

/// Appends one entry to a group list being built in non-increasing score order.
inline void push_ranked(std::vector<TieGroup>& groups, double score, bool positive) {
  if (groups.empty() || groups.back().score != score) groups.push_back({score, 0, 0});
  (positive ? groups.back().positives : groups.back().negatives) += 1;
}

/// Labeled scores sorted by score, descending, with tie groups.
class Ranking {
 public:
  Ranking() = default;

  explicit Ranking(std::vector<RankedEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_)
      if (!std::isfinite(e.score)) throw DataError("ranking scores must be finite");
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i == 0 || entries_[i].score != entries_[i - 1].score) boundaries_.push_back(i);
      push_ranked(groups_, entries_[i].score, entries_[i].positive);
    }
    boundaries_.push_back(entries_.size());
    for (const auto& g : groups_) {
      positives_ += g.positives;
      negatives_ += g.negatives;
    }
  }

  /// Builds from labeled instances; instances with unknown labels are an error.
  static Ranking from_instances(std::span<const Instance> instances) {
    std::vector<RankedEntry> entries;
    entries.reserve(instances.size());
    for (const auto& i : instances) {
      if (i.label == Label::unknown) throw DataError("instance without label in ranking");
      entries.push_back({i.score, i.positive()});
    }
    return Ranking(std::move(entries));
  }

  std::span<const RankedEntry> entries() const noexcept { return entries_; }
  std::span<const TieGroup> groups() const noexcept { return groups_; }
  /// Start index of each tie group, followed by size().
  std::span<const std::size_t> group_boundaries() const noexcept { return boundaries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t positives() const noexcept { return positives_; }
  std::uint64_t negatives() const noexcept { return negatives_; }

 private:
  std::vector<RankedEntry> entries_;
  std::vector<TieGroup> groups_;
  std::vector<std::size_t> boundaries_{};
  std::uint64_t positives_ = 0;
  std::uint64_t negatives_ = 0;
};

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Confusion {
  ConfusionCounts counts;
  std::size_t cut = 0;    // effective cut after tie adjustment
  bool adjusted = false;  // requested cut fell inside a tie group
};

/// Predicts the top `cut` entries positive. A cut inside a tie group moves to
/// the end of that group, since no score threshold separates tied entries.
inline Confusion confusion_at(const Ranking& rank, std::size_t cut) {
  if (cut > rank.size()) throw ConfigError("cut", "cut exceeds ranking size");
  const auto bounds = rank.group_boundaries();
  auto it = std::lower_bound(bounds.begin(), bounds.end(), cut);
  Confusion c;
  c.cut = *it;
  c.adjusted = c.cut != cut;
  const auto groups = rank.groups();
  const auto included = static_cast<std::size_t>(it - bounds.begin());
  for (std::size_t g = 0; g < included; ++g) {
    c.counts.tp += groups[g].positives;
    c.counts.fp += groups[g].negatives;
  }
  c.counts.fn = rank.positives() - c.counts.tp;
  c.counts.tn = rank.negatives() - c.counts.fp;
  return c;
}

/// Fixed-threshold rates. A rate with a zero denominator is nullopt.
struct Rates {
  std::optional<double> sensitivity, specificity, precision, recall, fallout, accuracy, f1;
};

inline Rates rates(const ConfusionCounts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  Rates r;
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.recall = r.sensitivity;
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.fallout = ratio(c.fp, c.fp + c.tn);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  if (r.precision && r.recall && *r.precision + *r.recall > 0.0)
    r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
  return r;
}

/// K for top-K metrics, as an absolute count or a percentage of the ranking.
struct TopK {
  double value = 0;
  bool percent = false;

  static TopK count(std::uint64_t k) { return {static_cast<double>(k), false}; }
  static TopK percentage(double p) { return {p, true}; }

  /// Percentages round up, so any positive percentage selects at least one entry.
  std::size_t resolve(std::size_t n) const {
    if (!(value > 0.0)) throw ConfigError("k", "K must be positive");
    double k = percent ? std::ceil(value / 100.0 * static_cast<double>(n) - 1e-9) : value;
    if (!percent && k != std::floor(k)) throw ConfigError("k", "count K must be an integer");
    if (k < 1.0 || k > static_cast<double>(n)) throw ConfigError("k", "K outside [1, ranking size]");
    return static_cast<std::size_t>(k);
  }
};

/// Fraction of positives among the top K. A tie group straddling K
/// contributes its expected positive count for the slots it fills.
inline double tpr_k(const Ranking& rank, TopK k_spec) {
  const std::size_t k = k_spec.resolve(rank.size());
  double positives = 0.0;
  std::size_t taken = 0;
  for (const auto& g : rank.groups()) {
    const std::size_t size = g.positives + g.negatives;
    if (taken + size <= k) {
      positives += static_cast<double>(g.positives);
      taken += size;
      if (taken == k) break;
    } else {
      const std::size_t slots = k - taken;
      positives += static_cast<double>(slots) * static_cast<double>(g.positives) /
                   static_cast<double>(size);
      break;
    }
  }
  return positives / static_cast<double>(k);
}

enum class CurveSpace { roc, pr };

inline std::string to_string(CurveSpace s) { return s == CurveSpace::roc ? "ROC" : "PR"; }

struct CurvePoint {
  double x, y;
};

struct ThresholdCurve {
  CurveSpace space = CurveSpace::roc;
  std::vector<CurvePoint> points;
  double area = 0.0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

namespace detail {

inline void count_classes(std::span<const TieGroup> groups, std::uint64_t& p, std::uint64_t& n) {
  p = n = 0;
  for (const auto& g : groups) {
    p += g.positives;
    n += g.negatives;
  }
}

}  // namespace detail

/// AUROC by trapezoid over tie groups. The numerator is accumulated exactly in
/// integers: each group adds negatives * (2 * positives_above + positives).
inline double auroc(std::span<const TieGroup> groups) {
  std::uint64_t p = 0, n = 0;
  detail::count_classes(groups, p, n);
  if (p == 0 || n == 0) throw UndefinedMetricError("AUROC needs at least one positive and one negative");
  unsigned __int128 twice_area = 0;
  std::uint64_t tp = 0;
  for (const auto& g : groups) {
    twice_area += static_cast<unsigned __int128>(g.negatives) * (2 * tp + g.positives);
    tp += g.positives;
  }
  return static_cast<double>(static_cast<long double>(twice_area) /
                             (2.0L * static_cast<long double>(p) * static_cast<long double>(n)));
}

inline double auroc(const Ranking& rank) { return auroc(rank.groups()); }

/// ROC curve: one point per tie group, from (0,0) to (1,1). x is fallout, y
/// is sensitivity.
inline ThresholdCurve roc_curve(std::span<const TieGroup> groups) {
  ThresholdCurve c;
  c.space = CurveSpace::roc;
  detail::count_classes(groups, c.positives, c.negatives);
  c.area = auroc(groups);
  const double p = static_cast<double>(c.positives), n = static_cast<double>(c.negatives);
  c.points.reserve(groups.size() + 1);
  c.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.positives;
    fp += g.negatives;
    c.points.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  }
  return c;
}

inline ThresholdCurve roc_curve(const Ranking& rank) { return roc_curve(rank.groups()); }

/// Precision-recall curve with nonlinear interpolation between achievable
/// points: across a tie group, each additional true positive brings a
/// proportional share of the group's false positives. There is one point per
/// true-positive increment, plus a point at unchanged recall for every group
/// holding negatives only. Recall 0 is anchored at the precision of the first
/// point with a true positive. Area is the trapezoid sum over the points.
inline ThresholdCurve pr_curve(std::span<const TieGroup> groups) {
  ThresholdCurve c;
  c.space = CurveSpace::pr;
  detail::count_classes(groups, c.positives, c.negatives);
  if (c.positives == 0) throw UndefinedMetricError("PR curve needs at least one positive");
  const double p = static_cast<double>(c.positives);
  c.points.reserve(c.positives + groups.size() + 1);
  c.points.push_back({0.0, 0.0});  // precision fixed below
  double tp0 = 0.0, fp0 = 0.0;
  for (const auto& g : groups) {
    const double dtp = static_cast<double>(g.positives);
    const double dfp = static_cast<double>(g.negatives);
    if (g.positives == 0) {
      if (tp0 > 0.0) c.points.push_back({tp0 / p, tp0 / (tp0 + fp0 + dfp)});
    } else {
      const double slope = dfp / dtp;
      for (std::uint64_t x = 1; x <= g.positives; ++x) {
        const double tp = tp0 + static_cast<double>(x);
        const double fp = fp0 + slope * static_cast<double>(x);
        c.points.push_back({tp / p, tp / (tp + fp)});
      }
    }
    tp0 += dtp;
    fp0 += dfp;
  }
  c.points.front().y = c.points[1].y;
  CompensatedSum area;
  for (std::size_t i = 1; i < c.points.size(); ++i)
    area.add((c.points[i].x - c.points[i - 1].x) * (c.points[i].y + c.points[i - 1].y) * 0.5);
  c.area = area.value();
  return c;
}

inline ThresholdCurve pr_curve(const Ranking& rank) { return pr_curve(rank.groups()); }

inline double aupr(std::span<const TieGroup> groups) { return pr_curve(groups).area; }
inline double aupr(const Ranking& rank) { return aupr(rank.groups()); }

/// Average precision: precision at each tie-group end weighted by the recall
/// gained there.
inline double average_precision(std::span<const TieGroup> groups) {
  std::uint64_t p = 0, n = 0;
  detail::count_classes(groups, p, n);
  if (p == 0) throw UndefinedMetricError("average precision needs at least one positive");
  CompensatedSum sum;
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.positives;
    fp += g.negatives;
    if (g.positives > 0)
      sum.add(static_cast<double>(g.positives) * static_cast<double>(tp) /
              static_cast<double>(tp + fp));
  }
  return sum.value() / static_cast<double>(p);
}

inline double average_precision(const Ranking& rank) { return average_precision(rank.groups()); }

/// Equal-width histogram over [min, max]; the max value lands in the last bin.
struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::uint64_t> counts;

  double bin_width() const noexcept {
    return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size());
  }
};

/// Empirical CDF: F(x) = #{values <= x} / n.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> values) : sorted_(std::move(values)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  std::span<const double> sorted() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct ScoreDistribution {
  Histogram histogram;
  Ecdf ecdf;
};

inline ScoreDistribution score_distribution(std::span<const double> scores, std::size_t bins = 100) {
  if (scores.empty()) throw ConfigError("scores", "score distribution of empty input");
  if (bins == 0) throw ConfigError("bins", "bin count must be positive");
  for (double s : scores)
    if (!std::isfinite(s)) throw DataError("scores must be finite");
  auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  Histogram h{*lo_it, *hi_it, {}};
  if (h.lo == h.hi) {
    h.counts.assign(1, scores.size());
  } else {
    h.counts.assign(bins, 0);
    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    for (double s : scores) {
      auto b = static_cast<std::size_t>((s - h.lo) / width);
      ++h.counts[std::min(b, bins - 1)];
    }
  }
  return {std::move(h), Ecdf(std::vector<double>(scores.begin(), scores.end()))};
}

}  // namespace lpeval
