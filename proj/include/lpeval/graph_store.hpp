#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/text.hpp"

namespace lpeval {

using NodeId = std::uint32_t;
using Timestamp = std::int64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Closed time interval [begin, end].
struct Interval {
  Timestamp begin = 0;
  Timestamp end = -1;

  bool empty() const noexcept { return end < begin; }
  bool contains(Timestamp t) const noexcept { return begin <= t && t <= end; }
  Timestamp length() const noexcept { return empty() ? 0 : end - begin + 1; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Maps external string ids to dense 0-based integers in first-seen order.
class NodeTable {
 public:
  NodeId intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    const auto id = static_cast<NodeId>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<NodeId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(NodeId id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
};

struct InteractionEvent {
  Timestamp timestamp = 0;
  std::vector<NodeId> participants;  // sorted, distinct, size >= 2
  std::optional<double> weight_override;
};

enum class EventFormat { pair, clique };

/// How a k-participant event is spread over its k(k-1)/2 pairs.
enum class WeightRule { inverse_k_minus_1, inverse_k, unit };

inline double pair_weight(WeightRule rule, std::size_t k) {
  switch (rule) {
    case WeightRule::inverse_k_minus_1: return 1.0 / static_cast<double>(k - 1);
    case WeightRule::inverse_k: return 1.0 / static_cast<double>(k);
    case WeightRule::unit: return 1.0;
  }
  return 1.0;
}

/// Time-ordered interaction events plus the interned node universe.
class EventLog {
 public:
  EventLog() : nodes_(std::make_shared<NodeTable>()) {}

  const std::vector<InteractionEvent>& events() const noexcept { return events_; }
  std::size_t node_count() const noexcept { return nodes_->size(); }
  const NodeTable& nodes() const noexcept { return *nodes_; }
  std::shared_ptr<const NodeTable> node_table() const noexcept { return nodes_; }

  /// True when the input was not sorted by timestamp and had to be reordered.
  bool reordered() const noexcept { return reordered_; }

  /// Smallest interval covering every event; empty for an empty log.
  Interval span() const noexcept {
    if (events_.empty()) return {};
    return {events_.front().timestamp, events_.back().timestamp};
  }

  /// Events with timestamps inside `interval`, as a contiguous range.
  std::span<const InteractionEvent> events_in(Interval interval) const {
    if (interval.empty()) return {};
    auto by_time = [](const InteractionEvent& e, Timestamp t) { return e.timestamp < t; };
    auto first = std::lower_bound(events_.begin(), events_.end(), interval.begin, by_time);
    auto last = std::upper_bound(
        first, events_.end(), interval.end,
        [](Timestamp t, const InteractionEvent& e) { return t < e.timestamp; });
    return {first, last};
  }

  /// Registers a node id without an event.
  NodeId intern(std::string_view name) { return nodes_->intern(name); }

  /// Appends an event given by external ids. Validates the event invariants.
  void add(Timestamp t, std::span<const std::string_view> ids,
           std::optional<double> weight = std::nullopt, std::size_t line = 0) {
    if (ids.size() < 2) throw DataError("event needs at least two participants", line);
    if (weight && !(std::isfinite(*weight) && *weight > 0.0))
      throw DataError("weight must be positive and finite", line);
    InteractionEvent e{t, {}, weight};
    e.participants.reserve(ids.size());
    for (auto id : ids) {
      if (id.empty()) throw DataError("empty node id", line);
      e.participants.push_back(nodes_->intern(id));
    }
    std::sort(e.participants.begin(), e.participants.end());
    if (std::adjacent_find(e.participants.begin(), e.participants.end()) !=
        e.participants.end())
      throw DataError("duplicate participant in event", line);
    if (!events_.empty() && t < events_.back().timestamp) reordered_ = true;
    events_.push_back(std::move(e));
  }

  void add(Timestamp t, std::initializer_list<std::string_view> ids,
           std::optional<double> weight = std::nullopt) {
    add(t, std::span<const std::string_view>(ids.begin(), ids.size()), weight);
  }

  /// Restores timestamp order. Stable, so equal timestamps keep input order.
  void finalize() {
    if (reordered_)
      std::stable_sort(events_.begin(), events_.end(),
                       [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  }

 private:
  std::vector<InteractionEvent> events_;
  std::shared_ptr<NodeTable> nodes_;
  bool reordered_ = false;
};

/// Parses an event stream. Malformed lines raise DataError with the line number.
inline EventLog ingest_events(std::istream& in, EventFormat format) {
  EventLog log;
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string_view> ids;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    std::optional<double> weight;
    auto parse_weight = [&](std::string_view f) {
      auto w = text::parse_double(f);
      if (!w) throw DataError("bad weight '" + std::string(f) + "'", line_no);
      weight = *w;
    };
    Timestamp t = 0;
    ids.clear();
    if (format == EventFormat::pair) {
      if (fields.size() != 3 && fields.size() != 4)
        throw DataError("expected src<TAB>dst<TAB>timestamp[<TAB>weight]", line_no);
      auto ts = text::parse_int(fields[2]);
      if (!ts) throw DataError("bad timestamp '" + std::string(fields[2]) + "'", line_no);
      t = *ts;
      ids = {fields[0], fields[1]};
      if (fields.size() == 4) parse_weight(fields[3]);
    } else {
      if (fields.size() != 2 && fields.size() != 3)
        throw DataError("expected timestamp<TAB>id1|id2|...[<TAB>weight]", line_no);
      auto ts = text::parse_int(fields[0]);
      if (!ts) throw DataError("bad timestamp '" + std::string(fields[0]) + "'", line_no);
      t = *ts;
      ids = text::split(fields[1], '|');
      if (fields.size() == 3) parse_weight(fields[2]);
    }
    log.add(t, ids, weight, line_no);
  }
  log.finalize();
  return log;
}

inline EventLog ingest_events(std::string_view data, EventFormat format) {
  std::istringstream in{std::string(data)};
  return ingest_events(in, format);
}

/// Immutable weighted undirected graph in CSR layout over a dense id space.
///
/// The id space (`universe_size`) is shared with the EventLog it came from, so
/// snapshots of different intervals index the same node ids. Nodes that took
/// part in no event of the interval are absent: degree 0, no neighbors.
class Snapshot {
 public:
  struct Edge {
    NodeId u, v;
    double weight;
  };

  Snapshot() = default;

  /// Builds from weighted pair contributions. Contributions for the same
  /// unordered pair are summed in input order; self loops are rejected.
  static Snapshot from_contributions(std::size_t universe, Interval interval,
                                     std::vector<Edge> contributions,
                                     std::span<const NodeId> extra_nodes = {},
                                     std::shared_ptr<const NodeTable> names = nullptr) {
    Snapshot s;
    s.interval_ = interval;
    s.names_ = std::move(names);
    s.present_.assign(universe, 0);
    for (auto& e : contributions) {
      if (e.u == e.v) throw DataError("self loop on node " + std::to_string(e.u));
      if (e.u >= universe || e.v >= universe) throw DataError("node id outside universe");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw DataError("edge weight must be positive");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::stable_sort(contributions.begin(), contributions.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    std::vector<Edge> merged;
    for (const auto& e : contributions) {
      if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v)
        merged.back().weight += e.weight;
      else
        merged.push_back(e);
    }
    for (auto n : extra_nodes) {
      if (n >= universe) throw DataError("node id outside universe");
      s.present_[n] = 1;
    }
    s.offsets_.assign(universe + 1, 0);
    for (const auto& e : merged) {
      ++s.offsets_[e.u + 1];
      ++s.offsets_[e.v + 1];
      s.present_[e.u] = s.present_[e.v] = 1;
    }
    for (std::size_t i = 0; i < universe; ++i) s.offsets_[i + 1] += s.offsets_[i];
    s.adjacency_.resize(s.offsets_[universe]);
    s.weights_.resize(s.offsets_[universe]);
    std::vector<std::size_t> cursor(s.offsets_.begin(), s.offsets_.end() - 1);
    // merged is sorted by (u, v): row n receives every x < n ascending before any y > n,
    // so rows come out sorted.
    for (const auto& e : merged) {
      s.adjacency_[cursor[e.u]] = e.v;
      s.weights_[cursor[e.u]++] = e.weight;
      s.adjacency_[cursor[e.v]] = e.u;
      s.weights_[cursor[e.v]++] = e.weight;
    }
    for (std::size_t n = 0; n < universe; ++n)
      if (s.present_[n]) s.nodes_.push_back(static_cast<NodeId>(n));
    s.edge_count_ = merged.size();
    return s;
  }

  Interval interval() const noexcept { return interval_; }
  std::size_t universe_size() const noexcept { return present_.size(); }
  std::span<const NodeId> nodes() const noexcept { return nodes_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const NodeTable* node_table() const noexcept { return names_.get(); }
  std::shared_ptr<const NodeTable> shared_node_table() const noexcept { return names_; }

  bool contains(NodeId u) const noexcept { return u < present_.size() && present_[u]; }

  std::size_t degree(NodeId u) const noexcept {
    if (u >= present_.size()) return 0;
    return offsets_[u + 1] - offsets_[u];
  }

  /// Sorted neighbor ids; empty for unknown nodes.
  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    if (u >= present_.size()) return {};
    return {adjacency_.data() + offsets_[u], degree(u)};
  }

  /// Edge weights aligned with neighbors(u).
  std::span<const double> weights(NodeId u) const noexcept {
    if (u >= present_.size()) return {};
    return {weights_.data() + offsets_[u], degree(u)};
  }

  std::optional<double> weight(NodeId u, NodeId v) const noexcept {
    auto row = neighbors(u);
    auto it = std::lower_bound(row.begin(), row.end(), v);
    if (it == row.end() || *it != v) return std::nullopt;
    return weights(u)[static_cast<std::size_t>(it - row.begin())];
  }

  bool has_edge(NodeId u, NodeId v) const noexcept { return weight(u, v).has_value(); }

  double total_weight() const noexcept {
    double sum = 0.0;
    for (double w : weights_) sum += w;
    return sum / 2.0;
  }

  /// 2|E| / (|V|(|V|-1)); 0 for fewer than two nodes.
  double density() const noexcept {
    const double n = static_cast<double>(nodes_.size());
    if (n < 2) return 0.0;
    return 2.0 * static_cast<double>(edge_count_) / (n * (n - 1.0));
  }

  /// Visits every edge once with u < v, in lexicographic (u, v) order.
  template <typename Fn>
  void for_each_edge(Fn&& fn) const {
    for (NodeId u : nodes_) {
      auto row = neighbors(u);
      auto w = weights(u);
      for (std::size_t i = 0; i < row.size(); ++i)
        if (u < row[i]) fn(u, row[i], w[i]);
    }
  }

  std::string node_name(NodeId u) const {
    if (names_ && u < names_->size()) return names_->name(u);
    return std::to_string(u);
  }

 private:
  Interval interval_{};
  std::shared_ptr<const NodeTable> names_;
  std::vector<char> present_;
  std::vector<NodeId> nodes_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<double> weights_;
  std::size_t edge_count_ = 0;
};

/// Aggregates every event inside `interval` into a Snapshot. Each unordered
/// participant pair of a k-participant event receives pair_weight(rule, k)
/// unless the event carries an explicit weight.
inline Snapshot build_snapshot(const EventLog& log, Interval interval,
                               WeightRule rule = WeightRule::inverse_k_minus_1) {
  if (interval.empty()) throw ConfigError("interval", "interval is empty");
  std::vector<Snapshot::Edge> contributions;
  for (const auto& e : log.events_in(interval)) {
    const auto& p = e.participants;
    const double w = e.weight_override.value_or(pair_weight(rule, p.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) contributions.push_back({p[i], p[j], w});
  }
  return Snapshot::from_contributions(log.node_count(), interval, std::move(contributions), {},
                                      log.node_table());
}

inline std::size_t degree(const Snapshot& s, NodeId u) { return s.degree(u); }
inline std::span<const NodeId> neighbors(const Snapshot& s, NodeId u) { return s.neighbors(u); }

/// Writes `u,v,weight` rows (header first), u < v in interned order, sorted.
inline void write_snapshot_csv(std::ostream& out, const Snapshot& s) {
  out << "u,v,weight\n";
  s.for_each_edge([&](NodeId u, NodeId v, double w) {
    out << s.node_name(u) << ',' << s.node_name(v) << ',' << text::format_double(w) << '\n';
  });
}

/// The four intervals of a temporal train/test protocol.
struct WindowConfig {
  Interval train_feature;
  Interval train_label;
  Interval test_feature;
  Interval test_label;

  /// Throws ConfigError naming the offending field.
  void validate() const {
    auto nonempty = [](const Interval& i, const char* name) {
      if (i.empty()) throw ConfigError(std::string("window.") + name, "interval is empty");
    };
    nonempty(train_feature, "train_feature");
    nonempty(train_label, "train_label");
    nonempty(test_feature, "test_feature");
    nonempty(test_label, "test_label");
    if (train_label.begin <= train_feature.end)
      throw ConfigError("window.train_label", "must begin after train_feature ends");
    if (test_label.begin <= test_feature.end)
      throw ConfigError("window.test_label", "must begin after test_feature ends");
    if (test_label.begin <= train_feature.end || test_label.begin <= train_label.end)
      throw ConfigError("window.test_label", "must begin after every training interval ends");
  }
};

}  // namespace lpeval
