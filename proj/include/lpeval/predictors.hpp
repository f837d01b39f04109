#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/parallel.hpp"
#include "lpeval/text.hpp"

namespace lpeval {

enum class PredictorKind { common_neighbors, adamic_adar, preferential_attachment, propflow };

struct PredictorId {
  PredictorKind kind = PredictorKind::preferential_attachment;
  unsigned max_hops = 0;  // propflow only, >= 1

  static PredictorId common_neighbors() { return {PredictorKind::common_neighbors, 0}; }
  static PredictorId adamic_adar() { return {PredictorKind::adamic_adar, 0}; }
  static PredictorId preferential_attachment() {
    return {PredictorKind::preferential_attachment, 0};
  }
  static PredictorId propflow(unsigned max_hops) {
    if (max_hops < 1) throw ConfigError("predictor", "propflow needs max hops >= 1");
    return {PredictorKind::propflow, max_hops};
  }

  /// P(u,v) may differ from P(v,u).
  bool directional() const noexcept { return kind == PredictorKind::propflow; }

  /// Short names: cn, aa, pa, propflow:<hops>.
  std::string name() const {
    switch (kind) {
      case PredictorKind::common_neighbors: return "cn";
      case PredictorKind::adamic_adar: return "aa";
      case PredictorKind::preferential_attachment: return "pa";
      case PredictorKind::propflow: return "propflow:" + std::to_string(max_hops);
    }
    return "";
  }

  static PredictorId parse(std::string_view s) {
    s = text::trim(s);
    if (s == "cn" || s == "common-neighbors") return common_neighbors();
    if (s == "aa" || s == "adamic-adar") return adamic_adar();
    if (s == "pa" || s == "preferential-attachment") return preferential_attachment();
    if (s.starts_with("propflow")) {
      auto rest = s.substr(8);
      if (rest.empty()) return propflow(5);
      if (rest.front() != ':') throw ConfigError("predictor", "unknown predictor '" + std::string(s) + "'");
      auto hops = text::parse_int(rest.substr(1));
      if (!hops || *hops < 1) throw ConfigError("predictor", "propflow needs max hops >= 1");
      return propflow(static_cast<unsigned>(*hops));
    }
    throw ConfigError("predictor", "unknown predictor '" + std::string(s) + "'");
  }

  friend bool operator==(const PredictorId&, const PredictorId&) = default;
};

enum class DirectionPolicy { list_both, mean, max, min };

inline std::string to_string(DirectionPolicy p) {
  switch (p) {
    case DirectionPolicy::list_both: return "list-both";
    case DirectionPolicy::mean: return "mean";
    case DirectionPolicy::max: return "max";
    case DirectionPolicy::min: return "min";
  }
  return "";
}

inline DirectionPolicy parse_direction_policy(std::string_view s) {
  if (s == "list-both") return DirectionPolicy::list_both;
  if (s == "mean") return DirectionPolicy::mean;
  if (s == "max") return DirectionPolicy::max;
  if (s == "min") return DirectionPolicy::min;
  throw ConfigError("policy", "unknown direction policy '" + std::string(s) + "'");
}

/// What to do when a pair references a node absent from the feature snapshot.
///
/// `strict` is the recommendation setting: such pairs are a caller error.
/// `query` answers anyway: preferential attachment assumes degree 1 for an
/// unknown node, neighborhood and path predictors return 0.
enum class UnknownNodePolicy { strict, query };

namespace detail {

inline void check_pair(NodeId u, NodeId v) {
  if (u == v) throw InvalidPairError("predictor called with u == v (" + std::to_string(u) + ")");
}

inline bool check_known(const Snapshot& s, NodeId u, NodeId v, UnknownNodePolicy policy) {
  const bool known = s.contains(u) && s.contains(v);
  if (!known && policy == UnknownNodePolicy::strict)
    throw InvalidPairError("node not present in feature snapshot");
  return known;
}

// Calls fn(n) for each common neighbor via sorted-list merge.
template <typename Fn>
void for_each_common_neighbor(const Snapshot& s, NodeId u, NodeId v, Fn&& fn) {
  auto a = s.neighbors(u);
  auto b = s.neighbors(v);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      fn(a[i]);
      ++i;
      ++j;
    }
  }
}

}  // namespace detail

/// |N(u) ∩ N(v)|
inline double common_neighbors(const Snapshot& s, NodeId u, NodeId v,
                               UnknownNodePolicy policy = UnknownNodePolicy::strict) {
  detail::check_pair(u, v);
  if (!detail::check_known(s, u, v, policy)) return 0.0;
  std::size_t count = 0;
  detail::for_each_common_neighbor(s, u, v, [&](NodeId) { ++count; });
  return static_cast<double>(count);
}

/// Sum over common neighbors n of 1 / ln|N(n)|.
inline double adamic_adar(const Snapshot& s, NodeId u, NodeId v,
                          UnknownNodePolicy policy = UnknownNodePolicy::strict) {
  detail::check_pair(u, v);
  if (!detail::check_known(s, u, v, policy)) return 0.0;
  double sum = 0.0;
  detail::for_each_common_neighbor(s, u, v, [&](NodeId n) {
    const auto d = s.degree(n);
    // A common neighbor is adjacent to both u and v.
    if (d < 2) throw DataError("corrupt adjacency: common neighbor with degree < 2");
    sum += 1.0 / std::log(static_cast<double>(d));
  });
  return sum;
}

/// |N(u)| * |N(v)|
inline double preferential_attachment(const Snapshot& s, NodeId u, NodeId v,
                                      UnknownNodePolicy policy = UnknownNodePolicy::strict) {
  detail::check_pair(u, v);
  detail::check_known(s, u, v, policy);
  auto deg = [&](NodeId n) {
    return s.contains(n) ? static_cast<double>(s.degree(n)) : 1.0;
  };
  return deg(u) * deg(v);
}

/// Where the unit of flow injected at the source ended up after a PropFlow run.
struct FlowLedger {
  double absorbed = 0.0;    // reached the target
  double remaining = 0.0;   // still on the frontier when the hop budget ran out
  double dead_ended = 0.0;  // stuck on nodes with no outward edge
};

/// Reusable PropFlow state for one snapshot.
///
/// Flow starts at the source with mass 1. Each node gets a level the first time
/// it is reached (its BFS depth). At each hop a frontier node splits its inflow
/// across neighbors one level further out, in proportion to edge weight; flow
/// never moves to the same or an inner level. Nodes with no outward neighbor
/// dead-end their flow. A target, when given, absorbs its inflow and does not
/// forward it.
class PropFlowEngine {
 public:
  explicit PropFlowEngine(const Snapshot& s)
      : snapshot_(&s), level_(s.universe_size(), kUnreached), flow_(s.universe_size(), 0.0) {}

  FlowLedger run(NodeId source, unsigned max_hops, NodeId target = kNoNode) {
    reset();
    FlowLedger ledger;
    if (!snapshot_->contains(source)) return ledger;
    touch(source, 0);
    flow_[source] = 1.0;
    std::vector<NodeId> frontier{source}, next;
    for (unsigned hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
      next.clear();
      for (NodeId i : frontier) {
        if (i == target) continue;
        const double inflow = flow_[i];
        auto nbrs = snapshot_->neighbors(i);
        auto w = snapshot_->weights(i);
        double outward = 0.0;
        for (std::size_t k = 0; k < nbrs.size(); ++k)
          if (level_[nbrs[k]] == kUnreached || level_[nbrs[k]] == hop) outward += w[k];
        if (outward == 0.0) {
          ledger.dead_ended += inflow;
          continue;
        }
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
          const NodeId j = nbrs[k];
          if (level_[j] == kUnreached) {
            touch(j, hop);
            next.push_back(j);
          }
          if (level_[j] == hop) flow_[j] += inflow * w[k] / outward;
        }
      }
      frontier.swap(next);
    }
    for (NodeId i : frontier)
      if (i != target) ledger.remaining += flow_[i];
    if (target < level_.size() && level_[target] != kUnreached) ledger.absorbed = flow_[target];
    return ledger;
  }

  /// Inflow received by `n` in the last run (0 if unreached).
  double flow(NodeId n) const noexcept { return n < flow_.size() ? flow_[n] : 0.0; }

  /// Nodes reached in the last run, in order of first reach.
  std::span<const NodeId> reached() const noexcept { return touched_; }

 private:
  static constexpr unsigned kUnreached = ~0u;

  void touch(NodeId n, unsigned level) {
    level_[n] = level;
    touched_.push_back(n);
  }

  void reset() {
    for (NodeId n : touched_) {
      level_[n] = kUnreached;
      flow_[n] = 0.0;
    }
    touched_.clear();
  }

  const Snapshot* snapshot_;
  std::vector<unsigned> level_;
  std::vector<double> flow_;
  std::vector<NodeId> touched_;
};

/// Flow from source absorbed at target within max_hops, in [0, 1].
inline double propflow(const Snapshot& s, NodeId source, NodeId target, unsigned max_hops,
                       UnknownNodePolicy policy = UnknownNodePolicy::strict,
                       FlowLedger* ledger = nullptr) {
  detail::check_pair(source, target);
  if (max_hops < 1) throw ConfigError("propflow.max_hops", "must be >= 1");
  if (!detail::check_known(s, source, target, policy)) {
    if (ledger) *ledger = {};
    return 0.0;
  }
  PropFlowEngine engine(s);
  auto result = engine.run(source, max_hops, target);
  if (ledger) *ledger = result;
  return result.absorbed;
}

/// One score for a symmetric evaluation, or two for list-both.
struct AggregatedScore {
  std::array<double, 2> values{};
  std::size_t count = 1;

  std::span<const double> scores() const noexcept { return {values.data(), count}; }
};

/// Collapses the scores of the two orderings of a pair.
inline AggregatedScore aggregate_directional(double forward, double reverse,
                                             DirectionPolicy policy) {
  switch (policy) {
    case DirectionPolicy::list_both: return {{forward, reverse}, 2};
    case DirectionPolicy::mean: return {{0.5 * (forward + reverse), 0.0}, 1};
    case DirectionPolicy::max: return {{std::max(forward, reverse), 0.0}, 1};
    case DirectionPolicy::min: return {{std::min(forward, reverse), 0.0}, 1};
  }
  return {{forward, 0.0}, 1};
}

/// Score for a single ordered pair.
inline double score_pair(const Snapshot& s, NodeId u, NodeId v, const PredictorId& predictor,
                         UnknownNodePolicy policy = UnknownNodePolicy::strict) {
  switch (predictor.kind) {
    case PredictorKind::common_neighbors: return common_neighbors(s, u, v, policy);
    case PredictorKind::adamic_adar: return adamic_adar(s, u, v, policy);
    case PredictorKind::preferential_attachment: return preferential_attachment(s, u, v, policy);
    case PredictorKind::propflow: return propflow(s, u, v, predictor.max_hops, policy);
  }
  return 0.0;
}

struct ScoringOptions {
  DirectionPolicy policy = DirectionPolicy::mean;
  UnknownNodePolicy unknown = UnknownNodePolicy::strict;
  unsigned threads = 1;
};

/// Scores every candidate. Output keeps candidate order; under list-both each
/// candidate expands to (u,v) then (v,u). Results do not depend on `threads`.
inline std::vector<Instance> score_candidates(const Snapshot& s, std::span<const Instance> pairs,
                                              const PredictorId& predictor,
                                              const ScoringOptions& options = {}) {
  const std::size_t n = pairs.size();
  std::vector<double> forward(n), reverse(n);
  for (const auto& p : pairs) {
    detail::check_pair(p.u, p.v);
    detail::check_known(s, p.u, p.v, options.unknown);
  }
  if (predictor.directional()) {
    // Group requests by source so each source propagates once.
    struct Request {
      NodeId source, target;
      std::size_t index;
      bool reversed;
    };
    std::vector<Request> requests;
    requests.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      requests.push_back({pairs[i].u, pairs[i].v, i, false});
      requests.push_back({pairs[i].v, pairs[i].u, i, true});
    }
    std::sort(requests.begin(), requests.end(), [](const Request& a, const Request& b) {
      return std::tie(a.source, a.index, a.reversed) < std::tie(b.source, b.index, b.reversed);
    });
    std::vector<std::size_t> group_starts;
    for (std::size_t r = 0; r < requests.size(); ++r)
      if (r == 0 || requests[r].source != requests[r - 1].source) group_starts.push_back(r);
    group_starts.push_back(requests.size());
    parallel_blocks(group_starts.size() - 1, options.threads, [&](std::size_t gb, std::size_t ge) {
      PropFlowEngine engine(s);
      for (std::size_t g = gb; g < ge; ++g) {
        const NodeId source = requests[group_starts[g]].source;
        const bool known = s.contains(source);
        if (known) engine.run(source, predictor.max_hops);
        for (std::size_t r = group_starts[g]; r < group_starts[g + 1]; ++r) {
          const auto& req = requests[r];
          const double value = known && s.contains(req.target) ? engine.flow(req.target) : 0.0;
          (req.reversed ? reverse : forward)[req.index] = value;
        }
      }
    });
  } else {
    parallel_for(n, options.threads, [&](std::size_t i) {
      forward[i] = score_pair(s, pairs[i].u, pairs[i].v, predictor, options.unknown);
      reverse[i] = forward[i];
    });
  }
  std::vector<Instance> out;
  out.reserve(options.policy == DirectionPolicy::list_both ? 2 * n : n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto agg = aggregate_directional(forward[i], reverse[i], options.policy);
    Instance inst = pairs[i];
    inst.score = agg.values[0];
    out.push_back(inst);
    if (agg.count == 2) {
      std::swap(inst.u, inst.v);
      inst.score = agg.values[1];
      out.push_back(inst);
    }
  }
  return out;
}

}  // namespace lpeval
