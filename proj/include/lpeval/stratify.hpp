#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/parallel.hpp"

namespace lpeval {

enum class GenerationMode {
  from_training,  // recommendation: candidates among feature-snapshot nodes
  from_testing,   // query: also pairs touching nodes first seen in the label period
};

inline std::string to_string(GenerationMode m) {
  return m == GenerationMode::from_training ? "recommendation" : "query";
}

inline GenerationMode parse_generation_mode(std::string_view s) {
  if (s == "recommendation" || s == "from-training") return GenerationMode::from_training;
  if (s == "query" || s == "from-testing") return GenerationMode::from_testing;
  throw ConfigError("mode", "expected recommendation or query, got '" + std::string(s) + "'");
}

struct EnumerationOptions {
  std::uint32_t max_hops = 2;         // L_max, >= 2
  bool include_beyond = false;        // same component, farther than max_hops
  bool include_disconnected = false;  // different components
  unsigned threads = 1;
};

/// Reusable breadth-first search over a snapshot.
class BfsWorkspace {
 public:
  static constexpr std::uint32_t kUnreached = ~0u;

  explicit BfsWorkspace(const Snapshot& s) : snapshot_(&s), dist_(s.universe_size(), kUnreached) {}

  /// Distances from source up to `limit` hops (kUnreached for no limit).
  void run(NodeId source, std::uint32_t limit = kUnreached) {
    for (NodeId n : order_) dist_[n] = kUnreached;
    order_.clear();
    if (!snapshot_->contains(source)) return;
    dist_[source] = 0;
    order_.push_back(source);
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const NodeId x = order_[head];
      if (dist_[x] >= limit) continue;
      for (NodeId y : snapshot_->neighbors(x)) {
        if (dist_[y] != kUnreached) continue;
        dist_[y] = dist_[x] + 1;
        order_.push_back(y);
      }
    }
  }

  std::uint32_t distance(NodeId n) const noexcept {
    return n < dist_.size() ? dist_[n] : kUnreached;
  }

  /// Nodes reached by the last run in BFS order.
  std::span<const NodeId> reached() const noexcept { return order_; }

 private:
  const Snapshot* snapshot_;
  std::vector<std::uint32_t> dist_;
  std::vector<NodeId> order_;
};

inline bool stratum_order(const Instance& a, const Instance& b) {
  return std::tie(a.distance, a.u, a.v) < std::tie(b.distance, b.u, b.v);
}

/// Connected-component id per node id; kNoNode for nodes absent from `s`.
inline std::vector<NodeId> connected_components(const Snapshot& s) {
  std::vector<NodeId> comp(s.universe_size(), kNoNode);
  std::vector<NodeId> stack;
  NodeId next = 0;
  for (NodeId root : s.nodes()) {
    if (comp[root] != kNoNode) continue;
    comp[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      for (NodeId y : s.neighbors(x))
        if (comp[y] == kNoNode) {
          comp[y] = next;
          stack.push_back(y);
        }
    }
    ++next;
  }
  return comp;
}

/// Every non-adjacent pair (u < v) of snapshot nodes whose geodesic distance
/// is in [2, max_hops], plus the beyond/disconnected buckets on request.
/// Sorted by (distance, u, v); labels unknown, scores 0.
inline std::vector<Instance> geodesic_bucket_enumerate(const Snapshot& s,
                                                       const EnumerationOptions& options) {
  if (options.max_hops < 2) throw ConfigError("lmax", "must be >= 2");
  const auto nodes = s.nodes();
  const auto component =
      options.include_disconnected ? connected_components(s) : std::vector<NodeId>{};
  const auto limit = options.include_beyond ? BfsWorkspace::kUnreached : options.max_hops;
  std::vector<std::vector<Instance>> parts(nodes.size());
  parallel_blocks(nodes.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    BfsWorkspace bfs(s);
    for (std::size_t k = begin; k < end; ++k) {
      const NodeId u = nodes[k];
      auto& out = parts[k];
      bfs.run(u, limit);
      for (NodeId v : bfs.reached()) {
        const auto d = bfs.distance(v);
        if (v <= u || d < 2) continue;
        Instance inst;
        inst.u = u;
        inst.v = v;
        inst.distance = d <= options.max_hops ? Distance::hops(d) : Distance::beyond();
        out.push_back(inst);
      }
      if (!options.include_disconnected) continue;
      for (std::size_t m = k + 1; m < nodes.size(); ++m) {
        if (component[nodes[m]] == component[u]) continue;
        Instance inst;
        inst.u = u;
        inst.v = nodes[m];
        inst.distance = Distance::disconnected();
        out.push_back(inst);
      }
    }
  });
  std::vector<Instance> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts) {
    all.insert(all.end(), p.begin(), p.end());
    std::vector<Instance>().swap(p);
  }
  std::sort(all.begin(), all.end(), stratum_order);
  return all;
}

/// Positive iff the pair is an edge of the label snapshot.
inline std::vector<Instance> label_instances(std::span<const Instance> candidates,
                                             const Snapshot& label_snapshot, unsigned threads = 1) {
  std::vector<Instance> out(candidates.begin(), candidates.end());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i].label = label_snapshot.has_edge(out[i].u, out[i].v) ? Label::positive : Label::negative;
  });
  return out;
}

/// Candidate pairs for a feature/label snapshot pair, labeled.
///
/// Recommendation mode draws candidates from feature nodes only. Query mode
/// adds every pair between a node first seen in the label snapshot and any
/// other node of either snapshot; those pairs have no feature-network
/// distance and are placed in the disconnected bucket with
/// `involves_new_node` set.
inline std::vector<Instance> generate_test_set(const Snapshot& feature, const Snapshot& label,
                                               GenerationMode mode,
                                               const EnumerationOptions& options) {
  auto candidates = geodesic_bucket_enumerate(feature, options);
  if (mode == GenerationMode::from_testing) {
    std::vector<NodeId> universe;
    std::set_union(feature.nodes().begin(), feature.nodes().end(), label.nodes().begin(),
                   label.nodes().end(), std::back_inserter(universe));
    for (NodeId x : label.nodes()) {
      if (feature.contains(x)) continue;
      for (NodeId y : universe) {
        if (y == x) continue;
        // Pairs of two new nodes are emitted once, from the smaller id.
        if (!feature.contains(y) && y < x) continue;
        Instance inst;
        inst.u = std::min(x, y);
        inst.v = std::max(x, y);
        inst.distance = Distance::disconnected();
        inst.involves_new_node = true;
        candidates.push_back(inst);
      }
    }
    std::sort(candidates.begin(), candidates.end(), stratum_order);
  }
  return label_instances(candidates, label, options.threads);
}

/// Empirical distribution of prior geodesic distance over new links.
struct DistanceHistogram {
  std::map<Distance, std::size_t> counts;
  std::size_t total = 0;

  double probability(Distance d) const {
    auto it = counts.find(d);
    return it == counts.end() || total == 0 ? 0.0
                                            : static_cast<double>(it->second) / static_cast<double>(total);
  }
};

/// Distances, in the feature network, of label edges that are new (absent
/// from the feature network) and join two feature nodes.
inline DistanceHistogram new_link_distance_distribution(const Snapshot& feature,
                                                        const Snapshot& label) {
  std::vector<std::pair<NodeId, NodeId>> fresh;
  label.for_each_edge([&](NodeId u, NodeId v, double) {
    if (feature.contains(u) && feature.contains(v) && !feature.has_edge(u, v))
      fresh.emplace_back(u, v);
  });
  DistanceHistogram h;
  BfsWorkspace bfs(feature);
  NodeId current = kNoNode;
  for (auto [u, v] : fresh) {
    if (u != current) {
      bfs.run(u);
      current = u;
    }
    const auto d = bfs.distance(v);
    ++h.counts[d == BfsWorkspace::kUnreached ? Distance::disconnected() : Distance::hops(d)];
    ++h.total;
  }
  return h;
}

}  // namespace lpeval
