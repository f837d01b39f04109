#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lpeval/error.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/rng.hpp"

namespace lpeval {

/// Parameters of the bundled growth model.
///
/// All nodes but `late_nodes` exist at time 0, joined by a preferential
/// attachment tree. Each later time step adds `edges_per_step` pair events.
/// An event picks its source with probability proportional to degree + 1 and
/// closes a random walk whose length L >= 2 has P(L) proportional to
/// `locality_decay`^(L - 2); with probability `long_range` it instead links
/// to a degree-proportional node anywhere. Late nodes arrive at uniformly
/// random steps with one degree-proportional edge.
struct SyntheticParams {
  std::size_t nodes = 30;
  std::size_t late_nodes = 0;
  std::size_t steps = 10;            // timestamps 0 .. steps - 1
  double mean_degree = 4.0;          // sparsity k at the final step
  double locality_decay = 0.5;
  double long_range = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    if (nodes < 3) throw ConfigError("synthetic.nodes", "need at least 3 nodes");
    if (late_nodes >= nodes) throw ConfigError("synthetic.late_nodes", "must be < nodes");
    if (steps < 2) throw ConfigError("synthetic.steps", "need at least 2 steps");
    if (!(locality_decay > 0.0 && locality_decay < 1.0))
      throw ConfigError("synthetic.locality_decay", "must be in (0, 1)");
    if (!(long_range >= 0.0 && long_range <= 1.0))
      throw ConfigError("synthetic.long_range", "must be in [0, 1]");
    if (!(mean_degree >= 2.0)) throw ConfigError("synthetic.mean_degree", "must be >= 2");
  }
};

namespace detail {

class GrowingGraph {
 public:
  explicit GrowingGraph(std::size_t n) : adj_(n) {}

  bool has_edge(NodeId u, NodeId v) const {
    const auto& a = adj_[u];
    return std::find(a.begin(), a.end(), v) != a.end();
  }
  void add_edge(NodeId u, NodeId v) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
    endpoints_.push_back(u);
    endpoints_.push_back(v);
  }
  const std::vector<NodeId>& neighbors(NodeId u) const { return adj_[u]; }

  // Degree + 1 proportional choice among active nodes.
  NodeId preferential(const std::vector<NodeId>& active, Rng& rng) const {
    const auto total = endpoints_.size() + active.size();
    const auto r = rng.below(total);
    return r < endpoints_.size() ? endpoints_[r] : active[r - endpoints_.size()];
  }

 private:
  std::vector<std::vector<NodeId>> adj_;
  std::vector<NodeId> endpoints_;
};

}  // namespace detail

/// Generates a pair-event log. Node names are "n0", "n1", ... and late nodes
/// take the highest indices.
inline EventLog generate_locality_network(const SyntheticParams& params) {
  params.validate();
  Rng rng(params.seed);
  const std::size_t n = params.nodes;
  const std::size_t initial = n - params.late_nodes;
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = "n" + std::to_string(i);
  detail::GrowingGraph g(n);
  std::vector<NodeId> active;
  struct Event {
    Timestamp t;
    NodeId u, v;
  };
  std::vector<Event> events;
  active.push_back(0);
  for (NodeId i = 1; i < initial; ++i) {
    const NodeId target = g.preferential(active, rng);
    g.add_edge(i, target);
    events.push_back({0, i, target});
    active.push_back(i);
  }
  std::vector<Timestamp> arrival(params.late_nodes);
  for (auto& a : arrival) a = 1 + static_cast<Timestamp>(rng.below(params.steps - 1));
  const double target_edges = params.mean_degree * static_cast<double>(n) / 2.0;
  const double growth = std::max(0.0, target_edges - static_cast<double>(events.size()) -
                                          static_cast<double>(params.late_nodes));
  const auto per_step = static_cast<std::size_t>(
      std::ceil(growth / static_cast<double>(params.steps - 1)));
  for (Timestamp t = 1; t < static_cast<Timestamp>(params.steps); ++t) {
    for (std::size_t k = 0; k < params.late_nodes; ++k) {
      if (arrival[k] != t) continue;
      const auto x = static_cast<NodeId>(initial + k);
      const NodeId target = g.preferential(active, rng);
      g.add_edge(x, target);
      events.push_back({t, x, target});
      active.push_back(x);
    }
    for (std::size_t e = 0; e < per_step; ++e) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        const NodeId u = g.preferential(active, rng);
        NodeId v = u;
        if (rng.bernoulli(params.long_range)) {
          v = g.preferential(active, rng);
        } else {
          std::size_t length = 2;
          while (rng.bernoulli(params.locality_decay)) ++length;
          for (std::size_t s = 0; s < length; ++s) {
            const auto& nb = g.neighbors(v);
            if (nb.empty()) break;
            v = nb[rng.below(nb.size())];
          }
        }
        if (v == u || g.has_edge(u, v)) continue;
        g.add_edge(u, v);
        events.push_back({t, u, v});
        break;
      }
    }
  }
  EventLog log;
  // Name every node first so ids follow indices.
  for (const auto& name : names) log.intern(name);
  for (const auto& e : events) {
    const std::string_view ids[2] = {names[e.u], names[e.v]};
    log.add(e.t, std::span<const std::string_view>(ids, 2));
  }
  log.finalize();
  return log;
}

/// Labeled instances with Gaussian scores: positives ~ N(shift, 1), negatives
/// ~ N(0, 1). Distances are left unknown.
inline std::vector<Instance> gaussian_scored_instances(std::size_t positives, std::size_t negatives,
                                                       double shift, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> out;
  out.reserve(positives + negatives);
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    Instance inst;
    inst.u = static_cast<NodeId>(2 * i);
    inst.v = static_cast<NodeId>(2 * i + 1);
    inst.label = i < positives ? Label::positive : Label::negative;
    inst.score = rng.normal() + (i < positives ? shift : 0.0);
    out.push_back(inst);
  }
  return out;
}

}  // namespace lpeval
