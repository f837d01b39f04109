#pragma once

// Brute-force reference implementations. Each works from raw inputs by
// exhaustive enumeration and shares no code with the library.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct Scored {
  double score;
  bool positive;
};

/// Probability that a random positive outscores a random negative, ties 1/2.
inline double pair_count_auroc(const std::vector<Scored>& items) {
  std::uint64_t wins2 = 0, pos = 0, neg = 0;
  for (const auto& a : items) {
    if (!a.positive) continue;
    ++pos;
    for (const auto& b : items) {
      if (b.positive) continue;
      if (a.score > b.score) wins2 += 2;
      else if (a.score == b.score) wins2 += 1;
    }
  }
  for (const auto& b : items) neg += !b.positive;
  return static_cast<double>(static_cast<long double>(wins2) / (2.0L * pos * neg));
}

/// Confusion counts when everything scoring >= threshold is called positive.
inline std::pair<std::uint64_t, std::uint64_t> counts_at(const std::vector<Scored>& items,
                                                         double threshold) {
  std::uint64_t tp = 0, fp = 0;
  for (const auto& i : items)
    if (i.score >= threshold) (i.positive ? tp : fp) += 1;
  return {tp, fp};
}

/// PR area from every distinct threshold, interpolating between consecutive
/// achievable points one true positive at a time, with false positives
/// growing linearly in true positives.
inline double interpolated_aupr(const std::vector<Scored>& items) {
  std::set<double, std::greater<>> thresholds;
  std::uint64_t total_pos = 0;
  for (const auto& i : items) {
    thresholds.insert(i.score);
    total_pos += i.positive;
  }
  std::vector<std::pair<double, double>> curve;  // (recall, precision)
  std::uint64_t tp_a = 0, fp_a = 0;
  for (double t : thresholds) {
    auto [tp_b, fp_b] = counts_at(items, t);
    if (tp_b == tp_a) {
      if (tp_b > 0) curve.push_back({double(tp_b) / total_pos, double(tp_b) / double(tp_b + fp_b)});
    } else {
      const double skew = double(fp_b - fp_a) / double(tp_b - tp_a);
      for (std::uint64_t x = 1; x <= tp_b - tp_a; ++x) {
        const double tp = double(tp_a + x), fp = double(fp_a) + skew * double(x);
        curve.push_back({tp / total_pos, tp / (tp + fp)});
      }
    }
    tp_a = tp_b;
    fp_a = fp_b;
  }
  double area = 0.0;
  double prev_r = 0.0, prev_p = curve.front().second;
  for (auto [r, p] : curve) {
    area += (r - prev_r) * (p + prev_p) / 2.0;
    prev_r = r;
    prev_p = p;
  }
  return area;
}

/// Adjacency-matrix graph for small exhaustive checks.
struct DenseGraph {
  int n = 0;
  std::vector<std::vector<double>> w;  // 0 means no edge

  explicit DenseGraph(int nodes) : n(nodes), w(nodes, std::vector<double>(nodes, 0.0)) {}
  void add(int u, int v, double weight) {
    w[u][v] += weight;
    w[v][u] += weight;
  }
};

inline constexpr int kInf = std::numeric_limits<int>::max() / 4;

/// Floyd-Warshall hop distances.
inline std::vector<std::vector<int>> all_pairs_hops(const DenseGraph& g) {
  std::vector<std::vector<int>> d(g.n, std::vector<int>(g.n, kInf));
  for (int i = 0; i < g.n; ++i) {
    d[i][i] = 0;
    for (int j = 0; j < g.n; ++j)
      if (g.w[i][j] > 0) d[i][j] = 1;
  }
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

/// Sum over outward paths from s to t of at most `hops` edges of the product
/// of transition shares. A path is outward when its i-th node lies at hop
/// distance i from s; a node splits its flow over its outward neighbors in
/// proportion to edge weight.
inline double outward_path_flow(const DenseGraph& g, int s, int t, int hops) {
  const auto d = all_pairs_hops(g);
  auto share = [&](int from, int to) {
    double total = 0.0;
    for (int x = 0; x < g.n; ++x)
      if (g.w[from][x] > 0 && d[s][x] == d[s][from] + 1) total += g.w[from][x];
    return g.w[from][to] / total;
  };
  double sum = 0.0;
  std::vector<int> path{s};
  auto dfs = [&](auto&& self, double product) -> void {
    const int at = path.back();
    if (at == t && path.size() > 1) {
      sum += product;
      return;
    }
    if (static_cast<int>(path.size()) - 1 == hops) return;
    for (int x = 0; x < g.n; ++x) {
      if (g.w[at][x] <= 0 || d[s][x] != static_cast<int>(path.size())) continue;
      path.push_back(x);
      self(self, product * share(at, x));
      path.pop_back();
    }
  };
  if (s != t) dfs(dfs, 1.0);
  return sum;
}

/// Draws `drawn` of `n` items without replacement and counts how many of the
/// first `c` were taken. Selection sampling scans whichever of the two
/// sequences is shorter.
inline std::uint64_t hypergeometric_draw(std::uint64_t n, std::uint64_t c, std::uint64_t drawn,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uint64_t hits = 0;
  if (c <= drawn) {
    std::uint64_t still_to_draw = drawn;
    for (std::uint64_t k = 0; k < c; ++k)
      if (u(rng) * double(n - k) < double(still_to_draw)) {
        ++hits;
        --still_to_draw;
      }
  } else {
    std::uint64_t left_c = c;
    for (std::uint64_t k = 0; k < drawn; ++k)
      if (u(rng) * double(n - k) < double(left_c)) {
        ++hits;
        --left_c;
      }
  }
  return hits;
}

}  // namespace oracle
