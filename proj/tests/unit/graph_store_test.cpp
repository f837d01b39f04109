#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "lpeval/graph_store.hpp"
#include "lpeval/synthetic.hpp"

using namespace lpeval;

namespace {

std::map<std::pair<NodeId, NodeId>, double> edge_map(const Snapshot& s) {
  std::map<std::pair<NodeId, NodeId>, double> out;
  s.for_each_edge([&](NodeId u, NodeId v, double w) { out[{u, v}] = w; });
  return out;
}

void expect_symmetric(const Snapshot& s) {
  for (NodeId u = 0; u < s.universe_size(); ++u)
    for (NodeId v = 0; v < s.universe_size(); ++v) {
      const auto a = s.weight(u, v), b = s.weight(v, u);
      ASSERT_EQ(a.has_value(), b.has_value());
      if (a) {
        EXPECT_EQ(*a, *b);
        EXPECT_GT(*a, 0.0);
        EXPECT_TRUE(s.contains(u) && s.contains(v));
      }
    }
  for (NodeId u = 0; u < s.universe_size(); ++u) EXPECT_FALSE(s.has_edge(u, u));
}

}  // namespace

TEST(Ingest, ThreePairEventsFourNodes) {
  const auto log = ingest_events("a\tb\t1\nc\td\t2\na\tc\t2\n", EventFormat::pair);
  EXPECT_EQ(log.events().size(), 3u);
  EXPECT_EQ(log.node_count(), 4u);
  EXPECT_FALSE(log.reordered());
  EXPECT_EQ(log.node_table()->name(0), "a");
  EXPECT_EQ(*log.node_table()->find("d"), 3u);
}

TEST(Ingest, EmptyInput) {
  const auto log = ingest_events("", EventFormat::pair);
  EXPECT_TRUE(log.events().empty());
  EXPECT_EQ(log.node_count(), 0u);
}

TEST(Ingest, CommentsAndBlankLinesSkipped) {
  const auto log = ingest_events("# header\n\na\tb\t1\n# more\n", EventFormat::pair);
  EXPECT_EQ(log.events().size(), 1u);
}

TEST(Ingest, UnsortedInputIsSortedAndFlagged) {
  const auto log = ingest_events("a\tb\t5\nb\tc\t1\nc\td\t3\n", EventFormat::pair);
  ASSERT_TRUE(log.reordered());
  std::vector<Timestamp> ts;
  for (const auto& e : log.events()) ts.push_back(e.timestamp);
  EXPECT_EQ(ts, (std::vector<Timestamp>{1, 3, 5}));
}

TEST(Ingest, CliqueFormat) {
  const auto log = ingest_events("1\ta|b|c\n2\tb|d\t3.5\n", EventFormat::clique);
  ASSERT_EQ(log.events().size(), 2u);
  EXPECT_EQ(log.events()[0].participants.size(), 3u);
  EXPECT_EQ(log.events()[1].weight_override, 3.5);
}

TEST(Ingest, MalformedLinesReportLineNumbers) {
  auto line_of = [](std::string_view text, EventFormat f) {
    try {
      ingest_events(text, f);
    } catch (const DataError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("a\tb\t1\na\tb\n", EventFormat::pair), 2u);
  EXPECT_EQ(line_of("a\tb\tx\n", EventFormat::pair), 1u);
  EXPECT_EQ(line_of("# c\na\ta\t1\n", EventFormat::pair), 2u);
  EXPECT_EQ(line_of("a\tb\t1\t0\n", EventFormat::pair), 1u);
  EXPECT_EQ(line_of("a\tb\t1\t-2\n", EventFormat::pair), 1u);
  EXPECT_EQ(line_of("1\ta\n", EventFormat::clique), 1u);
  EXPECT_EQ(line_of("1\ta|b|a\n", EventFormat::clique), 1u);
}

TEST(Snapshot, PairEventWeighsOne) {
  const auto log = ingest_events("u\tv\t1\n", EventFormat::pair);
  const auto s = build_snapshot(log, {0, 10});
  EXPECT_EQ(s.weight(0, 1), 1.0);
}

TEST(Snapshot, TriangleCliqueWeighsHalf) {
  const auto log = ingest_events("1\ta|b|c\n", EventFormat::clique);
  const auto s = build_snapshot(log, {1, 1});
  // Expand the clique by hand and sum 1/(k-1) per pair.
  std::map<std::pair<NodeId, NodeId>, double> expected;
  const std::vector<NodeId> members{0, 1, 2};
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      expected[{members[i], members[j]}] += 1.0 / (members.size() - 1);
  EXPECT_EQ(edge_map(s), expected);
}

TEST(Snapshot, WeightRules) {
  const auto log = ingest_events("1\ta|b|c|d\n", EventFormat::clique);
  EXPECT_DOUBLE_EQ(*build_snapshot(log, {1, 1}, WeightRule::inverse_k_minus_1).weight(0, 3), 1.0 / 3);
  EXPECT_DOUBLE_EQ(*build_snapshot(log, {1, 1}, WeightRule::inverse_k).weight(0, 3), 0.25);
  EXPECT_DOUBLE_EQ(*build_snapshot(log, {1, 1}, WeightRule::unit).weight(0, 3), 1.0);
}

TEST(Snapshot, RepeatedPairAdds) {
  const auto log = ingest_events("a\tb\t1\nb\ta\t2\n", EventFormat::pair);
  EXPECT_EQ(build_snapshot(log, {1, 2}).weight(0, 1), 2.0);
  EXPECT_EQ(build_snapshot(log, {1, 2}).edge_count(), 1u);
}

TEST(Snapshot, ClosedIntervalAndOutsideEventsIgnored) {
  const auto log = ingest_events("a\tb\t1\nb\tc\t2\nc\td\t3\n", EventFormat::pair);
  const auto s = build_snapshot(log, {2, 3});
  EXPECT_FALSE(s.has_edge(0, 1));
  EXPECT_TRUE(s.has_edge(1, 2));
  EXPECT_TRUE(s.has_edge(2, 3));
  EXPECT_FALSE(s.contains(0));
  EXPECT_EQ(s.node_count(), 3u);
}

TEST(Snapshot, EmptySelectionIsValidButEmptyIntervalIsNot) {
  const auto log = ingest_events("a\tb\t1\n", EventFormat::pair);
  const auto s = build_snapshot(log, {5, 9});
  EXPECT_EQ(s.node_count(), 0u);
  EXPECT_EQ(s.edge_count(), 0u);
  EXPECT_THROW(build_snapshot(log, {3, 2}), ConfigError);
}

TEST(Snapshot, ExplicitWeightOverridesRule) {
  const auto log = ingest_events("1\ta|b|c\t4\n", EventFormat::clique);
  EXPECT_EQ(build_snapshot(log, {1, 1}).weight(1, 2), 4.0);
}

TEST(Degree, TriangleStarAndUnknown) {
  const auto tri = build_snapshot(ingest_events("a\tb\t1\nb\tc\t1\na\tc\t1\n", EventFormat::pair), {1, 1});
  for (NodeId u = 0; u < 3; ++u) EXPECT_EQ(degree(tri, u), 2u);
  EXPECT_EQ(degree(tri, 99), 0u);
  EXPECT_TRUE(neighbors(tri, 99).empty());

  const auto star = build_snapshot(
      ingest_events("h\tl1\t1\nh\tl2\t1\nh\tl3\t1\nh\tl4\t1\nh\tl5\t1\nx\ty\t1\n", EventFormat::pair), {1, 1});
  const auto hub = neighbors(star, 0);
  EXPECT_EQ(std::vector<NodeId>(hub.begin(), hub.end()), (std::vector<NodeId>{1, 2, 3, 4, 5}));
}

TEST(Snapshot, DensityAndExport) {
  const auto log = ingest_events("b\ta\t1\nc\ta\t1\n", EventFormat::pair);
  const auto s = build_snapshot(log, {1, 1});
  EXPECT_DOUBLE_EQ(s.density(), 2.0 * 2 / (3 * 2));
  std::ostringstream out;
  write_snapshot_csv(out, s);
  EXPECT_EQ(out.str(), "u,v,weight\nb,a,1\na,c,1\n");
}

TEST(SnapshotProperty, SymmetryAdditivityCliqueMass) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::ostringstream text;
    double expected_mass = 0.0;
    const int events = 1 + static_cast<int>(gen() % 40);
    for (int e = 0; e < events; ++e) {
      const int k = 2 + static_cast<int>(gen() % 4);
      std::vector<int> ids;
      while (static_cast<int>(ids.size()) < k) {
        const int id = static_cast<int>(gen() % 12);
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
      }
      text << (gen() % 10) << '\t';
      for (int i = 0; i < k; ++i) text << (i ? "|" : "") << "n" << ids[i];
      text << '\n';
      expected_mass += k / 2.0;
    }
    const auto log = ingest_events(text.str(), EventFormat::clique);
    const auto whole = build_snapshot(log, {0, 9});
    expect_symmetric(whole);
    EXPECT_NEAR(whole.total_weight(), expected_mass, 1e-9);

    const Timestamp b = static_cast<Timestamp>(gen() % 9);
    auto sum = edge_map(build_snapshot(log, {0, b}));
    for (const auto& [key, w] : edge_map(build_snapshot(log, {b + 1, 9}))) sum[key] += w;
    const auto direct = edge_map(whole);
    ASSERT_EQ(sum.size(), direct.size());
    for (const auto& [key, w] : direct) EXPECT_NEAR(sum[key], w, 1e-12);
  }
}

TEST(SnapshotProperty, IdenticalBytesIdenticalExport) {
  SyntheticParams p;
  p.nodes = 60;
  p.steps = 8;
  std::ostringstream events;
  for (const auto& e : generate_locality_network(p).events())
    events << "n" << e.participants[0] << "\tn" << e.participants[1] << '\t' << e.timestamp << '\n';
  std::string first, second;
  for (auto* out : {&first, &second}) {
    const auto log = ingest_events(events.str(), EventFormat::pair);
    std::ostringstream csv;
    write_snapshot_csv(csv, build_snapshot(log, {0, 7}));
    *out = csv.str();
  }
  EXPECT_EQ(first, second);
}

TEST(Window, ValidationNamesTheField) {
  WindowConfig w{{0, 4}, {5, 6}, {2, 6}, {7, 8}};
  EXPECT_NO_THROW(w.validate());
  auto field_of = [](WindowConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  EXPECT_EQ(field_of({{0, 4}, {4, 6}, {2, 6}, {7, 8}}), "window.train_label");
  EXPECT_EQ(field_of({{0, 4}, {5, 6}, {2, 7}, {7, 8}}), "window.test_label");
  EXPECT_EQ(field_of({{0, 4}, {5, 9}, {2, 6}, {7, 8}}), "window.test_label");
  EXPECT_FALSE(field_of({{4, 0}, {5, 6}, {2, 6}, {7, 8}}).empty());
}

TEST(Synthetic, DeterministicAndSparse) {
  SyntheticParams p;
  p.nodes = 200;
  p.steps = 6;
  p.mean_degree = 6;
  const auto a = generate_locality_network(p), b = generate_locality_network(p);
  ASSERT_EQ(a.events().size(), b.events().size());
  for (std::size_t i = 0; i < a.events().size(); ++i)
    EXPECT_EQ(a.events()[i].participants, b.events()[i].participants);
  const auto s = build_snapshot(a, {0, 5});
  EXPECT_EQ(s.node_count(), 200u);
  EXPECT_NEAR(2.0 * s.edge_count() / s.node_count(), 6.0, 1.5);
}
