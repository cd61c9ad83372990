#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <random>

#include "qdist/topology.hpp"

using namespace qdist;

namespace {

// Plain Dijkstra over edge lengths, written independently of the library's
// path search.
double dijkstra_distance(const Topology& t, NodeIndex s, NodeIndex d) {
  std::vector<double> dist(t.node_count(), INFINITY);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u]) continue;
    for (const auto& e : t.edges()) {
      NodeIndex w;
      if (e.u == u) w = e.v;
      else if (e.v == u) w = e.u;
      else continue;
      if (du + e.length_km < dist[w]) {
        dist[w] = du + e.length_km;
        pq.push({dist[w], w});
      }
    }
  }
  return dist[d];
}

bool is_simple_connecting(const Topology& t, const Path& p, NodeIndex s, NodeIndex d) {
  if (p.nodes.front() != s || p.nodes.back() != d || p.nodes.size() != p.edges.size() + 1) return false;
  std::set<NodeIndex> seen(p.nodes.begin(), p.nodes.end());
  if (seen.size() != p.nodes.size()) return false;
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
    if (t.edge_between(p.nodes[i], p.nodes[i + 1]) != p.edges[i]) return false;
  return true;
}

}  // namespace

TEST(LinkEgr, SeventyKilometres) {
  Edge e{0, 1, 70.0};
  EXPECT_NEAR(link_egr(e), 2759.10582, 1e-4);
}

TEST(LinkEgr, HundredFortyKilometres) {
  Edge e{0, 1, 140.0};
  EXPECT_NEAR(link_egr(e), 634.38874, 1e-4);
}

TEST(LinkEgr, ZeroLengthIsLocalRate) {
  Edge e{0, 1, 0.0, 9000.0};
  EXPECT_DOUBLE_EQ(link_egr(e), 9000.0);
}

TEST(LinkEgr, MonotoneInLengthAndLinearInLocalRate) {
  double prev = INFINITY;
  for (double L = 1; L <= 300; L += 1) {
    Edge e{0, 1, L};
    const double r = link_egr(e);
    EXPECT_LT(r, prev);
    prev = r;
    Edge e3{0, 1, L, 3 * 12000.0};
    EXPECT_NEAR(link_egr(e3), 3 * r, 1e-9 * r);
  }
}

TEST(TopologyJson, TwoNodeDocumentUsesDefaults) {
  const auto t = load_topology_json(R"({"nodes":["A","B"],"edges":[{"u":"A","v":"B","length_km":70}]})");
  ASSERT_EQ(t.edge_count(), 1u);
  EXPECT_NEAR(link_egr(t.edge(0)), 2759.2, 0.5);
  EXPECT_DOUBLE_EQ(t.edge(0).f0, 0.98);
}

TEST(TopologyJson, DocumentDefaultsAndPerEdgeOverrides) {
  const auto t = load_topology_json(
      R"({"defaults":{"r_local":1000,"alpha":0.1,"f0":0.9},"nodes":["A","B","C"],
          "edges":[{"u":"A","v":"B","length_km":10},{"u":"B","v":"C","length_km":10,"f0":0.95}]})");
  EXPECT_DOUBLE_EQ(t.edge(0).r_local, 1000.0);
  EXPECT_DOUBLE_EQ(t.edge(0).f0, 0.9);
  EXPECT_DOUBLE_EQ(t.edge(1).f0, 0.95);
}

TEST(TopologyJson, EmptyEdgeListHasNoPaths) {
  const auto t = load_topology_json(R"({"nodes":["A","B"],"edges":[]})");
  EXPECT_EQ(t.edge_count(), 0u);
  EXPECT_FALSE(shortest_path(t, 0, 1).has_value());
  EXPECT_TRUE(k_shortest_paths(t, 0, 1, 3).empty());
}

TEST(TopologyJson, Errors) {
  EXPECT_THROW(load_topology_json(R"({"nodes":["A","B"],"edges":[{"u":"A","v":"Z","length_km":5}]})"),
               ValidationError);
  EXPECT_THROW(load_topology_json(R"({"nodes":["A","B"],"edges":[{"u":"A","v":"B","length_km":0}]})"),
               ValidationError);
  EXPECT_THROW(load_topology_json(
                   R"({"nodes":["A","B"],"edges":[{"u":"A","v":"B","length_km":5},{"u":"B","v":"A","length_km":5}]})"),
               ValidationError);
  EXPECT_THROW(load_topology_json(R"({"nodes":["A","B"],"edges":[)"), ParseError);
}

TEST(TopologyJson, RoundTrip) {
  GabrielOptions g;
  g.nodes = 30;
  g.seed = 3;
  const auto t = generate_gabriel(g);
  const auto back = load_topology_json(topology_to_json(t).dump());
  ASSERT_EQ(back.node_count(), t.node_count());
  ASSERT_EQ(back.edge_count(), t.edge_count());
  for (std::size_t i = 0; i < t.edge_count(); ++i) {
    EXPECT_EQ(back.edge(i).u, t.edge(i).u);
    EXPECT_EQ(back.edge(i).length_km, t.edge(i).length_km);
  }
}

TEST(TopologyGml, MinimalReader) {
  const char* doc = R"(graph [
    directed 0
    node [ id 0 label "A" ]
    node [ id 1 label "B" Longitude 3.2 ]
    node [ id 2 label "C" ]
    edge [ source 0 target 1 length 40 ]
    edge [ source 1 target 2 length 60 LinkSpeed "10" ]
  ])";
  const auto t = load_topology_gml(doc);
  EXPECT_EQ(t.node_count(), 3u);
  ASSERT_EQ(t.edge_count(), 2u);
  EXPECT_DOUBLE_EQ(t.edge(1).length_km, 60.0);
  EXPECT_EQ(t.name(0), "A");
}

TEST(Gabriel, TwoPointsAreNeighbours) {
  GabrielOptions g;
  g.nodes = 2;
  EXPECT_EQ(generate_gabriel(g).edge_count(), 1u);
}

TEST(Gabriel, CollinearMiddlePointBlocksOuterEdge) {
  std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}};
  const auto t = gabriel_topology(pts);
  EXPECT_EQ(t.edge_count(), 2u);
  EXPECT_FALSE(t.edge_between(0, 2).has_value());
}

TEST(Gabriel, HundredNodesDeterministicAndSparse) {
  GabrielOptions g;
  g.nodes = 100;
  g.seed = 7;
  const auto a = generate_gabriel(g);
  const auto b = generate_gabriel(g);
  EXPECT_GE(a.edge_count(), 99u);
  EXPECT_LE(a.edge_count(), 300u);
  EXPECT_EQ(topology_to_json(a).dump(), topology_to_json(b).dump());
}

TEST(Gabriel, DistanceResamplingStaysInRange) {
  GabrielOptions g;
  g.nodes = 80;
  g.seed = 11;
  g.distance_range_km = std::make_pair(20.0, 150.0);
  const auto topo = generate_gabriel(g);
  for (const auto& e : topo.edges()) {
    EXPECT_GE(e.length_km, 20.0);
    EXPECT_LE(e.length_km, 150.0);
  }
}

TEST(Gabriel, RejectsTinyGraphs) {
  GabrielOptions g;
  g.nodes = 1;
  EXPECT_THROW(generate_gabriel(g), ConfigError);
}

TEST(KShortest, LineHasOnePath) {
  std::vector<double> L{10, 10};
  const auto t = Topology::line(L);
  const auto ps = k_shortest_paths(t, 0, 2, 3);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].nodes, (std::vector<NodeIndex>{0, 1, 2}));
}

TEST(KShortest, SquareTieBreakIsLexicographic) {
  Topology t;
  for (auto n : {"A", "B", "C", "D"}) t.add_node(n);
  t.add_edge(0, 1, 1.0);
  t.add_edge(1, 2, 1.0);
  t.add_edge(2, 3, 1.0);
  t.add_edge(3, 0, 1.0);
  const auto ps = k_shortest_paths(t, 0, 2, 2);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[0].nodes, (std::vector<NodeIndex>{0, 1, 2}));
  EXPECT_EQ(ps[1].nodes, (std::vector<NodeIndex>{0, 3, 2}));
  EXPECT_DOUBLE_EQ(ps[1].total_length_km, 2.0);
}

TEST(KShortest, ErrorsOnBadQueries) {
  std::vector<double> L{10};
  const auto t = Topology::line(L);
  EXPECT_THROW(k_shortest_paths(t, 0, 0, 1), ConfigError);
  EXPECT_THROW(k_shortest_paths(t, 0, 5, 1), ValidationError);
}

TEST(KShortest, RandomQueriesAreSimpleSortedAndPrefixStable) {
  GabrielOptions g;
  g.nodes = 50;
  g.seed = 5;
  const auto t = generate_gabriel(g);
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<NodeIndex> pick(0, t.node_count() - 1);
  int checked = 0;
  for (int q = 0; q < 1000; ++q) {
    const auto s = pick(rng), d = pick(rng);
    if (s == d) continue;
    const std::size_t n = 1 + q % 4;
    const auto ps = k_shortest_paths(t, s, d, n);
    ASSERT_FALSE(ps.empty());
    EXPECT_NEAR(ps[0].total_length_km, dijkstra_distance(t, s, d), 1e-9);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      EXPECT_TRUE(is_simple_connecting(t, ps[i], s, d));
      if (i) { EXPECT_LE(ps[i - 1].total_length_km, ps[i].total_length_km + 1e-12); }
    }
    if (q % 10 == 0) {
      const auto more = k_shortest_paths(t, s, d, n + 1);
      ASSERT_GE(more.size(), ps.size());
      for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(more[i], ps[i]);
    }
    ++checked;
  }
  EXPECT_GT(checked, 900);
}

TEST(PathModel, MakePathValidates) {
  std::vector<double> L{10, 20};
  const auto t = Topology::line(L);
  const auto p = t.make_path({0, 1, 2});
  EXPECT_EQ(p.hops(), 2u);
  EXPECT_DOUBLE_EQ(p.total_length_km, 30.0);
  EXPECT_THROW(t.make_path({0, 2}), ValidationError);
  EXPECT_THROW(t.make_path({0, 1, 0}), ValidationError);
}
