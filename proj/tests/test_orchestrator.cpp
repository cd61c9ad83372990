#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "fixtures.hpp"

using namespace qdist;
using namespace fixtures;

namespace {

CodeConfig small_config(std::size_t n = 5, std::size_t k = 3, std::size_t grid = 50) {
  CodeConfig c;
  c.n_paths = n;
  c.k_paths = k;
  c.grid = FidelityGrid::uniform(grid);
  return c;
}

// A-B-D and A-C-D, both 100 km end to end.
Topology diamond() {
  Topology t;
  for (auto n : {"A", "B", "C", "D"}) t.add_node(n);
  t.add_edge(0, 1, 30.0);
  t.add_edge(1, 3, 70.0);
  t.add_edge(0, 2, 50.0);
  t.add_edge(2, 3, 50.0);
  return t;
}

double solve_cached(const Cache& c, const std::string& s, const std::string& d, const CodeConfig& cfg) {
  const auto r = inner_loop_request(c, s, d, cfg);
  EXPECT_TRUE(r.found);
  EXPECT_EQ(r.status, LPStatus::Optimal);
  return r.scheme.capacity;
}

}  // namespace

TEST(CodeConfigCheck, Validation) {
  auto c = small_config(2, 3);
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.latency_budget = 2.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.latency_budget = 0.005;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  EXPECT_NO_THROW(c.validate());
}

TEST(OuterLoop, SinglePathTopology) {
  const auto t = line_km({40, 50, 60});
  const auto cfg = small_config(3, 3);
  const auto cache = outer_loop_update(t, {{0, 3}}, cfg);
  const auto* e = cache.find("n0", "n3");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->candidates.size(), 1u);
  EXPECT_EQ(e->retained, 1u);
  const auto hg = build_pruned_hypergraph(t, full_path(t), cfg.grid, cfg.noise);
  EXPECT_EQ(e->hypergraph->vertices.size(), hg.vertices.size());
  EXPECT_EQ(e->hypergraph->edges.size(), hg.edges.size());
}

TEST(OuterLoop, TopKKeepsBestEstimateAndMoreIsBetter) {
  const auto t = diamond();
  const auto c1 = outer_loop_update(t, {{0, 3}}, small_config(2, 1));
  const auto c2 = outer_loop_update(t, {{0, 3}}, small_config(2, 2));
  const auto* e = c1.find("A", "D");
  ASSERT_EQ(e->candidates.size(), 2u);
  EXPECT_GE(e->candidates[0].estimate, e->candidates[1].estimate);
  EXPECT_EQ(e->hypergraph->paths.size(), 1u);
  EXPECT_EQ(e->hypergraph->paths[0], e->candidates[0].path);
  EXPECT_GE(solve_cached(c2, "A", "D", small_config(2, 2)), solve_cached(c1, "A", "D", small_config(2, 1)));
}

TEST(OuterLoop, EstimateFeasibilityMatchesSolvedCapacity) {
  for (double km : {20.0, 60.0, 120.0, 200.0}) {
    for (double f0 : {0.8, 0.9, 0.98}) {
      const auto t = line_km({km, km, km}, f0);
      const auto cfg = small_config(1, 1);
      const auto cache = outer_loop_update(t, {{0, 3}}, cfg);
      const double est = cache.find("n0", "n3")->candidates[0].estimate;
      const double cap = solve_cached(cache, "n0", "n3", cfg);
      EXPECT_EQ(est > 0.0, cap > 1e-9) << km << " " << f0 << " est " << est << " cap " << cap;
    }
  }
}

TEST(OuterLoop, NoPathGivesEmptyEntry) {
  Topology t;
  t.add_node("A");
  t.add_node("B");
  t.add_node("C");
  t.add_edge(0, 1, 20.0);
  const auto cfg = small_config();
  const auto cache = outer_loop_update(t, {{0, 2}}, cfg);
  const auto r = inner_loop_request(cache, "A", "C", cfg);
  EXPECT_TRUE(r.found);
  EXPECT_TRUE(r.scheme.empty());
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(OuterLoop, RejectsBadDemands) {
  const auto t = line_km({40});
  EXPECT_THROW(outer_loop_update(t, {}, small_config()), ConfigError);
  EXPECT_THROW(outer_loop_update(t, {{0, 0}}, small_config()), ConfigError);
  EXPECT_THROW(outer_loop_update(t, {{0, 9}}, small_config()), ConfigError);
}

TEST(OuterLoop, WorkerCountDoesNotChangeHypergraphs) {
  GabrielOptions g;
  g.nodes = 40;
  g.seed = 4;
  const auto t = generate_gabriel(g);
  std::vector<std::pair<NodeIndex, NodeIndex>> dem{{0, 10}, {3, 25}, {7, 30}, {12, 39}};
  auto cfg = small_config(4, 2, 30);
  const auto a = outer_loop_update(t, dem, cfg);
  cfg.workers = 3;
  const auto b = outer_loop_update(t, dem, cfg);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (const auto& [key, e] : a.entries) {
    const auto* f = b.find(key.first, key.second);
    ASSERT_NE(f, nullptr);
    ASSERT_EQ(bool(e.hypergraph), bool(f->hypergraph));
    if (!e.hypergraph) continue;
    auto x = hypergraph_to_json(*e.hypergraph), y = hypergraph_to_json(*f->hypergraph);
    x.erase("build_seconds");
    y.erase("build_seconds");
    EXPECT_EQ(x.dump(), y.dump());
  }
}

TEST(OuterLoop, SmallerKSolutionStaysFeasibleOnOverlappingPaths) {
  GabrielOptions g;
  g.nodes = 60;
  g.seed = 12;
  g.distance_range_km = std::make_pair(20.0, 60.0);
  const auto t = generate_gabriel(g);
  int checked = 0;
  for (NodeIndex d = 20; d < 60 && checked < 5; d += 7) {
    for (std::size_t k = 2; k <= 3; ++k) {
      const auto small = outer_loop_update(t, {{0, d}}, small_config(3, k - 1, 30));
      const auto large = outer_loop_update(t, {{0, d}}, small_config(3, k, 30));
      const auto& hs = *small.find(t.name(0), t.name(d))->hypergraph;
      const auto& hl = *large.find(t.name(0), t.name(d))->hypergraph;
      if (hl.paths.size() < k) continue;
      const auto ss = solve_lp(formulate_lp(hs, ObjectiveKind::EnsembleCapacity));
      const auto lpl = formulate_lp(hl, ObjectiveKind::EnsembleCapacity);
      auto x = ss.x;
      x.resize(hl.edges.size(), 0.0);
      EXPECT_LE(primal_residual(lpl, x), 1e-6);
      EXPECT_GE(solve_lp(lpl).objective, ss.objective - 1e-6 * std::max(1.0, ss.objective));
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(InnerLoop, TwoNodeDirectAndFast) {
  const auto t = line_with_rates({1000});
  const auto cfg = small_config(3, 3, 100);
  const auto cache = outer_loop_update(t, {{0, 1}}, cfg);
  const auto r = inner_loop_request(cache, "n0", "n1", cfg);
  EXPECT_NEAR(r.scheme.capacity, 1000.0 * pair_capacity(0.98), 1e-6);
  EXPECT_LT(r.solver_time, 0.1 * cfg.latency_budget);
  EXPECT_FALSE(r.over_budget);
}

TEST(InnerLoop, ColdCacheDiagnostic) {
  const auto t = line_km({40, 40});
  const auto cfg = small_config();
  const auto cache = outer_loop_update(t, {{0, 2}}, cfg);
  const auto r = inner_loop_request(cache, "n1", "n2", cfg);
  EXPECT_FALSE(r.found);
  EXPECT_TRUE(r.scheme.empty());
  EXPECT_NE(r.diagnostic.find("not cached"), std::string::npos);
}

TEST(InnerLoop, RepeatedRequestsAreIdenticalAndBuildNothing) {
  const auto t = diamond();
  const auto cfg = small_config(2, 2, 60);
  const auto cache = outer_loop_update(t, {{0, 3}}, cfg);
  const auto before = hypergraph_build_counter().load();
  const auto a = inner_loop_request(cache, "A", "D", cfg);
  const auto b = inner_loop_request(cache, "A", "D", cfg);
  EXPECT_EQ(hypergraph_build_counter().load(), before);
  EXPECT_EQ(scheme_to_json(a.scheme).dump(), scheme_to_json(b.scheme).dump());
}

TEST(InnerLoop, CoherenceBudgetCheck) {
  const auto t = line_km({40});
  auto cfg = small_config();
  cfg.t_wait = 5.0;
  cfg.t_cut = 1.0;
  const auto cache = outer_loop_update(t, {{0, 1}}, cfg);
  const auto r = inner_loop_request(cache, "n0", "n1", cfg);
  EXPECT_TRUE(r.over_t_cut);
  EXPECT_FALSE(r.scheme.empty());
}

TEST(CacheFile, EmptyRoundTrip) {
  Cache c;
  const auto back = load_cache_string(save_cache_string(c));
  EXPECT_TRUE(back.empty());
}

TEST(CacheFile, SolvedCapacitySurvivesRoundTrip) {
  GabrielOptions g;
  g.nodes = 30;
  g.seed = 2;
  const auto t = generate_gabriel(g);
  const auto cfg = small_config(4, 3, 100);
  const auto cache = outer_loop_update(t, {{0, 17}, {5, 28}}, cfg);
  const auto text = save_cache_string(cache);
  const auto back = load_cache_string(text);
  EXPECT_EQ(save_cache_string(back), text);
  for (const auto& [key, e] : cache.entries) {
    const double a = solve_cached(cache, key.first, key.second, cfg);
    const double b = solve_cached(back, key.first, key.second, cfg);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
  }
}

TEST(CacheFile, TruncatedAndForeignDocumentsFail) {
  const auto t = line_km({40, 40});
  const auto text = save_cache_string(outer_loop_update(t, {{0, 2}}, small_config()));
  EXPECT_THROW(load_cache_string(text.substr(0, text.size() / 2)), ParseError);
  EXPECT_THROW(load_cache_string(R"({"format":"qdist-cache","version":7,"epoch":1,"entries":[]})"), ParseError);
  EXPECT_THROW(load_cache_string("[]"), ParseError);
}

TEST(CacheStoreEpochs, ReadersNeverSeeMixedEpochs) {
  CacheStore store;
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r)
    readers.emplace_back([&] {
      while (!stop) {
        const auto snap = store.snapshot();
        for (const auto& [key, e] : snap->entries)
          if (e.built_at_ms != static_cast<std::int64_t>(snap->epoch)) ++bad;
      }
    });
  for (std::uint64_t ep = 1; ep <= 200; ++ep) {
    Cache c;
    c.epoch = ep;
    for (int i = 0; i < 5; ++i) {
      CacheEntry e;
      e.source = "s" + std::to_string(i);
      e.destination = "d";
      e.built_at_ms = static_cast<std::int64_t>(ep);
      c.entries.emplace(std::make_pair(e.source, e.destination), e);
    }
    store.publish(std::move(c));
  }
  stop = true;
  for (auto& th : readers) th.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_EQ(store.snapshot()->epoch, 200u);
}
