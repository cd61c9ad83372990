#pragma once

// Two-loop controller. The outer loop ranks candidate paths per demand with a
// cheap DP estimate, keeps the best K, and caches their synthesized pruned
// hypergraph. The inner loop answers a request by solving the LP on the cached
// graph only.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdist/error.hpp"
#include "qdist/formulation.hpp"
#include "qdist/hypergraph.hpp"
#include "qdist/hypergraph_io.hpp"
#include "qdist/lp.hpp"
#include "qdist/topology.hpp"

namespace qdist {

struct CodeConfig {
  std::size_t n_paths = 5;        // N candidate paths per demand
  std::size_t k_paths = 3;        // K retained paths
  double t_outer = 60.0;          // outer period, seconds (used by schedulers)
  FidelityGrid grid = FidelityGrid::uniform(100);
  NoiseParams noise;
  PurifyModel model = PurifyModel::IdealDejmps;
  double latency_budget = 1.0;    // inner-loop solve budget, seconds
  std::optional<double> t_cut;    // coherence budget, seconds
  double t_wait = 0.0;            // classical signalling wait, seconds
  PathMetric metric = PathMetric::Distance;
  SolverOptions solver;
  std::size_t workers = 1;

  void validate() const {
    if (k_paths < 1 || k_paths > n_paths) throw ConfigError("path counts must satisfy 1 <= K <= N");
    if (!(latency_budget >= 0.01 && latency_budget <= 1.0)) throw ConfigError("latency budget must lie in [0.01, 1] s");
    if (!(t_outer > 0.0)) throw ConfigError("outer period must be positive");
    if (t_cut && !(*t_cut > 0.0)) throw ConfigError("coherence budget must be positive");
    if (!(t_wait >= 0.0)) throw ConfigError("wait time must be nonnegative");
    if (workers == 0) throw ConfigError("worker count must be positive");
    if (grid.empty()) throw ConfigError("fidelity grid is empty");
    noise.validate();
  }
};

struct PathEstimate {
  Path path;
  double estimate = 0.0;  // best incumbent rate * pair capacity, bits/s
};

struct CacheEntry {
  std::string source;
  std::string destination;
  NodeIndex s = 0;
  NodeIndex d = 0;
  std::vector<PathEstimate> candidates;  // all N, best first
  std::size_t retained = 0;              // how many of them were synthesized
  std::shared_ptr<const Hypergraph> hypergraph;  // null when no path exists
  double server_time = 0.0;
  std::int64_t built_at_ms = 0;  // wall clock, milliseconds since the epoch
};

struct Cache {
  std::uint64_t epoch = 0;
  std::map<std::pair<std::string, std::string>, CacheEntry> entries;

  const CacheEntry* find(const std::string& s, const std::string& d) const {
    auto it = entries.find({s, d});
    return it == entries.end() ? nullptr : &it->second;
  }
  bool empty() const { return entries.empty(); }
};

// Best single-protocol capacity the DP found on a pruned graph.
inline double dp_capacity_estimate(const Hypergraph& hg) {
  double best = 0.0;
  for (const auto& e : hg.edges)
    if (e.op == OpKind::End) best = std::max(best, hg.vertices[e.inputs[0]].rate * e.capacity_coeff);
  return best;
}

namespace detail {

inline CacheEntry build_entry(const Topology& topo, NodeIndex s, NodeIndex d, const CodeConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  CacheEntry entry;
  entry.source = topo.name(s);
  entry.destination = topo.name(d);
  entry.s = s;
  entry.d = d;
  const auto paths = k_shortest_paths(topo, s, d, cfg.n_paths, cfg.metric);
  DpOptions dp;
  dp.model = cfg.model;
  struct Built {
    PathEstimate est;
    Hypergraph hg;
  };
  std::vector<Built> built;
  for (const auto& p : paths) {
    auto hg = build_pruned_hypergraph(topo, p, cfg.grid, cfg.noise, dp);
    const double est = dp_capacity_estimate(hg);
    built.push_back({{p, est}, std::move(hg)});
  }
  std::stable_sort(built.begin(), built.end(), [](const Built& a, const Built& b) {
    if (a.est.estimate != b.est.estimate) return a.est.estimate > b.est.estimate;
    return a.est.path.hops() < b.est.path.hops();
  });
  for (const auto& b : built) entry.candidates.push_back(b.est);
  entry.retained = std::min(cfg.k_paths, built.size());
  if (entry.retained > 0) {
    std::vector<Hypergraph> keep;
    for (std::size_t i = 0; i < entry.retained; ++i) keep.push_back(std::move(built[i].hg));
    entry.hypergraph = std::make_shared<const Hypergraph>(synthesize_multipath(keep));
  }
  entry.server_time = seconds_since(t0);
  entry.built_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  return entry;
}

}  // namespace detail

// Builds a fresh cache epoch for the given demands. Demands are processed by
// cfg.workers threads; the result does not depend on the worker count.
inline Cache outer_loop_update(const Topology& topo, const std::vector<std::pair<NodeIndex, NodeIndex>>& demands,
                               const CodeConfig& cfg, std::uint64_t epoch = 1) {
  cfg.validate();
  if (demands.empty()) throw ConfigError("at least one demand is required");
  for (const auto& [s, d] : demands) {
    if (s >= topo.node_count() || d >= topo.node_count()) throw ConfigError("demand references an unknown node");
    if (s == d) throw ConfigError("demand endpoints must differ");
  }
  std::vector<std::optional<CacheEntry>> out(demands.size());
  std::vector<std::string> errors(demands.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < demands.size();) {
      try {
        out[i] = detail::build_entry(topo, demands[i].first, demands[i].second, cfg);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t nthreads = std::min(cfg.workers, demands.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw Error("outer loop: " + e);

  Cache cache;
  cache.epoch = epoch;
  for (auto& e : out) {
    auto key = std::make_pair(e->source, e->destination);
    cache.entries.insert_or_assign(std::move(key), std::move(*e));
  }
  return cache;
}

struct InnerResult {
  bool found = false;
  DistributionScheme scheme;
  LPStatus status = LPStatus::Optimal;
  double formulate_time = 0.0;
  double solver_time = 0.0;
  bool over_budget = false;   // solver_time exceeded the latency budget
  bool over_t_cut = false;    // t_wait + solver_time exceeded the coherence budget
  std::string diagnostic;
};

// Serves one request from the cache. Performs no hypergraph construction.
inline InnerResult inner_loop_request(const Cache& cache, const std::string& s, const std::string& d,
                                      const CodeConfig& cfg) {
  InnerResult r;
  const auto* entry = cache.find(s, d);
  if (!entry) {
    r.diagnostic = "not cached: " + s + " -> " + d;
    return r;
  }
  r.found = true;
  if (!entry->hypergraph) {
    r.diagnostic = "no path between " + s + " and " + d;
    return r;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto lp = formulate_lp(*entry->hypergraph, ObjectiveKind::EnsembleCapacity);
  r.formulate_time = detail::seconds_since(t0);
  const auto sol = solve_lp(lp, cfg.solver);
  r.solver_time = sol.seconds;
  r.status = sol.status;
  if (!sol.optimal()) {
    r.diagnostic = std::string("LP ") + to_string(sol.status) + ": " + sol.message;
    return r;
  }
  r.scheme = extract_scheme(*entry->hypergraph, sol);
  if (r.solver_time > cfg.latency_budget) {
    r.over_budget = true;
    r.diagnostic = "solver time exceeded the latency budget";
  }
  if (cfg.t_cut && cfg.t_wait + r.solver_time > *cfg.t_cut) {
    r.over_t_cut = true;
    if (!r.diagnostic.empty()) r.diagnostic += "; ";
    r.diagnostic += "wait plus processing time exceeds the coherence budget";
  }
  return r;
}

// Holder for the current cache epoch. Readers take a snapshot and keep using
// it while a writer publishes the next epoch.
class CacheStore {
 public:
  std::shared_ptr<const Cache> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }
  void publish(Cache next) {
    auto p = std::make_shared<const Cache>(std::move(next));
    std::lock_guard lock(mu_);
    current_ = std::move(p);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const Cache> current_ = std::make_shared<const Cache>();
};

// ---------------------------------------------------------------------------
// Cache files
// ---------------------------------------------------------------------------

inline constexpr int kCacheFormatVersion = 1;

inline nlohmann::json cache_to_json(const Cache& cache) {
  using nlohmann::json;
  json j;
  j["format"] = "qdist-cache";
  j["version"] = kCacheFormatVersion;
  j["epoch"] = cache.epoch;
  auto entries = json::array();
  for (const auto& [key, e] : cache.entries) {
    json x;
    x["source"] = e.source;
    x["destination"] = e.destination;
    x["s"] = e.s;
    x["d"] = e.d;
    auto cands = json::array();
    for (const auto& c : e.candidates)
      cands.push_back({{"nodes", c.path.nodes},
                       {"edges", c.path.edges},
                       {"length_km", c.path.total_length_km},
                       {"estimate", c.estimate}});
    x["candidates"] = std::move(cands);
    x["retained"] = e.retained;
    x["hypergraph"] = e.hypergraph ? hypergraph_to_json(*e.hypergraph) : json(nullptr);
    x["server_time"] = e.server_time;
    x["built_at_ms"] = e.built_at_ms;
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline Cache cache_from_json(const nlohmann::json& j) {
  Cache cache;
  try {
    if (!j.is_object() || j.value("format", "") != "qdist-cache") throw ParseError("not a cache document");
    if (j.at("version").get<int>() != kCacheFormatVersion)
      throw ParseError("unsupported cache version " + j.at("version").dump());
    cache.epoch = j.at("epoch").get<std::uint64_t>();
    for (const auto& x : j.at("entries")) {
      CacheEntry e;
      e.source = x.at("source").get<std::string>();
      e.destination = x.at("destination").get<std::string>();
      e.s = x.at("s").get<NodeIndex>();
      e.d = x.at("d").get<NodeIndex>();
      for (const auto& c : x.at("candidates")) {
        PathEstimate pe;
        pe.path.nodes = c.at("nodes").get<std::vector<NodeIndex>>();
        pe.path.edges = c.at("edges").get<std::vector<std::size_t>>();
        pe.path.total_length_km = c.at("length_km").get<double>();
        pe.estimate = c.at("estimate").get<double>();
        e.candidates.push_back(std::move(pe));
      }
      e.retained = x.at("retained").get<std::size_t>();
      if (!x.at("hypergraph").is_null())
        e.hypergraph = std::make_shared<const Hypergraph>(hypergraph_from_json(x.at("hypergraph")));
      e.server_time = x.at("server_time").get<double>();
      e.built_at_ms = x.at("built_at_ms").get<std::int64_t>();
      auto key = std::make_pair(e.source, e.destination);
      if (!cache.entries.emplace(std::move(key), std::move(e)).second) throw ParseError("duplicate cache entry");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cache document: ") + e.what());
  }
  return cache;
}

inline void save_cache(const Cache& cache, std::ostream& out) {
  out << cache_to_json(cache).dump() << '\n';
  if (!out) throw Error("failed to write cache");
}

inline Cache load_cache(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("cache file: ") + e.what());
  }
  return cache_from_json(j);
}

inline std::string save_cache_string(const Cache& cache) {
  std::ostringstream os;
  save_cache(cache, os);
  return os.str();
}

inline Cache load_cache_string(const std::string& text) {
  std::istringstream is(text);
  return load_cache(is);
}

}  // namespace qdist
