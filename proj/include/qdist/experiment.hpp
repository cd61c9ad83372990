#pragma once

// Evaluation harness: samples instances, runs strategies, aggregates, and
// writes CSV or JSON reports. Every instance draws from its own generator
// seeded from the master seed, so results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdist/capacity.hpp"
#include "qdist/error.hpp"
#include "qdist/orchestrator.hpp"
#include "qdist/strategies.hpp"
#include "qdist/topology.hpp"

namespace qdist {

enum class ExperimentKind { Benchmark, SweepFlb, SweepResolution, ScalePath, ScaleNetwork, IntroToy };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Benchmark: return "benchmark";
    case ExperimentKind::SweepFlb: return "sweep-flb";
    case ExperimentKind::SweepResolution: return "sweep-resolution";
    case ExperimentKind::ScalePath: return "scale-path";
    case ExperimentKind::ScaleNetwork: return "scale-network";
    case ExperimentKind::IntroToy: return "intro-toy";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::Benchmark, ExperimentKind::SweepFlb, ExperimentKind::SweepResolution,
                 ExperimentKind::ScalePath, ExperimentKind::ScaleNetwork, ExperimentKind::IntroToy})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Benchmark;
  std::optional<std::string> topology_file;  // JSON or GML; generated when absent
  std::size_t topology_nodes = 100;
  std::uint64_t topology_seed = 1;
  std::optional<std::pair<double, double>> distance_range_km = std::make_pair(20.0, 150.0);
  std::uint64_t seed = 1;
  std::size_t repetitions = 100;                // instances per setting
  std::vector<std::size_t> path_lengths{3, 5, 7, 10};  // nodes per path
  std::vector<std::size_t> grid_sizes{100};
  double f_lb = kDefaultFidelityLowerBound;
  double f_lb_min = 0.815, f_lb_max = 0.995, f_lb_step = 0.005;
  std::vector<Strategy> strategies = all_strategies();
  std::vector<std::size_t> network_sizes{100, 300, 500, 700, 900};
  std::size_t n_paths = 5, k_paths = 3;         // scale-network controller
  std::size_t toy_hops = 4;
  double toy_length_km = 70.0;
  NoiseParams noise;
  LinkDefaults link;
  PurifyModel model = PurifyModel::IdealDejmps;
  std::size_t workers = 1;
  bool record_timings = true;
  std::size_t max_sample_attempts = 20000;

  void validate() const {
    if (repetitions == 0) throw ConfigError("repetitions must be positive");
    if (path_lengths.empty() || grid_sizes.empty() || strategies.empty()) throw ConfigError("ranges must be nonempty");
    for (auto n : path_lengths)
      if (n < 2) throw ConfigError("paths need at least 2 nodes");
    for (auto g : grid_sizes)
      if (g == 0) throw ConfigError("grid sizes must be positive");
    if (!(f_lb > 0.5 && f_lb < 1.0)) throw ConfigError("f_lb must lie in (0.5, 1)");
    if (!(f_lb_step > 0.0) || !(f_lb_min > 0.5) || !(f_lb_max < 1.0) || f_lb_min > f_lb_max)
      throw ConfigError("invalid f_lb sweep range");
    if (network_sizes.empty()) throw ConfigError("network sizes must be nonempty");
    if (k_paths < 1 || k_paths > n_paths) throw ConfigError("path counts must satisfy 1 <= K <= N");
    if (workers == 0) throw ConfigError("worker count must be positive");
    if (toy_hops == 0 || !(toy_length_km > 0.0)) throw ConfigError("invalid toy topology");
    if (distance_range_km && !(distance_range_km->first > 0.0 && distance_range_km->second >= distance_range_km->first))
      throw ConfigError("invalid distance range");
    noise.validate();
  }

  std::vector<double> f_lb_values() const {
    std::vector<double> v;
    const auto steps = static_cast<std::size_t>(std::floor((f_lb_max - f_lb_min) / f_lb_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) v.push_back(std::round((f_lb_min + f_lb_step * static_cast<double>(i)) * 1e9) / 1e9);
    return v;
  }
};

// Defaults that differ between experiment kinds.
inline ExperimentConfig default_experiment(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Benchmark: break;
    case ExperimentKind::SweepFlb:
      c.repetitions = 20;
      c.path_lengths = {3, 5, 7};
      break;
    case ExperimentKind::SweepResolution:
      c.repetitions = 20;
      c.path_lengths = {6};
      c.grid_sizes = {10, 25, 50, 100, 200};
      break;
    case ExperimentKind::ScalePath:
      c.topology_nodes = 1000;
      c.distance_range_km.reset();
      c.repetitions = 20;
      c.path_lengths = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
      c.strategies = {Strategy::RateDp, Strategy::Code};
      break;
    case ExperimentKind::ScaleNetwork:
      c.repetitions = 20;
      c.strategies = {Strategy::Code};
      break;
    case ExperimentKind::IntroToy:
      c.repetitions = 1;
      break;
  }
  return c;
}

// One strategy evaluated on one instance.
struct Record {
  std::string experiment;
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::string source, destination;
  std::size_t nodes = 0;
  double path_km = 0.0;
  std::size_t grid_size = 0;
  double f_lb = std::numeric_limits<double>::quiet_NaN();
  std::size_t network_nodes = 0;
  std::string strategy;
  std::string label;
  double egr = 0.0, fidelity = 0.0, capacity = 0.0, swaps = 0.0, purifications = 0.0;
  std::size_t pairs = 0;
  double server_time = std::numeric_limits<double>::quiet_NaN();
  double solver_time = std::numeric_limits<double>::quiet_NaN();
  std::size_t hyperedges = 0;
  std::vector<EnsembleEntry> ensembles;
  std::string status = "ok";
  std::string message;
};

struct SummaryRow {
  std::string strategy;
  std::string label;
  std::size_t nodes = 0;
  std::size_t grid_size = 0;
  double f_lb = std::numeric_limits<double>::quiet_NaN();
  std::size_t network_nodes = 0;
  std::size_t count = 0;
  double egr = 0.0, fidelity = 0.0, capacity = 0.0, swaps = 0.0, purifications = 0.0, pairs = 0.0;
  double solver_p1 = 0.0, solver_p50 = 0.0, solver_p99 = 0.0;
  double server_p1 = 0.0, server_p50 = 0.0, server_p99 = 0.0;
  double improvement_vs_rate_dp = std::numeric_limits<double>::quiet_NaN();  // relative, e.g. 0.08 = +8 %
};

struct Report {
  ExperimentConfig config;
  std::vector<Record> records;
  std::vector<SummaryRow> summary;
  std::size_t failures = 0;
};

// SplitMix64 finalizer; decorrelates per-instance seeds derived from one master.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Nearest-rank percentile of a nonempty sample; NaN values are ignored.
inline double percentile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

inline Topology load_topology_file(const std::string& path, const LinkDefaults& link = {}) {
  const auto text = detail::read_file(path);
  if (detail::ends_with(path, ".gml")) return load_topology_gml(text, link);
  return load_topology_json(text, link);
}

namespace detail {

inline Topology experiment_topology(const ExperimentConfig& c, std::size_t nodes, std::uint64_t seed) {
  if (c.topology_file) return load_topology_file(*c.topology_file, c.link);
  GabrielOptions g;
  g.nodes = nodes;
  g.seed = seed;
  g.distance_range_km = c.distance_range_km;
  g.params = c.link;
  return generate_gabriel(g);
}

// A random pair whose shortest path has exactly `nodes` nodes.
inline std::optional<Path> sample_path(const Topology& t, std::size_t nodes, std::mt19937_64& rng, std::size_t attempts) {
  if (t.node_count() < 2) return std::nullopt;
  std::uniform_int_distribution<NodeIndex> pick(0, t.node_count() - 1);
  for (std::size_t i = 0; i < attempts; ++i) {
    const auto s = pick(rng), d = pick(rng);
    if (s == d) continue;
    auto p = shortest_path(t, s, d);
    if (p && p->nodes.size() == nodes) return p;
  }
  return std::nullopt;
}

inline void fill_from_result(Record& r, const StrategyResult& res, bool timings) {
  r.strategy = res.strategy;
  r.egr = res.egr;
  r.fidelity = res.fidelity;
  r.capacity = res.capacity;
  r.swaps = res.swaps;
  r.purifications = res.purifications;
  r.pairs = res.pairs;
  r.grid_size = res.grid_size;
  r.hyperedges = res.hyperedges;
  r.ensembles = res.scheme.entries();
  if (timings) {
    r.server_time = res.server_time;
    r.solver_time = res.solver_time;
  }
}

struct Task {
  std::size_t instance = 0;
  std::size_t nodes = 0;
  std::size_t grid_size = 0;
  std::size_t network_nodes = 0;
};

inline Record failed_record(const ExperimentConfig& c, const Task& t, std::uint64_t seed, std::string strategy,
                            std::string message) {
  Record r;
  r.experiment = to_string(c.kind);
  r.instance = t.instance;
  r.seed = seed;
  r.nodes = t.nodes;
  r.grid_size = t.grid_size;
  r.network_nodes = t.network_nodes;
  r.strategy = std::move(strategy);
  r.status = "failed";
  r.message = std::move(message);
  return r;
}

// Runs the configured strategies on one path; one record per strategy and f_lb.
inline std::vector<Record> run_path_instance(const ExperimentConfig& c, const Task& task, std::uint64_t seed,
                                             const Topology& topo, const Path& path,
                                             const std::vector<double>& f_lbs) {
  std::vector<Record> out;
  StrategyOptions o;
  o.grid = FidelityGrid::uniform(task.grid_size);
  o.noise = c.noise;
  o.model = c.model;
  for (double f : f_lbs) {
    for (auto s : c.strategies) {
      Record r;
      r.experiment = to_string(c.kind);
      r.instance = task.instance;
      r.seed = seed;
      r.source = topo.name(path.nodes.front());
      r.destination = topo.name(path.nodes.back());
      r.nodes = path.nodes.size();
      r.path_km = path.total_length_km;
      r.grid_size = task.grid_size;
      r.network_nodes = task.network_nodes;
      if (s == Strategy::RateDp || s == Strategy::RateLp) r.f_lb = f;
      try {
        fill_from_result(r, run_strategy(s, topo, path, f, o), c.record_timings);
      } catch (const std::exception& e) {
        r.strategy = to_string(s);
        r.status = "failed";
        r.message = e.what();
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::vector<Record> run_task(const ExperimentConfig& c, const Task& task, const Topology* shared_topo) {
  const std::uint64_t seed = derive_seed(c.seed, task.instance);
  std::mt19937_64 rng(seed);
  switch (c.kind) {
    case ExperimentKind::Benchmark:
    case ExperimentKind::SweepResolution:
    case ExperimentKind::ScalePath:
    case ExperimentKind::SweepFlb: {
      auto path = sample_path(*shared_topo, task.nodes, rng, c.max_sample_attempts);
      if (!path)
        return {failed_record(c, task, seed, "", "no pair with a " + std::to_string(task.nodes) + "-node shortest path")};
      std::vector<double> fl{c.f_lb};
      if (c.kind == ExperimentKind::SweepFlb) fl = c.f_lb_values();
      return run_path_instance(c, task, seed, *shared_topo, *path, fl);
    }
    case ExperimentKind::ScaleNetwork: {
      const auto topo = experiment_topology(c, task.network_nodes, derive_seed(c.topology_seed, task.network_nodes));
      std::optional<Path> path;
      std::uniform_int_distribution<NodeIndex> pick(0, topo.node_count() - 1);
      for (std::size_t i = 0; i < c.max_sample_attempts && !path; ++i) {
        const auto s = pick(rng), d = pick(rng);
        if (s != d) path = shortest_path(topo, s, d);
      }
      if (!path) return {failed_record(c, task, seed, "CODE", "no connected pair found")};
      CodeConfig cc;
      cc.n_paths = c.n_paths;
      cc.k_paths = c.k_paths;
      cc.grid = FidelityGrid::uniform(task.grid_size);
      cc.noise = c.noise;
      cc.model = c.model;
      Record r;
      r.experiment = to_string(c.kind);
      r.instance = task.instance;
      r.seed = seed;
      r.source = topo.name(path->nodes.front());
      r.destination = topo.name(path->nodes.back());
      r.nodes = path->nodes.size();
      r.path_km = path->total_length_km;
      r.grid_size = task.grid_size;
      r.network_nodes = task.network_nodes;
      r.strategy = "CODE";
      try {
        const auto cache = outer_loop_update(topo, {{path->nodes.front(), path->nodes.back()}}, cc);
        const auto res = inner_loop_request(cache, r.source, r.destination, cc);
        if (!res.found || res.status != LPStatus::Optimal) throw Error(res.diagnostic);
        const auto& entry = *cache.find(r.source, r.destination);
        r.egr = res.scheme.egr;
        r.fidelity = res.scheme.fidelity;
        r.capacity = res.scheme.capacity;
        r.swaps = res.scheme.swaps;
        r.purifications = res.scheme.purifications;
        r.pairs = res.scheme.pairs;
        r.ensembles = res.scheme.entries();
        r.hyperedges = entry.hypergraph ? entry.hypergraph->edges.size() : 0;
        if (c.record_timings) {
          r.server_time = entry.server_time;
          r.solver_time = res.solver_time;
        }
      } catch (const std::exception& e) {
        r.status = "failed";
        r.message = e.what();
      }
      return {r};
    }
    case ExperimentKind::IntroToy: {
      std::vector<double> lengths(c.toy_hops, c.toy_length_km);
      const auto topo = Topology::line(lengths, c.link);
      std::vector<NodeIndex> nodes(c.toy_hops + 1);
      for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
      const auto path = topo.make_path(nodes);
      struct Variant {
        Strategy s;
        double f_lb;
        const char* label;
      };
      const std::vector<Variant> variants{{Strategy::Code, c.f_lb, "max-bits"},
                                          {Strategy::RateLp, 0.95, "max-fidelity"},
                                          {Strategy::RateLp, 0.5 + 1e-3, "max-egr"},
                                          {Strategy::EcLp, c.f_lb, ""},
                                          {Strategy::RateDp, c.f_lb, ""},
                                          {Strategy::RateLp, c.f_lb, ""}};
      std::vector<Record> out;
      StrategyOptions o;
      o.grid = FidelityGrid::uniform(task.grid_size);
      o.noise = c.noise;
      o.model = c.model;
      for (const auto& v : variants) {
        Record r;
        r.experiment = to_string(c.kind);
        r.instance = task.instance;
        r.seed = seed;
        r.source = topo.name(path.nodes.front());
        r.destination = topo.name(path.nodes.back());
        r.nodes = path.nodes.size();
        r.path_km = path.total_length_km;
        r.grid_size = task.grid_size;
        r.label = v.label;
        if (v.s == Strategy::RateDp || v.s == Strategy::RateLp) r.f_lb = v.f_lb;
        try {
          fill_from_result(r, run_strategy(v.s, topo, path, v.f_lb, o), c.record_timings);
        } catch (const std::exception& e) {
          r.strategy = to_string(v.s);
          r.status = "failed";
          r.message = e.what();
        }
        out.push_back(std::move(r));
      }
      return out;
    }
  }
  return {};
}

inline std::vector<SummaryRow> summarize(const std::vector<Record>& records) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, double, std::string, std::string>;
  std::map<Key, std::vector<const Record*>> groups;
  for (const auto& r : records) {
    if (r.status != "ok") continue;
    const double f = std::isnan(r.f_lb) ? -1.0 : r.f_lb;
    groups[{r.network_nodes, r.nodes, r.grid_size, f, r.strategy, r.label}].push_back(&r);
  }
  // Rate-DP mean capacity per (network, nodes, grid, f_lb) for the improvement column.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::map<double, double>> rate_dp;
  for (const auto& [k, rows] : groups) {
    if (std::get<4>(k) != "Rate-DP") continue;
    double sum = 0.0;
    for (auto* r : rows) sum += r->capacity;
    rate_dp[{std::get<0>(k), std::get<1>(k), std::get<2>(k)}][std::get<3>(k)] = sum / static_cast<double>(rows.size());
  }
  std::vector<SummaryRow> out;
  for (const auto& [k, rows] : groups) {
    SummaryRow s;
    s.network_nodes = std::get<0>(k);
    s.nodes = std::get<1>(k);
    s.grid_size = std::get<2>(k);
    s.f_lb = std::get<3>(k) < 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::get<3>(k);
    s.strategy = std::get<4>(k);
    s.label = std::get<5>(k);
    s.count = rows.size();
    std::vector<double> solver, server;
    for (auto* r : rows) {
      s.egr += r->egr;
      s.fidelity += r->fidelity;
      s.capacity += r->capacity;
      s.swaps += r->swaps;
      s.purifications += r->purifications;
      s.pairs += static_cast<double>(r->pairs);
      solver.push_back(r->solver_time);
      server.push_back(r->server_time);
    }
    const double n = static_cast<double>(rows.size());
    s.egr /= n;
    s.fidelity /= n;
    s.capacity /= n;
    s.swaps /= n;
    s.purifications /= n;
    s.pairs /= n;
    s.solver_p1 = percentile(solver, 1);
    s.solver_p50 = percentile(solver, 50);
    s.solver_p99 = percentile(solver, 99);
    s.server_p1 = percentile(server, 1);
    s.server_p50 = percentile(server, 50);
    s.server_p99 = percentile(server, 99);
    // Compare against Rate-DP at the same f_lb, or at the configured one for
    // strategies that have no f_lb.
    auto it = rate_dp.find({s.network_nodes, s.nodes, s.grid_size});
    if (it != rate_dp.end()) {
      std::optional<double> base;
      if (!std::isnan(s.f_lb) && it->second.count(s.f_lb)) base = it->second.at(s.f_lb);
      else if (it->second.size() == 1) base = it->second.begin()->second;
      if (base && *base > 0.0) s.improvement_vs_rate_dp = s.capacity / *base - 1.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

inline Report run_experiment(const ExperimentConfig& c) {
  c.validate();
  for (auto g : c.grid_sizes) (void)FidelityGrid::uniform(g);
  Report rep;
  rep.config = c;
  std::vector<detail::Task> tasks;
  std::size_t id = 0;
  switch (c.kind) {
    case ExperimentKind::ScaleNetwork:
      for (auto n : c.network_sizes)
        for (std::size_t r = 0; r < c.repetitions; ++r) tasks.push_back({id++, 0, c.grid_sizes.front(), n});
      break;
    case ExperimentKind::IntroToy:
      for (auto g : c.grid_sizes) tasks.push_back({id++, c.toy_hops + 1, g, 0});
      break;
    default:
      for (auto g : c.grid_sizes)
        for (auto len : c.path_lengths)
          for (std::size_t r = 0; r < c.repetitions; ++r) tasks.push_back({id++, len, g, 0});
      break;
  }

  std::optional<Topology> shared;
  if (c.kind != ExperimentKind::ScaleNetwork && c.kind != ExperimentKind::IntroToy)
    shared = detail::experiment_topology(c, c.topology_nodes, c.topology_seed);

  std::vector<std::vector<Record>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        results[i] = detail::run_task(c, tasks[i], shared ? &*shared : nullptr);
      } catch (const std::exception& e) {
        results[i] = {detail::failed_record(c, tasks[i], derive_seed(c.seed, tasks[i].instance), "", e.what())};
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(c.workers, tasks.size()); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (auto& rs : results)
    for (auto& r : rs) {
      if (r.status != "ok") ++rep.failures;
      rep.records.push_back(std::move(r));
    }
  rep.summary = detail::summarize(rep.records);
  return rep;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.kind);
  j["topology_file"] = c.topology_file ? nlohmann::json(*c.topology_file) : nlohmann::json(nullptr);
  j["topology_nodes"] = c.topology_nodes;
  j["topology_seed"] = c.topology_seed;
  j["distance_range_km"] = c.distance_range_km ? nlohmann::json({c.distance_range_km->first, c.distance_range_km->second})
                                               : nlohmann::json(nullptr);
  j["seed"] = c.seed;
  j["repetitions"] = c.repetitions;
  j["path_lengths"] = c.path_lengths;
  j["grid_sizes"] = c.grid_sizes;
  j["f_lb"] = c.f_lb;
  j["f_lb_sweep"] = {c.f_lb_min, c.f_lb_max, c.f_lb_step};
  std::vector<std::string> names;
  for (auto s : c.strategies) names.emplace_back(to_string(s));
  j["strategies"] = names;
  j["network_sizes"] = c.network_sizes;
  j["n_paths"] = c.n_paths;
  j["k_paths"] = c.k_paths;
  j["noise"] = {{"p1", c.noise.p1}, {"p2", c.noise.p2}, {"eta", c.noise.eta}, {"f0", c.noise.f0}};
  j["link"] = {{"r_local", c.link.r_local}, {"alpha", c.link.alpha_db_per_km}, {"f0", c.link.f0}};
  j["purify_model"] = std::string(to_string(c.model));
  j["timings"] = c.record_timings;
  return j;
}

}  // namespace detail

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "experiment", "instance", "seed",     "source",        "destination", "nodes",       "path_km",
      "grid_size",  "f_lb",     "network_nodes", "strategy", "label",       "EGR",         "Fidelity",
      "Capacity",   "Swaps",    "Purif.",   "Pairs",         "server_time", "solver_time", "hyperedges",
      "status",     "message"};
  return cols;
}

inline nlohmann::json record_to_json(const Record& r) {
  using detail::number_or_null;
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["instance"] = r.instance;
  j["seed"] = r.seed;
  j["source"] = r.source;
  j["destination"] = r.destination;
  j["nodes"] = r.nodes;
  j["path_km"] = r.path_km;
  j["grid_size"] = r.grid_size;
  j["f_lb"] = number_or_null(r.f_lb);
  j["network_nodes"] = r.network_nodes;
  j["strategy"] = r.strategy;
  j["label"] = r.label;
  j["EGR"] = r.egr;
  j["Fidelity"] = r.fidelity;
  j["Capacity"] = r.capacity;
  j["Swaps"] = r.swaps;
  j["Purif."] = r.purifications;
  j["Pairs"] = r.pairs;
  j["server_time"] = number_or_null(r.server_time);
  j["solver_time"] = number_or_null(r.solver_time);
  j["hyperedges"] = r.hyperedges;
  j["status"] = r.status;
  j["message"] = r.message;
  auto ens = nlohmann::json::array();
  for (const auto& e : r.ensembles) ens.push_back({{"fidelity", e.fidelity}, {"rate", e.rate}});
  j["ensembles"] = std::move(ens);
  return j;
}

inline std::string emit_json(const Report& rep) {
  using detail::number_or_null;
  nlohmann::ordered_json doc;
  doc["config"] = detail::config_to_json(rep.config);
  auto records = nlohmann::json::array();
  for (const auto& r : rep.records) records.push_back(record_to_json(r));
  doc["records"] = std::move(records);
  auto summary = nlohmann::json::array();
  for (const auto& s : rep.summary) {
    nlohmann::json j;
    j["strategy"] = s.strategy;
    j["label"] = s.label;
    j["nodes"] = s.nodes;
    j["grid_size"] = s.grid_size;
    j["f_lb"] = number_or_null(s.f_lb);
    j["network_nodes"] = s.network_nodes;
    j["count"] = s.count;
    j["EGR"] = s.egr;
    j["Fidelity"] = s.fidelity;
    j["Capacity"] = s.capacity;
    j["Swaps"] = s.swaps;
    j["Purif."] = s.purifications;
    j["Pairs"] = s.pairs;
    j["solver_time_p1"] = number_or_null(s.solver_p1);
    j["solver_time_p50"] = number_or_null(s.solver_p50);
    j["solver_time_p99"] = number_or_null(s.solver_p99);
    j["server_time_p1"] = number_or_null(s.server_p1);
    j["server_time_p50"] = number_or_null(s.server_p50);
    j["server_time_p99"] = number_or_null(s.server_p99);
    j["improvement_vs_rate_dp"] = number_or_null(s.improvement_vs_rate_dp);
    summary.push_back(std::move(j));
  }
  doc["summary"] = std::move(summary);
  doc["failures"] = rep.failures;
  return doc.dump(2) + "\n";
}

// Per-record table. Numbers carry 6 significant digits; NaN becomes an
// empty cell.
inline std::string emit_csv(const Report& rep) {
  using detail::csv_number;
  using detail::csv_text;
  std::string out;
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_text(cols[i]);
  out += '\n';
  for (const auto& r : rep.records) {
    const std::vector<std::string> cells{csv_text(r.experiment),
                                         std::to_string(r.instance),
                                         std::to_string(r.seed),
                                         csv_text(r.source),
                                         csv_text(r.destination),
                                         std::to_string(r.nodes),
                                         csv_number(r.path_km),
                                         std::to_string(r.grid_size),
                                         csv_number(r.f_lb),
                                         std::to_string(r.network_nodes),
                                         csv_text(r.strategy),
                                         csv_text(r.label),
                                         csv_number(r.egr),
                                         csv_number(r.fidelity),
                                         csv_number(r.capacity),
                                         csv_number(r.swaps),
                                         csv_number(r.purifications),
                                         std::to_string(r.pairs),
                                         csv_number(r.server_time),
                                         csv_number(r.solver_time),
                                         std::to_string(r.hyperedges),
                                         csv_text(r.status),
                                         csv_text(r.message)};
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  }
  return out;
}

}  // namespace qdist
