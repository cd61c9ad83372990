// qdist: command-line front end for topology generation, experiment runs,
// the two-loop controller cache, and the exhaustive reference enumerator.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qdist/qdist.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInstances = 3;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qdist::ConfigError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

bool parse_on_off(const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw qdist::ConfigError("expected on|off, got '" + s + "'");
}

qdist::NodeIndex node_by_name(const qdist::Topology& t, const std::string& name) {
  auto idx = t.find(name);
  if (!idx) throw qdist::ConfigError("unknown node '" + name + "'");
  return *idx;
}

// Options shared by several subcommands.
struct Common {
  std::string topology;
  std::uint64_t seed = 1;
  std::vector<std::size_t> grid_sizes;
  std::optional<double> f_lb;
  std::string strategies;
  std::string out = "-";
  std::string format = "json";
  std::size_t workers = 1;
  std::string purify_model = "ideal-dejmps";
  std::string timings = "on";
  double f0 = 0.98, p1 = 0.995, p2 = 0.995, eta = 0.995;
  double r_local = 12000.0, alpha = 0.21;
};

void add_physics(CLI::App* app, Common& c) {
  app->add_option("--purify-model", c.purify_model, "as-printed|ideal-dejmps")
      ->envname("QDIST_PURIFY_MODEL")
      ->check(CLI::IsMember({"as-printed", "ideal-dejmps"}));
  app->add_option("--f0", c.f0, "generated pair fidelity")->envname("QDIST_F0");
  app->add_option("--p1", c.p1, "single-qubit gate fidelity")->envname("QDIST_P1");
  app->add_option("--p2", c.p2, "two-qubit gate fidelity")->envname("QDIST_P2");
  app->add_option("--eta", c.eta, "measurement fidelity")->envname("QDIST_ETA");
  app->add_option("--r-local", c.r_local, "pair rate at zero distance, pairs/s")->envname("QDIST_R_LOCAL");
  app->add_option("--alpha", c.alpha, "fiber attenuation, dB/km")->envname("QDIST_ALPHA");
}

qdist::NoiseParams noise_of(const Common& c) {
  qdist::NoiseParams n{c.p1, c.p2, c.eta, c.f0};
  n.validate();
  return n;
}

qdist::LinkDefaults link_of(const Common& c) {
  if (!(c.r_local > 0.0) || !(c.alpha >= 0.0) || !(c.f0 > 0.25 && c.f0 <= 1.0))
    throw qdist::ConfigError("invalid link parameters");
  return {c.r_local, c.alpha, c.f0};
}

int run_topo_gen(const Common& c, std::size_t nodes, double bbox, double dmin, double dmax) {
  qdist::GabrielOptions g;
  g.nodes = nodes;
  g.seed = c.seed;
  g.bbox_km = bbox;
  if (dmin > 0.0 || dmax > 0.0) g.distance_range_km = std::make_pair(dmin, dmax);
  g.params = link_of(c);
  const auto t = qdist::generate_gabriel(g);
  write_output(c.out, qdist::topology_to_json(t, g.params).dump(2) + "\n");
  return 0;
}

int run_topo_validate(const Common& c) {
  if (c.topology.empty()) throw qdist::ConfigError("--topology is required");
  const auto t = qdist::load_topology_file(c.topology, link_of(c));
  std::size_t reachable = 0;
  if (t.node_count() > 0)
    for (qdist::NodeIndex v = 1; v < t.node_count(); ++v)
      if (qdist::shortest_path(t, 0, v)) ++reachable;
  nlohmann::json j{{"nodes", t.node_count()},
                   {"edges", t.edges().size()},
                   {"connected", t.node_count() == 0 || reachable + 1 == t.node_count()}};
  write_output(c.out, j.dump(2) + "\n");
  return 0;
}

int run_experiment_cmd(const Common& c, const std::string& kind_name, std::optional<std::size_t> reps,
                       const std::string& lengths, const std::string& sizes, std::optional<std::size_t> topo_nodes) {
  auto cfg = qdist::default_experiment(qdist::parse_experiment_kind(kind_name));
  if (!c.topology.empty()) cfg.topology_file = c.topology;
  cfg.seed = c.seed;
  cfg.topology_seed = c.seed;
  if (!c.grid_sizes.empty()) cfg.grid_sizes = c.grid_sizes;
  if (c.f_lb) cfg.f_lb = *c.f_lb;
  if (!c.strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : split_list(c.strategies)) cfg.strategies.push_back(qdist::parse_strategy(s));
  }
  if (reps) cfg.repetitions = *reps;
  if (!lengths.empty()) {
    cfg.path_lengths.clear();
    for (const auto& s : split_list(lengths)) cfg.path_lengths.push_back(std::stoul(s));
  }
  if (!sizes.empty()) {
    cfg.network_sizes.clear();
    for (const auto& s : split_list(sizes)) cfg.network_sizes.push_back(std::stoul(s));
  }
  if (topo_nodes) cfg.topology_nodes = *topo_nodes;
  cfg.workers = c.workers;
  cfg.model = qdist::parse_purify_model(c.purify_model);
  cfg.noise = noise_of(c);
  cfg.link = link_of(c);
  cfg.record_timings = parse_on_off(c.timings);
  if (c.format != "json" && c.format != "csv") throw qdist::ConfigError("format must be csv or json");

  const auto report = qdist::run_experiment(cfg);
  write_output(c.out, c.format == "csv" ? qdist::emit_csv(report) : qdist::emit_json(report));
  for (const auto& r : report.records)
    if (r.status != "ok")
      std::cerr << "instance " << r.instance << " (" << r.strategy << "): " << r.message << "\n";
  return report.failures > 0 ? kExitInstances : 0;
}

std::vector<std::pair<qdist::NodeIndex, qdist::NodeIndex>> parse_demands(const qdist::Topology& t,
                                                                       const std::string& spec) {
  std::vector<std::pair<qdist::NodeIndex, qdist::NodeIndex>> out;
  for (const auto& item : split_list(spec)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw qdist::ConfigError("demand '" + item + "' is not of the form s:d");
    out.emplace_back(node_by_name(t, item.substr(0, colon)), node_by_name(t, item.substr(colon + 1)));
  }
  if (out.empty()) throw qdist::ConfigError("at least one demand is required");
  return out;
}

qdist::CodeConfig code_config(const Common& c, std::size_t n, std::size_t k, double t_outer) {
  qdist::CodeConfig cc;
  cc.n_paths = n;
  cc.k_paths = k;
  cc.t_outer = t_outer;
  cc.grid = qdist::FidelityGrid::uniform(c.grid_sizes.empty() ? 100 : c.grid_sizes.front());
  cc.noise = noise_of(c);
  cc.model = qdist::parse_purify_model(c.purify_model);
  cc.workers = c.workers;
  cc.validate();
  return cc;
}

// The outer loop reruns every t_outer seconds for `epochs` rounds and
// rewrites the cache file after each round.
int run_cache_build(const Common& c, const std::string& demands, std::size_t n, std::size_t k, double t_outer,
                    std::size_t epochs) {
  if (c.topology.empty()) throw qdist::ConfigError("--topology is required");
  if (c.out.empty() || c.out == "-") throw qdist::ConfigError("--out must name the cache file");
  if (epochs == 0) throw qdist::ConfigError("epochs must be positive");
  const auto topo = qdist::load_topology_file(c.topology, link_of(c));
  const auto cc = code_config(c, n, k, t_outer);
  const auto dem = parse_demands(topo, demands);
  int status = 0;
  for (std::size_t e = 1; e <= epochs; ++e) {
    const auto start = std::chrono::steady_clock::now();
    const auto cache = qdist::outer_loop_update(topo, dem, cc, e);
    write_output(c.out, qdist::save_cache_string(cache));
    for (const auto& [key, entry] : cache.entries)
      if (!entry.hypergraph) {
        std::cerr << "no path " << key.first << " -> " << key.second << "\n";
        status = kExitInstances;
      }
    if (e < epochs)
      std::this_thread::sleep_until(start + std::chrono::duration<double>(cc.t_outer));
  }
  return status;
}

int run_cache_solve(const Common& c, const std::string& cache_path, const std::string& demands) {
  std::ifstream in(cache_path, std::ios::binary);
  if (!in) throw qdist::ConfigError("cannot open cache '" + cache_path + "'");
  const auto cache = qdist::load_cache(in);
  auto cc = code_config(c, 5, 3, 60.0);
  const bool timings = parse_on_off(c.timings);
  std::vector<std::pair<std::string, std::string>> keys;
  if (demands.empty()) {
    for (const auto& [key, entry] : cache.entries) keys.push_back(key);
  } else {
    for (const auto& item : split_list(demands)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw qdist::ConfigError("demand '" + item + "' is not of the form s:d");
      keys.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    }
  }
  auto out = nlohmann::json::array();
  int status = 0;
  for (const auto& [s, d] : keys) {
    const auto r = qdist::inner_loop_request(cache, s, d, cc);
    nlohmann::json j = qdist::scheme_to_json(r.scheme);
    j["source"] = s;
    j["destination"] = d;
    j["found"] = r.found;
    j["status"] = qdist::to_string(r.status);
    j["diagnostic"] = r.diagnostic;
    j["over_budget"] = r.over_budget;
    if (timings) j["solver_time"] = r.solver_time;
    if (!r.found || r.status != qdist::LPStatus::Optimal) status = kExitInstances;
    out.push_back(std::move(j));
  }
  write_output(c.out, out.dump(2) + "\n");
  return status;
}

int run_oracle(const Common& c, const std::string& lengths, const std::string& path_nodes, std::size_t rounds,
               bool bucket_moves) {
  std::optional<qdist::Topology> topo;
  std::vector<qdist::NodeIndex> nodes;
  if (!c.topology.empty()) {
    topo = qdist::load_topology_file(c.topology, link_of(c));
    for (const auto& n : split_list(path_nodes)) nodes.push_back(node_by_name(*topo, n));
  } else {
    std::vector<double> km;
    for (const auto& s : split_list(lengths.empty() ? std::string("50,50") : lengths)) km.push_back(std::stod(s));
    topo = qdist::Topology::line(km, link_of(c));
    for (std::size_t i = 0; i <= km.size(); ++i) nodes.push_back(i);
  }
  const auto path = topo->make_path(nodes);
  const std::size_t g = c.grid_sizes.empty() ? 6 : c.grid_sizes.front();
  const auto grid = qdist::FidelityGrid::uniform(g);
  const auto noise = noise_of(c);
  const auto model = qdist::parse_purify_model(c.purify_model);
  qdist::OracleOptions oo;
  oo.max_purify_rounds = rounds;
  oo.bucket_moves = bucket_moves;
  const auto oracle = qdist::brute_force_oracle(*topo, path, grid, noise, oo, model);
  qdist::StrategyOptions so;
  so.grid = grid;
  so.noise = noise;
  so.model = model;
  const auto code = qdist::run_code_path(*topo, path, so);

  nlohmann::json j;
  j["swap_orders"] = oracle.swap_orders;
  j["protocols"] = oracle.protocols.size();
  j["best_capacity"] = oracle.best_capacity;
  j["best_tree"] = oracle.best ? nlohmann::json(oracle.protocols[*oracle.best].tree) : nlohmann::json(nullptr);
  j["mixture_capacity"] = oracle.mixture_capacity;
  j["code"] = qdist::strategy_result_to_json(code, parse_on_off(c.timings));
  write_output(c.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement distribution planner and experiment harness"};
  app.require_subcommand(1);
  Common c;

  auto* topo = app.add_subcommand("topo", "generate or check topologies");
  topo->require_subcommand(1);
  auto* gen = topo->add_subcommand("gen", "write a seeded Gabriel topology as JSON");
  std::size_t gen_nodes = 100;
  double gen_bbox = 1000.0, dmin = 0.0, dmax = 0.0;
  gen->add_option("--nodes", gen_nodes, "node count");
  gen->add_option("--seed", c.seed)->envname("QDIST_SEED");
  gen->add_option("--bbox-km", gen_bbox, "side of the placement square");
  gen->add_option("--min-km", dmin, "resample link lengths uniformly from [min, max]");
  gen->add_option("--max-km", dmax);
  gen->add_option("--out", c.out)->envname("QDIST_OUT");
  add_physics(gen, c);
  auto* val = topo->add_subcommand("validate", "load a JSON or GML topology and report its shape");
  val->add_option("--topology", c.topology)->required()->envname("QDIST_TOPOLOGY");
  val->add_option("--out", c.out);
  add_physics(val, c);

  auto* run = app.add_subcommand("run", "run an experiment and write a report");
  std::string kind;
  std::optional<std::size_t> reps, topo_nodes;
  std::string lengths, sizes;
  run->add_option("kind", kind, "benchmark|sweep-flb|sweep-resolution|scale-path|scale-network|intro-toy")->required();
  run->add_option("--topology", c.topology, "JSON or GML file; a Gabriel graph is generated otherwise")
      ->envname("QDIST_TOPOLOGY");
  run->add_option("--seed", c.seed)->envname("QDIST_SEED");
  run->add_option("--grid-size", c.grid_sizes, "fidelity grid sizes")->delimiter(',')->envname("QDIST_GRID_SIZE");
  run->add_option("--f-lb", c.f_lb, "fidelity lower bound")->envname("QDIST_F_LB");
  run->add_option("--strategies", c.strategies, "comma list of Rate-DP,Rate-LP,EC-LP,CODE")->envname("QDIST_STRATEGIES");
  run->add_option("--out", c.out)->envname("QDIST_OUT");
  run->add_option("--format", c.format, "csv|json")->envname("QDIST_FORMAT");
  run->add_option("--workers", c.workers)->envname("QDIST_WORKERS");
  run->add_option("--timings", c.timings, "on|off; off drops wall-clock fields")->envname("QDIST_TIMINGS");
  run->add_option("--repetitions", reps, "instances per setting")->envname("QDIST_REPETITIONS");
  run->add_option("--path-lengths", lengths, "comma list of path node counts");
  run->add_option("--network-sizes", sizes, "comma list of node counts (scale-network)");
  run->add_option("--topology-nodes", topo_nodes, "generated topology size");
  add_physics(run, c);

  auto* cache = app.add_subcommand("cache", "controller cache operations");
  cache->require_subcommand(1);
  auto* build = cache->add_subcommand("build", "run the outer loop and store the cache");
  std::string demands;
  std::size_t n_paths = 5, k_paths = 3, epochs = 1;
  double t_outer = 60.0;
  build->add_option("--topology", c.topology)->required()->envname("QDIST_TOPOLOGY");
  build->add_option("--demands", demands, "comma list of s:d node names")->required();
  build->add_option("--n-paths", n_paths);
  build->add_option("--k-paths", k_paths);
  build->add_option("--t-outer", t_outer, "seconds between outer-loop rounds");
  build->add_option("--epochs", epochs, "outer-loop rounds");
  build->add_option("--grid-size", c.grid_sizes)->delimiter(',')->envname("QDIST_GRID_SIZE");
  build->add_option("--workers", c.workers)->envname("QDIST_WORKERS");
  build->add_option("--out", c.out, "cache file")->required()->envname("QDIST_CACHE");
  add_physics(build, c);
  auto* solve = cache->add_subcommand("solve", "serve requests from a cache file");
  std::string cache_path, solve_demands;
  solve->add_option("--cache", cache_path)->required()->envname("QDIST_CACHE");
  solve->add_option("--demands", solve_demands, "comma list of s:d; all cached pairs when absent");
  solve->add_option("--out", c.out);
  solve->add_option("--timings", c.timings)->envname("QDIST_TIMINGS");

  auto* oracle = app.add_subcommand("oracle", "enumerate all protocols on a short path and compare with CODE");
  std::string oracle_lengths, oracle_nodes;
  std::size_t rounds = 2;
  bool bucket_moves = false;
  oracle->add_option("--topology", c.topology)->envname("QDIST_TOPOLOGY");
  oracle->add_option("--path", oracle_nodes, "comma list of node names (with --topology)");
  oracle->add_option("--lengths-km", oracle_lengths, "comma list of link lengths for a line path");
  oracle->add_option("--grid-size", c.grid_sizes)->delimiter(',');
  oracle->add_option("--rounds", rounds, "purification rounds per link pair");
  oracle->add_flag("--bucket-moves", bucket_moves, "only admit purifications that raise the grid bucket");
  oracle->add_option("--out", c.out);
  oracle->add_option("--timings", c.timings);
  add_physics(oracle, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return run_topo_gen(c, gen_nodes, gen_bbox, dmin, dmax);
    if (*val) return run_topo_validate(c);
    if (*run) return run_experiment_cmd(c, kind, reps, lengths, sizes, topo_nodes);
    if (*build) return run_cache_build(c, demands, n_paths, k_paths, t_outer, epochs);
    if (*solve) return run_cache_solve(c, cache_path, solve_demands);
    if (*oracle) return run_oracle(c, oracle_lengths, oracle_nodes, rounds, bucket_moves);
  } catch (const qdist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed number: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
