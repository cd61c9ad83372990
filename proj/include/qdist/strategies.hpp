#pragma once

// The four routing strategies compared by the harness, plus an exhaustive
// protocol enumerator used as an independent reference on short paths.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdist/capacity.hpp"
#include "qdist/error.hpp"
#include "qdist/formulation.hpp"
#include "qdist/hypergraph.hpp"
#include "qdist/lp.hpp"
#include "qdist/physics.hpp"
#include "qdist/topology.hpp"

namespace qdist {

inline constexpr double kDefaultFidelityLowerBound = 0.87;

enum class Strategy { RateDp, RateLp, EcLp, Code };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::RateDp: return "Rate-DP";
    case Strategy::RateLp: return "Rate-LP";
    case Strategy::EcLp: return "EC-LP";
    case Strategy::Code: return "CODE";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  if (s == "Rate-DP" || s == "rate-dp") return Strategy::RateDp;
  if (s == "Rate-LP" || s == "rate-lp") return Strategy::RateLp;
  if (s == "EC-LP" || s == "ec-lp") return Strategy::EcLp;
  if (s == "CODE" || s == "code") return Strategy::Code;
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

inline std::vector<Strategy> all_strategies() {
  return {Strategy::RateDp, Strategy::RateLp, Strategy::EcLp, Strategy::Code};
}

struct StrategyResult {
  std::string strategy;
  DistributionScheme scheme;
  double egr = 0.0;
  double fidelity = 0.0;
  double capacity = 0.0;
  double swaps = 0.0;
  double purifications = 0.0;
  std::size_t pairs = 0;
  double server_time = 0.0;  // hypergraph and model construction, seconds
  double solver_time = 0.0;  // LP or DP evaluation, seconds
  std::size_t grid_size = 0;
  std::optional<double> f_lb;
  NoiseParams noise;
  PurifyModel model = PurifyModel::IdealDejmps;
  std::size_t hyperedges = 0;
  std::size_t lp_iterations = 0;
};

struct StrategyOptions {
  FidelityGrid grid = FidelityGrid::uniform(100);
  NoiseParams noise;
  PurifyModel model = PurifyModel::IdealDejmps;
  SolverOptions solver;
};

namespace detail {

inline StrategyResult make_result(Strategy s, const StrategyOptions& o, std::optional<double> f_lb) {
  StrategyResult r;
  r.strategy = to_string(s);
  r.grid_size = o.grid.size();
  r.f_lb = f_lb;
  r.noise = o.noise;
  r.model = o.model;
  return r;
}

inline void fill_metrics(StrategyResult& r, DistributionScheme scheme) {
  r.scheme = std::move(scheme);
  r.egr = r.scheme.egr;
  r.fidelity = r.scheme.fidelity;
  r.capacity = r.scheme.capacity;
  r.swaps = r.scheme.swaps;
  r.purifications = r.scheme.purifications;
  r.pairs = r.scheme.pairs;
}

inline void check_f_lb(double f_lb) {
  if (!(f_lb > 0.5 && f_lb < 1.0)) throw ConfigError("fidelity lower bound must lie in (0.5, 1)");
}

inline StrategyResult solve_hypergraph(Strategy s, const Hypergraph& hg, const StrategyOptions& o, ObjectiveKind kind,
                                       std::optional<double> f_lb) {
  auto r = make_result(s, o, f_lb);
  const auto t0 = std::chrono::steady_clock::now();
  auto lp = formulate_lp(hg, kind, f_lb);
  r.server_time = hg.build_seconds + seconds_since(t0);
  const auto sol = solve_lp(lp, o.solver);
  r.solver_time = sol.seconds;
  r.lp_iterations = sol.iterations;
  r.hyperedges = hg.edges.size();
  if (!sol.optimal()) throw Error(std::string(to_string(s)) + ": LP " + to_string(sol.status) + " (" + sol.message + ")");
  fill_metrics(r, extract_scheme(hg, sol));
  return r;
}

}  // namespace detail

// Single-protocol baseline: the bucketed DP with fidelities rounded down and
// purification limited to pumping against the block's base state. Reports the
// highest-rate protocol whose end state meets f_lb.
inline StrategyResult run_rate_dp(const Topology& topo, const Path& path, double f_lb, const StrategyOptions& o = {}) {
  detail::check_f_lb(f_lb);
  auto r = detail::make_result(Strategy::RateDp, o, f_lb);
  DpOptions dp;
  dp.model = o.model;
  dp.round_down = true;
  dp.pumping_only = true;
  const auto hg = build_pruned_hypergraph(topo, path, o.grid, o.noise, dp);
  r.server_time = hg.build_seconds;
  r.hyperedges = hg.edges.size();
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<ProtocolFlow> best;
  for (std::size_t i = 0; i < hg.edges.size(); ++i) {
    const auto& e = hg.edges[i];
    if (e.op != OpKind::End || end_fidelity(hg, e) < f_lb - 1e-12) continue;
    auto pf = single_protocol_flow(hg, i);
    if (pf.rate > 0.0 && (!best || pf.rate > best->rate)) best = std::move(pf);
  }
  DistributionScheme scheme;
  if (best) scheme = extract_scheme(hg, best->edge_rates);
  r.solver_time = detail::seconds_since(t0);
  detail::fill_metrics(r, std::move(scheme));
  return r;
}

// Standard hypergraph, maximize delivered pairs at or above f_lb.
inline StrategyResult run_rate_lp(const Topology& topo, const Path& path, double f_lb, const StrategyOptions& o = {}) {
  detail::check_f_lb(f_lb);
  const auto hg = build_standard_hypergraph(topo, path, o.grid, o.noise, o.model);
  return detail::solve_hypergraph(Strategy::RateLp, hg, o, ObjectiveKind::EndRate, f_lb);
}

// Standard hypergraph, maximize ensemble capacity.
inline StrategyResult run_ec_lp(const Topology& topo, const Path& path, const StrategyOptions& o = {}) {
  const auto hg = build_standard_hypergraph(topo, path, o.grid, o.noise, o.model);
  return detail::solve_hypergraph(Strategy::EcLp, hg, o, ObjectiveKind::EnsembleCapacity, std::nullopt);
}

// Pruned hypergraph, maximize ensemble capacity.
inline StrategyResult run_code_path(const Topology& topo, const Path& path, const StrategyOptions& o = {}) {
  DpOptions dp;
  dp.model = o.model;
  const auto hg = build_pruned_hypergraph(topo, path, o.grid, o.noise, dp);
  return detail::solve_hypergraph(Strategy::Code, hg, o, ObjectiveKind::EnsembleCapacity, std::nullopt);
}

inline StrategyResult run_strategy(Strategy s, const Topology& topo, const Path& path, double f_lb,
                                   const StrategyOptions& o = {}) {
  switch (s) {
    case Strategy::RateDp: return run_rate_dp(topo, path, f_lb, o);
    case Strategy::RateLp: return run_rate_lp(topo, path, f_lb, o);
    case Strategy::EcLp: return run_ec_lp(topo, path, o);
    case Strategy::Code: return run_code_path(topo, path, o);
  }
  throw ConfigError("unknown strategy");
}

// ---------------------------------------------------------------------------
// Exhaustive reference
//
// Enumerates every protocol tree over a short path: all binary swap orders
// (Catalan many) with symmetric purification rounds inserted at any of the
// 2k - 1 intermediate states, evaluated with exact fidelities. Costs follow
// the LP flow rows: a purification debits its input once per execution and
// credits half its success probability, so each output needs 2/p inputs.
// ---------------------------------------------------------------------------

struct OracleOptions {
  std::size_t max_purify_rounds = 2;
  bool mixture = true;  // also solve the LP over the enumerated protocol set
  // Admit a purification only when it lifts the state into a higher grid
  // bucket, the transition rule of the discretized hypergraphs.
  bool bucket_moves = false;
};

struct OracleProtocol {
  std::string tree;
  double fidelity = 0.0;
  std::vector<double> link_use;  // pairs of each path link per delivered pair
  double rate = 0.0;             // sustainable delivered pairs/s alone
  double capacity = 0.0;         // rate * pair_capacity(fidelity)
  std::size_t swaps = 0;
  std::size_t purifications = 0;
};

struct OracleResult {
  std::vector<OracleProtocol> protocols;
  std::size_t swap_orders = 0;          // distinct purification-free trees
  std::optional<std::size_t> best;      // index of the best single protocol
  double best_capacity = 0.0;
  double mixture_capacity = 0.0;        // LP over all enumerated protocols
  std::vector<double> mixture_rates;    // per protocol
};

namespace detail {

// Dense tableau simplex for  max c'x  s.t.  A x <= b,  x >= 0,  b >= 0.
// Bland's rule throughout; only used on the oracle's small mixture problems.
inline double dense_max_leq(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                            const std::vector<double>& c, std::vector<double>* x_out = nullptr) {
  const std::size_t m = a.size(), n = c.size();
  const std::size_t w = n + m + 1;
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(w, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) throw ConfigError("dense_max_leq needs a nonnegative right-hand side");
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1.0;
    t[i][w - 1] = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];
  constexpr double eps = 1e-12;
  for (std::size_t iter = 0; iter < 100000; ++iter) {
    std::size_t q = w;
    for (std::size_t j = 0; j + 1 < w; ++j)
      if (t[m][j] < -eps) {
        q = j;
        break;
      }
    if (q == w) break;
    std::size_t r = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][q] <= eps) continue;
      const double ratio = t[i][w - 1] / t[i][q];
      if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && r < m && basis[i] < basis[r])) {
        best = ratio;
        r = i;
      }
    }
    if (r == m) throw ConfigError("oracle mixture problem is unbounded");
    const double piv = t[r][q];
    for (auto& v : t[r]) v /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || t[i][q] == 0.0) continue;
      const double f = t[i][q];
      for (std::size_t j = 0; j < w; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = q;
  }
  if (x_out) {
    x_out->assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) (*x_out)[basis[i]] = t[i][w - 1];
  }
  return t[m][w - 1];
}

inline std::size_t catalan(std::size_t k) {
  std::size_t c = 1;
  for (std::size_t i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

}  // namespace detail

inline std::size_t swap_order_count(std::size_t links) { return links == 0 ? 0 : detail::catalan(links - 1); }

inline OracleResult brute_force_oracle(const Topology& topo, const Path& path, const FidelityGrid& grid,
                                       const NoiseParams& noise, const OracleOptions& opt = {},
                                       PurifyModel model = PurifyModel::IdealDejmps) {
  const std::size_t k = path.edges.size();
  if (k < 1 || k > 3) throw ConfigError("oracle is limited to paths of 2 to 4 nodes");
  if (grid.size() > 6) throw ConfigError("oracle is limited to fidelity grids of at most 6 values");
  if (opt.max_purify_rounds > 2) throw ConfigError("oracle is limited to 2 purification rounds");
  noise.validate();

  struct Partial {
    std::string tree;
    double f;
    std::vector<double> use;
    std::size_t swaps, purifications;
  };
  const double floor = grid[0];
  const std::size_t rounds = opt.max_purify_rounds;

  // Adds every admissible chain of symmetric purifications on top of p.
  std::function<void(const Partial&, std::vector<Partial>&)> with_purification = [&](const Partial& p,
                                                                                    std::vector<Partial>& out) {
    out.push_back(p);
    if (p.purifications >= rounds) return;
    const auto o = purify(p.f, p.f, noise, model);
    if (!(o.fidelity > p.f) || !(o.probability > 0.0)) return;
    if (opt.bucket_moves && !(grid.round_down(o.fidelity) > grid.round_down(p.f))) return;
    Partial q = p;
    q.tree = "purify(" + p.tree + " x2)";
    q.f = o.fidelity;
    for (auto& u : q.use) u *= 2.0 / o.probability;
    ++q.purifications;
    with_purification(q, out);
  };

  std::vector<std::vector<std::vector<Partial>>> memo(k + 1, std::vector<std::vector<Partial>>(k + 1));
  std::function<const std::vector<Partial>&(std::size_t, std::size_t)> build =
      [&](std::size_t a, std::size_t b) -> const std::vector<Partial>& {
    auto& slot = memo[a][b];
    if (!slot.empty()) return slot;
    std::vector<Partial> raw;
    if (b == a + 1) {
      const auto& e = topo.edge(path.edges[a]);
      Partial p{"L" + std::to_string(a) + "-" + std::to_string(b), e.f0, std::vector<double>(k, 0.0), 0, 0};
      p.use[a] = 1.0;
      if (p.f >= floor - 1e-12) raw.push_back(std::move(p));
    } else {
      for (std::size_t m = a + 1; m < b; ++m) {
        const auto& left = build(a, m);
        const auto& right = build(m, b);
        for (const auto& l : left)
          for (const auto& r : right) {
            if (l.purifications + r.purifications > rounds) continue;
            const double f = swap_fidelity(l.f, r.f, noise);
            if (f < floor - 1e-12) continue;
            Partial p{"swap(" + l.tree + ", " + r.tree + ")", f, std::vector<double>(k, 0.0), l.swaps + r.swaps + 1,
                      l.purifications + r.purifications};
            for (std::size_t i = 0; i < k; ++i) p.use[i] = l.use[i] + r.use[i];
            raw.push_back(std::move(p));
          }
      }
    }
    for (const auto& p : raw) with_purification(p, slot);
    return slot;
  };

  OracleResult res;
  std::vector<double> limits(k);
  for (std::size_t i = 0; i < k; ++i) limits[i] = link_egr(topo.edge(path.edges[i]));
  for (const auto& p : build(0, k)) {
    OracleProtocol op;
    op.tree = p.tree;
    op.fidelity = p.f;
    op.link_use = p.use;
    op.swaps = p.swaps;
    op.purifications = p.purifications;
    op.rate = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i)
      if (p.use[i] > 0.0) op.rate = std::min(op.rate, limits[i] / p.use[i]);
    op.capacity = op.rate * pair_capacity(op.fidelity);
    if (op.purifications == 0) ++res.swap_orders;
    res.protocols.push_back(std::move(op));
  }
  for (std::size_t i = 0; i < res.protocols.size(); ++i)
    if (!res.best || res.protocols[i].capacity > res.best_capacity) {
      res.best = i;
      res.best_capacity = res.protocols[i].capacity;
    }
  if (opt.mixture && !res.protocols.empty()) {
    std::vector<std::vector<double>> a(k, std::vector<double>(res.protocols.size()));
    std::vector<double> c(res.protocols.size());
    for (std::size_t j = 0; j < res.protocols.size(); ++j) {
      c[j] = pair_capacity(res.protocols[j].fidelity);
      for (std::size_t i = 0; i < k; ++i) a[i][j] = res.protocols[j].link_use[i];
    }
    res.mixture_capacity = detail::dense_max_leq(a, limits, c, &res.mixture_rates);
  }
  return res;
}

// Protocol trees of a hypergraph in which every link state has one producer
// (pruned builds): one tree per end edge. The LP over their mixtures uses the
// dense tableau above, independent of the revised simplex.
struct TreeMixture {
  std::size_t trees = 0;
  double best_single = 0.0;
  double mixture_capacity = 0.0;
};

inline TreeMixture hypergraph_tree_mixture(const Hypergraph& hg) {
  TreeMixture out;
  std::vector<std::vector<double>> usage;  // per tree, per group
  std::vector<double> coeff;
  for (std::size_t i = 0; i < hg.edges.size(); ++i) {
    if (hg.edges[i].op != OpKind::End) continue;
    const auto pf = single_protocol_flow(hg, i);
    std::vector<double> u(hg.groups.size(), 0.0);
    for (std::size_t j = 0; j < hg.edges.size(); ++j)
      if (hg.edges[j].op == OpKind::Start) u[static_cast<std::size_t>(hg.edges[j].group)] += pf.per_pair[j];
    usage.push_back(std::move(u));
    coeff.push_back(hg.edges[i].capacity_coeff);
    out.best_single = std::max(out.best_single, pf.rate * hg.edges[i].capacity_coeff);
  }
  out.trees = coeff.size();
  if (coeff.empty()) return out;
  std::vector<std::vector<double>> a(hg.groups.size(), std::vector<double>(coeff.size()));
  std::vector<double> b(hg.groups.size());
  for (std::size_t g = 0; g < hg.groups.size(); ++g) {
    b[g] = hg.groups[g].rate_limit;
    for (std::size_t t = 0; t < coeff.size(); ++t) a[g][t] = usage[t][g];
  }
  out.mixture_capacity = detail::dense_max_leq(a, b, coeff);
  return out;
}

// ---------------------------------------------------------------------------
// JSON views. Metric keys use the report column names.
// ---------------------------------------------------------------------------

inline nlohmann::json scheme_to_json(const DistributionScheme& s) {
  auto ens = nlohmann::json::array();
  for (const auto& e : s.ensembles) {
    auto protos = nlohmann::json::array();
    for (const auto& p : e.protocols) protos.push_back({{"tree", p.tree}, {"rate", p.rate}});
    ens.push_back({{"fidelity", e.fidelity}, {"rate", e.rate}, {"protocols", std::move(protos)}});
  }
  return {{"EGR", s.egr},       {"Fidelity", s.fidelity},          {"Capacity", s.capacity},
          {"Swaps", s.swaps},   {"Purif.", s.purifications},       {"Pairs", s.pairs},
          {"ensembles", std::move(ens)}};
}

inline nlohmann::json strategy_result_to_json(const StrategyResult& r, bool timings = true) {
  auto j = scheme_to_json(r.scheme);
  j["strategy"] = r.strategy;
  j["grid_size"] = r.grid_size;
  j["f_lb"] = r.f_lb ? nlohmann::json(*r.f_lb) : nlohmann::json(nullptr);
  j["purify_model"] = std::string(to_string(r.model));
  j["hyperedges"] = r.hyperedges;
  j["lp_iterations"] = r.lp_iterations;
  if (timings) {
    j["server_time"] = r.server_time;
    j["solver_time"] = r.solver_time;
  }
  return j;
}

}  // namespace qdist
