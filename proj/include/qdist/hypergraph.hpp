#pragma once

// Operation hypergraphs over repeater paths. Vertices are link states
// (u, v, fidelity) plus a source and a sink; hyper-edges are the start, swap,
// purify and end operations that move entanglement between them.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdist/capacity.hpp"
#include "qdist/error.hpp"
#include "qdist/physics.hpp"
#include "qdist/topology.hpp"

namespace qdist {

// ---------------------------------------------------------------------------
// Fidelity grid
// ---------------------------------------------------------------------------

class FidelityGrid {
 public:
  FidelityGrid() = default;

  explicit FidelityGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("fidelity grid is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] >= 0.5 && values_[i] <= 1.0)) throw ConfigError("fidelity grid values must lie in [0.5, 1]");
      if (i > 0 && !(values_[i] > values_[i - 1])) throw ConfigError("fidelity grid must be strictly increasing");
    }
  }

  // n values 0.5 + 0.5 i / n, i = 0..n-1. Values are snapped to 12 decimals so
  // that grid points such as 0.98 compare equal to the same literal elsewhere.
  static FidelityGrid uniform(std::size_t n) {
    if (n == 0) throw ConfigError("fidelity grid size must be positive");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = std::round((0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(n)) * 1e12) / 1e12;
    return FidelityGrid(std::move(v));
  }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  bool operator==(const FidelityGrid&) const = default;

  // Index of the largest grid value <= f (the bucket [f_k, f_{k+1}) holding f;
  // the last bucket extends to 1). Empty when f is below the lowest value.
  std::optional<std::size_t> round_down(double f) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), f + kTolerance);
    if (it == values_.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - values_.begin() - 1);
  }

  static constexpr double kTolerance = 1e-12;

 private:
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Hypergraph data model
// ---------------------------------------------------------------------------

enum class VertexKind { Source, Sink, Link };
enum class OpKind { Start, Swap, Purify, End };
enum class BuildKind { Standard, Pruned, Synthesized };

inline std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::Start: return "start";
    case OpKind::Swap: return "swap";
    case OpKind::Purify: return "purify";
    case OpKind::End: return "end";
  }
  return "?";
}

inline std::string_view to_string(BuildKind k) {
  switch (k) {
    case BuildKind::Standard: return "standard";
    case BuildKind::Pruned: return "pruned";
    case BuildKind::Synthesized: return "synthesized";
  }
  return "?";
}

struct HyperVertex {
  VertexKind kind = VertexKind::Link;
  std::size_t path = 0;  // index into Hypergraph::paths
  std::size_t a = 0;     // position of u along that path
  std::size_t b = 0;     // position of v, a < b
  NodeIndex u = 0;
  NodeIndex v = 0;
  double fidelity = 0.0;  // exact continuous value
  int bucket = -1;        // grid index (standard) or interval index (pruned)
  double rate = 0.0;      // best DP rate of this incumbent (pruned builds)
};

struct HyperEdge {
  OpKind op = OpKind::Start;
  std::vector<std::size_t> inputs;  // distinct vertices; a self-paired purify has one
  std::size_t output = 0;
  double rate_bound = 0.0;
  double p_succ = 1.0;
  double capacity_coeff = 0.0;  // bits per pair, end edges only
  int group = -1;               // generation-limit group, start edges only
};

// Start edges that draw from the same physical link share one of these.
struct LinkGroup {
  std::size_t topo_edge = 0;
  double rate_limit = 0.0;  // r_e
};

struct HypergraphStats {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t start = 0;
  std::size_t swap = 0;
  std::size_t purify = 0;
  std::size_t end = 0;
  double build_seconds = 0.0;
};

struct Hypergraph {
  static constexpr std::size_t kSource = 0;
  static constexpr std::size_t kSink = 1;

  BuildKind kind = BuildKind::Standard;
  NodeIndex s = 0;
  NodeIndex d = 0;
  std::vector<Path> paths;
  FidelityGrid grid;
  NoiseParams noise;
  PurifyModel model = PurifyModel::IdealDejmps;
  std::vector<HyperVertex> vertices;
  std::vector<HyperEdge> edges;
  std::vector<LinkGroup> groups;
  double build_seconds = 0.0;

  std::size_t add_vertex(const HyperVertex& v) {
    vertices.push_back(v);
    return vertices.size() - 1;
  }
  std::size_t add_edge(HyperEdge e) {
    edges.push_back(std::move(e));
    return edges.size() - 1;
  }
};

inline HypergraphStats hypergraph_stats(const Hypergraph& hg) {
  HypergraphStats s;
  s.vertices = hg.vertices.size();
  s.edges = hg.edges.size();
  for (const auto& e : hg.edges) {
    switch (e.op) {
      case OpKind::Start: ++s.start; break;
      case OpKind::Swap: ++s.swap; break;
      case OpKind::Purify: ++s.purify; break;
      case OpKind::End: ++s.end; break;
    }
  }
  s.build_seconds = hg.build_seconds;
  return s;
}

// Number of hypergraphs built or synthesized in this process. Lets callers
// prove that a code path performs no construction.
inline std::atomic<std::uint64_t>& hypergraph_build_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

// Vertices in an order where every edge's inputs precede its output. Throws
// if the graph has a cycle.
inline std::vector<std::size_t> topological_order(const Hypergraph& hg) {
  const std::size_t n = hg.vertices.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : hg.edges) {
    for (auto in : e.inputs) out[in].push_back(e.output);
    indeg[e.output] += e.inputs.size();
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(i);
  while (!ready.empty()) {
    auto x = ready.front();
    ready.pop();
    order.push_back(x);
    for (auto y : out[x])
      if (--indeg[y] == 0) ready.push(y);
  }
  if (order.size() != n) throw ValidationError("hypergraph contains a cycle");
  return order;
}

// Structural checks on every vertex and edge; throws ValidationError.
inline void validate_hypergraph(const Hypergraph& hg) {
  const std::size_t n = hg.vertices.size();
  if (n < 2 || hg.vertices[Hypergraph::kSource].kind != VertexKind::Source ||
      hg.vertices[Hypergraph::kSink].kind != VertexKind::Sink)
    throw ValidationError("hypergraph must start with source and sink vertices");
  for (std::size_t i = 2; i < n; ++i) {
    const auto& v = hg.vertices[i];
    if (v.kind != VertexKind::Link) throw ValidationError("extra terminal vertex");
    if (v.path >= hg.paths.size() || v.a >= v.b || v.b >= hg.paths[v.path].nodes.size())
      throw ValidationError("vertex span is invalid");
  }
  auto link = [&](std::size_t id) -> const HyperVertex& {
    if (id >= n || hg.vertices[id].kind != VertexKind::Link) throw ValidationError("edge references a non-link vertex");
    return hg.vertices[id];
  };
  for (const auto& e : hg.edges) {
    if (e.output >= n) throw ValidationError("edge output out of range");
    if (!(e.p_succ >= 0.0 && e.p_succ <= 1.0)) throw ValidationError("success probability outside [0, 1]");
    switch (e.op) {
      case OpKind::Start: {
        if (e.inputs.size() != 1 || e.inputs[0] != Hypergraph::kSource) throw ValidationError("start edge must consume the source");
        const auto& o = link(e.output);
        if (o.b != o.a + 1) throw ValidationError("start edge must produce a physical link");
        if (e.group < 0 || static_cast<std::size_t>(e.group) >= hg.groups.size())
          throw ValidationError("start edge without a generation-limit group");
        if (hg.groups[static_cast<std::size_t>(e.group)].topo_edge != hg.paths[o.path].edges[o.a])
          throw ValidationError("start edge group does not match its physical link");
        break;
      }
      case OpKind::Swap: {
        if (e.inputs.size() != 2) throw ValidationError("swap edge needs two inputs");
        const auto& x = link(e.inputs[0]);
        const auto& y = link(e.inputs[1]);
        const auto& o = link(e.output);
        if (x.path != o.path || y.path != o.path || x.a != o.a || y.b != o.b || x.b != y.a)
          throw ValidationError("swap inputs must meet at one intermediate node and span the output");
        break;
      }
      case OpKind::Purify: {
        if (e.inputs.empty() || e.inputs.size() > 2) throw ValidationError("purify edge needs one or two inputs");
        const auto& o = link(e.output);
        for (auto in : e.inputs) {
          const auto& x = link(in);
          if (x.path != o.path || x.a != o.a || x.b != o.b) throw ValidationError("purify inputs must share both endpoints");
        }
        break;
      }
      case OpKind::End: {
        if (e.output != Hypergraph::kSink || e.inputs.size() != 1) throw ValidationError("end edge must feed the sink");
        const auto& x = link(e.inputs[0]);
        if (x.a != 0 || x.b + 1 != hg.paths[x.path].nodes.size()) throw ValidationError("end edge input must span the path");
        break;
      }
    }
  }
  topological_order(hg);
  std::vector<char> seen(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : hg.edges)
    for (auto in : e.inputs) out[in].push_back(e.output);
  std::vector<std::size_t> stack{Hypergraph::kSource};
  seen[Hypergraph::kSource] = 1;
  while (!stack.empty()) {
    auto x = stack.back();
    stack.pop_back();
    for (auto y : out[x])
      if (!seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
  }
  for (std::size_t i = 2; i < n; ++i)
    if (!seen[i]) throw ValidationError("vertex unreachable from the source");
}

namespace detail {

inline Hypergraph empty_hypergraph(const Topology& topo, const Path& path, const FidelityGrid& grid,
                                   const NoiseParams& noise, PurifyModel model, BuildKind kind) {
  if (path.nodes.size() < 2) throw ConfigError("hypergraph needs a path with at least 2 nodes");
  if (path.edges.size() + 1 != path.nodes.size()) throw ValidationError("path edge list does not match its nodes");
  for (std::size_t i = 0; i < path.edges.size(); ++i) {
    const auto& e = topo.edge(path.edges[i]);
    const bool fwd = e.u == path.nodes[i] && e.v == path.nodes[i + 1];
    const bool rev = e.v == path.nodes[i] && e.u == path.nodes[i + 1];
    if (!fwd && !rev) throw ValidationError("path edge does not join consecutive path nodes");
  }
  if (grid.empty()) throw ConfigError("fidelity grid is empty");
  noise.validate();
  Hypergraph hg;
  hg.kind = kind;
  hg.s = path.nodes.front();
  hg.d = path.nodes.back();
  hg.paths = {path};
  hg.grid = grid;
  hg.noise = noise;
  hg.model = model;
  HyperVertex src, snk;
  src.kind = VertexKind::Source;
  snk.kind = VertexKind::Sink;
  hg.add_vertex(src);
  hg.add_vertex(snk);
  return hg;
}

inline HyperVertex link_vertex(const Path& p, std::size_t a, std::size_t b, double f, int bucket, double rate = 0.0) {
  HyperVertex v;
  v.kind = VertexKind::Link;
  v.path = 0;
  v.a = a;
  v.b = b;
  v.u = p.nodes[a];
  v.v = p.nodes[b];
  v.fidelity = f;
  v.bucket = bucket;
  v.rate = rate;
  return v;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Standard builder: every fidelity is rounded down onto the grid and every
// swap and purification between reachable grid states becomes an edge.
// ---------------------------------------------------------------------------

inline Hypergraph build_standard_hypergraph(const Topology& topo, const Path& path, const FidelityGrid& grid,
                                            const NoiseParams& noise,
                                            PurifyModel model = PurifyModel::IdealDejmps) {
  const auto t0 = std::chrono::steady_clock::now();
  Hypergraph hg = detail::empty_hypergraph(topo, path, grid, noise, model, BuildKind::Standard);
  const std::size_t n = path.nodes.size();
  const std::size_t nf = grid.size();
  std::vector<std::vector<std::int64_t>> block(n * n);
  auto slot = [&](std::size_t a, std::size_t b) -> std::vector<std::int64_t>& {
    auto& s = block[a * n + b];
    if (s.empty()) s.assign(nf, -1);
    return s;
  };
  auto vertex_at = [&](std::size_t a, std::size_t b, std::size_t k) {
    auto& s = slot(a, b);
    if (s[k] < 0) s[k] = static_cast<std::int64_t>(hg.add_vertex(detail::link_vertex(path, a, b, grid[k], static_cast<int>(k))));
    return static_cast<std::size_t>(s[k]);
  };

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& e = topo.edge(path.edges[i]);
    hg.groups.push_back({path.edges[i], link_egr(e)});
    auto k = grid.round_down(e.f0);
    if (!k) continue;
    HyperEdge he;
    he.op = OpKind::Start;
    he.inputs = {Hypergraph::kSource};
    he.output = vertex_at(i, i + 1, *k);
    he.group = static_cast<int>(i);
    he.rate_bound = link_egr(e);
    hg.add_edge(std::move(he));
  }

  for (std::size_t span = 1; span < n; ++span) {
    for (std::size_t a = 0; a + span < n; ++a) {
      const std::size_t b = a + span;
      for (std::size_t m = a + 1; m < b; ++m) {
        const auto& left = slot(a, m);
        const auto& right = slot(m, b);
        for (std::size_t i = 0; i < nf; ++i) {
          if (left[i] < 0) continue;
          for (std::size_t j = 0; j < nf; ++j) {
            if (right[j] < 0) continue;
            auto k = grid.round_down(swap_fidelity(grid[i], grid[j], noise));
            if (!k) continue;
            HyperEdge he;
            he.op = OpKind::Swap;
            he.inputs = {static_cast<std::size_t>(left[i]), static_cast<std::size_t>(right[j])};
            he.output = vertex_at(a, b, *k);
            hg.add_edge(std::move(he));
          }
        }
      }
      // Purification only moves upward in the grid, so one ascending sweep
      // sees every pair of states that can exist in this block.
      for (std::size_t x = 0; x < nf; ++x) {
        if (slot(a, b)[x] < 0) continue;
        for (std::size_t y = 0; y <= x; ++y) {
          const auto vy = slot(a, b)[y];
          if (vy < 0) continue;
          const auto o = purify(grid[x], grid[y], noise, model);
          auto k = grid.round_down(o.fidelity);
          if (!k || *k <= x) continue;
          HyperEdge he;
          he.op = OpKind::Purify;
          const auto vx = static_cast<std::size_t>(slot(a, b)[x]);
          he.inputs = x == y ? std::vector<std::size_t>{vx} : std::vector<std::size_t>{static_cast<std::size_t>(vy), vx};
          he.p_succ = o.probability;
          he.output = vertex_at(a, b, *k);
          hg.add_edge(std::move(he));
        }
      }
    }
  }

  const auto& final_block = slot(0, n - 1);
  for (std::size_t k = 0; k < nf; ++k) {
    if (final_block[k] < 0) continue;
    HyperEdge he;
    he.op = OpKind::End;
    he.inputs = {static_cast<std::size_t>(final_block[k])};
    he.output = Hypergraph::kSink;
    he.capacity_coeff = pair_capacity(grid[k]);
    hg.add_edge(std::move(he));
  }

  topological_order(hg);
  hg.build_seconds = detail::seconds_since(t0);
  hypergraph_build_counter().fetch_add(1, std::memory_order_relaxed);
  return hg;
}

// ---------------------------------------------------------------------------
// Pruned builder: dynamic programming over span lengths that keeps, per node
// pair and fidelity bucket, a single incumbent holding its exact fidelity and
// the best rate found for it.
// ---------------------------------------------------------------------------

struct DpOptions {
  PurifyModel model = PurifyModel::IdealDejmps;
  // Snap every fidelity to its bucket's grid value instead of keeping it exact.
  bool round_down = false;
  // Only allow purifications that consume the block's base state (the
  // highest-rate state reachable without purification).
  bool pumping_only = false;
  // Rate credited to a purification of two distinct states. By default the DP
  // uses the same accounting as the LP balance rows (1/2 * p per unit taken
  // from each input), so incumbents are ranked by rates the LP can realize.
  // Set to false for the per-attempt rate min(r_i, r_j) * p.
  bool lp_consistent_purify = true;
};

inline Hypergraph build_pruned_hypergraph(const Topology& topo, const Path& path, const FidelityGrid& grid,
                                          const NoiseParams& noise, const DpOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Hypergraph hg = detail::empty_hypergraph(topo, path, grid, noise, opt.model, BuildKind::Pruned);
  const std::size_t n = path.nodes.size();
  const std::size_t nf = grid.size();

  struct Candidate {
    bool present = false;
    double f = 0.0;
    double r = 0.0;
    OpKind op = OpKind::Start;
    std::vector<std::size_t> inputs;
    double p = 1.0;
    int group = -1;
  };
  auto offer = [](Candidate& c, Candidate next) {
    if (!c.present || next.r > c.r || (next.r == c.r && next.f > c.f)) c = std::move(next);
  };
  auto snap = [&](double f) -> std::optional<std::pair<std::size_t, double>> {
    auto k = grid.round_down(f);
    if (!k) return std::nullopt;
    return std::make_pair(*k, opt.round_down ? grid[*k] : f);
  };

  // Materialized incumbents per block: vertex id per bucket, -1 if none.
  std::vector<std::vector<std::int64_t>> incumbent(n * n);

  auto settle_block = [&](std::size_t a, std::size_t b, std::vector<Candidate>& cand) {
    auto& inc = incumbent[a * n + b];
    inc.assign(nf, -1);
    std::optional<std::size_t> base;
    for (std::size_t k = 0; k < nf; ++k) {
      if (!cand[k].present) continue;
      if (!base || cand[k].r > cand[*base].r || (cand[k].r == cand[*base].r && cand[k].f > cand[*base].f)) base = k;
    }
    for (std::size_t x = 0; x < nf; ++x) {
      if (!cand[x].present) continue;
      Candidate& c = cand[x];
      const auto vid = hg.add_vertex(detail::link_vertex(path, a, b, c.f, static_cast<int>(x), c.r));
      inc[x] = static_cast<std::int64_t>(vid);
      HyperEdge he;
      he.op = c.op;
      he.inputs = c.inputs;
      he.output = vid;
      he.p_succ = c.p;
      he.group = c.group;
      he.rate_bound = c.r;
      hg.add_edge(std::move(he));

      for (std::size_t y = 0; y <= x; ++y) {
        if (inc[y] < 0) continue;
        if (opt.pumping_only && y != base && x != base) continue;
        const auto& vx = hg.vertices[vid];
        const auto& vy = hg.vertices[static_cast<std::size_t>(inc[y])];
        const auto o = purify(vx.fidelity, vy.fidelity, noise, opt.model);
        auto s = snap(o.fidelity);
        if (!s || s->first <= x) continue;
        Candidate next;
        next.present = true;
        next.f = s->second;
        next.op = OpKind::Purify;
        next.p = o.probability;
        if (y == x) {
          next.r = 0.5 * vx.rate * o.probability;
          next.inputs = {vid};
        } else {
          next.r = (opt.lp_consistent_purify ? 0.5 : 1.0) * std::min(vx.rate, vy.rate) * o.probability;
          next.inputs = {static_cast<std::size_t>(inc[y]), vid};
        }
        offer(cand[s->first], std::move(next));
      }
    }
  };

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& e = topo.edge(path.edges[i]);
    const double re = link_egr(e);
    hg.groups.push_back({path.edges[i], re});
    std::vector<Candidate> cand(nf);
    if (auto s = snap(e.f0)) {
      Candidate c;
      c.present = true;
      c.f = s->second;
      c.r = re;
      c.op = OpKind::Start;
      c.inputs = {Hypergraph::kSource};
      c.group = static_cast<int>(i);
      cand[s->first] = std::move(c);
    }
    settle_block(i, i + 1, cand);
  }

  for (std::size_t span = 2; span < n; ++span) {
    for (std::size_t a = 0; a + span < n; ++a) {
      const std::size_t b = a + span;
      std::vector<Candidate> cand(nf);
      for (std::size_t m = a + 1; m < b; ++m) {
        const auto& left = incumbent[a * n + m];
        const auto& right = incumbent[m * n + b];
        for (std::size_t i = 0; i < nf; ++i) {
          if (left[i] < 0) continue;
          const auto& vi = hg.vertices[static_cast<std::size_t>(left[i])];
          for (std::size_t j = 0; j < nf; ++j) {
            if (right[j] < 0) continue;
            const auto& vj = hg.vertices[static_cast<std::size_t>(right[j])];
            auto s = snap(swap_fidelity(vi.fidelity, vj.fidelity, noise));
            if (!s) continue;
            Candidate c;
            c.present = true;
            c.f = s->second;
            c.r = std::min(vi.rate, vj.rate);
            c.op = OpKind::Swap;
            c.inputs = {static_cast<std::size_t>(left[i]), static_cast<std::size_t>(right[j])};
            offer(cand[s->first], std::move(c));
          }
        }
      }
      settle_block(a, b, cand);
    }
  }

  const auto& last = incumbent[n - 1];
  for (std::size_t k = 0; k < nf; ++k) {
    if (last[k] < 0) continue;
    const auto vid = static_cast<std::size_t>(last[k]);
    HyperEdge he;
    he.op = OpKind::End;
    he.inputs = {vid};
    he.output = Hypergraph::kSink;
    he.capacity_coeff = pair_capacity(hg.vertices[vid].fidelity);
    he.rate_bound = hg.vertices[vid].rate;
    hg.add_edge(std::move(he));
  }

  topological_order(hg);
  hg.build_seconds = detail::seconds_since(t0);
  hypergraph_build_counter().fetch_add(1, std::memory_order_relaxed);
  return hg;
}

// ---------------------------------------------------------------------------
// Multi-path synthesis: disjoint union with one source, one sink, and one
// generation-limit group per physical link shared by all paths using it.
// ---------------------------------------------------------------------------

inline Hypergraph synthesize_multipath(std::span<const Hypergraph> parts) {
  const auto t0 = std::chrono::steady_clock::now();
  if (parts.empty()) throw ConfigError("synthesis needs at least one hypergraph");
  const auto& first = parts.front();
  Hypergraph out;
  out.kind = BuildKind::Synthesized;
  out.s = first.s;
  out.d = first.d;
  out.grid = first.grid;
  out.noise = first.noise;
  out.model = first.model;
  out.vertices = {first.vertices[Hypergraph::kSource], first.vertices[Hypergraph::kSink]};

  std::map<std::size_t, int> group_of_link;
  for (const auto& hg : parts) {
    if (hg.s != first.s || hg.d != first.d) throw ConfigError("synthesis inputs must share source and destination");
    if (!(hg.grid == first.grid)) throw ConfigError("synthesis inputs must share the fidelity grid");
    if (!(hg.noise == first.noise) || hg.model != first.model) throw ConfigError("synthesis inputs must share the noise model");

    const std::size_t path_offset = out.paths.size();
    out.paths.insert(out.paths.end(), hg.paths.begin(), hg.paths.end());

    std::vector<std::size_t> vmap(hg.vertices.size());
    vmap[Hypergraph::kSource] = Hypergraph::kSource;
    vmap[Hypergraph::kSink] = Hypergraph::kSink;
    for (std::size_t i = 2; i < hg.vertices.size(); ++i) {
      HyperVertex v = hg.vertices[i];
      v.path += path_offset;
      vmap[i] = out.add_vertex(v);
    }

    std::vector<int> gmap(hg.groups.size());
    for (std::size_t g = 0; g < hg.groups.size(); ++g) {
      const auto& lg = hg.groups[g];
      auto it = group_of_link.find(lg.topo_edge);
      if (it == group_of_link.end()) {
        out.groups.push_back(lg);
        it = group_of_link.emplace(lg.topo_edge, static_cast<int>(out.groups.size() - 1)).first;
      } else if (out.groups[static_cast<std::size_t>(it->second)].rate_limit != lg.rate_limit) {
        throw ConfigError("synthesis inputs disagree on a link's generation rate");
      }
      gmap[g] = it->second;
    }

    for (const auto& e : hg.edges) {
      HyperEdge c = e;
      for (auto& in : c.inputs) in = vmap[in];
      c.output = vmap[c.output];
      if (c.group >= 0) c.group = gmap[static_cast<std::size_t>(c.group)];
      out.add_edge(std::move(c));
    }
  }
  out.build_seconds = detail::seconds_since(t0);
  hypergraph_build_counter().fetch_add(1, std::memory_order_relaxed);
  return out;
}

// ---------------------------------------------------------------------------
// Single-protocol flow. In a hypergraph where every link vertex has at most one
// producing edge, the states feeding an end vertex form one protocol. This
// computes how many operations of each edge one delivered pair requires, using
// the same accounting as the flow rows of the LP, and the highest sustainable
// delivery rate under the link generation limits.
// ---------------------------------------------------------------------------

struct ProtocolFlow {
  double rate = 0.0;                 // sustainable end-to-end pairs/s
  std::vector<double> per_pair;      // edge executions per delivered pair
  std::vector<double> edge_rates;    // per_pair * rate
  std::size_t end_edge = 0;
};

inline ProtocolFlow single_protocol_flow(const Hypergraph& hg, std::size_t end_edge) {
  if (end_edge >= hg.edges.size() || hg.edges[end_edge].op != OpKind::End)
    throw ConfigError("single_protocol_flow needs an end edge");
  const std::size_t nv = hg.vertices.size();
  std::vector<std::int64_t> producer(nv, -1);
  for (std::size_t i = 0; i < hg.edges.size(); ++i) {
    const auto& e = hg.edges[i];
    if (e.op == OpKind::End) continue;
    if (producer[e.output] >= 0) throw ConfigError("vertex has more than one producing edge");
    producer[e.output] = static_cast<std::int64_t>(i);
  }
  ProtocolFlow pf;
  pf.end_edge = end_edge;
  pf.per_pair.assign(hg.edges.size(), 0.0);
  pf.edge_rates.assign(hg.edges.size(), 0.0);
  std::vector<double> demand(nv, 0.0);
  pf.per_pair[end_edge] = 1.0;
  demand[hg.edges[end_edge].inputs[0]] = 1.0;

  const auto order = topological_order(hg);
  std::vector<double> usage(hg.groups.size(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = *it;
    if (demand[v] <= 0.0 || hg.vertices[v].kind != VertexKind::Link) continue;
    if (producer[v] < 0) throw ConfigError("protocol state has no producing edge");
    const auto pe = static_cast<std::size_t>(producer[v]);
    const auto& e = hg.edges[pe];
    const double credit = e.op == OpKind::Purify ? 0.5 * e.p_succ : 1.0;
    if (!(credit > 0.0)) return pf;
    const double x = demand[v] / credit;
    pf.per_pair[pe] += x;
    if (e.op == OpKind::Start) {
      usage[static_cast<std::size_t>(e.group)] += x;
    } else {
      for (auto in : e.inputs) demand[in] += x;
    }
  }
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < usage.size(); ++g)
    if (usage[g] > 0.0) rate = std::min(rate, hg.groups[g].rate_limit / usage[g]);
  if (!std::isfinite(rate)) rate = 0.0;
  pf.rate = rate;
  for (std::size_t i = 0; i < pf.per_pair.size(); ++i) pf.edge_rates[i] = pf.per_pair[i] * rate;
  return pf;
}

}  // namespace qdist
