#pragma once

// Network graph model: repeaters, fiber links, link entanglement generation
// rates, topology ingestion (JSON, GML), Gabriel-graph generation and
// k-shortest loopless path enumeration.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include "qdist/error.hpp"

namespace qdist {

using NodeIndex = std::size_t;

// Per-link physical parameters applied when a document omits them.
struct LinkDefaults {
  double r_local = 12000.0;       // pairs/s at zero distance
  double alpha_db_per_km = 0.21;  // fiber attenuation
  double f0 = 0.98;               // generated pair fidelity
};

struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double length_km = 0.0;
  double r_local = 12000.0;
  double alpha_db_per_km = 0.21;
  double f0 = 0.98;
};

// Link entanglement generation rate r_local * exp(-alpha * L / 10).
inline double link_egr(const Edge& e) {
  return e.r_local * std::exp(-e.alpha_db_per_km * e.length_km / 10.0);
}

struct Path {
  std::vector<NodeIndex> nodes;
  std::vector<std::size_t> edges;  // topology edge indices, in path order
  double total_length_km = 0.0;

  std::size_t hops() const { return edges.size(); }
  bool empty() const { return nodes.empty(); }
  bool operator==(const Path&) const = default;
};

enum class PathMetric { Distance, Hops };

struct Adjacency {
  NodeIndex neighbor;
  std::size_t edge;
};

class Topology {
 public:
  NodeIndex add_node(std::string name) {
    if (index_.contains(name)) throw ValidationError("duplicate node id '" + name + "'");
    const NodeIndex id = names_.size();
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    adjacency_.emplace_back();
    return id;
  }

  std::size_t add_edge(const Edge& e) {
    if (e.u >= names_.size() || e.v >= names_.size())
      throw ValidationError("edge endpoint does not exist");
    if (e.u == e.v) throw ValidationError("self-loop on node '" + names_[e.u] + "'");
    if (edge_between(e.u, e.v))
      throw ValidationError("duplicate edge " + names_[e.u] + "-" + names_[e.v]);
    if (!(e.length_km > 0.0) || !std::isfinite(e.length_km))
      throw ValidationError("edge " + names_[e.u] + "-" + names_[e.v] + ": length must be positive");
    if (!(e.r_local > 0.0) || !std::isfinite(e.r_local))
      throw ValidationError("edge " + names_[e.u] + "-" + names_[e.v] + ": r_local must be positive");
    if (!(e.alpha_db_per_km > 0.0) || !std::isfinite(e.alpha_db_per_km))
      throw ValidationError("edge " + names_[e.u] + "-" + names_[e.v] + ": alpha must be positive");
    if (!(e.f0 > 0.5 && e.f0 <= 1.0))
      throw ValidationError("edge " + names_[e.u] + "-" + names_[e.v] + ": f0 must lie in (0.5, 1]");
    const std::size_t id = edges_.size();
    edges_.push_back(e);
    adjacency_[e.u].push_back({e.v, id});
    adjacency_[e.v].push_back({e.u, id});
    return id;
  }

  std::size_t add_edge(NodeIndex u, NodeIndex v, double length_km, const LinkDefaults& p = {}) {
    return add_edge(Edge{u, v, length_km, p.r_local, p.alpha_db_per_km, p.f0});
  }

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::string& name(NodeIndex n) const { return names_.at(n); }
  const std::vector<std::string>& names() const { return names_; }
  const Edge& edge(std::size_t i) const { return edges_.at(i); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Adjacency> neighbors(NodeIndex n) const { return adjacency_.at(n); }

  std::optional<NodeIndex> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeIndex index(std::string_view name) const {
    if (auto n = find(name)) return *n;
    throw ValidationError("unknown node '" + std::string(name) + "'");
  }

  std::optional<std::size_t> edge_between(NodeIndex u, NodeIndex v) const {
    if (u >= adjacency_.size()) return std::nullopt;
    for (const auto& a : adjacency_[u])
      if (a.neighbor == v) return a.edge;
    return std::nullopt;
  }

  double weight(std::size_t edge, PathMetric metric) const {
    return metric == PathMetric::Hops ? 1.0 : edges_[edge].length_km;
  }

  // Builds a Path from a node sequence; every consecutive pair must be adjacent
  // and no node may repeat.
  Path make_path(std::span<const NodeIndex> nodes) const {
    Path p;
    p.nodes.assign(nodes.begin(), nodes.end());
    std::set<NodeIndex> seen;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] >= node_count()) throw ValidationError("path node does not exist");
      if (!seen.insert(nodes[i]).second) throw ValidationError("path repeats a node");
      if (i == 0) continue;
      auto e = edge_between(nodes[i - 1], nodes[i]);
      if (!e) throw ValidationError("path nodes " + name(nodes[i - 1]) + " and " + name(nodes[i]) + " are not adjacent");
      p.edges.push_back(*e);
      p.total_length_km += edges_[*e].length_km;
    }
    return p;
  }

  Path make_path(std::initializer_list<NodeIndex> nodes) const {
    return make_path(std::span<const NodeIndex>(nodes.begin(), nodes.size()));
  }

  // Chain n0-n1-...-nk with the given link lengths.
  static Topology line(std::span<const double> lengths_km, const LinkDefaults& p = {}) {
    Topology t;
    for (std::size_t i = 0; i <= lengths_km.size(); ++i) t.add_node("n" + std::to_string(i));
    for (std::size_t i = 0; i < lengths_km.size(); ++i) t.add_edge(i, i + 1, lengths_km[i], p);
    return t;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacency>> adjacency_;
};

// ---------------------------------------------------------------------------
// JSON topology documents
//
//   {"defaults": {"r_local": 12000, "alpha": 0.21, "f0": 0.98},
//    "nodes": ["A", "B"],
//    "edges": [{"u": "A", "v": "B", "length_km": 70, "r_local": 9000}]}
// ---------------------------------------------------------------------------

namespace detail {

inline std::string node_id_string(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
  throw ParseError("node ids must be strings or integers");
}

inline double number_or(const nlohmann::json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace detail

inline Topology load_topology_json(std::string_view text, const LinkDefaults& fallback = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("topology JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("topology document must be a JSON object");

  LinkDefaults defaults = fallback;
  if (auto it = doc.find("defaults"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("'defaults' must be an object");
    defaults.r_local = detail::number_or(*it, "r_local", defaults.r_local);
    defaults.alpha_db_per_km = detail::number_or(*it, "alpha", defaults.alpha_db_per_km);
    defaults.f0 = detail::number_or(*it, "f0", defaults.f0);
  }

  Topology topo;
  auto nodes = doc.find("nodes");
  if (nodes == doc.end() || !nodes->is_array()) throw ParseError("'nodes' array is required");
  for (const auto& n : *nodes) topo.add_node(detail::node_id_string(n));

  auto edges = doc.find("edges");
  if (edges == doc.end()) return topo;
  if (!edges->is_array()) throw ParseError("'edges' must be an array");
  for (const auto& e : *edges) {
    if (!e.is_object() || !e.contains("u") || !e.contains("v") || !e.contains("length_km"))
      throw ParseError("each edge needs 'u', 'v' and 'length_km'");
    Edge edge;
    edge.u = topo.index(detail::node_id_string(e["u"]));
    edge.v = topo.index(detail::node_id_string(e["v"]));
    edge.length_km = detail::number_or(e, "length_km", 0.0);
    edge.r_local = detail::number_or(e, "r_local", defaults.r_local);
    edge.alpha_db_per_km = detail::number_or(e, "alpha", defaults.alpha_db_per_km);
    edge.f0 = detail::number_or(e, "f0", defaults.f0);
    topo.add_edge(edge);
  }
  return topo;
}

inline nlohmann::json topology_to_json(const Topology& t, const LinkDefaults& defaults = {}) {
  nlohmann::json doc;
  doc["defaults"] = {{"r_local", defaults.r_local}, {"alpha", defaults.alpha_db_per_km}, {"f0", defaults.f0}};
  doc["nodes"] = t.names();
  auto edges = nlohmann::json::array();
  for (const auto& e : t.edges()) {
    edges.push_back({{"u", t.name(e.u)},
                     {"v", t.name(e.v)},
                     {"length_km", e.length_km},
                     {"r_local", e.r_local},
                     {"alpha", e.alpha_db_per_km},
                     {"f0", e.f0}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

// ---------------------------------------------------------------------------
// Minimal GML reader for Topology-Zoo style files. Understands graph/node/edge,
// id/source/target, optional label and a per-edge length attribute; every other
// key is skipped. Self-loops and repeated edges (multigraph entries) are dropped.
// ---------------------------------------------------------------------------

namespace detail {

struct GmlValue;
using GmlList = std::vector<std::pair<std::string, GmlValue>>;

struct GmlValue {
  std::variant<double, std::string, GmlList> data;
};

class GmlParser {
 public:
  explicit GmlParser(std::string_view text) : text_(text) {}

  GmlList parse_document() {
    GmlList out = parse_list(false);
    skip_space();
    if (pos_ != text_.size()) fail("unexpected ']'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("GML: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  GmlList parse_list(bool nested) {
    GmlList out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        if (nested) fail("unterminated list");
        return out;
      }
      if (text_[pos_] == ']') {
        if (!nested) return out;
        ++pos_;
        return out;
      }
      std::string key = parse_key();
      skip_space();
      if (pos_ >= text_.size()) fail("missing value for key '" + key + "'");
      out.emplace_back(std::move(key), parse_value());
    }
  }

  std::string parse_key() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected key");
    return std::string(text_.substr(start, pos_ - start));
  }

  GmlValue parse_value() {
    const char c = text_[pos_];
    if (c == '[') {
      ++pos_;
      return GmlValue{parse_list(true)};
    }
    if (c == '"') {
      const std::size_t start = ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
      if (pos_ >= text_.size()) fail("unterminated string");
      std::string s(text_.substr(start, pos_ - start));
      ++pos_;
      return GmlValue{std::move(s)};
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != ']')
      ++pos_;
    const std::string token(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      if (used != token.size()) fail("bad number '" + token + "'");
      return GmlValue{v};
    } catch (const std::logic_error&) {
      fail("bad value '" + token + "'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline const GmlValue* gml_find(const GmlList& list, std::string_view key) {
  for (const auto& [k, v] : list)
    if (k == key) return &v;
  return nullptr;
}

inline std::string gml_scalar_string(const GmlValue& v) {
  if (auto s = std::get_if<std::string>(&v.data)) return *s;
  if (auto d = std::get_if<double>(&v.data)) {
    if (*d == std::floor(*d) && std::abs(*d) < 1e15) return std::to_string(static_cast<long long>(*d));
    return nlohmann::json(*d).dump();
  }
  throw ParseError("GML: expected a scalar");
}

}  // namespace detail

inline Topology load_topology_gml(std::string_view text, const LinkDefaults& params = {},
                                  double default_length_km = 100.0) {
  const auto doc = detail::GmlParser(text).parse_document();
  const auto* graph = detail::gml_find(doc, "graph");
  if (!graph || !std::holds_alternative<detail::GmlList>(graph->data))
    throw ParseError("GML: missing 'graph' block");
  const auto& items = std::get<detail::GmlList>(graph->data);

  Topology topo;
  std::map<std::string, NodeIndex> by_id;
  for (const auto& [key, value] : items) {
    if (key != "node") continue;
    const auto* fields = std::get_if<detail::GmlList>(&value.data);
    if (!fields) throw ParseError("GML: node must be a list");
    const auto* id = detail::gml_find(*fields, "id");
    if (!id) throw ParseError("GML: node without id");
    const std::string id_str = detail::gml_scalar_string(*id);
    std::string name = id_str;
    if (const auto* label = detail::gml_find(*fields, "label")) {
      std::string l = detail::gml_scalar_string(*label);
      if (!topo.find(l)) name = std::move(l);
    }
    if (by_id.contains(id_str)) throw ValidationError("GML: duplicate node id " + id_str);
    by_id[id_str] = topo.add_node(name);
  }
  for (const auto& [key, value] : items) {
    if (key != "edge") continue;
    const auto* fields = std::get_if<detail::GmlList>(&value.data);
    if (!fields) throw ParseError("GML: edge must be a list");
    const auto* src = detail::gml_find(*fields, "source");
    const auto* dst = detail::gml_find(*fields, "target");
    if (!src || !dst) throw ParseError("GML: edge without source/target");
    auto su = by_id.find(detail::gml_scalar_string(*src));
    auto sv = by_id.find(detail::gml_scalar_string(*dst));
    if (su == by_id.end() || sv == by_id.end()) throw ValidationError("GML: edge references unknown node");
    if (su->second == sv->second || topo.edge_between(su->second, sv->second)) continue;
    double length = default_length_km;
    if (const auto* len = detail::gml_find(*fields, "length")) {
      if (auto d = std::get_if<double>(&len->data)) length = *d;
    }
    topo.add_edge(su->second, sv->second, length, params);
  }
  return topo;
}

// ---------------------------------------------------------------------------
// Gabriel graphs
// ---------------------------------------------------------------------------

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Edge (i, j) is kept iff no third point lies strictly inside the disk whose
// diameter is the segment ij. Uses a uniform grid so that far-apart pairs are
// rejected after inspecting the cells around their midpoint.
inline std::vector<std::pair<std::size_t, std::size_t>> gabriel_pairs(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n < 2) return out;

  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const auto g = static_cast<long>(std::max<double>(1.0, std::floor(std::sqrt(static_cast<double>(n)))));
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double cell = span / static_cast<double>(g);
  auto cell_of = [&](double v, double lo) {
    return std::clamp(static_cast<long>(std::floor((v - lo) / cell)), 0L, g - 1);
  };
  std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(g * g));
  for (std::size_t i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(cell_of(pts[i].y, min_y) * g + cell_of(pts[i].x, min_x))].push_back(i);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mx = 0.5 * (pts[i].x + pts[j].x);
      const double my = 0.5 * (pts[i].y + pts[j].y);
      const double dx = pts[i].x - pts[j].x;
      const double dy = pts[i].y - pts[j].y;
      const double r2 = 0.25 * (dx * dx + dy * dy);
      const double r = std::sqrt(r2);
      const long cx = cell_of(mx, min_x), cy = cell_of(my, min_y);
      const long reach = static_cast<long>(std::ceil(r / cell)) + 1;
      bool blocked = false;
      for (long ring = 0; ring <= reach && !blocked; ++ring) {
        for (long yy = cy - ring; yy <= cy + ring && !blocked; ++yy) {
          if (yy < 0 || yy >= g) continue;
          for (long xx = cx - ring; xx <= cx + ring && !blocked; ++xx) {
            if (xx < 0 || xx >= g) continue;
            if (std::max(std::abs(xx - cx), std::abs(yy - cy)) != ring) continue;
            for (std::size_t k : grid[static_cast<std::size_t>(yy * g + xx)]) {
              if (k == i || k == j) continue;
              const double ex = pts[k].x - mx, ey = pts[k].y - my;
              if (ex * ex + ey * ey < r2) {
                blocked = true;
                break;
              }
            }
          }
        }
      }
      if (!blocked) out.emplace_back(i, j);
    }
  }
  return out;
}

inline Topology gabriel_topology(std::span<const Point2> pts, const LinkDefaults& params = {}) {
  Topology t;
  for (std::size_t i = 0; i < pts.size(); ++i) t.add_node("n" + std::to_string(i));
  for (auto [i, j] : gabriel_pairs(pts)) {
    const double len = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
    t.add_edge(i, j, std::max(len, 1e-9), params);
  }
  return t;
}

struct GabrielOptions {
  std::size_t nodes = 100;
  std::uint64_t seed = 1;
  double bbox_km = 0.0;  // 0 selects 100 * sqrt(nodes)
  std::optional<std::pair<double, double>> distance_range_km;
  LinkDefaults params;
};

// Uniform points in a square, Gabriel edges, optional uniform resampling of
// every edge length into distance_range_km. Deterministic for a fixed seed.
inline Topology generate_gabriel(const GabrielOptions& opt) {
  if (opt.nodes < 2) throw ConfigError("Gabriel graph needs at least 2 nodes");
  const double bbox = opt.bbox_km > 0.0 ? opt.bbox_km : 100.0 * std::sqrt(static_cast<double>(opt.nodes));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> coord(0.0, bbox);
  std::vector<Point2> pts(opt.nodes);
  for (auto& p : pts) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  const auto pairs = gabriel_pairs(pts);
  std::optional<std::uniform_real_distribution<double>> resample;
  if (opt.distance_range_km) {
    auto [lo, hi] = *opt.distance_range_km;
    if (!(lo > 0.0 && hi >= lo)) throw ConfigError("distance range must satisfy 0 < lo <= hi");
    resample.emplace(lo, hi);
  }
  Topology t;
  for (std::size_t i = 0; i < pts.size(); ++i) t.add_node("n" + std::to_string(i));
  for (auto [i, j] : pairs) {
    double len = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
    if (resample) len = (*resample)(rng);
    t.add_edge(i, j, std::max(len, 1e-9), opt.params);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Shortest paths
// ---------------------------------------------------------------------------

namespace detail {

struct PathBans {
  std::vector<char> nodes;
  std::vector<char> edges;
};

// Lexicographically smallest among the minimum-weight s->d paths that avoid
// the banned nodes and edges.
inline std::optional<Path> lex_shortest_path(const Topology& t, NodeIndex s, NodeIndex d, PathMetric metric,
                                             const PathBans* bans) {
  const std::size_t n = t.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  auto node_ok = [&](NodeIndex x) { return !bans || bans->nodes.empty() || !bans->nodes[x]; };
  auto edge_ok = [&](std::size_t e) { return !bans || bans->edges.empty() || !bans->edges[e]; };
  if (!node_ok(s) || !node_ok(d)) return std::nullopt;

  std::vector<double> dist(n, inf);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[d] = 0.0;
  pq.emplace(0.0, d);
  while (!pq.empty()) {
    auto [dx, x] = pq.top();
    pq.pop();
    if (dx > dist[x]) continue;
    for (const auto& a : t.neighbors(x)) {
      if (!node_ok(a.neighbor) || !edge_ok(a.edge)) continue;
      const double nd = dx + t.weight(a.edge, metric);
      if (nd < dist[a.neighbor]) {
        dist[a.neighbor] = nd;
        pq.emplace(nd, a.neighbor);
      }
    }
  }
  if (dist[s] == inf) return std::nullopt;

  Path p;
  p.nodes.push_back(s);
  NodeIndex x = s;
  while (x != d) {
    std::optional<Adjacency> best;
    const double tol = 1e-9 * std::max(1.0, dist[x]);
    for (const auto& a : t.neighbors(x)) {
      if (!node_ok(a.neighbor) || !edge_ok(a.edge) || dist[a.neighbor] == inf) continue;
      if (std::abs(t.weight(a.edge, metric) + dist[a.neighbor] - dist[x]) > tol) continue;
      if (dist[a.neighbor] >= dist[x]) continue;
      if (!best || a.neighbor < best->neighbor) best = a;
    }
    if (!best) return std::nullopt;
    p.nodes.push_back(best->neighbor);
    p.edges.push_back(best->edge);
    p.total_length_km += t.edge(best->edge).length_km;
    x = best->neighbor;
  }
  return p;
}

inline double path_weight(const Topology& t, const Path& p, PathMetric metric) {
  double w = 0.0;
  for (auto e : p.edges) w += t.weight(e, metric);
  return w;
}

}  // namespace detail

inline std::optional<Path> shortest_path(const Topology& t, NodeIndex s, NodeIndex d,
                                         PathMetric metric = PathMetric::Distance) {
  if (s >= t.node_count() || d >= t.node_count()) throw ValidationError("unknown node index");
  if (s == d) return std::nullopt;
  return detail::lex_shortest_path(t, s, d, metric, nullptr);
}

// Yen's k shortest loopless paths. Paths come out in nondecreasing weight;
// ties are broken by the lexicographic order of node sequences, so the result
// for N is always a prefix of the result for N + 1.
inline std::vector<Path> k_shortest_paths(const Topology& t, NodeIndex s, NodeIndex d, std::size_t count,
                                          PathMetric metric = PathMetric::Distance) {
  if (s >= t.node_count() || d >= t.node_count()) throw ValidationError("unknown node index");
  if (s == d) throw ConfigError("source and destination must differ");
  if (count == 0) throw ConfigError("path count must be at least 1");

  std::vector<Path> accepted;
  auto first = detail::lex_shortest_path(t, s, d, metric, nullptr);
  if (!first) return accepted;
  accepted.push_back(std::move(*first));

  std::map<std::pair<double, std::vector<NodeIndex>>, Path> candidates;
  std::set<std::vector<NodeIndex>> known{accepted.front().nodes};

  while (accepted.size() < count) {
    const Path& last = accepted.back();
    for (std::size_t i = 0; i + 1 < last.nodes.size(); ++i) {
      const NodeIndex spur = last.nodes[i];
      detail::PathBans bans;
      bans.nodes.assign(t.node_count(), 0);
      bans.edges.assign(t.edge_count(), 0);
      for (std::size_t k = 0; k < i; ++k) bans.nodes[last.nodes[k]] = 1;
      for (const auto& p : accepted) {
        if (p.nodes.size() > i + 1 && std::equal(p.nodes.begin(), p.nodes.begin() + static_cast<long>(i) + 1,
                                                 last.nodes.begin()))
          bans.edges[p.edges[i]] = 1;
      }
      auto spur_path = detail::lex_shortest_path(t, spur, d, metric, &bans);
      if (!spur_path) continue;
      Path full;
      full.nodes.assign(last.nodes.begin(), last.nodes.begin() + static_cast<long>(i));
      full.edges.assign(last.edges.begin(), last.edges.begin() + static_cast<long>(i));
      full.nodes.insert(full.nodes.end(), spur_path->nodes.begin(), spur_path->nodes.end());
      full.edges.insert(full.edges.end(), spur_path->edges.begin(), spur_path->edges.end());
      full.total_length_km = 0.0;
      for (auto e : full.edges) full.total_length_km += t.edge(e).length_km;
      if (known.contains(full.nodes)) continue;
      known.insert(full.nodes);
      const double w = detail::path_weight(t, full, metric);
      candidates.emplace(std::make_pair(w, full.nodes), std::move(full));
    }
    if (candidates.empty()) break;
    accepted.push_back(std::move(candidates.begin()->second));
    candidates.erase(candidates.begin());
  }
  return accepted;
}

}  // namespace qdist
