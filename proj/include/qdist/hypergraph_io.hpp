#pragma once

// Lossless JSON encoding of hypergraphs. Doubles are written in shortest
// round-trip form, so exact fidelities and rates survive a save/load cycle.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qdist/error.hpp"
#include "qdist/hypergraph.hpp"

namespace qdist {

inline constexpr int kHypergraphFormatVersion = 1;

namespace detail {

inline BuildKind parse_build_kind(std::string_view s) {
  if (s == "standard") return BuildKind::Standard;
  if (s == "pruned") return BuildKind::Pruned;
  if (s == "synthesized") return BuildKind::Synthesized;
  throw ParseError("unknown hypergraph kind '" + std::string(s) + "'");
}

inline OpKind parse_op(std::string_view s) {
  if (s == "start") return OpKind::Start;
  if (s == "swap") return OpKind::Swap;
  if (s == "purify") return OpKind::Purify;
  if (s == "end") return OpKind::End;
  throw ParseError("unknown operation '" + std::string(s) + "'");
}

inline const char* vertex_kind_name(VertexKind k) {
  return k == VertexKind::Source ? "source" : k == VertexKind::Sink ? "sink" : "link";
}

inline VertexKind parse_vertex_kind(std::string_view s) {
  if (s == "source") return VertexKind::Source;
  if (s == "sink") return VertexKind::Sink;
  if (s == "link") return VertexKind::Link;
  throw ParseError("unknown vertex kind '" + std::string(s) + "'");
}

}  // namespace detail

inline nlohmann::json hypergraph_to_json(const Hypergraph& hg) {
  using nlohmann::json;
  json j;
  j["format"] = "qdist-hypergraph";
  j["version"] = kHypergraphFormatVersion;
  j["kind"] = std::string(to_string(hg.kind));
  j["s"] = hg.s;
  j["d"] = hg.d;
  auto paths = json::array();
  for (const auto& p : hg.paths) paths.push_back({{"nodes", p.nodes}, {"edges", p.edges}, {"length_km", p.total_length_km}});
  j["paths"] = std::move(paths);
  j["grid"] = std::vector<double>(hg.grid.values().begin(), hg.grid.values().end());
  j["noise"] = {{"p1", hg.noise.p1}, {"p2", hg.noise.p2}, {"eta", hg.noise.eta}, {"f0", hg.noise.f0}};
  j["model"] = std::string(to_string(hg.model));
  auto vs = json::array();
  for (const auto& v : hg.vertices)
    vs.push_back({{"kind", detail::vertex_kind_name(v.kind)},
                  {"path", v.path},
                  {"a", v.a},
                  {"b", v.b},
                  {"u", v.u},
                  {"v", v.v},
                  {"f", v.fidelity},
                  {"bucket", v.bucket},
                  {"rate", v.rate}});
  j["vertices"] = std::move(vs);
  auto es = json::array();
  for (const auto& e : hg.edges)
    es.push_back({{"op", std::string(to_string(e.op))},
                  {"in", e.inputs},
                  {"out", e.output},
                  {"rate_bound", e.rate_bound},
                  {"p", e.p_succ},
                  {"cap", e.capacity_coeff},
                  {"group", e.group}});
  j["edges"] = std::move(es);
  auto gs = json::array();
  for (const auto& g : hg.groups) gs.push_back({{"link", g.topo_edge}, {"rate_limit", g.rate_limit}});
  j["groups"] = std::move(gs);
  j["build_seconds"] = hg.build_seconds;
  return j;
}

// Throws ParseError on a malformed or foreign document and ValidationError when
// the decoded graph breaks a structural invariant.
inline Hypergraph hypergraph_from_json(const nlohmann::json& j) {
  Hypergraph hg;
  try {
    if (!j.is_object() || j.value("format", "") != "qdist-hypergraph") throw ParseError("not a hypergraph document");
    if (j.at("version").get<int>() != kHypergraphFormatVersion)
      throw ParseError("unsupported hypergraph version " + j.at("version").dump());
    hg.kind = detail::parse_build_kind(j.at("kind").get<std::string>());
    hg.s = j.at("s").get<NodeIndex>();
    hg.d = j.at("d").get<NodeIndex>();
    for (const auto& p : j.at("paths")) {
      Path path;
      path.nodes = p.at("nodes").get<std::vector<NodeIndex>>();
      path.edges = p.at("edges").get<std::vector<std::size_t>>();
      path.total_length_km = p.at("length_km").get<double>();
      hg.paths.push_back(std::move(path));
    }
    hg.grid = FidelityGrid(j.at("grid").get<std::vector<double>>());
    const auto& n = j.at("noise");
    hg.noise = {n.at("p1").get<double>(), n.at("p2").get<double>(), n.at("eta").get<double>(), n.at("f0").get<double>()};
    hg.model = parse_purify_model(j.at("model").get<std::string>());
    for (const auto& v : j.at("vertices")) {
      HyperVertex x;
      x.kind = detail::parse_vertex_kind(v.at("kind").get<std::string>());
      x.path = v.at("path").get<std::size_t>();
      x.a = v.at("a").get<std::size_t>();
      x.b = v.at("b").get<std::size_t>();
      x.u = v.at("u").get<NodeIndex>();
      x.v = v.at("v").get<NodeIndex>();
      x.fidelity = v.at("f").get<double>();
      x.bucket = v.at("bucket").get<int>();
      x.rate = v.at("rate").get<double>();
      hg.vertices.push_back(x);
    }
    for (const auto& e : j.at("edges")) {
      HyperEdge x;
      x.op = detail::parse_op(e.at("op").get<std::string>());
      x.inputs = e.at("in").get<std::vector<std::size_t>>();
      x.output = e.at("out").get<std::size_t>();
      x.rate_bound = e.at("rate_bound").get<double>();
      x.p_succ = e.at("p").get<double>();
      x.capacity_coeff = e.at("cap").get<double>();
      x.group = e.at("group").get<int>();
      hg.edges.push_back(std::move(x));
    }
    for (const auto& g : j.at("groups")) hg.groups.push_back({g.at("link").get<std::size_t>(), g.at("rate_limit").get<double>()});
    hg.build_seconds = j.at("build_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("hypergraph document: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("hypergraph document: ") + e.what());
  }
  validate_hypergraph(hg);
  return hg;
}

}  // namespace qdist
