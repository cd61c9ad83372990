#pragma once

// Hypergraph flow LP: one rate variable per hyper-edge, a balance row per link
// state and a generation limit per physical link. Plus the reverse direction:
// turning solved rates back into end-to-end ensembles and protocol trees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdist/capacity.hpp"
#include "qdist/error.hpp"
#include "qdist/hypergraph.hpp"
#include "qdist/lp.hpp"

namespace qdist {

enum class ObjectiveKind { EnsembleCapacity, EndRate };

inline const char* to_string(ObjectiveKind k) {
  return k == ObjectiveKind::EnsembleCapacity ? "ensemble-capacity" : "end-rate";
}

// Fidelity delivered by an end edge.
inline double end_fidelity(const Hypergraph& hg, const HyperEdge& e) { return hg.vertices[e.inputs.at(0)].fidelity; }

// Variable j is the rate of hyper-edge j, named r_<j>. Rows: flow_<vertex> for
// every link state, then limit_<group> for every physical link that has a
// start edge.
//
// Balance for link state l:
//   sum_{e consumes l} r_e  -  sum_{e makes l, not purify} r_e
//                           -  1/2 sum_{e makes l, purify} p_e r_e  <=  0
inline LPProblem formulate_lp(const Hypergraph& hg, ObjectiveKind kind, std::optional<double> f_lb = std::nullopt) {
  if (kind == ObjectiveKind::EndRate && !f_lb) throw ConfigError("end-rate objective needs a fidelity lower bound");
  LPProblem lp;
  constexpr double kFidelitySlack = 1e-12;
  for (std::size_t i = 0; i < hg.edges.size(); ++i) {
    const auto& e = hg.edges[i];
    double c = 0.0;
    double ub = std::numeric_limits<double>::infinity();
    if (e.op == OpKind::End) {
      if (kind == ObjectiveKind::EnsembleCapacity) {
        c = e.capacity_coeff;
      } else if (end_fidelity(hg, e) >= *f_lb - kFidelitySlack) {
        c = 1.0;
      } else {
        ub = 0.0;
      }
    }
    lp.add_variable("r_" + std::to_string(i), c, ub);
  }

  std::vector<std::map<std::size_t, double>> flow(hg.vertices.size());
  std::vector<std::vector<std::size_t>> starts(hg.groups.size());
  for (std::size_t i = 0; i < hg.edges.size(); ++i) {
    const auto& e = hg.edges[i];
    for (auto in : e.inputs)
      if (hg.vertices[in].kind == VertexKind::Link) flow[in][i] += 1.0;
    if (hg.vertices[e.output].kind == VertexKind::Link)
      flow[e.output][i] -= e.op == OpKind::Purify ? 0.5 * e.p_succ : 1.0;
    if (e.op == OpKind::Start) starts[static_cast<std::size_t>(e.group)].push_back(i);
  }
  for (std::size_t v = 0; v < hg.vertices.size(); ++v) {
    if (hg.vertices[v].kind != VertexKind::Link) continue;
    LPRow row;
    row.name = "flow_" + std::to_string(v);
    row.sense = RowSense::LessEqual;
    row.rhs = 0.0;
    for (const auto& [j, a] : flow[v]) row.coeffs.emplace_back(j, a);
    lp.add_row(std::move(row));
  }
  for (std::size_t g = 0; g < hg.groups.size(); ++g) {
    if (starts[g].empty()) continue;
    LPRow row;
    row.name = "limit_" + std::to_string(g);
    row.sense = RowSense::LessEqual;
    row.rhs = hg.groups[g].rate_limit;
    for (auto j : starts[g]) row.coeffs.emplace_back(j, 1.0);
    lp.add_row(std::move(row));
  }
  return lp;
}

// ---------------------------------------------------------------------------
// Scheme extraction
// ---------------------------------------------------------------------------

struct ProtocolShare {
  std::string tree;   // nested description of the operations
  double rate = 0.0;  // end-to-end pairs/s carried by this tree
};

struct Ensemble {
  std::size_t end_edge = 0;
  double fidelity = 0.0;
  double rate = 0.0;
  std::vector<ProtocolShare> protocols;
};

struct DistributionScheme {
  std::vector<Ensemble> ensembles;
  double egr = 0.0;            // sum of end rates
  double fidelity = 0.0;       // rate-weighted mean end fidelity
  double capacity = 0.0;       // bits/s
  double swaps = 0.0;          // swap executions per delivered pair
  double purifications = 0.0;  // purify executions per delivered pair
  std::size_t pairs = 0;       // distinct ensembles with positive rate

  std::vector<EnsembleEntry> entries() const {
    std::vector<EnsembleEntry> out;
    for (const auto& e : ensembles) out.push_back({e.fidelity, e.rate});
    return out;
  }
  bool empty() const { return ensembles.empty(); }
};

namespace detail {

inline std::string describe_state(const Hypergraph& hg, std::size_t v) {
  const auto& x = hg.vertices[v];
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x.fidelity);
  return "L" + std::to_string(x.a) + "-" + std::to_string(x.b) + "@" + buf;
}

// Per-pair executions of every edge in the tree obtained by resolving each
// link state through `producer`; the description is built alongside.
inline bool tree_requirements(const Hypergraph& hg, std::size_t end_edge, const std::vector<std::int64_t>& producer,
                              std::vector<double>& per_pair, std::string& text) {
  per_pair.assign(hg.edges.size(), 0.0);
  per_pair[end_edge] = 1.0;
  constexpr std::size_t kMaxText = 2000;
  std::function<bool(std::size_t, double, int)> walk = [&](std::size_t v, double need, int depth) -> bool {
    if (depth > 4 * static_cast<int>(hg.vertices.size()) + 8) return false;
    const auto pe = producer[v];
    if (pe < 0) return false;
    const auto& e = hg.edges[static_cast<std::size_t>(pe)];
    const double credit = e.op == OpKind::Purify ? 0.5 * e.p_succ : 1.0;
    if (!(credit > 0.0)) return false;
    const double x = need / credit;
    per_pair[static_cast<std::size_t>(pe)] += x;
    const bool write = text.size() < kMaxText;
    switch (e.op) {
      case OpKind::Start:
        if (write) text += describe_state(hg, v);
        return true;
      case OpKind::Swap:
      case OpKind::Purify: {
        if (write) text += e.op == OpKind::Swap ? "swap(" : "purify(";
        for (std::size_t k = 0; k < e.inputs.size(); ++k) {
          if (k && write) text += ", ";
          if (!walk(e.inputs[k], x, depth + 1)) return false;
        }
        if (e.op == OpKind::Purify && e.inputs.size() == 1 && write) text += " x2";
        if (write) text += ")";
        return true;
      }
      case OpKind::End:
        return false;
    }
    return false;
  };
  const bool ok = walk(hg.edges[end_edge].inputs[0], 1.0, 0);
  if (text.size() >= kMaxText) text = text.substr(0, kMaxText) + "...";
  return ok;
}

}  // namespace detail

// Builds the scheme from solved edge rates. Each ensemble's flow is stripped
// into protocol trees greedily: repeatedly resolve every state through its
// producer with the most remaining flow, carry as much end rate as the
// residual rates allow, and subtract.
inline DistributionScheme extract_scheme(const Hypergraph& hg, const std::vector<double>& rates,
                                         double threshold = 1e-9, std::size_t max_protocols = 16) {
  if (rates.size() != hg.edges.size()) throw ConfigError("rate vector does not match the hypergraph");
  DistributionScheme s;
  std::vector<std::vector<std::size_t>> producers(hg.vertices.size());
  for (std::size_t i = 0; i < hg.edges.size(); ++i)
    if (hg.edges[i].op != OpKind::End) producers[hg.edges[i].output].push_back(i);

  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < hg.edges.size(); ++i)
    if (hg.edges[i].op == OpKind::End && rates[i] > threshold) ends.push_back(i);
  std::stable_sort(ends.begin(), ends.end(), [&](auto a, auto b) { return rates[a] > rates[b]; });

  std::vector<double> residual = rates;
  double swap_total = 0.0, purify_total = 0.0;
  for (std::size_t i = 0; i < hg.edges.size(); ++i) {
    if (rates[i] <= threshold) continue;
    if (hg.edges[i].op == OpKind::Swap) swap_total += rates[i];
    if (hg.edges[i].op == OpKind::Purify) purify_total += rates[i];
  }

  for (auto ei : ends) {
    Ensemble ens;
    ens.end_edge = ei;
    ens.fidelity = end_fidelity(hg, hg.edges[ei]);
    ens.rate = rates[ei];
    double remaining = rates[ei];
    for (std::size_t round = 0; round < max_protocols && remaining > threshold; ++round) {
      std::vector<std::int64_t> producer(hg.vertices.size(), -1);
      for (std::size_t v = 0; v < hg.vertices.size(); ++v) {
        double best = 0.0;
        for (auto pe : producers[v])
          if (residual[pe] > best) {
            best = residual[pe];
            producer[v] = static_cast<std::int64_t>(pe);
          }
      }
      std::vector<double> per_pair;
      std::string text;
      if (!detail::tree_requirements(hg, ei, producer, per_pair, text)) break;
      double amount = remaining;
      for (std::size_t i = 0; i < per_pair.size(); ++i)
        if (per_pair[i] > 0.0 && i != ei) amount = std::min(amount, residual[i] / per_pair[i]);
      if (amount <= threshold) break;
      for (std::size_t i = 0; i < per_pair.size(); ++i) residual[i] -= amount * per_pair[i];
      remaining -= amount;
      ens.protocols.push_back({std::move(text), amount});
    }
    s.ensembles.push_back(std::move(ens));
  }

  for (const auto& e : s.ensembles) {
    s.egr += e.rate;
    s.fidelity += e.rate * e.fidelity;
  }
  s.pairs = s.ensembles.size();
  if (s.egr > 0.0) {
    s.fidelity /= s.egr;
    s.swaps = swap_total / s.egr;
    s.purifications = purify_total / s.egr;
  }
  s.capacity = ensemble_capacity(s.entries());
  return s;
}

inline DistributionScheme extract_scheme(const Hypergraph& hg, const LPSolution& sol) {
  if (!sol.optimal()) throw ConfigError(std::string("cannot extract a scheme from a ") + to_string(sol.status) + " solution");
  return extract_scheme(hg, sol.x);
}

}  // namespace qdist
