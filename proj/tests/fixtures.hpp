#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qdist/qdist.hpp"

namespace fixtures {

using namespace qdist;

// Line topology whose links generate exactly the requested rates.
inline Topology line_with_rates(const std::vector<double>& rates, double f0 = 0.98) {
  Topology t;
  for (std::size_t i = 0; i <= rates.size(); ++i) t.add_node("n" + std::to_string(i));
  for (std::size_t i = 0; i < rates.size(); ++i)
    t.add_edge(Edge{i, i + 1, 10.0, rates[i] * std::exp(0.21), 0.21, f0});
  return t;
}

inline Topology line_km(const std::vector<double>& km, double f0 = 0.98) {
  LinkDefaults p;
  p.f0 = f0;
  return Topology::line(km, p);
}

inline Path full_path(const Topology& t) {
  std::vector<NodeIndex> n(t.node_count());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = i;
  return t.make_path(n);
}

// Two-node path with one self-paired purification from f_in to its ideal
// output, then delivery. Small enough to solve by hand.
struct PurifyFixture {
  Topology topo;
  Hypergraph hg;
  double rate = 0.0;
  double p = 0.0;
  double f_out = 0.0;
};

inline PurifyFixture purify_fixture(double rate = 1000.0, double f_in = 0.8) {
  PurifyFixture fx;
  fx.topo = line_with_rates({rate}, f_in);
  fx.rate = link_egr(fx.topo.edge(0));
  const auto path = full_path(fx.topo);
  const auto grid = FidelityGrid::uniform(100);
  auto hg = detail::empty_hypergraph(fx.topo, path, grid, NoiseParams{}, PurifyModel::IdealDejmps, BuildKind::Pruned);
  const auto out = ideal_dejmps(f_in, f_in);
  fx.p = out.probability;
  fx.f_out = out.fidelity;
  hg.groups.push_back({path.edges[0], fx.rate});
  const auto raw = hg.add_vertex(detail::link_vertex(path, 0, 1, f_in, static_cast<int>(*grid.round_down(f_in))));
  const auto pur = hg.add_vertex(detail::link_vertex(path, 0, 1, fx.f_out, static_cast<int>(*grid.round_down(fx.f_out))));
  HyperEdge start;
  start.op = OpKind::Start;
  start.inputs = {Hypergraph::kSource};
  start.output = raw;
  start.rate_bound = fx.rate;
  start.group = 0;
  hg.add_edge(start);
  HyperEdge purify;
  purify.op = OpKind::Purify;
  purify.inputs = {raw};
  purify.output = pur;
  purify.p_succ = fx.p;
  hg.add_edge(purify);
  HyperEdge end;
  end.op = OpKind::End;
  end.inputs = {pur};
  end.output = Hypergraph::kSink;
  end.capacity_coeff = pair_capacity(fx.f_out);
  hg.add_edge(end);
  validate_hypergraph(hg);
  fx.hg = std::move(hg);
  return fx;
}

// Random line of `links` links, lengths in [lo, hi] km.
inline Topology random_line(std::mt19937_64& rng, std::size_t links, double lo = 20.0, double hi = 80.0,
                            double f0 = 0.98) {
  std::uniform_real_distribution<double> len(lo, hi);
  std::vector<double> km(links);
  for (auto& x : km) x = len(rng);
  return line_km(km, f0);
}

inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// Small random LP with <=, >= and = rows, feasible by construction (rows are
// built around a known nonnegative point) and bounded by a budget row. Some
// variables get finite upper bounds.
inline LPProblem random_lp(std::mt19937_64& rng, std::size_t vars, std::size_t rows) {
  std::uniform_real_distribution<double> coef(-2.0, 4.0), cost(-1.0, 3.0), pt(0.0, 3.0), slack(0.0, 2.0);
  LPProblem lp;
  std::vector<double> x0(vars);
  for (std::size_t j = 0; j < vars; ++j) {
    x0[j] = j % 3 == 0 ? 0.0 : pt(rng);
    const double ub = j % 4 == 1 ? x0[j] + slack(rng) : std::numeric_limits<double>::infinity();
    lp.add_variable("x" + std::to_string(j), cost(rng), ub);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    LPRow r;
    r.name = "c" + std::to_string(i);
    double ax = 0.0;
    for (std::size_t j = 0; j < vars; ++j)
      if ((i + j) % 3 != 0) {
        const double a = std::round(coef(rng) * 100.0) / 100.0;
        if (a == 0.0) continue;
        r.coeffs.emplace_back(j, a);
        ax += a * x0[j];
      }
    const int kind = static_cast<int>(i % 5);
    if (kind == 3) {
      r.sense = RowSense::GreaterEqual;
      r.rhs = ax - slack(rng);
    } else if (kind == 4) {
      r.sense = RowSense::Equal;
      r.rhs = ax;
    } else {
      r.sense = RowSense::LessEqual;
      r.rhs = ax + slack(rng);
    }
    lp.add_row(std::move(r));
  }
  LPRow budget;
  budget.name = "budget";
  double total = 0.0;
  for (std::size_t j = 0; j < vars; ++j) {
    budget.coeffs.emplace_back(j, 1.0);
    total += x0[j];
  }
  budget.rhs = total + 5.0;
  lp.add_row(std::move(budget));
  return lp;
}

}  // namespace fixtures
