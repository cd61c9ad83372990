#pragma once

// Independent reference for LP checks: a reader for the plain-text LP format
// and a dense two-phase tableau simplex in long double with Bland's rule.
// Shares no code with the library solver.

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reflp {

enum class Sense { Le, Ge, Eq };

struct Problem {
  std::vector<std::string> vars;
  std::vector<long double> c;
  std::vector<std::vector<long double>> a;
  std::vector<Sense> sense;
  std::vector<long double> b;
  std::vector<std::optional<long double>> upper;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  long double objective = 0;
  std::vector<long double> x;
};

namespace detail {

inline std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

// Parses "[label:] [coef] name (+|-) coef name ... [op rhs]".
inline void parse_expr(const std::vector<std::string>& tok, std::size_t start, std::map<std::string, long double>& terms,
                       std::vector<std::string>& order, std::optional<std::string>& op, long double& rhs) {
  long double sign = 1;
  long double coef = 1;
  for (std::size_t i = start; i < tok.size(); ++i) {
    const auto& t = tok[i];
    if (t == "+") {
      sign = 1;
    } else if (t == "-") {
      sign = -1;
    } else if (t == "<=" || t == ">=" || t == "=") {
      op = t;
      if (i + 1 >= tok.size()) throw std::runtime_error("missing right-hand side");
      rhs = std::strtold(tok[i + 1].c_str(), nullptr);
      return;
    } else {
      char* end = nullptr;
      const long double v = std::strtold(t.c_str(), &end);
      if (end && *end == '\0') {
        coef = v;
      } else {
        if (!terms.count(t)) order.push_back(t);
        terms[t] += sign * coef;
        sign = 1;
        coef = 1;
      }
    }
  }
}

}  // namespace detail

inline Problem parse(const std::string& text) {
  Problem p;
  std::map<std::string, std::size_t> index;
  auto var = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    index[name] = p.vars.size();
    p.vars.push_back(name);
    p.c.push_back(0);
    p.upper.emplace_back();
    for (auto& row : p.a) row.push_back(0);
    return p.vars.size() - 1;
  };
  enum { None, Obj, Rows, Bounds } section = None;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    auto tok = detail::tokens(line);
    if (tok.empty()) continue;
    if (tok[0] == "maximize") { section = Obj; continue; }
    if (tok[0] == "subject" && tok.size() > 1 && tok[1] == "to") { section = Rows; continue; }
    if (tok[0] == "bounds") { section = Bounds; continue; }
    if (tok[0] == "end") break;
    std::map<std::string, long double> terms;
    std::vector<std::string> order;
    std::optional<std::string> op;
    long double rhs = 0;
    std::size_t start = (tok[0].back() == ':') ? 1 : 0;
    detail::parse_expr(tok, start, terms, order, op, rhs);
    if (section == Obj) {
      for (const auto& n : order) p.c[var(n)] = terms[n];
    } else if (section == Rows) {
      if (!op) throw std::runtime_error("constraint without operator");
      for (const auto& n : order) var(n);
      std::vector<long double> row(p.vars.size(), 0);
      for (const auto& n : order) row[index[n]] = terms[n];
      p.a.push_back(row);
      p.sense.push_back(*op == "<=" ? Sense::Le : *op == ">=" ? Sense::Ge : Sense::Eq);
      p.b.push_back(rhs);
    } else if (section == Bounds) {
      if (!op || *op != "<=" || order.size() != 1) throw std::runtime_error("unsupported bound line");
      p.upper[var(order[0])] = rhs;
    } else {
      throw std::runtime_error("content outside a section");
    }
  }
  for (auto& row : p.a) row.resize(p.vars.size(), 0);
  return p;
}

// max c'x subject to the rows, 0 <= x <= upper.
inline Result solve(Problem p) {
  const std::size_t n = p.vars.size();
  for (std::size_t j = 0; j < n; ++j)
    if (p.upper[j]) {
      std::vector<long double> row(n, 0);
      row[j] = 1;
      p.a.push_back(row);
      p.sense.push_back(Sense::Le);
      p.b.push_back(*p.upper[j]);
    }
  const std::size_t m = p.a.size();
  for (std::size_t i = 0; i < m; ++i)
    if (p.b[i] < 0) {
      for (auto& v : p.a[i]) v = -v;
      p.b[i] = -p.b[i];
      if (p.sense[i] == Sense::Le) p.sense[i] = Sense::Ge;
      else if (p.sense[i] == Sense::Ge) p.sense[i] = Sense::Le;
    }
  // Columns: x (n), one slack/surplus per inequality, one artificial per >= or = row.
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  std::size_t cols = n;
  for (std::size_t i = 0; i < m; ++i)
    if (p.sense[i] != Sense::Eq) slack_col[i] = cols++;
  for (std::size_t i = 0; i < m; ++i)
    if (p.sense[i] != Sense::Le) art_col[i] = cols++;
  const std::size_t rhs = cols;
  std::vector<std::vector<long double>> t(m, std::vector<long double>(cols + 1, 0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = p.a[i][j];
    if (slack_col[i] != SIZE_MAX) t[i][slack_col[i]] = p.sense[i] == Sense::Le ? 1 : -1;
    if (art_col[i] != SIZE_MAX) t[i][art_col[i]] = 1;
    t[i][rhs] = p.b[i];
    basis[i] = p.sense[i] == Sense::Le ? slack_col[i] : art_col[i];
  }
  constexpr long double eps = 1e-12L;

  // Maximizes sum_j cost[j] * x_j over the current tableau; false if unbounded.
  auto run = [&](const std::vector<long double>& cost, std::size_t allowed) {
    for (std::size_t iter = 0; iter < 100000; ++iter) {
      std::size_t enter = SIZE_MAX;
      for (std::size_t j = 0; j < allowed && enter == SIZE_MAX; ++j) {
        long double rc = cost[j];
        for (std::size_t i = 0; i < m; ++i) rc -= cost[basis[i]] * t[i][j];
        if (rc > 1e-10L) enter = j;
      }
      if (enter == SIZE_MAX) return true;
      std::size_t leave = SIZE_MAX;
      long double best = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (t[i][enter] > eps) {
          const long double ratio = t[i][rhs] / t[i][enter];
          if (leave == SIZE_MAX || ratio < best - 1e-15L || (ratio <= best + 1e-15L && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      if (leave == SIZE_MAX) return false;
      const long double piv = t[leave][enter];
      for (auto& v : t[leave]) v /= piv;
      for (std::size_t i = 0; i < m; ++i)
        if (i != leave && t[i][enter] != 0) {
          const long double f = t[i][enter];
          for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[leave][j];
        }
      basis[leave] = enter;
    }
    throw std::runtime_error("reference simplex iteration limit");
  };

  Result r;
  std::vector<long double> phase1(cols, 0);
  bool any_art = false;
  for (std::size_t i = 0; i < m; ++i)
    if (art_col[i] != SIZE_MAX) {
      phase1[art_col[i]] = -1;
      any_art = true;
    }
  if (any_art) {
    run(phase1, cols);
    long double infeas = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= n && phase1[basis[i]] != 0) infeas += t[i][rhs];
    if (infeas > 1e-9L) return r;
    // Drive remaining zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i)
      if (phase1[basis[i]] != 0)
        for (std::size_t j = 0; j < cols; ++j)
          if (phase1[j] == 0 && std::fabs(t[i][j]) > 1e-9L) {
            const long double piv = t[i][j];
            for (auto& v : t[i]) v /= piv;
            for (std::size_t k = 0; k < m; ++k)
              if (k != i && t[k][j] != 0) {
                const long double f = t[k][j];
                for (std::size_t q = 0; q <= cols; ++q) t[k][q] -= f * t[i][q];
              }
            basis[i] = j;
            break;
          }
  }
  std::vector<long double> cost(cols, 0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = p.c[j];
  // Artificial columns stay out of the phase-2 pricing.
  std::size_t allowed = n;
  for (std::size_t i = 0; i < m; ++i)
    if (slack_col[i] != SIZE_MAX) allowed = std::max(allowed, slack_col[i] + 1);
  if (!run(cost, allowed)) {
    r.status = Status::Unbounded;
    return r;
  }
  r.status = Status::Optimal;
  r.x.assign(n, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) r.x[basis[i]] = t[i][rhs];
  for (std::size_t j = 0; j < n; ++j) r.objective += p.c[j] * r.x[j];
  return r;
}

}  // namespace reflp
