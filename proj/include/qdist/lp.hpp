#pragma once

// Linear programs of the form
//
//   maximize  c'x   subject to  rows (<=, >=, =),  0 <= x <= u
//
// with a deterministic bounded revised simplex solver, a light presolve, and a
// plain-text interchange format for external solvers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "qdist/error.hpp"

namespace qdist {

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct LPRow {
  std::string name;
  std::vector<std::pair<std::size_t, double>> coeffs;  // (variable, coefficient)
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

struct LPProblem {
  std::vector<std::string> names;
  std::vector<double> objective;
  std::vector<double> upper;  // +inf when unbounded above
  std::vector<LPRow> rows;

  std::size_t add_variable(std::string name, double cost, double ub = std::numeric_limits<double>::infinity()) {
    names.push_back(std::move(name));
    objective.push_back(cost);
    upper.push_back(ub);
    return names.size() - 1;
  }

  std::size_t add_row(LPRow row) {
    for (const auto& [j, a] : row.coeffs)
      if (j >= names.size()) throw ValidationError("row '" + row.name + "' references an unknown variable");
    rows.push_back(std::move(row));
    return rows.size() - 1;
  }

  std::size_t num_vars() const { return names.size(); }
  std::size_t num_rows() const { return rows.size(); }
};

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
    case LPStatus::IterationLimit: return "iteration-limit";
    case LPStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

struct LPSolution {
  LPStatus status = LPStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
  double seconds = 0.0;
  double max_residual = 0.0;  // worst primal violation over rows and bounds
  std::string message;

  bool optimal() const { return status == LPStatus::Optimal; }
};

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;  // scaled by max(1, |alpha|_inf)
  std::size_t refactor_interval = 64;
  std::size_t max_iterations = 0;  // 0 picks a limit from the problem size
  std::size_t degenerate_before_bland = 40;
  bool presolve = true;
  double certify_tol = 1e-6;  // post-solve residual budget
  double perturbation = 1e-7; // relative rhs shift against degeneracy; 0 disables
};

// Worst violation of rows and bounds at x.
inline double primal_residual(const LPProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    worst = std::max(worst, -x[j]);
    if (std::isfinite(p.upper[j])) worst = std::max(worst, x[j] - p.upper[j]);
  }
  for (const auto& r : p.rows) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.coeffs) lhs += a * x[j];
    const double v = lhs - r.rhs;
    if (r.sense == RowSense::LessEqual) worst = std::max(worst, v);
    else if (r.sense == RowSense::GreaterEqual) worst = std::max(worst, -v);
    else worst = std::max(worst, std::abs(v));
  }
  return worst;
}

namespace detail {

// Bounded primal revised simplex on  A x = b, 0 <= x <= u,  with an initial
// basis given by the caller. The basis inverse is an LU factorization of the
// last refactored basis followed by product-form eta updates.
class SimplexEngine {
 public:
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

  SimplexEngine(std::size_t m, std::vector<int> col_start, std::vector<int> row_idx, std::vector<double> val,
                std::vector<double> upper, std::vector<double> b, std::vector<std::size_t> basis,
                const SolverOptions& opt)
      : m_(m),
        n_(upper.size()),
        start_(std::move(col_start)),
        row_(std::move(row_idx)),
        val_(std::move(val)),
        upper_(std::move(upper)),
        b_(std::move(b)),
        basis_(std::move(basis)),
        opt_(opt) {
    pos_.assign(n_, -1);
    at_upper_.assign(n_, 0);
    cost_.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) pos_[basis_[i]] = static_cast<std::ptrdiff_t>(i);
  }

  enum class Outcome { Optimal, Unbounded, IterationLimit, Singular };

  void set_cost(std::vector<double> c) { cost_ = std::move(c); }
  void set_upper(std::size_t j, double u) { upper_[j] = u; }
  void set_rhs(std::vector<double> b) { b_ = std::move(b); }

  // Worst bound violation among the basic variables of a fresh factorization.
  double basic_infeasibility() {
    if (!refactor()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      worst = std::max(worst, -xb_[i]);
      if (std::isfinite(upper_[basis_[i]])) worst = std::max(worst, xb_[i] - upper_[basis_[i]]);
    }
    return worst;
  }
  std::size_t iterations() const { return iterations_; }

  Outcome run(std::size_t max_iterations) {
    if (!refactor()) return Outcome::Singular;
    std::vector<double> y(m_), alpha(m_);
    double cmax = 1.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    const double dtol = opt_.optimality_tol * cmax;
    std::size_t degenerate = 0;
    bool bland = false;

    while (true) {
      if (iterations_ >= max_iterations) return Outcome::IterationLimit;
      if (etas_.size() >= opt_.refactor_interval && !refactor()) return Outcome::Singular;

      for (std::size_t i = 0; i < m_; ++i) y[i] = cost_[basis_[i]];
      btran(y);

      std::ptrdiff_t q = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (pos_[j] >= 0 || upper_[j] <= 0.0) continue;
        double d = cost_[j];
        for (int k = start_[j]; k < start_[j + 1]; ++k) d -= y[static_cast<std::size_t>(row_[k])] * val_[k];
        const bool improving = at_upper_[j] ? d < -dtol : d > dtol;
        if (!improving) continue;
        if (bland) {
          q = static_cast<std::ptrdiff_t>(j);
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = static_cast<std::ptrdiff_t>(j);
        }
      }
      if (q < 0) {
        // Confirm on a fresh factorization before declaring optimality.
        if (!etas_.empty()) {
          if (!refactor()) return Outcome::Singular;
          continue;
        }
        return Outcome::Optimal;
      }
      const auto qj = static_cast<std::size_t>(q);

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (int k = start_[qj]; k < start_[qj + 1]; ++k) alpha[static_cast<std::size_t>(row_[k])] = val_[k];
      ftran(alpha);
      const double dir = at_upper_[qj] ? -1.0 : 1.0;
      double amax = 1.0;
      for (double a : alpha) amax = std::max(amax, std::abs(a));
      const double ptol = opt_.pivot_tol * amax;

      // Ratio test. Harris two-pass in normal mode; exact with lowest-index
      // ties in Bland mode.
      const double inf = std::numeric_limits<double>::infinity();
      const double ftol = bland ? 0.0 : opt_.feasibility_tol;
      double theta1 = inf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double delta = dir * alpha[i];
        if (std::abs(delta) <= ptol) continue;
        const double ub = upper_[basis_[i]];
        double t = inf;
        if (delta > 0.0) t = (xb_[i] + ftol) / delta;
        else if (std::isfinite(ub)) t = (ub - xb_[i] + ftol) / -delta;
        theta1 = std::min(theta1, t);
      }
      std::ptrdiff_t r = -1;
      double theta = inf;
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double delta = dir * alpha[i];
        if (std::abs(delta) <= ptol) continue;
        const double ub = upper_[basis_[i]];
        double t = inf;
        if (delta > 0.0) t = xb_[i] / delta;
        else if (std::isfinite(ub)) t = (ub - xb_[i]) / -delta;
        if (!std::isfinite(t) || !(t <= theta1)) continue;
        t = std::max(t, 0.0);
        if (bland) {
          if (r < 0 || t < theta - 1e-12 ||
              (std::abs(t - theta) <= 1e-12 && basis_[i] < basis_[static_cast<std::size_t>(r)])) {
            r = static_cast<std::ptrdiff_t>(i);
            theta = t;
          }
        } else if (std::abs(delta) > best_pivot) {
          best_pivot = std::abs(delta);
          r = static_cast<std::ptrdiff_t>(i);
          theta = t;
        }
      }
      const double uq = upper_[qj];
      const bool flip = std::isfinite(uq) && (r < 0 || uq <= theta);
      if (r < 0 && !flip) return Outcome::Unbounded;
      if (flip) theta = uq;

      ++iterations_;
      if (theta <= 1e-12) {
        if (++degenerate >= opt_.degenerate_before_bland) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }

      for (std::size_t i = 0; i < m_; ++i) xb_[i] -= dir * theta * alpha[i];
      if (flip) {
        at_upper_[qj] = !at_upper_[qj];
        continue;
      }
      const auto ri = static_cast<std::size_t>(r);
      const std::size_t leaving = basis_[ri];
      const bool to_upper = dir * alpha[ri] < 0.0;
      const double entering_value = (at_upper_[qj] ? uq : 0.0) + dir * theta;
      basis_[ri] = qj;
      pos_[qj] = static_cast<std::ptrdiff_t>(ri);
      pos_[leaving] = -1;
      at_upper_[leaving] = to_upper ? 1 : 0;
      at_upper_[qj] = 0;
      xb_[ri] = entering_value;

      Eta e;
      e.r = ri;
      e.pivot = alpha[ri];
      for (std::size_t i = 0; i < m_; ++i)
        if (i != ri && alpha[i] != 0.0) {
          e.idx.push_back(i);
          e.val.push_back(alpha[i]);
        }
      etas_.push_back(std::move(e));
    }
  }

  // Values of all columns at the current basis (after a fresh factorization).
  bool values(std::vector<double>& x) {
    if (!refactor()) return false;
    x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      if (pos_[j] < 0 && at_upper_[j]) x[j] = upper_[j];
    for (std::size_t i = 0; i < m_; ++i) x[basis_[i]] = xb_[i];
    return true;
  }

  const std::vector<std::size_t>& basis() const { return basis_; }

 private:
  struct Eta {
    std::size_t r = 0;
    double pivot = 1.0;
    std::vector<std::size_t> idx;
    std::vector<double> val;
  };

  bool refactor() {
    etas_.clear();
    if (m_ == 0) {
      xb_.clear();
      return true;
    }
    std::vector<Eigen::Triplet<double, int>> trip;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto j = basis_[i];
      for (int k = start_[j]; k < start_[j + 1]; ++k) trip.emplace_back(row_[k], static_cast<int>(i), val_[k]);
    }
    SpMat B(static_cast<int>(m_), static_cast<int>(m_));
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    if (lu_.info() != Eigen::Success) return false;

    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) rhs[static_cast<Eigen::Index>(i)] = b_[i];
    for (std::size_t j = 0; j < n_; ++j) {
      if (pos_[j] >= 0 || !at_upper_[j]) continue;
      for (int k = start_[j]; k < start_[j + 1]; ++k) rhs[row_[k]] -= upper_[j] * val_[k];
    }
    Eigen::VectorXd sol = lu_.solve(rhs);
    if (!sol.allFinite()) return false;
    xb_.assign(sol.data(), sol.data() + m_);
    return true;
  }

  void ftran(std::vector<double>& z) {
    if (m_ == 0) return;
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd s = lu_.solve(zv);
    zv = s;
    for (const auto& e : etas_) {
      const double zr = z[e.r] / e.pivot;
      z[e.r] = zr;
      if (zr == 0.0) continue;
      for (std::size_t k = 0; k < e.idx.size(); ++k) z[e.idx[k]] -= e.val[k] * zr;
    }
  }

  void btran(std::vector<double>& w) {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double dot = 0.0;
      for (std::size_t k = 0; k < it->idx.size(); ++k) dot += w[it->idx[k]] * it->val[k];
      w[it->r] = (w[it->r] - dot) / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd s = lu_.transpose().solve(wv);
    wv = s;
  }

  std::size_t m_, n_;
  std::vector<int> start_;
  std::vector<int> row_;
  std::vector<double> val_;
  std::vector<double> upper_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  SolverOptions opt_;
  std::vector<std::ptrdiff_t> pos_;
  std::vector<char> at_upper_;
  std::vector<double> cost_;
  std::vector<double> xb_;
  std::vector<Eta> etas_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::size_t iterations_ = 0;
};

// Removes variables and rows that provably do not affect the optimum:
// variables fixed at zero, zero-or-negative-cost variables whose every
// coefficient sits in a <= row with a nonnegative sign, and <= rows that can
// never bind (all coefficients <= 0 and rhs >= 0). Repeats to a fixpoint.
struct Presolved {
  std::vector<char> keep_var;
  std::vector<char> keep_row;
};

inline Presolved presolve(const LPProblem& p) {
  const std::size_t n = p.num_vars(), m = p.num_rows();
  Presolved ps;
  ps.keep_var.assign(n, 1);
  ps.keep_row.assign(m, 1);
  std::vector<std::vector<std::pair<std::size_t, double>>> col(n);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& [j, a] : p.rows[i].coeffs)
      if (a != 0.0) col[j].emplace_back(i, a);
  for (std::size_t j = 0; j < n; ++j)
    if (p.upper[j] <= 0.0) ps.keep_var[j] = 0;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (!ps.keep_row[i] || p.rows[i].sense != RowSense::LessEqual || p.rows[i].rhs < 0.0) continue;
      bool slack_forever = true;
      for (const auto& [j, a] : p.rows[i].coeffs)
        if (ps.keep_var[j] && a > 0.0) {
          slack_forever = false;
          break;
        }
      if (slack_forever) {
        ps.keep_row[i] = 0;
        changed = true;
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!ps.keep_var[j] || p.objective[j] > 0.0) continue;
      bool only_hurts = true;
      for (const auto& [i, a] : col[j]) {
        if (!ps.keep_row[i]) continue;
        if (p.rows[i].sense != RowSense::LessEqual || a < 0.0) {
          only_hurts = false;
          break;
        }
      }
      if (only_hurts) {
        ps.keep_var[j] = 0;
        changed = true;
      }
    }
  }
  return ps;
}

}  // namespace detail

inline LPSolution solve_lp(const LPProblem& p, const SolverOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  LPSolution sol;
  const std::size_t n = p.num_vars();
  sol.x.assign(n, 0.0);
  auto finish = [&](LPStatus st, std::string msg) {
    sol.status = st;
    sol.message = std::move(msg);
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  };
  if (p.objective.size() != n || p.upper.size() != n) throw ValidationError("LP variable arrays have inconsistent sizes");
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(p.objective[j]) || std::isnan(p.upper[j]) || p.upper[j] < 0.0)
      throw ValidationError("LP variable '" + p.names[j] + "' has an invalid cost or bound");

  detail::Presolved ps;
  if (opt.presolve) {
    ps = detail::presolve(p);
  } else {
    ps.keep_var.assign(n, 1);
    ps.keep_row.assign(p.num_rows(), 1);
    for (std::size_t j = 0; j < n; ++j)
      if (p.upper[j] <= 0.0) ps.keep_var[j] = 0;
  }

  std::vector<std::size_t> vars;
  std::vector<std::ptrdiff_t> var_col(n, -1);
  for (std::size_t j = 0; j < n; ++j)
    if (ps.keep_var[j]) {
      var_col[j] = static_cast<std::ptrdiff_t>(vars.size());
      vars.push_back(j);
    }

  // Normalized rows with rhs >= 0; rows left without variables are checked
  // directly.
  struct NRow {
    std::vector<std::pair<std::size_t, double>> coeffs;
    RowSense sense;
    double rhs;
  };
  std::vector<NRow> rows;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    if (!ps.keep_row[i]) continue;
    const auto& r = p.rows[i];
    std::map<std::size_t, double> merged;
    for (const auto& [j, a] : r.coeffs)
      if (var_col[j] >= 0 && a != 0.0) merged[static_cast<std::size_t>(var_col[j])] += a;
    NRow nr{{}, r.sense, r.rhs};
    for (const auto& [c, a] : merged)
      if (a != 0.0) nr.coeffs.emplace_back(c, a);
    if (nr.coeffs.empty()) {
      const bool ok = (r.sense == RowSense::LessEqual && 0.0 <= r.rhs + opt.feasibility_tol) ||
                      (r.sense == RowSense::GreaterEqual && 0.0 >= r.rhs - opt.feasibility_tol) ||
                      (r.sense == RowSense::Equal && std::abs(r.rhs) <= opt.feasibility_tol);
      if (!ok) return finish(LPStatus::Infeasible, "row '" + r.name + "' cannot be satisfied");
      continue;
    }
    if (nr.rhs < 0.0) {
      nr.rhs = -nr.rhs;
      for (auto& c : nr.coeffs) c.second = -c.second;
      if (nr.sense == RowSense::LessEqual) nr.sense = RowSense::GreaterEqual;
      else if (nr.sense == RowSense::GreaterEqual) nr.sense = RowSense::LessEqual;
    }
    rows.push_back(std::move(nr));
  }

  const std::size_t m = rows.size();
  const std::size_t ns = vars.size();
  // Column layout: structural, logical (slack/surplus), artificial.
  std::vector<std::vector<std::pair<int, double>>> cols(ns);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& [c, a] : rows[i].coeffs) cols[c].emplace_back(static_cast<int>(i), a);
  std::vector<double> upper;
  for (auto j : vars) upper.push_back(p.upper[j]);
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> artificials;
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].sense == RowSense::Equal) continue;
    cols.push_back({{static_cast<int>(i), rows[i].sense == RowSense::LessEqual ? 1.0 : -1.0}});
    upper.push_back(std::numeric_limits<double>::infinity());
    if (rows[i].sense == RowSense::LessEqual) basis[i] = cols.size() - 1;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].sense == RowSense::LessEqual) continue;
    cols.push_back({{static_cast<int>(i), 1.0}});
    upper.push_back(std::numeric_limits<double>::infinity());
    basis[i] = cols.size() - 1;
    artificials.push_back(cols.size() - 1);
  }
  std::vector<int> start{0};
  std::vector<int> row_idx;
  std::vector<double> val;
  for (const auto& c : cols) {
    for (const auto& [i, a] : c) {
      row_idx.push_back(i);
      val.push_back(a);
    }
    start.push_back(static_cast<int>(row_idx.size()));
  }
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) b[i] = rows[i].rhs;
  const std::size_t total = cols.size();

  // An empty column with positive cost and no upper bound makes the LP unbounded.
  for (std::size_t c = 0; c < ns; ++c)
    if (cols[c].empty() && p.objective[vars[c]] > 0.0 && !std::isfinite(upper[c]))
      return finish(LPStatus::Unbounded, "variable '" + p.names[vars[c]] + "' is unbounded");

  // Every flow row starts tight at zero, so the problem is massively
  // degenerate. Inequality rows are relaxed by small distinct amounts while
  // pivoting; the final basis is then re-evaluated on the true right-hand side.
  std::vector<double> bp = b;
  if (opt.perturbation > 0.0) {
    std::minstd_rand gen(7);
    std::uniform_real_distribution<double> unit(1.0, 2.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (rows[i].sense == RowSense::Equal) continue;
      const double d = opt.perturbation * unit(gen) * std::max(1.0, std::abs(b[i]));
      bp[i] += rows[i].sense == RowSense::LessEqual ? d : -d;
    }
  }
  detail::SimplexEngine engine(m, std::move(start), std::move(row_idx), std::move(val), upper, bp, basis, opt);
  const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : 50 * (m + total) + 10000;

  double bnorm = 1.0;
  for (double v : b) bnorm = std::max(bnorm, std::abs(v));

  if (!artificials.empty()) {
    std::vector<double> c1(total, 0.0);
    for (auto a : artificials) c1[a] = -1.0;
    engine.set_cost(c1);
    auto out = engine.run(max_iter);
    if (out == detail::SimplexEngine::Outcome::Singular) return finish(LPStatus::NumericalFailure, "singular basis in phase 1");
    if (out == detail::SimplexEngine::Outcome::IterationLimit) return finish(LPStatus::IterationLimit, "iteration limit in phase 1");
    std::vector<double> xv;
    if (!engine.values(xv)) return finish(LPStatus::NumericalFailure, "singular basis after phase 1");
    double infeas = 0.0;
    for (auto a : artificials) infeas += std::max(0.0, xv[a]);
    if (infeas > opt.feasibility_tol * bnorm * 10.0) {
      sol.iterations = engine.iterations();
      return finish(LPStatus::Infeasible, "no feasible point (phase 1 residual " + std::to_string(infeas) + ")");
    }
    for (auto a : artificials) engine.set_upper(a, 0.0);
  }

  std::vector<double> c2(total, 0.0);
  for (std::size_t c = 0; c < ns; ++c) c2[c] = p.objective[vars[c]];
  engine.set_cost(c2);
  auto out = engine.run(max_iter);
  sol.iterations = engine.iterations();
  if (out == detail::SimplexEngine::Outcome::Singular) return finish(LPStatus::NumericalFailure, "singular basis");
  if (out == detail::SimplexEngine::Outcome::IterationLimit) return finish(LPStatus::IterationLimit, "iteration limit reached");
  if (out == detail::SimplexEngine::Outcome::Unbounded) return finish(LPStatus::Unbounded, "objective is unbounded");

  std::vector<double> xv;
  if (!engine.values(xv)) return finish(LPStatus::NumericalFailure, "singular basis at optimum");
  if (opt.perturbation > 0.0) {
    // Keep the relaxed point if the optimal basis is not primal feasible for
    // the exact data; its violation is bounded by the shift itself.
    engine.set_rhs(b);
    std::vector<double> exact;
    if (engine.basic_infeasibility() <= opt.feasibility_tol * bnorm && engine.values(exact)) xv = std::move(exact);
  }
  for (std::size_t c = 0; c < ns; ++c) {
    double v = xv[c];
    if (std::abs(v) < 1e-12) v = 0.0;
    sol.x[vars[c]] = v;
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += p.objective[j] * sol.x[j];
  sol.max_residual = primal_residual(p, sol.x);
  const double budget = opt.certify_tol * std::max(1.0, bnorm);
  if (sol.max_residual > budget)
    return finish(LPStatus::NumericalFailure, "post-solve residual " + std::to_string(sol.max_residual) + " exceeds tolerance");
  return finish(LPStatus::Optimal, "");
}

// ---------------------------------------------------------------------------
// Text interchange format
//
//   maximize
//    obj: 0.8 r_0 + 1 r_1
//   subject to
//    flow_2: r_1 - 0.45 r_0 <= 0
//   bounds
//    r_1 <= 0
//   end
//
// Every variable appears in the objective (with coefficient 0 if needed) so
// the variable set survives a round trip. The bounds section is written only
// when some variable has a finite upper bound. Numbers use 17 significant
// digits.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void append_terms(std::string& out, const std::vector<std::pair<std::size_t, double>>& terms,
                         const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [j, a] : terms) {
    if (first) {
      out += ' ';
      out += fmt_number(a);
    } else {
      out += a < 0.0 ? " - " : " + ";
      out += fmt_number(std::abs(a));
    }
    out += ' ';
    out += names[j];
    first = false;
  }
  if (first) out += " 0";
}

}  // namespace detail

inline std::string export_lp(const LPProblem& p) {
  std::string out = "maximize\n obj:";
  std::vector<std::pair<std::size_t, double>> obj;
  for (std::size_t j = 0; j < p.num_vars(); ++j) obj.emplace_back(j, p.objective[j]);
  detail::append_terms(out, obj, p.names);
  out += "\nsubject to\n";
  for (const auto& r : p.rows) {
    out += ' ';
    out += r.name;
    out += ':';
    detail::append_terms(out, r.coeffs, p.names);
    out += r.sense == RowSense::LessEqual ? " <= " : r.sense == RowSense::GreaterEqual ? " >= " : " = ";
    out += detail::fmt_number(r.rhs);
    out += '\n';
  }
  bool any_bound = false;
  for (double u : p.upper) any_bound = any_bound || std::isfinite(u);
  if (any_bound) {
    out += "bounds\n";
    for (std::size_t j = 0; j < p.num_vars(); ++j)
      if (std::isfinite(p.upper[j])) out += ' ' + p.names[j] + " <= " + detail::fmt_number(p.upper[j]) + '\n';
  }
  out += "end\n";
  return out;
}

}  // namespace qdist
