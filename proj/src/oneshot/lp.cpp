#include "oneshot/lp.hpp"

#include <algorithm>
#include <cmath>

namespace oneshot::lp {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-8;

struct Tableau {
  int m = 0;       // rows
  int n = 0;       // structural + slack columns
  int art0 = 0;    // first artificial column (= n)
  int ncols = 0;   // n + m artificials
  std::vector<double> t;  // (m+1) x (ncols+1); row m = cost row
  std::vector<int> basis;
  std::vector<bool> dead_row;

  double& at(int i, int j) { return t[(size_t)i * (ncols + 1) + j]; }

  void pivot(int pr, int pc) {
    double piv = at(pr, pc);
    double inv = 1.0 / piv;
    for (int j = 0; j <= ncols; ++j) at(pr, j) *= inv;
    at(pr, pc) = 1.0;
    for (int i = 0; i <= m; ++i) {
      if (i == pr) continue;
      double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j <= ncols; ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
    }
    basis[pr] = pc;
  }

  // Bland: entering = lowest-index improving column, leaving = min ratio
  // with ties broken by lowest basis index. Returns status.
  enum class LoopEnd { Optimal, Unbounded, Stalled };
  LoopEnd run(bool allow_artificial_entering, int iter_cap, int* iters) {
    for (int it = 0; it < iter_cap; ++it) {
      int enter = -1;
      int limit = allow_artificial_entering ? ncols : art0;
      for (int j = 0; j < limit; ++j) {
        if (at(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) {
        *iters += it;
        return LoopEnd::Optimal;
      }
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (dead_row[i]) continue;
        double a = at(i, enter);
        if (a <= kPivotTol) continue;
        double ratio = at(i, ncols) / a;
        if (leave < 0 || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) {
        *iters += it;
        return LoopEnd::Unbounded;
      }
      pivot(leave, enter);
    }
    return LoopEnd::Stalled;
  }
};

}  // namespace

Solution solve(const Problem& p) {
  if ((int)p.c.size() != p.num_vars)
    throw UsageError("lp::solve: objective length != num_vars");
  int m = (int)p.rows.size();

  // slacks: LE gets +s, GE gets -s
  int nslack = 0;
  std::vector<int> slack_col(m, -1);
  for (int i = 0; i < m; ++i)
    if (p.rows[i].sense != Sense::EQ) slack_col[i] = p.num_vars + nslack++;

  Tableau T;
  T.m = m;
  T.n = p.num_vars + nslack;
  T.art0 = T.n;
  T.ncols = T.n + m;
  T.t.assign((size_t)(m + 1) * (T.ncols + 1), 0.0);
  T.basis.resize(m);
  T.dead_row.assign(m, false);

  std::vector<double> row_sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    const Row& r = p.rows[i];
    double sgn = r.rhs < 0.0 ? -1.0 : 1.0;
    row_sign[i] = sgn;
    for (const auto& [v, cf] : r.terms) {
      if (v < 0 || v >= p.num_vars) throw UsageError("lp::solve: bad variable");
      T.at(i, v) += sgn * cf;
    }
    if (r.sense == Sense::LE) T.at(i, slack_col[i]) = sgn * 1.0;
    if (r.sense == Sense::GE) T.at(i, slack_col[i]) = sgn * -1.0;
    T.at(i, T.art0 + i) = 1.0;
    T.at(i, T.ncols) = sgn * r.rhs;
    T.basis[i] = T.art0 + i;
  }

  // phase 1 cost row: minimize sum of artificials
  for (int j = 0; j < T.ncols; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += T.at(i, j);
    if (j < T.art0) T.at(m, j) = -s;
  }
  {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += T.at(i, T.ncols);
    T.at(m, T.ncols) = -s;
  }

  Solution sol;
  int iter_cap = 2000 + 200 * (T.ncols + m);
  auto end1 = T.run(false, iter_cap, &sol.iterations);
  if (end1 == Tableau::LoopEnd::Stalled)
    throw NumericalError("lp::solve: phase-1 iteration cap");

  double phase1 = -T.at(m, T.ncols);
  if (phase1 > kFeasTol) {
    sol.status = Status::Infeasible;
    // y_i = 1 - reduced cost of artificial i (phase-1 costs), flipped back
    sol.farkas.assign(m, 0.0);
    for (int i = 0; i < m; ++i)
      sol.farkas[i] = row_sign[i] * (1.0 - T.at(m, T.art0 + i));
    return sol;
  }

  // drive leftover artificials out of the basis; rows that cannot pivot
  // are dependent and go inert
  for (int i = 0; i < m; ++i) {
    if (T.basis[i] < T.art0) continue;
    int pc = -1;
    for (int j = 0; j < T.n; ++j) {
      if (std::abs(T.at(i, j)) > kPivotTol) {
        pc = j;
        break;
      }
    }
    if (pc >= 0)
      T.pivot(i, pc);
    else
      T.dead_row[i] = true;
  }

  // phase 2 cost row
  for (int j = 0; j <= T.ncols; ++j) T.at(m, j) = 0.0;
  for (int j = 0; j < p.num_vars; ++j) T.at(m, j) = p.c[j];
  for (int i = 0; i < m; ++i) {
    if (T.basis[i] >= p.num_vars) continue;
    double cb = p.c[T.basis[i]];
    if (cb == 0.0) continue;
    for (int j = 0; j <= T.ncols; ++j) T.at(m, j) -= cb * T.at(i, j);
  }

  auto end2 = T.run(false, iter_cap, &sol.iterations);
  if (end2 == Tableau::LoopEnd::Stalled)
    throw NumericalError("lp::solve: phase-2 iteration cap");
  if (end2 == Tableau::LoopEnd::Unbounded) {
    sol.status = Status::Unbounded;
    return sol;
  }

  sol.status = Status::Optimal;
  sol.x.assign(p.num_vars, 0.0);
  for (int i = 0; i < m; ++i) {
    if (T.basis[i] < p.num_vars) {
      double v = T.at(i, T.ncols);
      sol.x[T.basis[i]] = v < 0.0 && v > -1e-11 ? 0.0 : v;
    }
  }
  sol.value = -T.at(m, T.ncols);
  sol.primal_obj = 0.0;
  for (int j = 0; j < p.num_vars; ++j) sol.primal_obj += p.c[j] * sol.x[j];

  sol.dual.assign(m, 0.0);
  sol.dual_obj = 0.0;
  for (int i = 0; i < m; ++i) {
    double y = -T.at(m, T.art0 + i) * row_sign[i];
    sol.dual[i] = y;
    sol.dual_obj += y * p.rows[i].rhs;
  }

  double scale = 1.0 + std::abs(sol.primal_obj);
  if (std::abs(sol.primal_obj - sol.dual_obj) > 1e-7 * scale)
    throw NumericalError("lp::solve: duality gap out of tolerance");
  return sol;
}

}  // namespace oneshot::lp
