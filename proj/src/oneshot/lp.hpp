#pragma once

#include <vector>

#include "oneshot/common.hpp"

namespace oneshot::lp {

enum class Sense { LE, EQ, GE };

struct Row {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

// minimize c.x subject to the rows, x >= 0
struct Problem {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<Row> rows;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Optimal;
  double value = 0.0;
  std::vector<double> x;
  // one multiplier per input row (original orientation); at optimality
  // dual_obj = sum dual[i]*rhs[i] matches the primal value
  std::vector<double> dual;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  // infeasible only: y with y.A <= 0 componentwise, y.b > 0, and
  // sign(y[i]) respecting each row's sense
  std::vector<double> farkas;
  int iterations = 0;
};

// Dense two-phase simplex, Bland's rule throughout, deterministic.
Solution solve(const Problem& p);

}  // namespace oneshot::lp
