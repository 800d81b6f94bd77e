#pragma once

#include <vector>

#include "oneshot/common.hpp"

namespace oneshot::prob {

// Nonnegative weight table over a product of finite factors, row-major in
// the factor order. Normalized tables have total 1; sub-normalized tables
// have total at most 1. Some reference measures (conditional entropies pair
// the table against counting measure on one factor) legitimately exceed
// total 1, so the type itself only enforces nonnegativity and finiteness.
struct Dist {
  std::vector<int> shape;
  std::vector<double> w;

  size_t cells() const { return w.size(); }
  double total() const;
  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;
};

// Validating constructors.
Dist make_table(std::vector<int> shape, std::vector<double> w);
Dist make_sub_normalized(std::vector<int> shape, std::vector<double> w);
Dist make_normalized(std::vector<int> shape, std::vector<double> w);

bool is_normalized(const Dist& p, double tol = 1e-9);

// Bipartite view: first factor block vs rest. Helpers for the common
// two-factor case.
int nx(const Dist& p);
int ny(const Dist& p);
double cell(const Dist& p, int x, int y);

// Marginal onto the kept factors (ascending factor indices, nonempty).
Dist marginal(const Dist& p, const std::vector<int>& keep);

// For two-factor tables.
std::vector<double> marginal_x(const Dist& p);
std::vector<double> marginal_y(const Dist& p);

// (1/2)||P-Q||_1 + (1/2)|P(all)-Q(all)|, the trace distance extended to
// sub-normalized tables.
double gen_trace_distance(const Dist& p, const Dist& q);

// n-fold product; factor list is the input's repeated n times,
// copy-major (x1 y1 x2 y2 ...). Errors if the table would exceed the cap.
Dist iid_power(const Dist& p, int n);

// max over events S of |P(S)-Q(S)|; exhaustive over 2^k subsets, k <= 20.
double event_gap_distance(const Dist& p, const Dist& q);

}  // namespace oneshot::prob
