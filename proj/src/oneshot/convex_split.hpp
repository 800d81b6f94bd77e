#pragma once

#include "oneshot/linalg.hpp"
#include "oneshot/quantum.hpp"

namespace oneshot::convex_split {

using linalg::Mat;
using linalg::cplx;
using quantum::QState;

// Mixture over register positions: one copy of rho_AB placed at slot j,
// sigma_B everywhere else, averaged over j = 1..2^r_exp.
struct SplitState {
  Mat tau;          // dense on A x B_1..B_N, row index a*db^N + b-word
  int da = 0;
  int db = 0;
  int n_copies = 0;
};
SplitState convex_split_state(const QState& rho, const Mat& sigma_b,
                              int r_exp);

// rate the lemma asks for, before the ceiling
double split_threshold(const QState& rho_prime, const Mat& sigma_b,
                       double delta);

struct SplitReport {
  int r_exp = 0;
  int n_copies = 0;
  double dmax = 0.0;       // against rho'_A (x) sigma
  double threshold = 0.0;  // dmax + 2 log2(2/delta)
  double t_eps = 0.0;      // T(rho, rho')
  double p_eps = 0.0;      // P(rho, rho')
  double t_dist = 0.0;     // T(tau, rho'_A (x) sigma^N)
  double p_dist = 0.0;     // P(tau, rho'_A (x) sigma^N)
};

// Exact distances of the split state from the product target, computed in
// the permutation-symmetric block decomposition of the qubit registers, so
// register counts far beyond the dense cap stay cheap.
SplitReport convex_split_report(const QState& rho, const QState& rho_prime,
                                const Mat& sigma_b, int r_exp, double delta);

}  // namespace oneshot::convex_split
