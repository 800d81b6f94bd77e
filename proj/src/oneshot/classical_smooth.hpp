#pragma once

#include <vector>

#include "oneshot/lp.hpp"
#include "oneshot/prob.hpp"

namespace oneshot::classical_smooth {

using prob::Dist;

// Result of one smoothed-measure LP. value is in bits; the optimizer is
// re-verified against the constraints independently of the solver before
// being returned.
struct MeasureResult {
  double value = 0.0;
  Dist optimizer;                 // the smoothed table
  std::vector<double> q;          // reference Y-marginal (imax family)
  double achieved_distance = 0.0; // trace distance actually reached
  double lp_optimum = 0.0;        // optimum before taking logs
};

// Smoothed max-information over tables with the X-marginal pinned,
// trace-distance ball of radius eps, reference marginal optimized.
MeasureResult imax_partial(const Dist& p, double eps);
// Same but the reference Y-marginal is fixed to qy.
MeasureResult imax_partial_given_q(const Dist& p,
                                   const std::vector<double>& qy, double eps);
// Ball only (normalization kept), X-marginal free.
MeasureResult imax_full(const Dist& p, double eps);

// Smoothed min-entropy of X given Y; partial keeps the smoothed
// Y-marginal dominated by the original, full drops that.
MeasureResult hmin_partial(const Dist& p, double eps);
MeasureResult hmin_full(const Dist& p, double eps);

// Closed forms at eps = 0.
double imax_unsmoothed(const Dist& p);
double hmin_unsmoothed(const Dist& p);

// Explicit smoothing map: clip each conditional row at ratio 2^c against
// qy and refill the clipped mass with qy.
struct SmootherOutput {
  double c = 0.0;          // spectrum threshold used
  Dist p_prime;
  double eps_used = 0.0;   // mass clipped, never exceeds eps
  double dmax_bound = 0.0; // log2(2^c + 1)
  double dmax_actual = 0.0;
};
SmootherOutput thm1_smoother(const Dist& p, const std::vector<double>& qy,
                             double eps);

// Two-sided spectrum sandwich for both smoothed measures.
struct SandwichReport {
  double eps = 0.0, delta = 0.0;
  double imax = 0.0, hmin = 0.0;
  double is_at_eps = 0.0, is_relaxed = 0.0;
  double hs_at_eps = 0.0, hs_relaxed = 0.0;
  // order: imax lower, imax upper, hmin upper, hmin lower
  double slack[4] = {0, 0, 0, 0};
  double min_slack() const;
};
SandwichReport check_thm1_sandwich(const Dist& p, double eps, double delta);

// Spectrum shift when the reference marginal is frozen:
// i_s_given_q(eps) >= i_s(eps+delta) - log2(1/delta).
double fixed_reference_gap_slack(const Dist& p, const std::vector<double>& qy,
                                 double eps, double delta);

// hmin_partial(eps) >= log2|X| - imax_partial_given_q(swapped, uniform, eps)
double hmin_via_imax_slack(const Dist& p, double eps);

Dist swap_xy(const Dist& p);

}  // namespace oneshot::classical_smooth
