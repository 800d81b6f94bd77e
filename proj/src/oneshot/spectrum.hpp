#pragma once

#include <limits>
#include <vector>

#include "oneshot/prob.hpp"

namespace oneshot::spectrum {

using prob::Dist;

// log2 of the smallest lambda with P <= lambda*Q pointwise; +inf if P puts
// mass where Q has none.
double d_max_classical(const Dist& p, const Dist& q);

// Smallest a such that the P-mass of log-ratios strictly above a is
// strictly below eps. Ties in log-ratio are merged before the scan.
// p must be normalized; q is any nonnegative table of the same shape.
double d_s(const Dist& p, const Dist& q, double eps);

// Spectrum divergence against the product of the marginals.
double i_s(const Dist& pxy, double eps);
// Conditional flavor: -d_s against counting measure on X times the
// Y-marginal.
double h_s(const Dist& pxy, double eps);

struct KlVar {
  double kl = 0.0;        // bits
  double variance = 0.0;  // bits^2
};
// Relative entropy and relative entropy variance of p against q.
KlVar kl_and_variance(const Dist& p, const Dist& q);

// Standard normal CDF and its inverse (quantile); inverse accurate to
// 1e-9 in CDF terms over eps in [1e-12, 1-1e-12].
double gaussian_cdf(double x);
double gaussian_cdf_inv(double eps);

// Exact d_s(P^n || Q^n) by aggregating outcomes into type classes of the
// distinct per-cell log-ratios. Errors if the class count exceeds the cap.
double d_s_iid_exact(const Dist& p, const Dist& q, int n, double eps);

struct SecondOrderRow {
  int n = 0;
  double exact_rate = 0.0;
  double predicted_rate = 0.0;
  double residual = 0.0;    // |exact - predicted|
  double normalized = 0.0;  // residual * n / log2(n)
};
// Compares exact i.i.d. rates with kl + sqrt(V/n)*Phi^{-1}(eps).
SecondOrderRow second_order_row(const Dist& p, const Dist& q, int n,
                                double eps);

}  // namespace oneshot::spectrum
