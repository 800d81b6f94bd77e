#pragma once

#include <vector>

#include "oneshot/linalg.hpp"
#include "oneshot/prob.hpp"

namespace oneshot::quantum {

using linalg::cplx;
using linalg::Mat;

// Ball geometry for the smoothing radius.
enum class Metric { Trace, Purified };

// Bipartite density operator on A x B, row index a*db + b. States may be
// sub-normalized; purified-ball smoothing additionally requires trace one.
struct QState {
  int da = 0;
  int db = 0;
  Mat rho;
};

QState make_state(int da, int db, Mat rho);
QState from_classical(const prob::Dist& p);
QState tensor(const QState& s, const QState& t);

Mat marginal_a(const QState& s);
Mat marginal_b(const QState& s);

double trace_norm(const Mat& a);
double gen_trace_distance(const Mat& a, const Mat& b);
double fidelity(const Mat& a, const Mat& b);
double gen_fidelity(const Mat& a, const Mat& b);
double purified_distance(const Mat& a, const Mat& b);
double distance(Metric m, const Mat& a, const Mat& b);

// log2 min{ lambda : a <= lambda * b }; +inf on support violation,
// -inf for a = 0. Leakage below the rank cutoff counts as zero.
double d_max(const Mat& a, const Mat& b);

double von_neumann_entropy(const Mat& a);
double mutual_information(const QState& s);
double conditional_entropy(const QState& s);

struct QMeasureResult {
  double value = 0.0;
  Mat optimizer;             // smoothed state, hermitized as returned
  Mat reference;             // sigma_B for max-information, rho_B otherwise
  double achieved_distance = 0.0;
  double cone_optimum = 0.0; // tr S* resp. t* before taking logs
  double gap = 0.0;
  int iterations = 0;
};

// Smoothed max-information with the A-marginal pinned to rho_A, and the
// variant smoothing over all normalized states. References range over
// rho_A (x) sigma_B with the original rho_A.
QMeasureResult imax_partial(const QState& s, double eps, Metric m);
QMeasureResult imax_full(const QState& s, double eps, Metric m);
QMeasureResult imax_unsmoothed(const QState& s);

// Smoothed conditional min-entropy; the pinned variant keeps the
// B-marginal dominated by rho_B. Reference is 1_A (x) rho_B.
QMeasureResult hmin_partial(const QState& s, double eps, Metric m);
QMeasureResult hmin_full(const QState& s, double eps, Metric m);
QMeasureResult hmin_unsmoothed(const QState& s);

struct HatResult {
  Mat rho_hat;
  double marginal_residual = 0.0;  // pinned marginal against the original
  double distance = 0.0;           // purified distance to the input state
  double dmax_hat = 0.0;           // relative to the construction reference
  double dmax_budget = 0.0;        // optimizer value plus the delta penalty
};

// Rotate the positive-part compression of a smoothed optimizer back onto
// the original marginal: gamma = delta^2/8, polar alignment on A, plus a
// product remainder filling the kernel. Certifies the marginal pin, the
// max-divergence penalty log2((8+delta^2)/delta^2), and distance 2eps+delta.
HatResult imax_hat(const QState& s, const Mat& rho_tilde, const Mat& sigma_b,
                   double delta);
// Same surgery on the B side; the remainder carries 1_A/|A|.
HatResult hmin_hat(const QState& s, const Mat& rho_tilde, double delta);

// Classical register utilities. A cq state keeps X as the A factor.
QState cq_state(const std::vector<Mat>& blocks);
QState cq_apply_function(const QState& s, const std::vector<int>& f, int nz);

struct MeasuredState {
  QState omega;               // A x (B,X) with X appended to the B factor
  std::vector<double> px;     // outcome weights
};
MeasuredState projective_measure(const QState& s,
                                 const std::vector<Mat>& projectors);

}  // namespace oneshot::quantum
