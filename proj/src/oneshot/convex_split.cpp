#include "oneshot/convex_split.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "oneshot/common.hpp"

namespace oneshot::convex_split {

namespace {

void check_sigma(const Mat& sigma, int db, const char* who) {
  if (sigma.rows != db || sigma.cols != db)
    throw UsageError(std::string(who) + ": register state dimension mismatch");
  if (linalg::herm_residual(sigma) > 1e-9)
    throw UsageError(std::string(who) + ": register state not hermitian");
  linalg::EigH e = linalg::eig_herm(linalg::hermitize(sigma));
  if (e.w.front() < -1e-9)
    throw UsageError(std::string(who) + ": register state not positive");
  double tr = 0.0;
  for (double w : e.w) tr += w;
  if (std::abs(tr - 1.0) > 1e-9)
    throw UsageError(std::string(who) + ": register state not normalized");
}

void check_normalized(const QState& s, const char* who) {
  if (std::abs(linalg::trace(s.rho).real() - 1.0) > 1e-9)
    throw UsageError(std::string(who) + ": state must be normalized");
}

// split-state blocks over total-spin sectors of the qubit registers;
// slot s holds 2j = (k & 1) + 2s on H_A tensor the spin-j space
struct Sectors {
  int k = 0;
  std::vector<Mat> block;
  std::vector<double> mult;
};

int twoj_of(int k, int slot) { return (k & 1) + 2 * slot; }
int slots_of(int k) { return (k - (k & 1)) / 2 + 1; }

// <g, (twom-s2)/2 ; 1/2, s2/2 | j', twom/2> for j' = g +- 1/2
double cg(int twog, int twojp, int twom, int s2) {
  int twomc = twom - s2;
  if (std::abs(twomc) > twog) return 0.0;
  double den = 2.0 * (twog + 1);
  if (twojp == twog + 1)
    return s2 > 0 ? std::sqrt((twog + twom + 1) / den)
                  : std::sqrt((twog - twom + 1) / den);
  return s2 > 0 ? -std::sqrt((twog - twom + 1) / den)
                : std::sqrt((twog + twom + 1) / den);
}

// sigma^(x)k acts as this scalar on any vector of register weight twomc/2
double weight_scalar(double p, double q, int k, int twomc) {
  return std::pow(p, (k + twomc) / 2) * std::pow(q, (k - twomc) / 2);
}

// attach one register: (k/(k+1)) tau_k (x) sigma + (1/(k+1)) sigma^k (x) rho
Sectors step(const Sectors& in, const Mat& rho_rot, int da, double p,
             double q) {
  int k = in.k, k1 = k + 1;
  Sectors out;
  out.k = k1;
  int ns = slots_of(k1);
  out.block.resize(ns);
  out.mult.assign(ns, 0.0);
  double f1 = (double)k / k1, f2 = 1.0 / k1;
  for (int s = 0; s < ns; ++s) {
    int twojp = twoj_of(k1, s);
    int lo = twojp - 1, hi = twojp + 1;
    if (lo >= (k & 1)) out.mult[s] += in.mult[(lo - (k & 1)) / 2];
    if (hi <= k) out.mult[s] += in.mult[(hi - (k & 1)) / 2];

    // matrix elements are copy-independent, so branch through one parent
    int twog = lo >= (k & 1) ? lo : hi;
    const Mat& tg = in.block[(twog - (k & 1)) / 2];
    int dv = twojp + 1, dg = twog + 1;
    Mat nb(da * dv, da * dv);
    for (int ap = 0; ap < da; ++ap)
      for (int a = 0; a < da; ++a)
        for (int ip = 0; ip < dv; ++ip)
          for (int i = 0; i < dv; ++i) {
            int twomp = twojp - 2 * ip, twom = twojp - 2 * i;
            cplx acc = 0.0;
            for (int s2 : {1, -1}) {
              double c2 = cg(twog, twojp, twomp, s2) *
                          cg(twog, twojp, twom, s2);
              if (c2 == 0.0) continue;
              int rp = (twog - (twomp - s2)) / 2;
              int rc = (twog - (twom - s2)) / 2;
              acc += f1 * c2 * (s2 > 0 ? p : q) *
                     tg.at(ap * dg + rp, a * dg + rc);
            }
            for (int s2p : {1, -1})
              for (int s2 : {1, -1}) {
                if (twomp - s2p != twom - s2) continue;
                double c2 = cg(twog, twojp, twomp, s2p) *
                            cg(twog, twojp, twom, s2);
                if (c2 == 0.0) continue;
                acc += f2 * c2 * weight_scalar(p, q, k, twom - s2) *
                       rho_rot.at(ap * 2 + (s2p > 0 ? 0 : 1),
                                  a * 2 + (s2 > 0 ? 0 : 1));
              }
            nb.at(ap * dv + ip, a * dv + i) = acc;
          }
    out.block[s] = linalg::hermitize(nb);
  }
  return out;
}

}  // namespace

SplitState convex_split_state(const QState& rho, const Mat& sigma_b,
                              int r_exp) {
  if (r_exp < 0 || r_exp > 30)
    throw UsageError("convex_split_state: register exponent out of range");
  check_normalized(rho, "convex_split_state");
  check_sigma(sigma_b, rho.db, "convex_split_state");
  long long n = 1ll << r_exp;
  if (n * rho.db > 64)
    throw ResourceError("convex_split_state: register budget exceeded");
  double dimd = rho.da;
  for (long long i = 0; i < n; ++i) dimd *= rho.db;
  if (dimd * dimd > (double)oneshot::max_cells())
    throw ResourceError("convex_split_state: exceeds the cell budget");

  int da = rho.da, db = rho.db, dim = (int)dimd, words = dim / da;
  std::vector<std::vector<int>> dig(words, std::vector<int>((size_t)n));
  for (int w = 0; w < words; ++w) {
    int x = w;
    for (int i = (int)n - 1; i >= 0; --i) {
      dig[w][i] = x % db;
      x /= db;
    }
  }
  Mat sig = linalg::hermitize(sigma_b);
  Mat tau(dim, dim);
  for (int j = 0; j < (int)n; ++j)
    for (int ap = 0; ap < da; ++ap)
      for (int a = 0; a < da; ++a)
        for (int wp = 0; wp < words; ++wp)
          for (int w = 0; w < words; ++w) {
            cplx v = rho.rho.at(ap * db + dig[wp][j], a * db + dig[w][j]);
            for (int i = 0; i < (int)n && v != 0.0; ++i)
              if (i != j) v *= sig.at(dig[wp][i], dig[w][i]);
            if (v != 0.0)
              tau.at(ap * words + wp, a * words + w) += v / (double)n;
          }
  SplitState out;
  out.tau = linalg::hermitize(tau);
  out.da = da;
  out.db = db;
  out.n_copies = (int)n;
  return out;
}

double split_threshold(const QState& rho_prime, const Mat& sigma_b,
                       double delta) {
  if (!(delta > 0.0) || delta >= 1.0)
    throw UsageError("split_threshold: delta must lie in (0, 1)");
  check_normalized(rho_prime, "split_threshold");
  check_sigma(sigma_b, rho_prime.db, "split_threshold");
  double dmax = quantum::d_max(
      rho_prime.rho, linalg::kron(quantum::marginal_a(rho_prime),
                                  linalg::hermitize(sigma_b)));
  return dmax + 2.0 * std::log2(2.0 / delta);
}

SplitReport convex_split_report(const QState& rho, const QState& rho_prime,
                                const Mat& sigma_b, int r_exp, double delta) {
  if (rho.da != rho_prime.da || rho.db != rho_prime.db)
    throw UsageError("convex_split_report: state shapes differ");
  if (rho.db != 2)
    throw UsageError("convex_split_report: registers must be qubits");
  if (r_exp < 0) throw UsageError("convex_split_report: negative exponent");
  if (r_exp > 8)
    throw ResourceError("convex_split_report: beyond the sector budget");
  if (!(delta > 0.0) || delta >= 1.0)
    throw UsageError("convex_split_report: delta must lie in (0, 1)");
  check_normalized(rho, "convex_split_report");
  check_normalized(rho_prime, "convex_split_report");
  check_sigma(sigma_b, 2, "convex_split_report");

  int n = 1 << r_exp, da = rho.da;
  SplitReport rep;
  rep.r_exp = r_exp;
  rep.n_copies = n;
  rep.dmax = quantum::d_max(
      rho_prime.rho, linalg::kron(quantum::marginal_a(rho_prime),
                                  linalg::hermitize(sigma_b)));
  rep.threshold = rep.dmax + 2.0 * std::log2(2.0 / delta);
  rep.t_eps = quantum::gen_trace_distance(rho.rho, rho_prime.rho);
  rep.p_eps = quantum::purified_distance(rho.rho, rho_prime.rho);

  // rotate the register frame so sigma is diagonal; distances survive
  linalg::EigH es = linalg::eig_herm(linalg::hermitize(sigma_b));
  double p = std::max(0.0, es.w[0]), q = std::max(0.0, es.w[1]);
  Mat u_full = linalg::kron(Mat::identity(da), es.V);
  Mat rho_rot = linalg::hermitize(linalg::mul(
      linalg::dagger(u_full), linalg::mul(rho.rho, u_full)));

  Sectors sc;
  sc.k = 1;
  sc.block = {rho_rot};
  sc.mult = {1.0};
  for (int k = 1; k < n; ++k) sc = step(sc, rho_rot, da, p, q);

  Mat rpa = quantum::marginal_a(rho_prime);
  double tnorm = 0.0, fid = 0.0, tot_t = 0.0, tot_r = 0.0;
  for (int s = 0; s < (int)sc.block.size(); ++s) {
    int twoj = twoj_of(n, s), dv = twoj + 1;
    double mj = sc.mult[s];
    Mat ref(da * dv, da * dv);
    double trr = 0.0;
    for (int i = 0; i < dv; ++i) {
      double w = weight_scalar(p, q, n, twoj - 2 * i);
      for (int ap = 0; ap < da; ++ap)
        for (int a = 0; a < da; ++a)
          ref.at(ap * dv + i, a * dv + i) = rpa.at(ap, a) * w;
      trr += w;
    }
    double trt = linalg::trace(sc.block[s]).real();
    tot_t += mj * trt;
    tot_r += mj * trr;
    if (mj * (std::abs(trt) + trr) < 1e-13) continue;
    tnorm += mj * quantum::trace_norm(linalg::sub(sc.block[s], ref));
    fid += mj * quantum::fidelity(sc.block[s], ref);
  }
  if (std::abs(tot_t - 1.0) > 1e-9 || std::abs(tot_r - 1.0) > 1e-9)
    throw NumericalError("convex_split_report: sector mass leaked");

  rep.t_dist = 0.5 * tnorm + 0.5 * std::abs(tot_t - tot_r);
  double fbar = std::min(1.0, fid);
  rep.p_dist = std::sqrt(std::max(0.0, 1.0 - fbar * fbar));
  return rep;
}

}  // namespace oneshot::convex_split
