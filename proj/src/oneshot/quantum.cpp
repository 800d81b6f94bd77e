#include "oneshot/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "oneshot/common.hpp"
#include "oneshot/sdp.hpp"

namespace oneshot::quantum {

namespace {

constexpr double kHermTol = 1e-9;
constexpr double kOptTol = 5e-6;  // forgiveness when re-checking solver output

int idx(int a, int b, int db) { return a * db + b; }

double real_trace(const Mat& a) { return linalg::trace(a).real(); }

double min_eig(const Mat& a) {
  return linalg::eig_herm(a).w.front();
}

void require_square_dim(const Mat& m, int d, const char* who) {
  if (m.rows != d || m.cols != d)
    throw UsageError(std::string(who) + ": dimension mismatch");
}

// Adds sign * Re[coef * X_rc] (or the imaginary part) of block `blk` to a
// constraint row. Lower-triangle references fold onto the stored conjugate.
void add_lin(sdp::SdpBuilder& b, int row, int blk, int r, int c, cplx coef,
             bool imag_part, double sign = 1.0) {
  if (r > c) {
    std::swap(r, c);
    coef = std::conj(coef);
    if (imag_part) sign = -sign;
  }
  cplx v;
  if (r == c) {
    v = sign * (imag_part ? coef.imag() : coef.real());
  } else if (!imag_part) {
    v = 0.5 * sign * std::conj(coef);
  } else {
    v = 0.5 * sign * cplx(0.0, 1.0) * std::conj(coef);
  }
  if (std::abs(v) == 0.0) return;
  b.entry(row, blk, r, c, v);
}

// One hermitian-matrix-valued equality: a real row per upper-triangle
// entry plus an imaginary row off the diagonal.
struct HermEq {
  sdp::SdpBuilder* b;
  int dim;
  std::vector<int> re, im;

  HermEq(sdp::SdpBuilder& bb, int d, const std::function<cplx(int, int)>& rhs)
      : b(&bb), dim(d), re(d * d, -1), im(d * d, -1) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        cplx t = rhs(i, j);
        re[i * d + j] = b->add_constraint(t.real());
        if (i < j) im[i * d + j] = b->add_constraint(t.imag());
      }
  }

  // contribution coef * X_rc to the (i,j) entry of the expression, i <= j
  void coef(int i, int j, int blk, int r, int c, cplx v) {
    add_lin(*b, re[i * dim + j], blk, r, c, v, false);
    if (i < j) add_lin(*b, im[i * dim + j], blk, r, c, v, true);
  }
};

Mat psd_clamp(const Mat& a) {
  linalg::EigH e = linalg::eig_herm(a);
  int n = a.rows;
  Mat out(n, n);
  for (int k = 0; k < n; ++k) {
    if (e.w[k] <= 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.at(i, j) += e.w[k] * e.V.at(i, k) * std::conj(e.V.at(j, k));
  }
  return linalg::hermitize(out);
}

// isometry onto the support of a psd matrix, columns = kept eigenvectors
Mat support_isometry(const Mat& a) {
  linalg::EigH e = linalg::eig_herm(a);
  double th = linalg::rank_threshold(a.rows, e.w);
  std::vector<int> keep;
  for (int k = 0; k < a.rows; ++k)
    if (e.w[k] > th) keep.push_back(k);
  Mat v(a.rows, (int)keep.size());
  for (size_t c = 0; c < keep.size(); ++c)
    for (int i = 0; i < a.rows; ++i) v.at(i, (int)c) = e.V.at(i, keep[c]);
  return v;
}

struct Restricted {
  QState inner;
  Mat carrier;  // isometry on the compressed factor, empty when trivial
  bool on_a = true;
};

Restricted restrict_a(const QState& s) {
  Mat va = support_isometry(marginal_a(s));
  if (va.cols == s.da) return {s, Mat(), true};
  Mat m = linalg::kron(va, Mat::identity(s.db));
  Mat inner = linalg::hermitize(
      linalg::mul(linalg::dagger(m), linalg::mul(s.rho, m)));
  return {QState{va.cols, s.db, inner}, va, true};
}

Restricted restrict_b(const QState& s) {
  Mat vb = support_isometry(marginal_b(s));
  if (vb.cols == s.db) return {s, Mat(), false};
  Mat m = linalg::kron(Mat::identity(s.da), vb);
  Mat inner = linalg::hermitize(
      linalg::mul(linalg::dagger(m), linalg::mul(s.rho, m)));
  return {QState{s.da, vb.cols, inner}, vb, false};
}

Mat expand_optimizer(const Restricted& r, const QState& orig, const Mat& opt) {
  if (r.carrier.rows == 0) return opt;
  Mat m = r.on_a ? linalg::kron(r.carrier, Mat::identity(orig.db))
                 : linalg::kron(Mat::identity(orig.da), r.carrier);
  return linalg::hermitize(linalg::mul(m, linalg::mul(opt, linalg::dagger(m))));
}

void validate_radius(const QState& s, double eps, Metric m) {
  if (!(eps >= 0.0) || eps >= 1.0)
    throw UsageError("smoothing radius must lie in [0, 1)");
  double tr = real_trace(s.rho);
  if (m == Metric::Purified && std::abs(tr - 1.0) > 1e-9)
    throw UsageError("purified-ball smoothing needs a normalized state");
  if (m == Metric::Trace && eps >= tr - 1e-12)
    throw UsageError("smoothing radius swallows the whole state");
}

sdp::SdpOptions options_for(const sdp::SdpBuilder& b) {
  sdp::SdpOptions opt;
  opt.tol_gap = 1e-8;
  opt.tol_feas = 1e-8;
  opt.max_iter = 500;
  if (b.num_constraints() > 1500) {
    // desk-scale cutoff: the large tensor-power programs converge to
    // 1e-7 in a fraction of the iterations the tight gap would need
    opt.tol_gap = 1e-7;
    opt.tol_feas = 1e-7;
    opt.max_iter = 300;
  }
  return opt;
}

sdp::SdpResult run(const sdp::SdpBuilder& b, const char* who) {
  sdp::SdpResult res = b.solve(options_for(b));
  if (res.status == sdp::SdpStatus::Infeasible)
    throw NumericalError(std::string(who) + ": program reported infeasible");
  if (res.status != sdp::SdpStatus::Optimal) {
    // fidelity corners can stall on a degenerate face with the gap
    // already far below anything the downstream checks can see; keep
    // such iterates and let the certificate layer judge them
    bool salvageable = !res.blocks.empty() && res.gap_rel <= 1e-6 &&
                       res.primal_res <= 1e-6 && res.dual_res <= 1e-6 &&
                       res.artificial <= 1e-6;
    if (!salvageable)
      throw NumericalError(std::string(who) + ": cone solve failed (" +
                           res.note + ")");
    res.status = sdp::SdpStatus::Optimal;
  }
  return res;
}

struct BallBlocks {
  int pm = -1, nm = -1, sb = -1;   // trace ball
  int ll = -1, sf = -1, rank = 0;  // purified ball
};

// trace ball: rho_tilde - P + N = rho with tr P + tr N (+ shortfall)
// rationed by 2 eps; purified ball: a fidelity corner block against the
// compression of rho onto its support, Re tr of the off corner >= target.
BallBlocks add_ball(sdp::SdpBuilder& b, int rt, const Mat& rho, double eps,
                    Metric m, int shortfall /*-1 when absent*/) {
  BallBlocks out;
  int dab = rho.rows;
  if (m == Metric::Trace) {
    out.pm = b.add_block(sdp::BlockKind::Complex, dab);
    out.nm = b.add_block(sdp::BlockKind::Complex, dab);
    out.sb = b.add_block(sdp::BlockKind::Real, 1);
    HermEq ball(b, dab, [&](int i, int j) { return rho.at(i, j); });
    for (int i = 0; i < dab; ++i)
      for (int j = i; j < dab; ++j) {
        ball.coef(i, j, rt, i, j, 1.0);
        ball.coef(i, j, out.pm, i, j, -1.0);
        ball.coef(i, j, out.nm, i, j, 1.0);
      }
    int budget = b.add_constraint(2.0 * eps);
    for (int i = 0; i < dab; ++i) {
      b.entry(budget, out.pm, i, i, 1.0);
      b.entry(budget, out.nm, i, i, 1.0);
    }
    if (shortfall >= 0) b.entry(budget, shortfall, 0, 0, 1.0);
    b.entry(budget, out.sb, 0, 0, 1.0);
  } else {
    Mat vs = support_isometry(rho);
    int r = vs.cols;
    out.rank = r;
    Mat rho_supp = linalg::hermitize(
        linalg::mul(linalg::dagger(vs), linalg::mul(rho, vs)));
    out.ll = b.add_block(sdp::BlockKind::Complex, 2 * r);
    out.sf = b.add_block(sdp::BlockKind::Real, 1);
    HermEq link(b, r, [](int, int) { return cplx(0.0); });
    for (int u = 0; u < r; ++u)
      for (int v = u; v < r; ++v) {
        link.coef(u, v, out.ll, u, v, 1.0);
        for (int rr = 0; rr < dab; ++rr)
          for (int cc = 0; cc < dab; ++cc) {
            cplx w = std::conj(vs.at(rr, u)) * vs.at(cc, v);
            if (std::abs(w) == 0.0) continue;
            link.coef(u, v, rt, rr, cc, -w);
          }
      }
    HermEq corner(b, r, [&](int u, int v) { return rho_supp.at(u, v); });
    for (int u = 0; u < r; ++u)
      for (int v = u; v < r; ++v) corner.coef(u, v, out.ll, r + u, r + v, 1.0);
    int frow = b.add_constraint(std::sqrt(std::max(0.0, 1.0 - eps * eps)));
    for (int u = 0; u < r; ++u) add_lin(b, frow, out.ll, u, r + u, 1.0, false);
    b.entry(frow, out.sf, 0, 0, -1.0);
  }
  return out;
}

}  // namespace

QState make_state(int da, int db, Mat rho) {
  if (da <= 0 || db <= 0) throw UsageError("state factors must be positive");
  if (da * db > 64)
    throw ResourceError("density operator exceeds the 64-dimensional cap");
  size_t cells = (size_t)(da * db) * (size_t)(da * db);
  if (cells > oneshot::max_cells())
    throw ResourceError("density operator exceeds the cell budget");
  require_square_dim(rho, da * db, "make_state");
  if (linalg::herm_residual(rho) > kHermTol)
    throw UsageError("state is not hermitian");
  rho = linalg::hermitize(rho);
  if (min_eig(rho) < -kHermTol) throw UsageError("state is not positive");
  double tr = real_trace(rho);
  if (tr > 1.0 + kHermTol) throw UsageError("state trace exceeds one");
  if (tr <= 0.0) throw UsageError("state trace must be positive");
  return {da, db, std::move(rho)};
}

QState from_classical(const prob::Dist& p) {
  if (p.shape.size() != 2)
    throw UsageError("classical embedding needs a bivariate distribution");
  int da = p.shape[0], db = p.shape[1];
  Mat rho(da * db, da * db);
  for (int i = 0; i < da * db; ++i) rho.at(i, i) = p.w[i];
  return make_state(da, db, std::move(rho));
}

QState tensor(const QState& s, const QState& t) {
  int da = s.da * t.da, db = s.db * t.db;
  Mat out(da * db, da * db);
  for (int a1 = 0; a1 < s.da; ++a1)
    for (int b1 = 0; b1 < s.db; ++b1)
      for (int a1p = 0; a1p < s.da; ++a1p)
        for (int b1p = 0; b1p < s.db; ++b1p) {
          cplx v1 = s.rho.at(idx(a1, b1, s.db), idx(a1p, b1p, s.db));
          if (std::abs(v1) == 0.0) continue;
          for (int a2 = 0; a2 < t.da; ++a2)
            for (int b2 = 0; b2 < t.db; ++b2)
              for (int a2p = 0; a2p < t.da; ++a2p)
                for (int b2p = 0; b2p < t.db; ++b2p) {
                  cplx v2 = t.rho.at(idx(a2, b2, t.db), idx(a2p, b2p, t.db));
                  if (std::abs(v2) == 0.0) continue;
                  int r = idx(a1 * t.da + a2, b1 * t.db + b2, db);
                  int c = idx(a1p * t.da + a2p, b1p * t.db + b2p, db);
                  out.at(r, c) += v1 * v2;
                }
        }
  return make_state(da, db, std::move(out));
}

Mat marginal_a(const QState& s) {
  return linalg::partial_trace(s.rho, {s.da, s.db}, {true, false});
}

Mat marginal_b(const QState& s) {
  return linalg::partial_trace(s.rho, {s.da, s.db}, {false, true});
}

double trace_norm(const Mat& a) {
  linalg::EigH e = linalg::eig_herm(linalg::hermitize(a));
  double t = 0.0;
  for (double w : e.w) t += std::abs(w);
  return t;
}

double gen_trace_distance(const Mat& a, const Mat& b) {
  return 0.5 * trace_norm(linalg::sub(a, b)) +
         0.5 * std::abs(real_trace(a) - real_trace(b));
}

double fidelity(const Mat& a, const Mat& b) {
  Mat sa = linalg::mat_sqrt(linalg::hermitize(a));
  Mat m = linalg::hermitize(linalg::mul(sa, linalg::mul(b, sa)));
  linalg::EigH e = linalg::eig_herm(m);
  double f = 0.0;
  for (double w : e.w) f += std::sqrt(std::max(0.0, w));
  return f;
}

double gen_fidelity(const Mat& a, const Mat& b) {
  double slack_a = std::max(0.0, 1.0 - real_trace(a));
  double slack_b = std::max(0.0, 1.0 - real_trace(b));
  return fidelity(a, b) + std::sqrt(slack_a * slack_b);
}

double purified_distance(const Mat& a, const Mat& b) {
  double f = std::min(1.0, gen_fidelity(a, b));
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double distance(Metric m, const Mat& a, const Mat& b) {
  return m == Metric::Trace ? gen_trace_distance(a, b)
                            : purified_distance(a, b);
}

double d_max(const Mat& a, const Mat& b) {
  if (a.rows != b.rows || !a.square() || !b.square())
    throw UsageError("d_max: dimension mismatch");
  int n = a.rows;
  linalg::EigH e = linalg::eig_herm(linalg::hermitize(b));
  double th = linalg::rank_threshold(n, e.w);
  double leak = 0.0;
  Mat isq(n, n);
  for (int k = 0; k < n; ++k) {
    if (e.w[k] > th) {
      double s = 1.0 / std::sqrt(e.w[k]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          isq.at(i, j) += s * e.V.at(i, k) * std::conj(e.V.at(j, k));
    } else {
      cplx q = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          q += std::conj(e.V.at(i, k)) * a.at(i, j) * e.V.at(j, k);
      leak += q.real();
    }
  }
  double tra = std::abs(real_trace(a));
  if (leak > 1e-9 * std::max(1.0, tra))
    return std::numeric_limits<double>::infinity();
  Mat m = linalg::hermitize(linalg::mul(isq, linalg::mul(a, isq)));
  double top = linalg::eig_herm(m).w.back();
  if (top <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log2(top);
}

double von_neumann_entropy(const Mat& a) {
  linalg::EigH e = linalg::eig_herm(linalg::hermitize(a));
  double h = 0.0;
  for (double w : e.w)
    if (w > 1e-300) h -= w * std::log2(w);
  return h;
}

double mutual_information(const QState& s) {
  return von_neumann_entropy(marginal_a(s)) +
         von_neumann_entropy(marginal_b(s)) - von_neumann_entropy(s.rho);
}

double conditional_entropy(const QState& s) {
  return von_neumann_entropy(s.rho) - von_neumann_entropy(marginal_b(s));
}

namespace {

// shared scaffold: max-information programs minimize tr S against the
// dominance rho_A (x) S >= rho_tilde; min-entropy programs minimize the
// scale t of t * 1_A (x) rho_B. The smoothed state stays an explicit
// block so positivity is part of the cone, never an afterthought.
QMeasureResult imax_solve(const QState& s, double eps, Metric m,
                          bool pinned) {
  int da = s.da, db = s.db, dab = da * db;
  Mat rho_a = marginal_a(s);
  sdp::SdpBuilder b;
  int rt = b.add_block(sdp::BlockKind::Complex, dab);
  int ss = b.add_block(sdp::BlockKind::Complex, db);
  int ww = b.add_block(sdp::BlockKind::Complex, dab);

  HermEq cpl(b, dab, [](int, int) { return cplx(0.0); });
  for (int i = 0; i < dab; ++i)
    for (int j = i; j < dab; ++j) {
      cpl.coef(i, j, rt, i, j, 1.0);
      cpl.coef(i, j, ww, i, j, 1.0);
      cplx w = rho_a.at(i / db, j / db);
      if (std::abs(w) != 0.0) cpl.coef(i, j, ss, i % db, j % db, -w);
    }

  if (pinned) {
    HermEq pin(b, da, [&](int p, int q) { return rho_a.at(p, q); });
    for (int p = 0; p < da; ++p)
      for (int q = p; q < da; ++q)
        for (int v = 0; v < db; ++v)
          pin.coef(p, q, rt, idx(p, v, db), idx(q, v, db), 1.0);
  } else {
    int trow = b.add_constraint(1.0);
    for (int i = 0; i < dab; ++i) b.entry(trow, rt, i, i, 1.0);
  }

  add_ball(b, rt, s.rho, eps, m, -1);
  for (int v = 0; v < db; ++v) b.obj(ss, v, v, 1.0);

  sdp::SdpResult res = run(b, "imax");
  QMeasureResult out;
  out.cone_optimum = res.value;
  out.value = oneshot::log2_clamped(res.value);
  out.optimizer = linalg::hermitize(res.blocks[rt]);
  double trs = std::max(real_trace(res.blocks[ss]), 1e-300);
  out.reference = linalg::scale(res.blocks[ss], 1.0 / trs);
  out.gap = res.gap_rel;
  out.iterations = res.iterations;
  return out;
}

QMeasureResult hmin_solve(const QState& s, double eps, Metric m,
                          bool pinned) {
  int da = s.da, db = s.db, dab = da * db;
  Mat rho_b = marginal_b(s);
  sdp::SdpBuilder b;
  int rt = b.add_block(sdp::BlockKind::Complex, dab);
  int tt = b.add_block(sdp::BlockKind::Real, 1);
  int ww = b.add_block(sdp::BlockKind::Complex, dab);
  int sh = b.add_block(sdp::BlockKind::Real, 1);

  HermEq cpl(b, dab, [](int, int) { return cplx(0.0); });
  for (int i = 0; i < dab; ++i)
    for (int j = i; j < dab; ++j) {
      cpl.coef(i, j, rt, i, j, 1.0);
      cpl.coef(i, j, ww, i, j, 1.0);
      if (i / db == j / db) cpl.coef(i, j, tt, 0, 0, -rho_b.at(i % db, j % db));
    }

  int trow = b.add_constraint(1.0);
  for (int i = 0; i < dab; ++i) b.entry(trow, rt, i, i, 1.0);
  b.entry(trow, sh, 0, 0, 1.0);

  if (pinned) {
    int yb = b.add_block(sdp::BlockKind::Complex, db);
    HermEq dom(b, db, [&](int p, int q) { return rho_b.at(p, q); });
    for (int p = 0; p < db; ++p)
      for (int q = p; q < db; ++q) {
        for (int a = 0; a < da; ++a)
          dom.coef(p, q, rt, idx(a, p, db), idx(a, q, db), 1.0);
        dom.coef(p, q, yb, p, q, 1.0);
      }
  }

  add_ball(b, rt, s.rho, eps, m, sh);
  b.obj(tt, 0, 0, 1.0);

  sdp::SdpResult res = run(b, "hmin");
  QMeasureResult out;
  out.cone_optimum = res.value;
  out.value = -oneshot::log2_clamped(res.value);
  out.optimizer = linalg::hermitize(res.blocks[rt]);
  out.reference = rho_b;
  out.gap = res.gap_rel;
  out.iterations = res.iterations;
  return out;
}

QMeasureResult imax_unsmoothed_solve(const QState& s) {
  int da = s.da, db = s.db, dab = da * db;
  Mat rho_a = marginal_a(s);
  sdp::SdpBuilder b;
  int ss = b.add_block(sdp::BlockKind::Complex, db);
  int ww = b.add_block(sdp::BlockKind::Complex, dab);
  HermEq cpl(b, dab, [&](int i, int j) { return s.rho.at(i, j); });
  for (int i = 0; i < dab; ++i)
    for (int j = i; j < dab; ++j) {
      cplx w = rho_a.at(i / db, j / db);
      if (std::abs(w) != 0.0) cpl.coef(i, j, ss, i % db, j % db, w);
      cpl.coef(i, j, ww, i, j, -1.0);
    }
  for (int v = 0; v < db; ++v) b.obj(ss, v, v, 1.0);

  sdp::SdpResult res = run(b, "imax_unsmoothed");
  QMeasureResult out;
  out.cone_optimum = res.value;
  out.value = oneshot::log2_clamped(res.value);
  out.optimizer = s.rho;
  double trs = std::max(real_trace(res.blocks[ss]), 1e-300);
  out.reference = linalg::scale(res.blocks[ss], 1.0 / trs);
  out.gap = res.gap_rel;
  out.iterations = res.iterations;
  return out;
}

void verify_imax(const QState& s, double eps, bool pinned,
                 const QMeasureResult& r) {
  const Mat& rt = r.optimizer;
  if (min_eig(rt) < -kOptTol)
    throw NumericalError("imax: smoothed state left the cone");
  if (r.achieved_distance > eps + kOptTol)
    throw NumericalError("imax: smoothed state left the ball");
  if (std::abs(real_trace(rt) - 1.0) > kOptTol)
    throw NumericalError("imax: smoothed state is not normalized");
  Mat rho_a = marginal_a(s);
  if (pinned) {
    Mat ma = linalg::partial_trace(rt, {s.da, s.db}, {true, false});
    if (linalg::max_abs(linalg::sub(ma, rho_a)) > kOptTol)
      throw NumericalError("imax: marginal pin violated");
  }
  Mat dom = linalg::sub(
      linalg::kron(rho_a, linalg::scale(r.reference, r.cone_optimum)), rt);
  if (min_eig(dom) < -kOptTol * std::max(1.0, r.cone_optimum))
    throw NumericalError("imax: dominance violated");
}

void verify_hmin(const QState& s, double eps, bool pinned,
                 const QMeasureResult& r) {
  const Mat& rt = r.optimizer;
  if (min_eig(rt) < -kOptTol)
    throw NumericalError("hmin: smoothed state left the cone");
  if (r.achieved_distance > eps + kOptTol)
    throw NumericalError("hmin: smoothed state left the ball");
  if (real_trace(rt) > 1.0 + kOptTol)
    throw NumericalError("hmin: smoothed state overweight");
  Mat rho_b = marginal_b(s);
  if (pinned) {
    Mat mb = linalg::partial_trace(rt, {s.da, s.db}, {false, true});
    if (min_eig(linalg::sub(rho_b, mb)) < -kOptTol)
      throw NumericalError("hmin: marginal dominance violated");
  }
  Mat dom = linalg::sub(
      linalg::scale(linalg::kron(Mat::identity(s.da), rho_b), r.cone_optimum),
      rt);
  if (min_eig(dom) < -kOptTol * std::max(1.0, r.cone_optimum))
    throw NumericalError("hmin: scale dominance violated");
}

QMeasureResult imax_measure(const QState& s, double eps, Metric m,
                            bool pinned) {
  if (std::abs(real_trace(s.rho) - 1.0) > 1e-9)
    throw UsageError("max-information needs a normalized state");
  validate_radius(s, eps, m);
  Restricted r = restrict_a(s);
  QMeasureResult out;
  if (eps == 0.0) {
    out = imax_unsmoothed_solve(r.inner);
    out.optimizer = s.rho;
  } else {
    out = imax_solve(r.inner, eps, m, pinned);
    out.optimizer = expand_optimizer(r, s, out.optimizer);
  }
  out.achieved_distance = distance(m, out.optimizer, s.rho);
  verify_imax(s, eps, pinned, out);
  return out;
}

QMeasureResult hmin_measure(const QState& s, double eps, Metric m,
                            bool pinned) {
  validate_radius(s, eps, m);
  Restricted r = restrict_b(s);
  QMeasureResult out;
  if (eps == 0.0) {
    out = hmin_unsmoothed(s);
  } else {
    out = hmin_solve(r.inner, eps, m, pinned);
    out.optimizer = expand_optimizer(r, s, out.optimizer);
    out.reference = marginal_b(s);
  }
  out.achieved_distance = distance(m, out.optimizer, s.rho);
  verify_hmin(s, eps, pinned, out);
  return out;
}

}  // namespace

QMeasureResult imax_partial(const QState& s, double eps, Metric m) {
  return imax_measure(s, eps, m, true);
}

QMeasureResult imax_full(const QState& s, double eps, Metric m) {
  return imax_measure(s, eps, m, false);
}

QMeasureResult imax_unsmoothed(const QState& s) {
  if (std::abs(real_trace(s.rho) - 1.0) > 1e-9)
    throw UsageError("max-information needs a normalized state");
  Restricted r = restrict_a(s);
  QMeasureResult out = imax_unsmoothed_solve(r.inner);
  out.optimizer = s.rho;
  out.achieved_distance = 0.0;
  verify_imax(s, 0.0, false, out);
  return out;
}

QMeasureResult hmin_partial(const QState& s, double eps, Metric m) {
  return hmin_measure(s, eps, m, true);
}

QMeasureResult hmin_full(const QState& s, double eps, Metric m) {
  return hmin_measure(s, eps, m, false);
}

QMeasureResult hmin_unsmoothed(const QState& s) {
  Mat rho_b = marginal_b(s);
  QMeasureResult out;
  double d = d_max(s.rho, linalg::kron(Mat::identity(s.da), rho_b));
  out.value = -d;
  out.cone_optimum = std::exp2(d);
  out.optimizer = s.rho;
  out.reference = rho_b;
  out.achieved_distance = 0.0;
  return out;
}

HatResult imax_hat(const QState& s, const Mat& rho_tilde, const Mat& sigma_b,
                   double delta) {
  if (!(delta > 0.0) || delta > 1.0)
    throw UsageError("hat construction needs delta in (0, 1]");
  int dab = s.da * s.db;
  require_square_dim(rho_tilde, dab, "imax_hat");
  require_square_dim(sigma_b, s.db, "imax_hat");
  double gamma = delta * delta / 8.0;

  Mat rho_a = marginal_a(s);
  Mat rt = linalg::hermitize(rho_tilde);
  Mat rt_a = linalg::partial_trace(rt, {s.da, s.db}, {true, false});

  Mat pg = linalg::positive_part_projector(linalg::sub(
      linalg::scale(rt_a, 1.0 / gamma), rho_a));
  Mat pg_full = linalg::kron(pg, Mat::identity(s.db));
  Mat bar = linalg::hermitize(linalg::mul(pg_full, linalg::mul(rt, pg_full)));
  Mat bar_a = linalg::partial_trace(bar, {s.da, s.db}, {true, false});

  Mat sq_a = linalg::mat_sqrt(rho_a);
  Mat sq_bar = linalg::mat_sqrt(bar_a);
  Mat va = linalg::polar_unitary(linalg::mul(sq_a, sq_bar));
  Mat rot = linalg::mul(sq_a, linalg::mul(va, linalg::mat_pinv_sqrt(bar_a)));
  Mat rot_full = linalg::kron(rot, Mat::identity(s.db));
  Mat tau = linalg::hermitize(
      linalg::mul(rot_full, linalg::mul(bar, linalg::dagger(rot_full))));

  // the kernel filler uses the support of bar_a, not the gamma cut, so
  // the A marginal closes exactly even when the cut is wider
  Mat supp = linalg::positive_part_projector(bar_a);
  Mat vpv = linalg::hermitize(
      linalg::mul(va, linalg::mul(supp, linalg::dagger(va))));
  Mat hole = linalg::sub(Mat::identity(s.da), vpv);
  Mat filler = linalg::hermitize(linalg::mul(sq_a, linalg::mul(hole, sq_a)));
  Mat rho_hat = linalg::hermitize(
      linalg::add(tau, linalg::kron(filler, sigma_b)));

  HatResult out;
  out.rho_hat = rho_hat;
  Mat hat_a = linalg::partial_trace(rho_hat, {s.da, s.db}, {true, false});
  out.marginal_residual = linalg::max_abs(linalg::sub(hat_a, rho_a));
  out.distance = purified_distance(psd_clamp(rho_hat), s.rho);
  Mat ref = linalg::kron(rho_a, linalg::hermitize(sigma_b));
  out.dmax_hat = d_max(psd_clamp(rho_hat), ref);
  out.dmax_budget = d_max(psd_clamp(rt), ref) +
                    std::log2((8.0 + delta * delta) / (delta * delta));
  return out;
}

HatResult hmin_hat(const QState& s, const Mat& rho_tilde, double delta) {
  if (!(delta > 0.0) || delta > 1.0)
    throw UsageError("hat construction needs delta in (0, 1]");
  int dab = s.da * s.db;
  require_square_dim(rho_tilde, dab, "hmin_hat");
  double gamma = delta * delta / 8.0;

  Mat rho_b = marginal_b(s);
  Mat rt = linalg::hermitize(rho_tilde);
  Mat rt_b = linalg::partial_trace(rt, {s.da, s.db}, {false, true});

  Mat pg = linalg::positive_part_projector(linalg::sub(
      linalg::scale(rt_b, 1.0 / gamma), rho_b));
  Mat pg_full = linalg::kron(Mat::identity(s.da), pg);
  Mat bar = linalg::hermitize(linalg::mul(pg_full, linalg::mul(rt, pg_full)));
  Mat bar_b = linalg::partial_trace(bar, {s.da, s.db}, {false, true});

  Mat sq_b = linalg::mat_sqrt(rho_b);
  Mat sq_bar = linalg::mat_sqrt(bar_b);
  Mat vb = linalg::polar_unitary(linalg::mul(sq_b, sq_bar));
  Mat rot = linalg::mul(sq_b, linalg::mul(vb, linalg::mat_pinv_sqrt(bar_b)));
  Mat rot_full = linalg::kron(Mat::identity(s.da), rot);
  Mat tau = linalg::hermitize(
      linalg::mul(rot_full, linalg::mul(bar, linalg::dagger(rot_full))));

  Mat supp = linalg::positive_part_projector(bar_b);
  Mat vpv = linalg::hermitize(
      linalg::mul(vb, linalg::mul(supp, linalg::dagger(vb))));
  Mat hole = linalg::sub(Mat::identity(s.db), vpv);
  Mat filler = linalg::hermitize(linalg::mul(sq_b, linalg::mul(hole, sq_b)));
  Mat unif = linalg::scale(Mat::identity(s.da), 1.0 / s.da);
  Mat rho_hat = linalg::hermitize(
      linalg::add(tau, linalg::kron(unif, filler)));

  HatResult out;
  out.rho_hat = rho_hat;
  Mat hat_b = linalg::partial_trace(rho_hat, {s.da, s.db}, {false, true});
  out.marginal_residual = linalg::max_abs(linalg::sub(hat_b, rho_b));
  out.distance = purified_distance(psd_clamp(rho_hat), s.rho);
  Mat ref = linalg::kron(Mat::identity(s.da), rho_b);
  out.dmax_hat = d_max(psd_clamp(rho_hat), ref);
  out.dmax_budget = d_max(psd_clamp(rt), ref) +
                    std::log2((8.0 + delta * delta) / (delta * delta));
  return out;
}

QState cq_state(const std::vector<Mat>& blocks) {
  if (blocks.empty()) throw UsageError("cq_state: no blocks");
  int db = blocks[0].rows;
  int da = (int)blocks.size();
  Mat rho(da * db, da * db);
  for (int x = 0; x < da; ++x) {
    require_square_dim(blocks[x], db, "cq_state");
    for (int i = 0; i < db; ++i)
      for (int j = 0; j < db; ++j)
        rho.at(idx(x, i, db), idx(x, j, db)) = blocks[x].at(i, j);
  }
  return make_state(da, db, std::move(rho));
}

QState cq_apply_function(const QState& s, const std::vector<int>& f, int nz) {
  if ((int)f.size() != s.da)
    throw UsageError("cq_apply_function: wrong function table size");
  if (nz <= 0) throw UsageError("cq_apply_function: empty range");
  for (int x = 0; x < s.da; ++x)
    for (int xp = 0; xp < s.da; ++xp) {
      if (x == xp) continue;
      for (int i = 0; i < s.db; ++i)
        for (int j = 0; j < s.db; ++j)
          if (std::abs(s.rho.at(idx(x, i, s.db), idx(xp, j, s.db))) > 1e-10)
            throw UsageError("state is not classical on the first factor");
    }
  Mat rho(nz * s.db, nz * s.db);
  for (int x = 0; x < s.da; ++x) {
    int z = f[x];
    if (z < 0 || z >= nz) throw UsageError("cq_apply_function: range breach");
    for (int i = 0; i < s.db; ++i)
      for (int j = 0; j < s.db; ++j)
        rho.at(idx(z, i, s.db), idx(z, j, s.db)) +=
            s.rho.at(idx(x, i, s.db), idx(x, j, s.db));
  }
  return make_state(nz, s.db, std::move(rho));
}

MeasuredState projective_measure(const QState& s,
                                 const std::vector<Mat>& projectors) {
  int nx = (int)projectors.size();
  if (nx == 0) throw UsageError("projective_measure: no projectors");
  Mat sum(s.da, s.da);
  for (const Mat& p : projectors) {
    require_square_dim(p, s.da, "projective_measure");
    if (linalg::herm_residual(p) > 1e-9 ||
        linalg::max_abs(linalg::sub(linalg::mul(p, p), p)) > 1e-8)
      throw UsageError("projective_measure: not a projector");
    sum = linalg::add(sum, p);
  }
  if (linalg::max_abs(linalg::sub(sum, Mat::identity(s.da))) > 1e-8)
    throw UsageError("projective_measure: projectors do not resolve unity");

  int dbx = s.db * nx;
  Mat omega(s.da * dbx, s.da * dbx);
  std::vector<double> px(nx, 0.0);
  for (int x = 0; x < nx; ++x) {
    Mat pf = linalg::kron(projectors[x], Mat::identity(s.db));
    Mat mx = linalg::hermitize(linalg::mul(pf, linalg::mul(s.rho, pf)));
    px[x] = real_trace(mx);
    for (int a = 0; a < s.da; ++a)
      for (int b = 0; b < s.db; ++b)
        for (int ap = 0; ap < s.da; ++ap)
          for (int bp = 0; bp < s.db; ++bp)
            omega.at(a * dbx + (b * nx + x), ap * dbx + (bp * nx + x)) =
                mx.at(idx(a, b, s.db), idx(ap, bp, s.db));
  }
  MeasuredState out;
  out.omega = make_state(s.da, dbx, std::move(omega));
  out.px = std::move(px);
  return out;
}

}  // namespace oneshot::quantum
