#include "oneshot/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace oneshot::sdp {

namespace {

using Vec = std::vector<double>;

// dense square helpers, row-major

Vec mm(int n, const Vec& A, const Vec& B, bool ta = false, bool tb = false) {
  Vec out((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double a = ta ? A[(size_t)k * n + i] : A[(size_t)i * n + k];
      if (a == 0.0) continue;
      const double* brow = tb ? nullptr : &B[(size_t)k * n];
      double* orow = &out[(size_t)i * n];
      if (!tb) {
        for (int j = 0; j < n; ++j) orow[j] += a * brow[j];
      } else {
        for (int j = 0; j < n; ++j) orow[j] += a * B[(size_t)j * n + k];
      }
    }
  return out;
}

void symmetrize(Vec& A, int n) {
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = 0.5 * (A[(size_t)i * n + j] + A[(size_t)j * n + i]);
      A[(size_t)i * n + j] = v;
      A[(size_t)j * n + i] = v;
    }
}

double dot(const Vec& A, const Vec& B) {
  double s = 0.0;
  for (size_t i = 0; i < A.size(); ++i) s += A[i] * B[i];
  return s;
}

double max_abs_v(const Vec& A) {
  double m = 0.0;
  for (double v : A) m = std::max(m, std::abs(v));
  return m;
}

// lower Cholesky; false when a pivot is not positive
bool chol(const Vec& A, int n, Vec* L) {
  if (n < 128) {
    L->assign((size_t)n * n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = A[(size_t)i * n + j];
        for (int k = 0; k < j; ++k)
          s -= (*L)[(size_t)i * n + k] * (*L)[(size_t)j * n + k];
        if (i == j) {
          if (s <= 0.0 || !std::isfinite(s)) return false;
          (*L)[(size_t)i * n + i] = std::sqrt(s);
        } else {
          (*L)[(size_t)i * n + j] = s / (*L)[(size_t)j * n + j];
        }
      }
    }
    return true;
  }

  // blocked right-looking factorization; the Schur matrices of the big
  // tensor-power programs run through here, so the trailing update is
  // tiled for cache reuse and carries split accumulators
  L->assign((size_t)n * n, 0.0);
  Vec& F = *L;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) F[(size_t)i * n + j] = A[(size_t)i * n + j];
  const int nb = 48;
  for (int k0 = 0; k0 < n; k0 += nb) {
    int kb = std::min(nb, n - k0);
    for (int i = k0; i < k0 + kb; ++i) {
      double* Fi = &F[(size_t)i * n];
      for (int j = k0; j <= i; ++j) {
        const double* Fj = &F[(size_t)j * n];
        double s = Fi[j];
        for (int k = k0; k < j; ++k) s -= Fi[k] * Fj[k];
        if (i == j) {
          if (s <= 0.0 || !std::isfinite(s)) return false;
          Fi[i] = std::sqrt(s);
        } else {
          Fi[j] = s / Fj[j];
        }
      }
    }
    int t0 = k0 + kb;
    if (t0 >= n) break;
    for (int i = t0; i < n; ++i) {
      double* Fi = &F[(size_t)i * n];
      for (int j = k0; j < t0; ++j) {
        const double* Fj = &F[(size_t)j * n];
        double s = Fi[j];
        for (int k = k0; k < j; ++k) s -= Fi[k] * Fj[k];
        Fi[j] = s / Fj[j];
      }
    }
    const int tb = 64;
    for (int i0 = t0; i0 < n; i0 += tb) {
      int i1 = std::min(i0 + tb, n);
      for (int j0 = t0; j0 < i1; j0 += tb) {
        int j1 = std::min(j0 + tb, n);
        for (int i = std::max(i0, j0); i < i1; ++i) {
          double* Fi = &F[(size_t)i * n];
          const double* Pi = Fi + k0;
          int jmax = std::min(j1, i + 1);
          int j = j0;
          for (; j + 1 < jmax; j += 2) {
            const double* Pj0 = &F[(size_t)j * n + k0];
            const double* Pj1 = &F[(size_t)(j + 1) * n + k0];
            double s00 = 0.0, s10 = 0.0, s01 = 0.0, s11 = 0.0;
            int k = 0;
            for (; k + 1 < kb; k += 2) {
              s00 += Pi[k] * Pj0[k];
              s10 += Pi[k + 1] * Pj0[k + 1];
              s01 += Pi[k] * Pj1[k];
              s11 += Pi[k + 1] * Pj1[k + 1];
            }
            if (k < kb) {
              s00 += Pi[k] * Pj0[k];
              s01 += Pi[k] * Pj1[k];
            }
            Fi[j] -= s00 + s10;
            Fi[j + 1] -= s01 + s11;
          }
          for (; j < jmax; ++j) {
            const double* Pj = &F[(size_t)j * n + k0];
            double s0 = 0.0, s1 = 0.0;
            int k = 0;
            for (; k + 1 < kb; k += 2) {
              s0 += Pi[k] * Pj[k];
              s1 += Pi[k + 1] * Pj[k + 1];
            }
            if (k < kb) s0 += Pi[k] * Pj[k];
            Fi[j] -= s0 + s1;
          }
        }
      }
    }
  }
  return true;
}

// inverse of a lower triangular matrix
Vec tri_inv(const Vec& L, int n) {
  Vec M((size_t)n * n, 0.0);
  for (int j = 0; j < n; ++j) {
    M[(size_t)j * n + j] = 1.0 / L[(size_t)j * n + j];
    for (int i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (int k = j; k < i; ++k)
        s += L[(size_t)i * n + k] * M[(size_t)k * n + j];
      M[(size_t)i * n + j] = -s / L[(size_t)i * n + i];
    }
  }
  return M;
}

struct Trip {
  int p, q;
  double w;
};

// sparse rows of one constraint (or the cost), realified, full entries
using BlockTrips = std::vector<std::vector<Trip>>;

double sparse_dot(const std::vector<Trip>& t, const Vec& X, int n) {
  double s = 0.0;
  for (const Trip& e : t) s += e.w * X[(size_t)e.p * n + e.q];
  return s;
}

void sparse_axpy(const std::vector<Trip>& t, double a, Vec* X, int n) {
  for (const Trip& e : t) (*X)[(size_t)e.p * n + e.q] += a * e.w;
}

// largest step in [0,1] keeping M + step*D positive definite, by
// Cholesky bisection; the caller applies its own damping
double step_to_boundary(const Vec& M, const Vec& D, int n) {
  Vec T((size_t)n * n), L;
  auto ok = [&](double a) {
    for (size_t i = 0; i < M.size(); ++i) T[i] = M[i] + a * D[i];
    return chol(T, n, &L);
  };
  if (ok(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 26; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ok(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// fold a realified block back onto its complex-symmetry subspace
void jsym(Vec& Y, int d) {
  int n = 2 * d;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double a = Y[(size_t)i * n + j];
      double b = Y[(size_t)(i + d) * n + (j + d)];
      double c = Y[(size_t)i * n + (j + d)];
      double e = Y[(size_t)(i + d) * n + j];
      double re = 0.5 * (a + b), im = 0.5 * (e - c);
      Y[(size_t)i * n + j] = re;
      Y[(size_t)(i + d) * n + (j + d)] = re;
      Y[(size_t)i * n + (j + d)] = -im;
      Y[(size_t)(i + d) * n + j] = im;
    }
}

}  // namespace

int SdpBuilder::add_block(BlockKind kind, int dim) {
  if (dim <= 0) throw UsageError("sdp: block dimension must be positive");
  blocks_.push_back({kind, dim});
  return (int)blocks_.size() - 1;
}

int SdpBuilder::add_constraint(double rhs) {
  if (!std::isfinite(rhs)) throw UsageError("sdp: rhs must be finite");
  rhs_.push_back(rhs);
  rows_.emplace_back();
  return (int)rhs_.size() - 1;
}

void SdpBuilder::check_entry(const char* who, int block, int r, int c,
                             cplx v) const {
  if (block < 0 || block >= (int)blocks_.size())
    throw UsageError(std::string(who) + ": bad block");
  int d = blocks_[block].dim;
  if (r < 0 || r >= d || c < 0 || c >= d)
    throw UsageError(std::string(who) + ": index out of range");
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw UsageError(std::string(who) + ": entry must be finite");
  bool needs_real = (r == c) || blocks_[block].kind == BlockKind::Real;
  if (needs_real && std::abs(v.imag()) > 1e-13 * (1.0 + std::abs(v.real())))
    throw UsageError(std::string(who) + ": entry must be real here");
}

void SdpBuilder::entry(int cons, int block, int r, int c, cplx v) {
  if (cons < 0 || cons >= (int)rows_.size())
    throw UsageError("sdp::entry: bad constraint");
  check_entry("sdp::entry", block, r, c, v);
  rows_[cons].push_back({block, r, c, v});
}

void SdpBuilder::entry_mat(int cons, int block, const Mat& a, cplx scale) {
  if (block < 0 || block >= (int)blocks_.size())
    throw UsageError("sdp::entry_mat: bad block");
  if (a.rows != blocks_[block].dim || a.cols != blocks_[block].dim)
    throw UsageError("sdp::entry_mat: shape mismatch");
  for (int r = 0; r < a.rows; ++r)
    for (int c = r; c < a.cols; ++c) {
      cplx v = a.at(r, c) * scale;
      if (std::abs(v) == 0.0) continue;
      entry(cons, block, r, c, v);
    }
}

void SdpBuilder::obj(int block, int r, int c, cplx v) {
  check_entry("sdp::obj", block, r, c, v);
  cost_.push_back({block, r, c, v});
}

void SdpBuilder::obj_mat(int block, const Mat& a, cplx scale) {
  if (block < 0 || block >= (int)blocks_.size())
    throw UsageError("sdp::obj_mat: bad block");
  if (a.rows != blocks_[block].dim || a.cols != blocks_[block].dim)
    throw UsageError("sdp::obj_mat: shape mismatch");
  for (int r = 0; r < a.rows; ++r)
    for (int c = r; c < a.cols; ++c) {
      cplx v = a.at(r, c) * scale;
      if (std::abs(v) == 0.0) continue;
      obj(block, r, c, v);
    }
}

namespace {

// consolidate complex terms of one row, then realify into full-entry
// triplets; complex blocks carry a 1/2 so inner products match the
// complex picture exactly
std::vector<std::vector<Trip>> realify(
    const std::vector<std::pair<int, int>>& bspec,  // (is_complex, dim)
    const std::vector<std::tuple<int, int, int, cplx>>& terms) {
  int nb = (int)bspec.size();
  std::vector<std::map<std::pair<int, int>, cplx>> acc(nb);
  for (const auto& [blk, r, c, v] : terms) {
    if (r == c)
      acc[blk][{r, r}] += cplx(v.real(), 0.0);
    else if (r < c)
      acc[blk][{r, c}] += v;
    else
      acc[blk][{c, r}] += std::conj(v);
  }
  std::vector<std::vector<Trip>> out(nb);
  for (int b = 0; b < nb; ++b) {
    auto [is_complex, d] = bspec[b];
    for (const auto& [rc, v] : acc[b]) {
      auto [r, c] = rc;
      double x = v.real(), y = v.imag();
      if (std::abs(x) < 1e-300 && std::abs(y) < 1e-300) continue;
      if (!is_complex) {
        if (r == c)
          out[b].push_back({r, r, x});
        else {
          out[b].push_back({r, c, x});
          out[b].push_back({c, r, x});
        }
        continue;
      }
      if (r == c) {
        out[b].push_back({r, r, 0.5 * x});
        out[b].push_back({r + d, r + d, 0.5 * x});
      } else {
        out[b].push_back({r, c, 0.5 * x});
        out[b].push_back({c, r, 0.5 * x});
        out[b].push_back({r + d, c + d, 0.5 * x});
        out[b].push_back({c + d, r + d, 0.5 * x});
        out[b].push_back({r, c + d, -0.5 * y});
        out[b].push_back({c + d, r, -0.5 * y});
        out[b].push_back({c, r + d, 0.5 * y});
        out[b].push_back({r + d, c, 0.5 * y});
      }
    }
  }
  return out;
}

struct Scaling {
  Vec G, Gt, Ginv, W;
  std::vector<double> s;  // scaled-space spectrum, shared by X and Z
};

// NT scaling from Cholesky factors: with K = Lz^T Lx and K^T K = V S^2 V^T,
// G = Lx V S^{-1/2} maps both X and Z to diag(S) by congruence
bool nt_scaling(const Vec& Lx, const Vec& Lz, int n, Scaling* sc) {
  Vec K = mm(n, Lz, Lx, true, false);
  Vec KtK = mm(n, K, K, true, false);
  symmetrize(KtK, n);
  linalg::EigS e = linalg::eig_sym(KtK, n);
  sc->s.resize(n);
  for (int i = 0; i < n; ++i) {
    double v = e.w[i];
    if (!(v > 1e-280)) return false;
    sc->s[i] = std::sqrt(v);
  }
  Vec Vs((size_t)n * n), Vsi((size_t)n * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double f = std::sqrt(sc->s[k]);
      Vs[(size_t)i * n + k] = e.V[(size_t)i * n + k] / f;
      Vsi[(size_t)i * n + k] = e.V[(size_t)i * n + k] * f;
    }
  sc->G = mm(n, Lx, Vs);
  sc->Gt = Vec((size_t)n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sc->Gt[(size_t)i * n + j] = sc->G[(size_t)j * n + i];
  Vec LxInv = tri_inv(Lx, n);
  sc->Ginv = mm(n, Vsi, LxInv, true, false);
  sc->W = mm(n, sc->G, sc->Gt);
  symmetrize(sc->W, n);
  return true;
}

bool chol_repair(Vec A, int n, Vec* L) {
  if (chol(A, n, L)) return true;
  double base = 0.0;
  for (int i = 0; i < n; ++i) base = std::max(base, A[(size_t)i * n + i]);
  double jit = 1e-14 * (1.0 + base);
  for (int attempt = 0; attempt < 4; ++attempt) {
    for (int i = 0; i < n; ++i) A[(size_t)i * n + i] += jit;
    if (chol(A, n, L)) return true;
    jit *= 100.0;
  }
  return false;
}

}  // namespace

SdpResult SdpBuilder::solve(const SdpOptions& opt) const {
  int m = (int)rhs_.size();
  int nb_orig = (int)blocks_.size();
  if (nb_orig == 0) throw UsageError("sdp::solve: no blocks");

  // realified dimensions; one extra 1x1 block carries the artificial
  std::vector<std::pair<int, int>> bspec;
  std::vector<int> dim;
  for (const BlockSpec& b : blocks_) {
    bool cx = b.kind == BlockKind::Complex;
    bspec.push_back({cx ? 1 : 0, b.dim});
    dim.push_back(cx ? 2 * b.dim : b.dim);
  }
  bspec.push_back({0, 1});
  dim.push_back(1);
  int nb = nb_orig + 1;
  int art = nb_orig;

  auto pack = [&](const std::vector<Term>& ts) {
    std::vector<std::tuple<int, int, int, cplx>> v;
    v.reserve(ts.size());
    for (const Term& t : ts) v.push_back({t.block, t.r, t.c, t.v});
    return realify(bspec, v);
  };

  std::vector<BlockTrips> A(m);
  for (int i = 0; i < m; ++i) A[i] = pack(rows_[i]);
  BlockTrips C = pack(cost_);

  double cmax = 0.0, bmax = 0.0;
  for (int b = 0; b < nb; ++b)
    for (const Trip& t : C[b]) cmax = std::max(cmax, std::abs(t.w));
  for (int i = 0; i < m; ++i) bmax = std::max(bmax, std::abs(rhs_[i]));

  // artificial column: coefficient b_i - <A_i, I> makes X = I, art = 1 a
  // feasible start; its cost dwarfs everything else so it is driven out
  // whenever the constraints admit it
  double big = opt.big_m * (1.0 + cmax + bmax);
  C[art].push_back({0, 0, big});
  for (int i = 0; i < m; ++i) {
    double tr = 0.0;
    for (int b = 0; b < nb; ++b)
      for (const Trip& t : A[i][b])
        if (t.p == t.q) tr += t.w;
    double coef = rhs_[i] - tr;
    if (coef != 0.0) A[i][art].push_back({0, 0, coef});
  }

  int N = 0;
  for (int b = 0; b < nb; ++b) N += dim[b];

  std::vector<Vec> X(nb), Z(nb);
  for (int b = 0; b < nb; ++b) {
    X[b].assign((size_t)dim[b] * dim[b], 0.0);
    Z[b] = X[b];
    double zscale = 1.0;
    for (const Trip& t : C[b]) zscale = std::max(zscale, std::abs(t.w));
    for (int i = 0; i < dim[b]; ++i) {
      X[b][(size_t)i * dim[b] + i] = 1.0;
      Z[b][(size_t)i * dim[b] + i] = zscale;
    }
  }
  std::vector<double> y(m, 0.0);

  SdpResult res;
  res.y.assign(m, 0.0);
  auto fail = [&](const std::string& why) {
    res.status = SdpStatus::NumericalFailure;
    res.note = why;
    return res;
  };
  // report in the complex picture, without the artificial column; stall
  // exits also go through here so callers can salvage a near-optimal
  // iterate under their own tolerance regime
  auto extract = [&]() {
    res.y = y;
    res.value = 0.0;
    for (int b = 0; b < nb_orig; ++b)
      res.value += sparse_dot(C[b], X[b], dim[b]);
    res.blocks.clear();
    for (int b = 0; b < nb_orig; ++b) {
      int d = blocks_[b].dim;
      Mat out(d, d);
      if (bspec[b].first) {
        jsym(X[b], d);
        int n = 2 * d;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            out.at(i, j) = cplx(X[b][(size_t)i * n + j],
                                X[b][(size_t)(i + d) * n + j]);
      } else {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) out.at(i, j) = X[b][(size_t)i * d + j];
      }
      res.blocks.push_back(linalg::hermitize(out));
    }
  };

  std::vector<Vec> Rd(nb), WRdW(nb), GDGt(nb), dXa(nb), dZa(nb), dX(nb),
      dZ(nb);
  std::vector<Scaling> sc(nb);
  Vec S, Schol, rp(m), rhs(m), dy(m), dya(m);
  int tiny_steps = 0;

  // constraints with many entries in a block get a dense image there, so
  // the normal-matrix assembly below can trade the quadratic pairwise
  // triplet scan for two matrix products plus sparse dots
  std::vector<std::vector<Vec>> Adense(m, std::vector<Vec>(nb));
  std::vector<std::vector<char>> heavy(m, std::vector<char>(nb, 0));
  for (int b = 0; b < nb; ++b) {
    double t = 0.0;
    for (int i = 0; i < m; ++i) t += (double)A[i][b].size();
    if (t == 0.0) continue;
    double n3 = 2.0 * std::pow((double)dim[b], 3.0);
    for (int i = 0; i < m; ++i) {
      double nnz = (double)A[i][b].size();
      if (nnz > 0.0 && nnz * t > n3 + t) {
        heavy[i][b] = 1;
        Adense[i][b].assign((size_t)dim[b] * dim[b], 0.0);
        sparse_axpy(A[i][b], 1.0, &Adense[i][b], dim[b]);
      }
    }
  }

  for (int iter = 0;; ++iter) {
    // residuals and objective values
    for (int b = 0; b < nb; ++b) {
      Rd[b].assign((size_t)dim[b] * dim[b], 0.0);
      sparse_axpy(C[b], 1.0, &Rd[b], dim[b]);
      for (int i = 0; i < m; ++i)
        if (!A[i][b].empty()) sparse_axpy(A[i][b], -y[i], &Rd[b], dim[b]);
      for (size_t k = 0; k < Rd[b].size(); ++k) Rd[b][k] -= Z[b][k];
    }
    double pobj = 0.0, xz = 0.0;
    for (int b = 0; b < nb; ++b) {
      pobj += sparse_dot(C[b], X[b], dim[b]);
      xz += dot(X[b], Z[b]);
    }
    double dobj = 0.0;
    for (int i = 0; i < m; ++i) dobj += rhs_[i] * y[i];
    for (int i = 0; i < m; ++i) {
      double ax = 0.0;
      for (int b = 0; b < nb; ++b) ax += sparse_dot(A[i][b], X[b], dim[b]);
      rp[i] = rhs_[i] - ax;
    }
    double mu = xz / N;

    double rp_rel = 0.0, rd_rel = 0.0;
    for (int i = 0; i < m; ++i) rp_rel = std::max(rp_rel, std::abs(rp[i]));
    rp_rel /= 1.0 + bmax;
    for (int b = 0; b < nb; ++b) {
      double den = (b == art) ? (1.0 + big) : (1.0 + cmax);
      rd_rel = std::max(rd_rel, max_abs_v(Rd[b]) / den);
    }
    double gap_rel =
        std::max(xz, std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));

    res.gap_rel = gap_rel;
    res.primal_res = rp_rel;
    res.dual_res = rd_rel;
    res.iterations = iter;
    res.artificial = X[art][0];

    if (rp_rel <= opt.tol_feas && rd_rel <= opt.tol_feas &&
        gap_rel <= opt.tol_gap) {
      res.status = res.artificial > 1e-6 ? SdpStatus::Infeasible
                                         : SdpStatus::Optimal;
      break;
    }
    if (iter >= opt.max_iter) {
      extract();
      return fail("iteration cap reached");
    }

    // NT scaling per block
    for (int b = 0; b < nb; ++b) {
      Vec Lx, Lz;
      if (!chol_repair(X[b], dim[b], &Lx) || !chol_repair(Z[b], dim[b], &Lz))
        return fail("iterate left the cone");
      if (!nt_scaling(Lx, Lz, dim[b], &sc[b]))
        return fail("scaling breakdown");
      WRdW[b] = mm(dim[b], sc[b].W, mm(dim[b], Rd[b], sc[b].W));
    }

    // Schur complement and its factor; heavy rows go through their dense
    // image M_j = W A_j W, light pairs stay on the direct triplet formula
    S.assign((size_t)m * m, 0.0);
    for (int b = 0; b < nb; ++b) {
      int n = dim[b];
      const Vec& W = sc[b].W;
      std::vector<Vec> M(m);
      for (int j = 0; j < m; ++j)
        if (heavy[j][b]) M[j] = mm(n, W, mm(n, Adense[j][b], W));
      for (int i = 0; i < m; ++i) {
        if (A[i][b].empty()) continue;
        for (int j = i; j < m; ++j) {
          if (A[j][b].empty()) continue;
          double s = 0.0;
          if (heavy[j][b]) {
            for (const Trip& ti : A[i][b])
              s += ti.w * M[j][(size_t)ti.q * n + ti.p];
          } else if (heavy[i][b]) {
            for (const Trip& tj : A[j][b])
              s += tj.w * M[i][(size_t)tj.q * n + tj.p];
          } else {
            for (const Trip& ti : A[i][b])
              for (const Trip& tj : A[j][b])
                s += ti.w * tj.w * W[(size_t)ti.q * n + tj.p] *
                     W[(size_t)tj.q * n + ti.p];
          }
          S[(size_t)i * m + j] += s;
        }
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < i; ++j) S[(size_t)i * m + j] = S[(size_t)j * m + i];
    if (m > 0 && !chol_repair(S, m, &Schol))
      return fail("normal equations not positive definite");

    auto schur_solve = [&](const Vec& r, Vec* out) {
      out->assign(m, 0.0);
      // forward then back substitution
      for (int i = 0; i < m; ++i) {
        double s = r[i];
        for (int k = 0; k < i; ++k) s -= Schol[(size_t)i * m + k] * (*out)[k];
        (*out)[i] = s / Schol[(size_t)i * m + i];
      }
      for (int i = m - 1; i >= 0; --i) {
        double s = (*out)[i];
        for (int k = i + 1; k < m; ++k)
          s -= Schol[(size_t)k * m + i] * (*out)[k];
        (*out)[i] = s / Schol[(size_t)i * m + i];
      }
    };

    // predictor: the scaled target -V^2 collapses to direction -X
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int b = 0; b < nb; ++b) s += sparse_dot(A[i][b], WRdW[b], dim[b]);
      rhs[i] = rhs_[i] + s;
    }
    if (m > 0) schur_solve(rhs, &dya);
    for (int b = 0; b < nb; ++b) {
      int n = dim[b];
      Vec M((size_t)n * n, 0.0);
      for (int i = 0; i < m; ++i)
        if (!A[i][b].empty()) sparse_axpy(A[i][b], dya[i], &M, n);
      dZa[b].resize((size_t)n * n);
      for (size_t k = 0; k < M.size(); ++k) dZa[b][k] = Rd[b][k] - M[k];
      for (size_t k = 0; k < M.size(); ++k) M[k] -= Rd[b][k];
      Vec WMW = mm(n, sc[b].W, mm(n, M, sc[b].W));
      dXa[b].resize((size_t)n * n);
      for (size_t k = 0; k < M.size(); ++k) dXa[b][k] = WMW[k] - X[b][k];
      symmetrize(dXa[b], n);
      symmetrize(dZa[b], n);
    }
    double apa = 1.0, ada = 1.0;
    for (int b = 0; b < nb; ++b) {
      apa = std::min(apa, step_to_boundary(X[b], dXa[b], dim[b]));
      ada = std::min(ada, step_to_boundary(Z[b], dZa[b], dim[b]));
    }
    apa = std::min(1.0, 0.98 * apa);
    ada = std::min(1.0, 0.98 * ada);

    double mu_aff = 0.0;
    for (int b = 0; b < nb; ++b)
      for (size_t k = 0; k < X[b].size(); ++k)
        mu_aff += (X[b][k] + apa * dXa[b][k]) * (Z[b][k] + ada * dZa[b][k]);
    mu_aff /= N;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    sigma = std::min(1.0, std::max(1e-10, sigma));

    // corrector with the Mehrotra cross term, reusing the Schur factor
    for (int b = 0; b < nb; ++b) {
      int n = dim[b];
      Vec dXh = mm(n, sc[b].Ginv, mm(n, dXa[b], sc[b].Ginv, false, true));
      Vec dZh = mm(n, sc[b].Gt, mm(n, dZa[b], sc[b].G));
      Vec J = mm(n, dXh, dZh);
      Vec Rc((size_t)n * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double cross = 0.5 * (J[(size_t)i * n + j] + J[(size_t)j * n + i]);
          double v = -cross;
          if (i == j) v += sigma * mu - sc[b].s[i] * sc[b].s[i];
          Rc[(size_t)i * n + j] = 2.0 * v / (sc[b].s[i] + sc[b].s[j]);
        }
      GDGt[b] = mm(n, sc[b].G, mm(n, Rc, sc[b].Gt));
      symmetrize(GDGt[b], n);
    }
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int b = 0; b < nb; ++b) {
        s -= sparse_dot(A[i][b], GDGt[b], dim[b]);
        s += sparse_dot(A[i][b], WRdW[b], dim[b]);
      }
      rhs[i] = rp[i] + s;
    }
    if (m > 0) schur_solve(rhs, &dy);
    for (int b = 0; b < nb; ++b) {
      int n = dim[b];
      Vec M((size_t)n * n, 0.0);
      for (int i = 0; i < m; ++i)
        if (!A[i][b].empty()) sparse_axpy(A[i][b], dy[i], &M, n);
      dZ[b].resize((size_t)n * n);
      for (size_t k = 0; k < M.size(); ++k) dZ[b][k] = Rd[b][k] - M[k];
      for (size_t k = 0; k < M.size(); ++k) M[k] -= Rd[b][k];
      Vec WMW = mm(n, sc[b].W, mm(n, M, sc[b].W));
      dX[b].resize((size_t)n * n);
      for (size_t k = 0; k < M.size(); ++k) dX[b][k] = GDGt[b][k] + WMW[k];
      symmetrize(dX[b], n);
      symmetrize(dZ[b], n);
    }
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, step_to_boundary(X[b], dX[b], dim[b]));
      ad = std::min(ad, step_to_boundary(Z[b], dZ[b], dim[b]));
    }
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);

    if (std::min(ap, ad) < 1e-8) {
      if (++tiny_steps >= 3) {
        extract();
        return fail("steps collapsed");
      }
    } else {
      tiny_steps = 0;
    }

    for (int b = 0; b < nb; ++b) {
      int n = dim[b];
      for (size_t k = 0; k < X[b].size(); ++k) {
        X[b][k] += ap * dX[b][k];
        Z[b][k] += ad * dZ[b][k];
      }
      symmetrize(X[b], n);
      symmetrize(Z[b], n);
      if (bspec[b].first) {
        jsym(X[b], bspec[b].second);
        jsym(Z[b], bspec[b].second);
      }
    }
    for (int i = 0; i < m; ++i) y[i] += ad * dy[i];
  }

  extract();
  return res;
}

}  // namespace oneshot::sdp
