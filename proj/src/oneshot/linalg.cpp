#include "oneshot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oneshot::linalg {

namespace {

void require_same_shape(const Mat& A, const Mat& B, const char* who) {
  if (A.rows != B.rows || A.cols != B.cols)
    throw UsageError(std::string(who) + ": shape mismatch");
}

}  // namespace

Mat add(const Mat& A, const Mat& B) {
  require_same_shape(A, B, "add");
  Mat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
  return C;
}

Mat sub(const Mat& A, const Mat& B) {
  require_same_shape(A, B, "sub");
  Mat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
  return C;
}

Mat scale(const Mat& A, cplx s) {
  Mat C = A;
  for (auto& v : C.a) v *= s;
  return C;
}

Mat mul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw UsageError("mul: inner dimension mismatch");
  Mat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      cplx aik = A.at(i, k);
      if (aik == cplx(0.0)) continue;
      const cplx* brow = &B.a[(size_t)k * B.cols];
      cplx* crow = &C.a[(size_t)i * C.cols];
      for (int j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return C;
}

Mat dagger(const Mat& A) {
  Mat C(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.at(j, i) = std::conj(A.at(i, j));
  return C;
}

cplx trace(const Mat& A) {
  if (!A.square()) throw UsageError("trace: matrix not square");
  cplx t = 0.0;
  for (int i = 0; i < A.rows; ++i) t += A.at(i, i);
  return t;
}

double fro_norm(const Mat& A) {
  double s = 0.0;
  for (const auto& v : A.a) s += std::norm(v);
  return std::sqrt(s);
}

double max_abs(const Mat& A) {
  double s = 0.0;
  for (const auto& v : A.a) s = std::max(s, std::abs(v));
  return s;
}

double herm_residual(const Mat& A) {
  if (!A.square()) throw UsageError("herm_residual: matrix not square");
  double r = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = i; j < A.cols; ++j)
      r = std::max(r, std::abs(A.at(i, j) - std::conj(A.at(j, i))));
  return r;
}

Mat hermitize(const Mat& A) {
  if (!A.square()) throw UsageError("hermitize: matrix not square");
  Mat C(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      C.at(i, j) = 0.5 * (A.at(i, j) + std::conj(A.at(j, i)));
  return C;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat C(A.rows * B.rows, A.cols * B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) {
      cplx aij = A.at(i, j);
      if (aij == cplx(0.0)) continue;
      for (int k = 0; k < B.rows; ++k)
        for (int l = 0; l < B.cols; ++l)
          C.at(i * B.rows + k, j * B.cols + l) = aij * B.at(k, l);
    }
  return C;
}

Mat partial_trace(const Mat& A, const std::vector<int>& dims,
                  const std::vector<bool>& keep) {
  if (dims.size() != keep.size())
    throw UsageError("partial_trace: dims/keep length mismatch");
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw UsageError("partial_trace: bad factor dimension");
    total *= d;
  }
  if (!A.square() || A.rows != total)
    throw UsageError("partial_trace: matrix does not match factor dims");

  int nf = (int)dims.size();
  long kept = 1, dropped = 1;
  for (int f = 0; f < nf; ++f) (keep[f] ? kept : dropped) *= dims[f];
  if (kept == 1 && dropped == 1 && total == 1) return A;

  // strides of each factor in the full index
  std::vector<long> stride(nf, 1);
  for (int f = nf - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims[f + 1];

  // enumerate kept and dropped multi-indices
  std::vector<int> kept_f, drop_f;
  for (int f = 0; f < nf; ++f) (keep[f] ? kept_f : drop_f).push_back(f);

  auto offsets = [&](const std::vector<int>& fs) {
    std::vector<long> out(1, 0);
    for (int f : fs) {
      std::vector<long> nxt;
      nxt.reserve(out.size() * dims[f]);
      for (long base : out)
        for (int v = 0; v < dims[f]; ++v) nxt.push_back(base + v * stride[f]);
      out.swap(nxt);
    }
    return out;
  };
  std::vector<long> koff = offsets(kept_f), doff = offsets(drop_f);

  Mat C((int)kept, (int)kept);
  for (size_t i = 0; i < koff.size(); ++i)
    for (size_t j = 0; j < koff.size(); ++j) {
      cplx s = 0.0;
      for (long d : doff) s += A.at((int)(koff[i] + d), (int)(koff[j] + d));
      C.at((int)i, (int)j) = s;
    }
  return C;
}

EigH eig_herm(const Mat& Ain) {
  if (!Ain.square()) throw UsageError("eig_herm: matrix not square");
  int n = Ain.rows;
  Mat A = hermitize(Ain);
  Mat V = Mat::identity(n);
  if (n == 1) return {{A.at(0, 0).real()}, V};

  double fro = fro_norm(A);
  double stop = 1e-13 * (fro > 1.0 ? fro : 1.0) * 1e-1;

  auto offdiag = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += std::norm(A.at(i, j));
    return std::sqrt(2.0 * s);
  };

  const int max_sweeps = 64;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (offdiag() <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        cplx apq = A.at(p, q);
        double g = std::abs(apq);
        double app = A.at(p, p).real();
        double aqq = A.at(q, q).real();
        if (g <= 1e-18 * (std::abs(app) + std::abs(aqq) + g)) {
          A.at(p, q) = 0.0;
          A.at(q, p) = 0.0;
          continue;
        }
        cplx u = apq / g;  // phase
        double tau = (aqq - app) / (2.0 * g);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        cplx ubar = std::conj(u);

        // columns p,q of A <- A*G with G[p][p]=c, G[p][q]=s,
        // G[q][p]=-s*ubar, G[q][q]=c*ubar
        for (int i = 0; i < n; ++i) {
          cplx aip = A.at(i, p), aiq = A.at(i, q);
          A.at(i, p) = c * aip - s * ubar * aiq;
          A.at(i, q) = s * aip + c * ubar * aiq;
        }
        // rows p,q of A <- G† * A
        for (int j = 0; j < n; ++j) {
          cplx apj = A.at(p, j), aqj = A.at(q, j);
          A.at(p, j) = c * apj - s * u * aqj;
          A.at(q, j) = s * apj + c * u * aqj;
        }
        A.at(p, q) = 0.0;
        A.at(q, p) = 0.0;
        A.at(p, p) = A.at(p, p).real();
        A.at(q, q) = A.at(q, q).real();
        for (int i = 0; i < n; ++i) {
          cplx vip = V.at(i, p), viq = V.at(i, q);
          V.at(i, p) = c * vip - s * ubar * viq;
          V.at(i, q) = s * vip + c * ubar * viq;
        }
      }
    }
  }
  if (sweep >= max_sweeps && offdiag() > stop * 100.0)
    throw NumericalError("eig_herm: Jacobi sweeps did not converge");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = A.at(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return d[i] < d[j]; });

  EigH out;
  out.w.resize(n);
  out.V = Mat(n, n);
  for (int k = 0; k < n; ++k) {
    out.w[k] = d[order[k]];
    for (int i = 0; i < n; ++i) out.V.at(i, k) = V.at(i, order[k]);
  }
  return out;
}

double rank_threshold(int dim, const std::vector<double>& w) {
  double m = 0.0;
  for (double x : w) m = std::max(m, std::abs(x));
  return dim * m * 1e-12;
}

namespace {

Mat herm_fn(const EigH& e, double (*fn)(double, double), double thresh) {
  int n = e.V.rows;
  Mat C(n, n);
  for (int k = 0; k < n; ++k) {
    double f = fn(e.w[k], thresh);
    if (f == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      cplx vik = e.V.at(i, k);
      if (vik == cplx(0.0)) continue;
      for (int j = 0; j < n; ++j)
        C.at(i, j) += f * vik * std::conj(e.V.at(j, k));
    }
  }
  return hermitize(C);
}

}  // namespace

Mat mat_sqrt(const Mat& A) {
  EigH e = eig_herm(A);
  double th = rank_threshold(A.rows, e.w);
  return herm_fn(
      e, [](double w, double t) { return w > t ? std::sqrt(w) : 0.0; }, th);
}

Mat mat_pinv(const Mat& A) {
  EigH e = eig_herm(A);
  double th = rank_threshold(A.rows, e.w);
  return herm_fn(
      e, [](double w, double t) { return std::abs(w) > t ? 1.0 / w : 0.0; },
      th);
}

Mat mat_pinv_sqrt(const Mat& A) {
  EigH e = eig_herm(A);
  double th = rank_threshold(A.rows, e.w);
  return herm_fn(
      e, [](double w, double t) { return w > t ? 1.0 / std::sqrt(w) : 0.0; },
      th);
}

Mat positive_part_projector(const Mat& A) {
  EigH e = eig_herm(A);
  double th = rank_threshold(A.rows, e.w);
  return herm_fn(
      e, [](double w, double t) { return w > t ? 1.0 : 0.0; }, th);
}

Mat polar_unitary(const Mat& M) {
  if (!M.square()) throw UsageError("polar_unitary: matrix not square");
  int n = M.rows;

  // singular triplets from M†M = W Λ W†; left vectors u_k = M w_k / σ_k
  Mat MtM = hermitize(mul(dagger(M), M));
  EigH e = eig_herm(MtM);
  double top = std::sqrt(std::max(0.0, e.w.empty() ? 0.0 : e.w.back()));
  double tol = std::max(top * n * 1e-13, 1e-280);

  std::vector<Mat> ucols;  // accepted orthonormal left vectors (n x 1)
  std::vector<int> which;  // singular index each column belongs to
  for (int k = n - 1; k >= 0; --k) {
    double sv = std::sqrt(std::max(0.0, e.w[k]));
    if (sv <= tol) continue;
    Mat u(n, 1);
    for (int i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (int j = 0; j < n; ++j) s += M.at(i, j) * e.V.at(j, k);
      u.at(i, 0) = s / sv;
    }
    ucols.push_back(u);
    which.push_back(k);
  }

  // complete the left basis deterministically from standard basis vectors
  auto orth_residual = [&](Mat v) {
    for (const Mat& u : ucols) {
      cplx ip = 0.0;
      for (int i = 0; i < n; ++i) ip += std::conj(u.at(i, 0)) * v.at(i, 0);
      for (int i = 0; i < n; ++i) v.at(i, 0) -= ip * u.at(i, 0);
    }
    return v;
  };
  std::vector<int> missing;  // eigen indices lacking a left vector
  {
    std::vector<bool> have(n, false);
    for (int k : which) have[k] = true;
    for (int k = n - 1; k >= 0; --k)
      if (!have[k]) missing.push_back(k);
  }
  int cand = 0;
  for (int k : missing) {
    Mat v;
    double nrm = 0.0;
    while (cand < 2 * n) {
      Mat t(n, 1);
      t.at(cand % n, 0) = 1.0;
      ++cand;
      v = orth_residual(t);
      v = orth_residual(v);  // second pass for orthogonality to 1e-14
      nrm = fro_norm(v);
      if (nrm > 1e-4) break;
    }
    if (nrm <= 1e-4)
      throw NumericalError("polar_unitary: basis completion failed");
    v = scale(v, 1.0 / nrm);
    ucols.push_back(v);
    which.push_back(k);
  }

  // V = W U† maximizes Re tr[M V] at the singular value sum
  Mat U(n, n);
  for (size_t c = 0; c < ucols.size(); ++c)
    for (int i = 0; i < n; ++i) U.at(i, which[c]) = ucols[c].at(i, 0);
  return mul(e.V, dagger(U));
}

EigS eig_sym(const std::vector<double>& Ain, int n) {
  if ((int)Ain.size() != n * n) throw UsageError("eig_sym: bad size");
  std::vector<double> A = Ain;
  // symmetrize
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = 0.5 * (A[(size_t)i * n + j] + A[(size_t)j * n + i]);
      A[(size_t)i * n + j] = v;
      A[(size_t)j * n + i] = v;
    }
  std::vector<double> V((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i) V[(size_t)i * n + i] = 1.0;
  if (n == 1) return {{A[0]}, V, 1};

  double fro = 0.0;
  for (double v : A) fro += v * v;
  fro = std::sqrt(fro);
  double stop = 1e-14 * (fro > 1.0 ? fro : 1.0);

  auto offdiag = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = A[(size_t)i * n + j];
        s += v * v;
      }
    return std::sqrt(2.0 * s);
  };

  const int max_sweeps = 64;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (offdiag() <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double g = A[(size_t)p * n + q];
        double app = A[(size_t)p * n + p], aqq = A[(size_t)q * n + q];
        if (std::abs(g) <= 1e-18 * (std::abs(app) + std::abs(aqq) + std::abs(g)))
          continue;
        double tau = (aqq - app) / (2.0 * g);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = A[(size_t)i * n + p], aiq = A[(size_t)i * n + q];
          A[(size_t)i * n + p] = c * aip - s * aiq;
          A[(size_t)i * n + q] = s * aip + c * aiq;
        }
        for (int j = 0; j < n; ++j) {
          double apj = A[(size_t)p * n + j], aqj = A[(size_t)q * n + j];
          A[(size_t)p * n + j] = c * apj - s * aqj;
          A[(size_t)q * n + j] = s * apj + c * aqj;
        }
        A[(size_t)p * n + q] = 0.0;
        A[(size_t)q * n + p] = 0.0;
        for (int i = 0; i < n; ++i) {
          double vip = V[(size_t)i * n + p], viq = V[(size_t)i * n + q];
          V[(size_t)i * n + p] = c * vip - s * viq;
          V[(size_t)i * n + q] = s * vip + c * viq;
        }
      }
    }
  }
  if (sweep >= max_sweeps && offdiag() > stop * 100.0)
    throw NumericalError("eig_sym: Jacobi sweeps did not converge");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = A[(size_t)i * n + i];
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return d[i] < d[j]; });

  EigS out;
  out.n = n;
  out.w.resize(n);
  out.V.assign((size_t)n * n, 0.0);
  for (int k = 0; k < n; ++k) {
    out.w[k] = d[order[k]];
    for (int i = 0; i < n; ++i)
      out.V[(size_t)i * n + k] = V[(size_t)i * n + order[k]];
  }
  return out;
}

}  // namespace oneshot::linalg
