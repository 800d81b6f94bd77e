#pragma once

#include <complex>
#include <vector>

#include "oneshot/common.hpp"

namespace oneshot::linalg {

using cplx = std::complex<double>;

// Dense row-major complex matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<cplx> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a((size_t)r * c) {}

  cplx& at(int i, int j) { return a[(size_t)i * cols + j]; }
  const cplx& at(int i, int j) const { return a[(size_t)i * cols + j]; }

  static Mat zero(int r, int c) { return Mat(r, c); }
  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
  bool square() const { return rows == cols; }
};

Mat add(const Mat& A, const Mat& B);
Mat sub(const Mat& A, const Mat& B);
Mat scale(const Mat& A, cplx s);
Mat mul(const Mat& A, const Mat& B);
Mat dagger(const Mat& A);
cplx trace(const Mat& A);
double fro_norm(const Mat& A);
double max_abs(const Mat& A);

// max|A - A†|, the hermiticity residual
double herm_residual(const Mat& A);
// (A + A†)/2; matrices built from products are passed through this so
// roundoff never accumulates into a skew part
Mat hermitize(const Mat& A);

Mat kron(const Mat& A, const Mat& B);

// A acts on the tensor product of factors with dimensions `dims`;
// keep[i] selects the factors that survive.
Mat partial_trace(const Mat& A, const std::vector<int>& dims,
                  const std::vector<bool>& keep);

// Eigensystem of a hermitian matrix: A = V diag(w) V†, w ascending.
struct EigH {
  std::vector<double> w;
  Mat V;
};

// Cyclic Jacobi with complex rotations. Throws NumericalError if the
// off-diagonal mass has not collapsed after the sweep cap.
EigH eig_herm(const Mat& A);

// Rank cutoff shared by the pseudo-inverse family: dim * max|eig| * 1e-12.
double rank_threshold(int dim, const std::vector<double>& w);

Mat mat_sqrt(const Mat& A);
Mat mat_pinv(const Mat& A);
Mat mat_pinv_sqrt(const Mat& A);

// Orthogonal projector onto the strictly positive eigenspace of A.
Mat positive_part_projector(const Mat& A);

// Unitary V with tr[M V] = sum of singular values of M. Kernel directions
// are completed deterministically from the standard basis.
Mat polar_unitary(const Mat& M);

// Real symmetric eigensolver used by the cone solver on realified blocks.
// Row-major n*n input; same Jacobi scheme as eig_herm.
struct EigS {
  std::vector<double> w;
  std::vector<double> V;  // column k at V[i*n+k]
  int n = 0;
};
EigS eig_sym(const std::vector<double>& A, int n);

}  // namespace oneshot::linalg
