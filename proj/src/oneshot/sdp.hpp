#pragma once

#include <string>
#include <vector>

#include "oneshot/linalg.hpp"

namespace oneshot::sdp {

using linalg::cplx;
using linalg::Mat;

enum class BlockKind { Real, Complex };
enum class SdpStatus { Optimal, Infeasible, NumericalFailure };

struct SdpOptions {
  double tol_gap = 1e-9;
  double tol_feas = 1e-9;
  int max_iter = 200;
  // weight of the artificial feasibility column relative to the cost scale
  double big_m = 1e6;
};

struct SdpResult {
  SdpStatus status = SdpStatus::NumericalFailure;
  double value = 0.0;           // objective without the artificial column
  std::vector<Mat> blocks;      // optimizer, complex picture per block
  std::vector<double> y;        // one multiplier per constraint
  double gap_rel = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double artificial = 0.0;      // feasibility column at exit
  int iterations = 0;
  std::string note;             // failure detail when not optimal
};

// minimize <C,X> over block-diagonal X >= 0 subject to <A_i,X> = b_i.
// Hermitian complex blocks are carried through the solver as realified
// symmetric blocks twice the size; callers state entries in the complex
// picture throughout. Entries accumulate; (r,c) with r != c implies the
// conjugate at (c,r). The interior-point loop runs NT-scaled predictor
// corrector steps from a primal-feasible start made exact by one
// artificial column; a converged run whose artificial stays large is
// reported infeasible.
class SdpBuilder {
 public:
  int add_block(BlockKind kind, int dim);
  int add_constraint(double rhs);
  void entry(int cons, int block, int r, int c, cplx v);
  void entry_mat(int cons, int block, const Mat& a, cplx scale = 1.0);
  void obj(int block, int r, int c, cplx v);
  void obj_mat(int block, const Mat& a, cplx scale = 1.0);
  int num_constraints() const { return (int)rhs_.size(); }
  int num_blocks() const { return (int)blocks_.size(); }

  SdpResult solve(const SdpOptions& opt = SdpOptions()) const;

 private:
  struct Term {
    int block, r, c;
    cplx v;
  };
  struct BlockSpec {
    BlockKind kind;
    int dim;
  };
  void check_entry(const char* who, int block, int r, int c, cplx v) const;

  std::vector<BlockSpec> blocks_;
  std::vector<double> rhs_;
  std::vector<std::vector<Term>> rows_;
  std::vector<Term> cost_;
};

}  // namespace oneshot::sdp
