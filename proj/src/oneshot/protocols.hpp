#pragma once

#include <cstdint>
#include <vector>

#include "oneshot/classical_smooth.hpp"
#include "oneshot/prob.hpp"

namespace oneshot::protocols {

using prob::Dist;

// ell x n Toeplitz matrices over GF(2), one bit of the seed per diagonal.
// Column j of the matrix is the contiguous seed window starting at n-1-j,
// so applying a seed is a handful of shifts and xors.
struct ToeplitzHashFamily {
  int n_bits = 0;
  int out_bits = 0;
  ToeplitzHashFamily(int n, int ell);
  uint64_t seed_count() const { return 1ull << (n_bits + out_bits - 1); }
  uint32_t apply(uint64_t seed, uint32_t x) const;
  // worst-case collision probability over all input pairs, exhaustively
  double max_collision_probability() const;
};

// One exact run of the rejection-sampling splitting protocol. The sample
// budget is the integer ceil(2^r_bits); gamma and the output table are the
// closed-form distribution of the finished machine, no sampling involved.
struct SplitRun {
  double eps = 0.0, delta = 0.0;
  double k_bits = 0.0;         // smoothed max-information at eps-delta
  double r_bits = 0.0;         // k_bits + log2 log2 (1/delta)
  int n_samples = 0;           // shared-randomness draws available
  int comm_bits = 0;           // ceil(log2(n_samples+1)), 0 when degenerate
  double comm_real = 0.0;      // log2(n_samples+1), what the bound controls
  double comm_bound = 0.0;     // k_bits + log2 log2 (1/delta) + 1
  double slack_comm = 0.0;     // comm_bound - comm_real
  double gamma = 0.0;          // rejection probability, averaged over x
  double error = 0.0;          // exact distance of the output from p
  double slack_error = 0.0;    // eps - error
  double converse_rate = 0.0;  // smoothed max-information at eps
  double slack_converse = 0.0; // r_bits - converse_rate
  Dist p_out;                  // exact output table
};
SplitRun state_split_exact(const Dist& p, double eps, double delta);

// Seeded Monte-Carlo execution of the same protocol.
struct SampleRun {
  long trials = 0;
  long decisions = 0;          // accept coin flips over all trials
  long accepts = 0;
  double accept_rate = 0.0;
  double accept_expected = 0.0;
  double accept_z = 0.0;       // deviation in binomial sigmas
  std::vector<long> counts;    // output joint counts, row-major
  double empirical_t = 0.0;    // distance of frequencies from the exact run
  double chi2 = 0.0;
  int chi2_cells = 0;
};
SampleRun state_split_sample(const Dist& p, double eps, double delta,
                             long trials, uint64_t seed);

// Exact hashing experiment: omega_SZY built by enumerating every seed.
struct PaRun {
  int n_bits = 0;
  int key_bits = 0;
  double error = 0.0;      // exact distance from uniform-key x P_Y
  double hash_bound = 0.0; // 0.5 sqrt(2^key_bits / 2^hmin)
  double slack = 0.0;      // hash_bound - error
};
PaRun privacy_amplify_exact(const Dist& p, int key_bits);

// Key length picked by the achievability bound at eps-delta.
struct PaTheoremRun {
  double eps = 0.0, delta = 0.0;
  double hmin_smoothed = 0.0;  // at eps-delta
  int key_bits = 0;            // ceil(hmin + log2(4 delta^2)), floored at 0
  double error = 0.0;
  double slack = 0.0;          // eps - error
};
PaTheoremRun pa_theorem_run(const Dist& p, double eps, double delta);

// Any run meeting the security level must sit below the smoothed entropy.
struct PaConverse {
  double eps = 0.0;
  int key_bits = 0;
  double error = 0.0;
  bool secure = false;
  double hmin_at_eps = 0.0;
  double slack = 0.0;  // hmin_at_eps - key_bits, only meaningful when secure
};
PaConverse pa_converse_check(const Dist& p, double eps, int key_bits);

}  // namespace oneshot::protocols
