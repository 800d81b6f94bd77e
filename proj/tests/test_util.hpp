#pragma once

#include <vector>

#include "oneshot/common.hpp"
#include "oneshot/linalg.hpp"
#include "oneshot/prob.hpp"

namespace testutil {

using oneshot::Rng;
using oneshot::linalg::Mat;
using oneshot::prob::Dist;

inline Mat random_mat(Rng& rng, int r, int c) {
  Mat m(r, c);
  for (auto& v : m.a) v = {rng.gaussian(), rng.gaussian()};
  return m;
}

inline Mat random_herm(Rng& rng, int n) {
  return oneshot::linalg::hermitize(random_mat(rng, n, n));
}

inline Mat random_psd(Rng& rng, int n, int rank = -1) {
  if (rank < 0) rank = n;
  Mat g = random_mat(rng, n, rank);
  return oneshot::linalg::hermitize(
      oneshot::linalg::mul(g, oneshot::linalg::dagger(g)));
}

// normalized density operator
inline Mat random_state(Rng& rng, int n, int rank = -1) {
  Mat p = random_psd(rng, n, rank);
  double t = oneshot::linalg::trace(p).real();
  return oneshot::linalg::scale(p, 1.0 / t);
}

inline Mat random_unitary(Rng& rng, int n) {
  // polar factor of a generic matrix is Haar-ish and certainly unitary
  Mat m = random_mat(rng, n, n);
  return oneshot::linalg::dagger(oneshot::linalg::polar_unitary(m));
}

inline Dist random_dist(Rng& rng, int nx, int ny, double floor = 0.0) {
  std::vector<double> w((size_t)nx * ny);
  double tot = 0.0;
  for (auto& v : w) {
    v = -std::log(rng.uniform_pos()) + floor;
    tot += v;
  }
  for (auto& v : w) v /= tot;
  return oneshot::prob::make_normalized({nx, ny}, w);
}

}  // namespace testutil
