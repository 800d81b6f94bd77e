#include <cmath>
#include <vector>

#include "doctest.h"
#include "oneshot/common.hpp"
#include "oneshot/convex_split.hpp"
#include "oneshot/linalg.hpp"
#include "oneshot/quantum.hpp"
#include "test_util.hpp"

using namespace oneshot;
using namespace oneshot::convex_split;
using linalg::Mat;
using quantum::QState;

namespace {

QState random_bipartite(Rng& rng, int da, int db, int rank = -1) {
  return quantum::make_state(da, db, testutil::random_state(rng, da * db, rank));
}

Mat sigma_power(const Mat& sigma, int n) {
  Mat out = Mat::identity(1);
  for (int i = 0; i < n; ++i) out = linalg::kron(out, sigma);
  return out;
}

Mat dense_target(const QState& rho_prime, const Mat& sigma, int n) {
  return linalg::kron(quantum::marginal_a(rho_prime), sigma_power(sigma, n));
}

}  // namespace

TEST_SUITE("convex_split") {

TEST_CASE("product input reproduces the target exactly") {
  Rng rng(41);
  Mat ra = testutil::random_state(rng, 2);
  Mat sg = testutil::random_state(rng, 2);
  QState rho = quantum::make_state(2, 2, linalg::kron(ra, sg));
  SplitState st = convex_split_state(rho, sg, 3);
  CHECK(st.n_copies == 8);
  Mat tgt = dense_target(rho, sg, 8);
  CHECK(linalg::max_abs(linalg::sub(st.tau, tgt)) < 1e-12);

  SplitReport rep = convex_split_report(rho, rho, sg, 6, 0.25);
  CHECK(rep.n_copies == 64);
  CHECK(rep.dmax == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.threshold == doctest::Approx(6.0));
  CHECK(rep.t_dist < 1e-8);
  CHECK(rep.p_dist < 1e-4);
}

TEST_CASE("sector evaluator matches the dense construction") {
  Rng rng(42);
  for (int trial = 0; trial < 6; ++trial) {
    QState rho = random_bipartite(rng, 2, 2);
    QState rhop = trial % 2 ? random_bipartite(rng, 2, 2) : rho;
    Mat sg = testutil::random_state(rng, 2);
    for (int r = 1; r <= 2; ++r) {
      int n = 1 << r;
      SplitState st = convex_split_state(rho, sg, r);
      Mat tgt = dense_target(rhop, sg, n);
      double t_ref = quantum::gen_trace_distance(st.tau, tgt);
      double p_ref = quantum::purified_distance(st.tau, tgt);
      SplitReport rep = convex_split_report(rho, rhop, sg, r, 0.5);
      CHECK(rep.t_dist == doctest::Approx(t_ref).epsilon(1e-9));
      CHECK(std::abs(rep.p_dist - p_ref) < 1e-7);
    }
  }
}

TEST_CASE("degenerate register state keeps the blocks honest") {
  // sigma = I/2 makes every weight scalar equal, a common failure mode for
  // sign errors in the branching coefficients
  Rng rng(43);
  QState rho = random_bipartite(rng, 2, 2);
  Mat sg(2, 2);
  sg.at(0, 0) = 0.5;
  sg.at(1, 1) = 0.5;
  SplitState st = convex_split_state(rho, sg, 2);
  Mat tgt = dense_target(rho, sg, 4);
  SplitReport rep = convex_split_report(rho, rho, sg, 2, 0.5);
  CHECK(rep.t_dist ==
        doctest::Approx(quantum::gen_trace_distance(st.tau, tgt))
            .epsilon(1e-9));
  CHECK(std::abs(rep.p_dist - quantum::purified_distance(st.tau, tgt)) <
        1e-7);
}

TEST_CASE("threshold formula and the lemma guarantee") {
  Rng rng(44);
  QState rho = random_bipartite(rng, 2, 2);
  Mat sg = quantum::marginal_b(rho);
  double delta = 0.5;
  double thr = split_threshold(rho, sg, delta);
  CHECK(thr == doctest::Approx(quantum::d_max(
                   rho.rho, linalg::kron(quantum::marginal_a(rho), sg)) +
               4.0));
  int r = (int)std::ceil(thr);
  REQUIRE(r <= 8);
  SplitReport rep = convex_split_report(rho, rho, sg, r, delta);
  CHECK(rep.t_dist <= rep.t_eps + delta + 1e-6);
  CHECK(rep.p_dist <= rep.p_eps + delta + 1e-6);
}

TEST_CASE("distance shrinks as registers are added") {
  Rng rng(45);
  QState rho = random_bipartite(rng, 2, 2);
  Mat sg = quantum::marginal_b(rho);
  double prev = 2.0;
  for (int r = 1; r <= 5; ++r) {
    SplitReport rep = convex_split_report(rho, rho, sg, r, 0.5);
    CHECK(rep.t_dist < prev);
    prev = rep.t_dist;
  }
}

TEST_CASE("report is deterministic") {
  Rng rng(46);
  QState rho = random_bipartite(rng, 2, 2);
  Mat sg = testutil::random_state(rng, 2);
  SplitReport a = convex_split_report(rho, rho, sg, 4, 0.25);
  SplitReport b = convex_split_report(rho, rho, sg, 4, 0.25);
  CHECK(a.t_dist == b.t_dist);
  CHECK(a.p_dist == b.p_dist);
  CHECK(a.dmax == b.dmax);
}

TEST_CASE("validation and resource limits") {
  Rng rng(47);
  QState rho = random_bipartite(rng, 2, 2);
  Mat sg = testutil::random_state(rng, 2);

  CHECK_THROWS_AS(convex_split_state(rho, sg, 6), ResourceError);
  CHECK_THROWS_AS(convex_split_state(rho, sg, -1), UsageError);
  CHECK_THROWS_AS(convex_split_report(rho, rho, sg, 9, 0.25), ResourceError);
  CHECK_THROWS_AS(convex_split_report(rho, rho, sg, 2, 0.0), UsageError);
  CHECK_THROWS_AS(split_threshold(rho, sg, 1.0), UsageError);

  Mat bad = linalg::scale(sg, 0.5);
  CHECK_THROWS_AS(convex_split_state(rho, bad, 1), UsageError);
  CHECK_THROWS_AS(convex_split_report(rho, rho, bad, 1, 0.25), UsageError);

  QState sub = quantum::make_state(2, 2, linalg::scale(rho.rho, 0.5));
  CHECK_THROWS_AS(convex_split_state(sub, sg, 1), UsageError);

  QState wide = random_bipartite(rng, 2, 3);
  Mat sg3 = testutil::random_state(rng, 3);
  CHECK_THROWS_AS(convex_split_report(wide, wide, sg3, 1, 0.25), UsageError);
  // dense path has no qubit restriction
  SplitState st = convex_split_state(wide, sg3, 1);
  CHECK(st.tau.rows == 2 * 9);
}

}
