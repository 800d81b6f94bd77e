#include <cmath>
#include <vector>

#include "doctest.h"
#include "oneshot/classical_smooth.hpp"
#include "oneshot/common.hpp"
#include "oneshot/linalg.hpp"
#include "oneshot/prob.hpp"
#include "oneshot/quantum.hpp"
#include "test_util.hpp"

using namespace oneshot;
using namespace oneshot::quantum;
using linalg::Mat;
using prob::Dist;
using testutil::random_dist;
using testutil::random_state;
using testutil::random_unitary;

namespace {

QState max_entangled(int d) {
  Mat rho(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      rho.at(i * d + i, j * d + j) = 1.0 / d;
  return make_state(d, d, std::move(rho));
}

QState random_bipartite(Rng& rng, int da, int db, int rank = -1) {
  return make_state(da, db, random_state(rng, da * db, rank));
}

Mat basis_proj(int d, int k) {
  Mat p(d, d);
  p.at(k, k) = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("quantum") {

TEST_CASE("state constructors validate") {
  Mat bad(2, 2);
  bad.at(0, 1) = 1.0;  // not hermitian
  CHECK_THROWS_AS(make_state(1, 2, bad), UsageError);

  Mat neg = Mat::identity(2);
  neg.at(1, 1) = -0.2;
  CHECK_THROWS_AS(make_state(1, 2, neg), UsageError);

  Mat heavy = linalg::scale(Mat::identity(2), 0.8);
  CHECK_THROWS_AS(make_state(1, 2, heavy), UsageError);

  CHECK_THROWS_AS(make_state(9, 9, Mat::identity(81)), ResourceError);

  QState sub = make_state(1, 2, linalg::scale(Mat::identity(2), 0.3));
  CHECK(linalg::trace(sub.rho).real() == doctest::Approx(0.6));
}

TEST_CASE("classical embedding keeps marginals and products") {
  Rng rng(401);
  Dist p = random_dist(rng, 3, 2);
  QState s = from_classical(p);
  std::vector<double> px = prob::marginal_x(p);
  Mat ma = marginal_a(s);
  for (int x = 0; x < 3; ++x)
    CHECK(ma.at(x, x).real() == doctest::Approx(px[x]).epsilon(1e-12));
}

TEST_CASE("tensor groups factors and is additive") {
  // |0><0| x |+><+| joined with |1><1| x |0><0|
  Mat plus(2, 2);
  plus.at(0, 0) = plus.at(0, 1) = plus.at(1, 0) = plus.at(1, 1) = 0.5;
  QState s = make_state(2, 2, linalg::kron(basis_proj(2, 0), plus));
  QState t = make_state(2, 2, linalg::kron(basis_proj(2, 1),
                                           basis_proj(2, 0)));
  QState st = tensor(s, t);
  CHECK(st.da == 4);
  CHECK(st.db == 4);
  // a = (0,1) -> 1, b = (b1,0) -> 2*b1
  CHECK(st.rho.at(1 * 4 + 0, 1 * 4 + 2).real() == doctest::Approx(0.5));
  CHECK(st.rho.at(1 * 4 + 2, 1 * 4 + 2).real() == doctest::Approx(0.5));
  CHECK(linalg::trace(st.rho).real() == doctest::Approx(1.0));

  Rng rng(74);
  QState u = random_bipartite(rng, 2, 2);
  CHECK(hmin_unsmoothed(tensor(u, u)).value ==
        doctest::Approx(2.0 * hmin_unsmoothed(u).value).epsilon(1e-9));
}

TEST_CASE("distances match closed forms") {
  // orthogonal pure states sit at maximal distance in both metrics
  Mat e0 = basis_proj(2, 0), e1 = basis_proj(2, 1);
  CHECK(gen_trace_distance(e0, e1) == doctest::Approx(1.0));
  CHECK(purified_distance(e0, e1) == doctest::Approx(1.0));
  CHECK(fidelity(e0, e1) == doctest::Approx(0.0));

  // pure-state fidelity is the overlap
  Mat plus(2, 2);
  plus.at(0, 0) = plus.at(0, 1) = plus.at(1, 0) = plus.at(1, 1) = 0.5;
  CHECK(fidelity(e0, plus) == doctest::Approx(std::sqrt(0.5)));

  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    Mat a = random_state(rng, 3), b = random_state(rng, 3);
    double td = gen_trace_distance(a, b), pd = purified_distance(a, b);
    CHECK(td <= pd + 1e-10);
    CHECK(pd <= std::sqrt(2.0 * td) + 1e-10);
    CHECK(purified_distance(b, a) == doctest::Approx(pd));
  }

  // sub-normalized completion term
  Mat half = linalg::scale(e0, 0.5);
  CHECK(gen_trace_distance(half, Mat(2, 2)) == doctest::Approx(0.5));
  CHECK(gen_fidelity(half, half) ==
        doctest::Approx(0.5 + 0.5));  // fidelity 1/2 plus slack 1/2
  CHECK(purified_distance(half, half) == doctest::Approx(0.0));
}

TEST_CASE("d_max closed forms") {
  Rng rng(909);
  Mat r = random_state(rng, 4);
  CHECK(d_max(r, r) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d_max(linalg::scale(r, 2.0), r) == doctest::Approx(1.0));

  Mat diag_a(2, 2), diag_b(2, 2);
  diag_a.at(0, 0) = 0.6;
  diag_a.at(1, 1) = 0.4;
  diag_b.at(0, 0) = 0.3;
  diag_b.at(1, 1) = 0.7;
  CHECK(d_max(diag_a, diag_b) == doctest::Approx(std::log2(2.0)));

  CHECK(std::isinf(d_max(Mat::identity(2), basis_proj(2, 0))));
  CHECK(d_max(Mat(2, 2), Mat::identity(2)) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("entropies on the bell state") {
  QState phi = max_entangled(2);
  CHECK(von_neumann_entropy(phi.rho) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(von_neumann_entropy(marginal_a(phi)) == doctest::Approx(1.0));
  CHECK(mutual_information(phi) == doctest::Approx(2.0));
  CHECK(conditional_entropy(phi) == doctest::Approx(-1.0));
}

TEST_CASE("unsmoothed measures hit closed forms") {
  QState phi2 = max_entangled(2);
  CHECK(imax_unsmoothed(phi2).value == doctest::Approx(2.0).epsilon(2e-6));
  CHECK(hmin_unsmoothed(phi2).value == doctest::Approx(-1.0).epsilon(1e-9));

  QState phi3 = max_entangled(3);
  CHECK(imax_unsmoothed(phi3).value ==
        doctest::Approx(2.0 * std::log2(3.0)).epsilon(2e-6));
  CHECK(hmin_unsmoothed(phi3).value ==
        doctest::Approx(-std::log2(3.0)).epsilon(1e-9));

  // product states carry no max-information and hmin is the top eigenvalue
  Rng rng(55);
  Mat a = random_state(rng, 2), b = random_state(rng, 3);
  QState prod = make_state(2, 3, linalg::kron(a, b));
  CHECK(imax_unsmoothed(prod).value == doctest::Approx(0.0).epsilon(2e-6));
  double lam = linalg::eig_herm(a).w.back();
  CHECK(hmin_unsmoothed(prod).value == doctest::Approx(-std::log2(lam)));
}

TEST_CASE("diagonal smoothing agrees with the simplex solver") {
  Rng rng(4242);
  for (int t = 0; t < 3; ++t) {
    Dist p = random_dist(rng, 2, 3, 0.02);
    QState s = from_classical(p);
    for (double eps : {0.1, 0.3}) {
      CHECK(imax_partial(s, eps, Metric::Trace).value ==
            doctest::Approx(classical_smooth::imax_partial(p, eps).value)
                .epsilon(5e-6));
      CHECK(hmin_partial(s, eps, Metric::Trace).value ==
            doctest::Approx(classical_smooth::hmin_partial(p, eps).value)
                .epsilon(5e-6));
    }
    CHECK(imax_full(s, 0.2, Metric::Trace).value ==
          doctest::Approx(classical_smooth::imax_full(p, 0.2).value)
              .epsilon(5e-6));
    CHECK(hmin_full(s, 0.2, Metric::Trace).value ==
          doctest::Approx(classical_smooth::hmin_full(p, 0.2).value)
              .epsilon(5e-6));
  }
}

TEST_CASE("maximally entangled smoothing in the purified ball") {
  for (double eps : {0.1, 0.2}) {
    QState phi = max_entangled(2);
    double want_i = 2.0 + std::log2(1.0 - eps * eps);
    double want_h = -std::log2(2.0 * (1.0 - eps * eps));
    CHECK(imax_partial(phi, eps, Metric::Purified).value ==
          doctest::Approx(want_i).epsilon(5e-6));
    CHECK(hmin_partial(phi, eps, Metric::Purified).value ==
          doctest::Approx(want_h).epsilon(5e-6));
  }
  QState phi3 = max_entangled(3);
  CHECK(imax_partial(phi3, 0.1, Metric::Purified).value ==
        doctest::Approx(2.0 * std::log2(3.0) + std::log2(0.99)).epsilon(5e-6));
}

TEST_CASE("variant ordering and radius monotonicity") {
  Rng rng(1313);
  for (int t = 0; t < 3; ++t) {
    QState s = random_bipartite(rng, 2, 2);
    for (Metric m : {Metric::Trace, Metric::Purified}) {
      double i_small = imax_partial(s, 0.05, m).value;
      double i_big = imax_partial(s, 0.2, m).value;
      double i_full = imax_full(s, 0.05, m).value;
      double i_zero = imax_unsmoothed(s).value;
      CHECK(i_big <= i_small + 1e-5);
      CHECK(i_full <= i_small + 1e-5);
      CHECK(i_small <= i_zero + 1e-5);

      double h_small = hmin_partial(s, 0.05, m).value;
      double h_big = hmin_partial(s, 0.2, m).value;
      double h_full = hmin_full(s, 0.05, m).value;
      double h_zero = hmin_unsmoothed(s).value;
      CHECK(h_small <= h_big + 1e-5);
      CHECK(h_small <= h_full + 1e-5);
      CHECK(h_zero <= h_small + 1e-5);
    }
    // trace ball contains the purified ball of the same radius
    CHECK(imax_partial(s, 0.1, Metric::Trace).value <=
          imax_partial(s, 0.1, Metric::Purified).value + 1e-5);
    CHECK(hmin_partial(s, 0.1, Metric::Purified).value <=
          hmin_partial(s, 0.1, Metric::Trace).value + 1e-5);
  }
}

TEST_CASE("optimizers come back certified") {
  Rng rng(2718);
  QState s = random_bipartite(rng, 2, 3);
  for (Metric m : {Metric::Trace, Metric::Purified}) {
    QMeasureResult r = imax_partial(s, 0.15, m);
    CHECK(r.achieved_distance <= 0.15 + 5e-6);
    CHECK(r.value == doctest::Approx(std::log2(r.cone_optimum)));
    CHECK(linalg::trace(r.reference).real() == doctest::Approx(1.0));
    Mat pin = linalg::sub(
        linalg::partial_trace(r.optimizer, {2, 3}, {true, false}),
        marginal_a(s));
    CHECK(linalg::max_abs(pin) < 5e-6);

    QMeasureResult h = hmin_partial(s, 0.15, m);
    CHECK(h.achieved_distance <= 0.15 + 5e-6);
    CHECK(h.value == doctest::Approx(-std::log2(h.cone_optimum)));
    Mat slack = linalg::sub(
        marginal_b(s),
        linalg::partial_trace(h.optimizer, {2, 3}, {false, true}));
    CHECK(linalg::eig_herm(slack).w.front() > -5e-6);
  }
}

TEST_CASE("subnormalized min-entropy in the trace ball") {
  Rng rng(31);
  Mat r = linalg::scale(random_state(rng, 4), 0.9);
  QState s = make_state(2, 2, r);
  QMeasureResult h = hmin_partial(s, 0.1, Metric::Trace);
  CHECK(h.value >= hmin_unsmoothed(s).value - 1e-6);
  CHECK_THROWS_AS(hmin_partial(s, 0.1, Metric::Purified), UsageError);
  CHECK_THROWS_AS(imax_partial(s, 0.1, Metric::Trace), UsageError);
}

TEST_CASE("rank deficient marginals are compressed away") {
  // a dead X symbol and a dead Y symbol
  Dist p = prob::make_normalized({3, 2}, {0.4, 0.2, 0.0, 0.0, 0.3, 0.1});
  Dist q = prob::make_normalized({3, 2}, {0.4, 0.0, 0.25, 0.0, 0.35, 0.0});
  QState sp = from_classical(p), sq = from_classical(q);
  CHECK(imax_partial(sp, 0.1, Metric::Trace).value ==
        doctest::Approx(classical_smooth::imax_partial(p, 0.1).value)
            .epsilon(5e-6));
  CHECK(hmin_partial(sq, 0.1, Metric::Trace).value ==
        doctest::Approx(classical_smooth::hmin_partial(q, 0.1).value)
            .epsilon(5e-6));
  // pure states smooth in the purified ball despite flat spectra
  QState phi = max_entangled(2);
  QMeasureResult r = imax_partial(phi, 0.1, Metric::Purified);
  CHECK(r.achieved_distance <= 0.1 + 5e-6);
}

TEST_CASE("hat constructions certify the equivalence route") {
  Rng rng(86);
  double eps = 0.1, delta = 0.05;
  double penalty = std::log2((8.0 + delta * delta) / (delta * delta));
  for (int t = 0; t < 3; ++t) {
    QState s = random_bipartite(rng, 2, 2);
    QMeasureResult ri = imax_full(s, eps, Metric::Purified);
    HatResult hi = imax_hat(s, ri.optimizer, ri.reference, delta);
    CHECK(hi.marginal_residual < 1e-8);
    CHECK(hi.distance <= 2.0 * eps + delta + 1e-6);
    CHECK(hi.dmax_hat <= hi.dmax_budget + 1e-5);
    CHECK(hi.dmax_budget <= ri.value + penalty + 1e-4);

    QMeasureResult rh = hmin_full(s, eps, Metric::Purified);
    HatResult hh = hmin_hat(s, rh.optimizer, delta);
    CHECK(hh.marginal_residual < 1e-8);
    CHECK(hh.distance <= 2.0 * eps + delta + 1e-6);
    CHECK(hh.dmax_hat <= hh.dmax_budget + 1e-5);
  }
}

TEST_CASE("cq utilities and measurement") {
  Rng rng(12);
  Mat b0 = linalg::scale(random_state(rng, 2), 0.6);
  Mat b1 = linalg::scale(random_state(rng, 2), 0.4);
  QState cq = cq_state({b0, b1});
  CHECK(cq.da == 2);
  CHECK(linalg::trace(cq.rho).real() == doctest::Approx(1.0));

  QState merged = cq_apply_function(cq, {0, 0}, 1);
  CHECK(merged.da == 1);
  CHECK(linalg::max_abs(linalg::sub(merged.rho, linalg::add(b0, b1))) <
        1e-12);

  QState ent = max_entangled(2);
  CHECK_THROWS_AS(cq_apply_function(ent, {0, 1}, 2), UsageError);

  MeasuredState ms = projective_measure(ent, {basis_proj(2, 0),
                                              basis_proj(2, 1)});
  CHECK(ms.px[0] == doctest::Approx(0.5));
  CHECK(ms.omega.da == 2);
  CHECK(ms.omega.db == 4);
  CHECK(linalg::trace(ms.omega.rho).real() == doctest::Approx(1.0));
  // measuring wipes the off-diagonal coherence
  double hm = hmin_unsmoothed(ent).value;
  QState pinched = make_state(
      2, 2, linalg::partial_trace(ms.omega.rho, {2, 2, 2}, {true, true,
                                                            false}));
  CHECK(hmin_unsmoothed(pinched).value >= hm - 1e-9);

  Mat tilted(2, 2);
  tilted.at(0, 0) = tilted.at(1, 1) = 0.5;
  CHECK_THROWS_AS(projective_measure(ent, {tilted, basis_proj(2, 1)}),
                  UsageError);
}

TEST_CASE("measure calls are deterministic") {
  Rng rng(606);
  QState s = random_bipartite(rng, 2, 2);
  QMeasureResult a = imax_partial(s, 0.1, Metric::Purified);
  QMeasureResult b = imax_partial(s, 0.1, Metric::Purified);
  CHECK(a.value == b.value);
  CHECK(linalg::max_abs(linalg::sub(a.optimizer, b.optimizer)) == 0.0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("radius validation") {
  QState phi = max_entangled(2);
  CHECK_THROWS_AS(imax_partial(phi, 1.0, Metric::Trace), UsageError);
  CHECK_THROWS_AS(imax_partial(phi, -0.1, Metric::Trace), UsageError);
  CHECK_THROWS_AS(hmin_partial(phi, 1.5, Metric::Purified), UsageError);
}

}  // TEST_SUITE
