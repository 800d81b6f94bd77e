#include <cmath>
#include <vector>

#include "doctest.h"
#include "oneshot/common.hpp"
#include "oneshot/prob.hpp"
#include "oneshot/protocols.hpp"
#include "test_util.hpp"

using namespace oneshot;
using namespace oneshot::protocols;
using prob::Dist;

namespace {

Dist correlated_bits() {
  return prob::make_normalized({2, 2}, {0.45, 0.05, 0.05, 0.45});
}

// sixteen-value X, binary Y, support of X depends on y, all conditionals 1/8
Dist hidden_byte() {
  std::vector<double> w(32, 0.0);
  for (int x = 0; x < 8; ++x) w[x * 2 + 0] = 1.0 / 16.0;
  for (int x = 8; x < 16; ++x) w[x * 2 + 1] = 1.0 / 16.0;
  return prob::make_normalized({16, 2}, std::move(w));
}

}  // namespace

TEST_SUITE("protocols") {

TEST_CASE("toeplitz family is linear and two-universal") {
  for (int n = 2; n <= 5; ++n)
    for (int ell = 1; ell <= n; ++ell) {
      ToeplitzHashFamily fam(n, ell);
      Rng rng(11 * n + ell);
      for (int t = 0; t < 50; ++t) {
        uint64_t s = rng.below(fam.seed_count());
        uint32_t a = (uint32_t)rng.below(1u << n);
        uint32_t b = (uint32_t)rng.below(1u << n);
        CHECK(fam.apply(s, a ^ b) == (fam.apply(s, a) ^ fam.apply(s, b)));
      }
      CHECK(fam.max_collision_probability() <= std::exp2(-ell) + 1e-15);
    }
  CHECK_THROWS_AS(ToeplitzHashFamily(15, 10), ResourceError);
  CHECK_THROWS_AS(ToeplitzHashFamily(6, 6).max_collision_probability(),
                  ResourceError);
}

TEST_CASE("splitting run on the correlated pair meets every bound") {
  Dist p = correlated_bits();
  SplitRun run = state_split_exact(p, 0.2, 0.05);
  CHECK(run.error <= 0.2 + 1e-12);
  CHECK(run.slack_error >= 0.0);
  CHECK(run.slack_comm >= -1e-9);
  CHECK(run.slack_converse >= -1e-9);
  CHECK(run.comm_bits >= 1);
  CHECK(run.n_samples >= 1);
  CHECK(run.gamma < 0.05);

  // the protocol never touches X, so the X-marginal survives exactly
  auto mx_in = prob::marginal_x(p);
  auto mx_out = prob::marginal_x(run.p_out);
  for (int x = 0; x < 2; ++x)
    CHECK(std::abs(mx_in[x] - mx_out[x]) < 1e-12);
}

TEST_CASE("independent target degenerates to zero communication") {
  Dist p = prob::make_normalized({2, 3},
                                 {0.2 * 0.5, 0.2 * 0.3, 0.2 * 0.2,
                                  0.8 * 0.5, 0.8 * 0.3, 0.8 * 0.2});
  SplitRun run = state_split_exact(p, 0.3, 0.1);
  CHECK(run.comm_bits == 0);
  CHECK(run.n_samples == 0);
  CHECK(run.error <= 0.3 - 0.1 + 1e-12);
  CHECK(run.slack_converse >= -1e-9);
}

TEST_CASE("splitting rejects bad arguments") {
  Dist p = correlated_bits();
  CHECK_THROWS_AS(state_split_exact(p, 0.2, 0.0), UsageError);
  CHECK_THROWS_AS(state_split_exact(p, 0.2, 0.3), UsageError);
  CHECK_THROWS_AS(state_split_exact(p, 1.5, 0.1), UsageError);
  std::vector<double> big(17 * 2, 1.0 / 34.0);
  CHECK_THROWS_AS(state_split_exact(prob::make_normalized({17, 2}, big),
                                    0.2, 0.05),
                  ResourceError);
  Dist sub = prob::make_sub_normalized({2, 2}, {0.2, 0.2, 0.2, 0.2});
  CHECK_THROWS_AS(state_split_exact(sub, 0.2, 0.05), UsageError);
}

TEST_CASE("sampled protocol tracks the exact run") {
  Dist p = correlated_bits();
  SplitRun exact = state_split_exact(p, 0.2, 0.05);
  SampleRun empty = state_split_sample(p, 0.2, 0.05, 0, 99);
  CHECK(empty.decisions == 0);
  CHECK(empty.empirical_t == 0.0);

  SampleRun a = state_split_sample(p, 0.2, 0.05, 100000, 424242);
  SampleRun b = state_split_sample(p, 0.2, 0.05, 100000, 424242);
  CHECK(a.counts == b.counts);
  CHECK(a.accepts == b.accepts);
  CHECK(a.decisions == b.decisions);

  CHECK(a.empirical_t <= 0.01);
  CHECK(std::abs(a.accept_z) <= 5.0);
  CHECK(a.chi2 <= 3.0 * std::max(1, a.chi2_cells));

  // failure runs are Bernoulli(gamma) per trial
  long found = 0;
  for (long c : a.counts) found += c;
  CHECK(found == a.trials);
  double fail_rate = 1.0 - (double)a.accepts / (double)a.trials;
  double sig = std::sqrt(exact.gamma * (1.0 - exact.gamma) /
                         (double)a.trials);
  CHECK(std::abs(fail_rate - exact.gamma) <= 5.0 * sig + 1e-9);
}

TEST_CASE("hashing uniform inputs") {
  // five uniform bits, no side information
  Dist p = prob::make_normalized({32, 1}, std::vector<double>(32, 1.0 / 32));
  PaRun full = privacy_amplify_exact(p, 5);
  CHECK(full.error <= 0.5 + 1e-12);
  CHECK(full.slack >= -1e-12);
  PaRun shaved = privacy_amplify_exact(p, 1);
  CHECK(shaved.error <= 0.125 + 1e-12);
  CHECK(shaved.hash_bound == doctest::Approx(0.125));
  PaRun empty = privacy_amplify_exact(p, 0);
  CHECK(empty.error == 0.0);
}

TEST_CASE("hashing with correlated side information") {
  Dist p = hidden_byte();
  PaRun run = privacy_amplify_exact(p, 1);
  CHECK(run.hash_bound == doctest::Approx(0.25));
  CHECK(run.error <= 0.25 + 1e-12);

  double prev = -1.0;
  for (int ell = 0; ell <= 4; ++ell) {
    PaRun r = privacy_amplify_exact(p, ell);
    CHECK(r.error >= prev - 1e-12);
    CHECK(r.slack >= -1e-12);
    prev = r.error;
  }
}

TEST_CASE("theorem-driven key length is secure") {
  Dist p = hidden_byte();
  PaTheoremRun run = pa_theorem_run(p, 0.2, 0.2);
  CHECK(run.key_bits >= 1);
  CHECK(run.error <= 0.2 + 1e-12);
  CHECK(run.slack >= 0.0);

  // tiny delta pushes the formula below zero and the key clamps empty
  PaTheoremRun clamped = pa_theorem_run(p, 0.2, 0.05);
  CHECK(clamped.key_bits == 0);
  CHECK(clamped.error == 0.0);
}

TEST_CASE("secure runs never beat the entropy ceiling") {
  Dist p = hidden_byte();
  for (double eps : {0.0, 0.1, 0.2}) {
    for (int ell = 0; ell <= 5; ++ell) {
      PaConverse c = pa_converse_check(p, eps, ell);
      if (c.secure) CHECK((double)c.key_bits <= c.hmin_at_eps + 1e-6);
    }
  }
  PaConverse zero = pa_converse_check(p, 0.0, 3);
  CHECK(zero.hmin_at_eps == doctest::Approx(3.0));
}

TEST_CASE("hashing rejects bad inputs") {
  Dist p = prob::make_normalized({12, 1}, std::vector<double>(12, 1.0 / 12));
  CHECK_THROWS_AS(privacy_amplify_exact(p, 2), UsageError);
  Dist wide =
      prob::make_normalized({128, 1}, std::vector<double>(128, 1.0 / 128));
  CHECK_THROWS_AS(privacy_amplify_exact(wide, 2), ResourceError);
  Dist ok = prob::make_normalized({4, 1}, std::vector<double>(4, 0.25));
  CHECK_THROWS_AS(privacy_amplify_exact(ok, -1), UsageError);
}

}
