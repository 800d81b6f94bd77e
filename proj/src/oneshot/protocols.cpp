#include "oneshot/protocols.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "oneshot/common.hpp"

namespace oneshot::protocols {

namespace {

void require_normalized(const Dist& p, const char* who) {
  if (p.shape.size() != 2)
    throw UsageError(std::string(who) + ": needs a bivariate table");
  if (!prob::is_normalized(p))
    throw UsageError(std::string(who) + ": table must be normalized");
}

void require_split_range(double eps, double delta, const char* who) {
  if (!(eps > 0.0) || eps > 1.0)
    throw UsageError(std::string(who) + ": eps must lie in (0, 1]");
  if (!(delta > 0.0) || delta > eps)
    throw UsageError(std::string(who) + ": delta must lie in (0, eps]");
}

int sample_index(const std::vector<double>& weights, double total, Rng& rng) {
  double u = rng.uniform() * total, acc = 0.0;
  int last = 0;
  for (int i = 0; i < (int)weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

// Everything the while-loop machine does is determined by the acceptance
// table a(x,y), the candidate marginal q, and the sample budget.
struct Machine {
  int X = 0, Y = 0, n_samples = 0;
  std::vector<double> px, q, accept; // accept is row-major X x Y
  std::vector<double> alpha, gamma;  // per x
};

Machine build_machine(const Dist& p, const classical_smooth::MeasureResult& k,
                      int n_samples) {
  Machine m;
  m.X = prob::nx(p);
  m.Y = prob::ny(p);
  m.n_samples = n_samples;
  m.px = prob::marginal_x(p);
  m.q = k.q;
  for (double& v : m.q) v = std::max(v, 0.0);
  m.accept.assign((size_t)m.X * m.Y, 0.0);
  m.alpha.assign(m.X, 0.0);
  m.gamma.assign(m.X, 0.0);
  double lam = k.lp_optimum;
  for (int x = 0; x < m.X; ++x) {
    if (m.px[x] <= 0.0) { m.gamma[x] = 1.0; continue; }
    for (int y = 0; y < m.Y; ++y) {
      if (m.q[y] <= 0.0) continue;
      double a = prob::cell(k.optimizer, x, y) / (m.px[x] * lam * m.q[y]);
      a = std::clamp(a, 0.0, 1.0);
      m.accept[(size_t)x * m.Y + y] = a;
      m.alpha[x] += m.q[y] * a;
    }
    m.gamma[x] = std::pow(1.0 - std::min(1.0, m.alpha[x]), n_samples);
  }
  return m;
}

Dist machine_output(const Dist& p, const Machine& m) {
  std::vector<double> w((size_t)m.X * m.Y, 0.0);
  for (int x = 0; x < m.X; ++x) {
    if (m.px[x] <= 0.0) continue;
    for (int y = 0; y < m.Y; ++y) {
      double acc_part = m.alpha[x] > 0.0
                            ? m.q[y] * m.accept[(size_t)x * m.Y + y] / m.alpha[x]
                            : m.q[y];
      w[(size_t)x * m.Y + y] =
          m.px[x] * ((1.0 - m.gamma[x]) * acc_part + m.gamma[x] * m.q[y]);
    }
  }
  return prob::make_table(p.shape, std::move(w));
}

}  // namespace

ToeplitzHashFamily::ToeplitzHashFamily(int n, int ell)
    : n_bits(n), out_bits(ell) {
  if (n < 1 || ell < 1)
    throw UsageError("toeplitz family: need at least one bit on both sides");
  if (n + ell - 1 > 20)
    throw ResourceError("toeplitz family: seed space too large to enumerate");
}

uint32_t ToeplitzHashFamily::apply(uint64_t seed, uint32_t x) const {
  uint32_t z = 0, mask = (1u << out_bits) - 1;
  while (x != 0) {
    int j = std::countr_zero(x);
    x &= x - 1;
    z ^= (uint32_t)(seed >> (n_bits - 1 - j)) & mask;
  }
  return z;
}

double ToeplitzHashFamily::max_collision_probability() const {
  if (n_bits > 5)
    throw ResourceError("toeplitz family: exhaustive check capped at 5 bits");
  uint64_t seeds = seed_count(), worst = 0;
  // linearity over GF(2): a pair (x, x') collides iff x ^ x' maps to zero
  for (uint32_t d = 1; d < (1u << n_bits); ++d) {
    uint64_t hits = 0;
    for (uint64_t s = 0; s < seeds; ++s)
      if (apply(s, d) == 0) ++hits;
    worst = std::max(worst, hits);
  }
  return (double)worst / (double)seeds;
}

SplitRun state_split_exact(const Dist& p, double eps, double delta) {
  require_normalized(p, "state_split_exact");
  require_split_range(eps, delta, "state_split_exact");
  if (prob::nx(p) > 16 || prob::ny(p) > 16)
    throw ResourceError("state_split_exact: alphabets capped at 16x16");

  SplitRun run;
  run.eps = eps;
  run.delta = delta;
  double loglog = std::log2(std::log2(1.0 / delta));
  auto k = classical_smooth::imax_partial(p, eps - delta);
  run.k_bits = k.value;
  run.comm_bound = k.value + loglog + 1.0;
  run.converse_rate = classical_smooth::imax_partial(p, eps).value;

  if (k.lp_optimum <= 1.0 + 1e-9) {
    // independent output needs no message: ship the smoothed table as is
    run.p_out = k.optimizer;
    run.error = prob::gen_trace_distance(run.p_out, p);
    run.slack_error = eps - run.error;
    run.slack_comm = run.comm_bound;
    run.slack_converse = -run.converse_rate;
    return run;
  }

  run.r_bits = k.value + loglog;
  double n_real = k.lp_optimum * std::log2(1.0 / delta); // 2^r_bits
  if (n_real > (double)(1 << 20))
    throw ResourceError("state_split_exact: sample budget too large");
  int n_samples = (int)std::ceil(n_real - 1e-12);
  run.n_samples = std::max(1, n_samples);
  run.comm_bits = std::bit_width((unsigned)run.n_samples);
  run.comm_real = std::log2((double)run.n_samples + 1.0);
  run.slack_comm = run.comm_bound - run.comm_real;

  Machine m = build_machine(p, k, run.n_samples);
  run.p_out = machine_output(p, m);
  for (int x = 0; x < m.X; ++x) run.gamma += m.px[x] * m.gamma[x];
  run.error = prob::gen_trace_distance(run.p_out, p);
  run.slack_error = eps - run.error;
  run.slack_converse = run.r_bits - run.converse_rate;
  return run;
}

SampleRun state_split_sample(const Dist& p, double eps, double delta,
                             long trials, uint64_t seed) {
  require_normalized(p, "state_split_sample");
  require_split_range(eps, delta, "state_split_sample");
  SplitRun exact = state_split_exact(p, eps, delta);

  SampleRun out;
  out.trials = trials;
  int X = prob::nx(p), Y = prob::ny(p);
  out.counts.assign((size_t)X * Y, 0);
  if (trials <= 0) return out;

  auto k = classical_smooth::imax_partial(p, eps - delta);
  bool degenerate = k.lp_optimum <= 1.0 + 1e-9;
  Machine m = build_machine(p, k, std::max(1, exact.n_samples));
  double qtot = 0.0;
  for (double v : m.q) qtot += v;

  Rng rng(seed);
  for (long t = 0; t < trials; ++t) {
    int x = sample_index(m.px, 1.0, rng);
    int y_out = -1;
    if (degenerate) {
      // no message: Bob samples the first shared register directly
      y_out = sample_index(m.q, qtot, rng);
    } else {
      for (int i = 0; i < m.n_samples; ++i) {
        int y = sample_index(m.q, qtot, rng);
        ++out.decisions;
        if (rng.uniform() < m.accept[(size_t)x * Y + y]) {
          ++out.accepts;
          y_out = y;
          break;
        }
      }
      if (y_out < 0) y_out = sample_index(m.q, qtot, rng);
    }
    ++out.counts[(size_t)x * Y + y_out];
  }

  out.accept_expected = 0.0;
  for (int x = 0; x < X; ++x) out.accept_expected += m.px[x] * m.alpha[x];
  if (out.decisions > 0) {
    out.accept_rate = (double)out.accepts / (double)out.decisions;
    double sig = std::sqrt(out.accept_expected * (1.0 - out.accept_expected) /
                           (double)out.decisions);
    out.accept_z = sig > 0.0 ? (out.accept_rate - out.accept_expected) / sig
                             : 0.0;
  }

  std::vector<double> freq(out.counts.size());
  for (size_t i = 0; i < freq.size(); ++i)
    freq[i] = (double)out.counts[i] / (double)trials;
  Dist emp = prob::make_table(p.shape, std::move(freq));
  out.empirical_t = prob::gen_trace_distance(emp, exact.p_out);
  for (size_t i = 0; i < out.counts.size(); ++i) {
    double expct = (double)trials * exact.p_out.w[i];
    if (expct < 5.0) continue;
    double d = (double)out.counts[i] - expct;
    out.chi2 += d * d / expct;
    ++out.chi2_cells;
  }
  return out;
}

PaRun privacy_amplify_exact(const Dist& p, int key_bits) {
  require_normalized(p, "privacy_amplify_exact");
  int X = prob::nx(p), Y = prob::ny(p);
  if (X < 2 || (X & (X - 1)) != 0)
    throw UsageError("privacy_amplify_exact: input alphabet must be 2^n");
  int n = std::bit_width((unsigned)X) - 1;
  if (n > 6)
    throw ResourceError("privacy_amplify_exact: input capped at 6 bits");
  if (key_bits < 0)
    throw UsageError("privacy_amplify_exact: negative key length");

  PaRun run;
  run.n_bits = n;
  run.key_bits = key_bits;
  double hmin0 = classical_smooth::hmin_unsmoothed(p);
  run.hash_bound = 0.5 * std::sqrt(std::exp2((double)key_bits - hmin0));
  if (key_bits == 0) { // empty key is perfectly secret
    run.slack = run.hash_bound;
    return run;
  }

  ToeplitzHashFamily fam(n, key_bits);
  uint64_t seeds = fam.seed_count();
  auto py = prob::marginal_y(p);
  int Z = 1 << key_bits;
  double uz = 1.0 / (double)Z;
  std::vector<double> bucket((size_t)Z * Y);
  double acc = 0.0;
  for (uint64_t s = 0; s < seeds; ++s) {
    std::fill(bucket.begin(), bucket.end(), 0.0);
    for (int x = 0; x < X; ++x) {
      uint32_t z = fam.apply(s, (uint32_t)x);
      for (int y = 0; y < Y; ++y)
        bucket[(size_t)z * Y + y] += prob::cell(p, x, y);
    }
    for (int z = 0; z < Z; ++z)
      for (int y = 0; y < Y; ++y)
        acc += std::abs(bucket[(size_t)z * Y + y] - uz * py[y]);
  }
  run.error = 0.5 * acc / (double)seeds;
  run.slack = run.hash_bound - run.error;
  return run;
}

PaTheoremRun pa_theorem_run(const Dist& p, double eps, double delta) {
  require_normalized(p, "pa_theorem_run");
  require_split_range(eps, delta, "pa_theorem_run");
  PaTheoremRun run;
  run.eps = eps;
  run.delta = delta;
  run.hmin_smoothed = classical_smooth::hmin_partial(p, eps - delta).value;
  double raw = run.hmin_smoothed + std::log2(4.0 * delta * delta);
  run.key_bits = std::max(0, (int)std::ceil(raw - 1e-9));
  run.error = privacy_amplify_exact(p, run.key_bits).error;
  run.slack = eps - run.error;
  return run;
}

PaConverse pa_converse_check(const Dist& p, double eps, int key_bits) {
  require_normalized(p, "pa_converse_check");
  if (!(eps >= 0.0) || eps > 1.0)
    throw UsageError("pa_converse_check: eps must lie in [0, 1]");
  PaConverse run;
  run.eps = eps;
  run.key_bits = key_bits;
  run.error = privacy_amplify_exact(p, key_bits).error;
  run.secure = run.error <= eps + 1e-12;
  run.hmin_at_eps = eps > 0.0
                        ? classical_smooth::hmin_partial(p, eps).value
                        : classical_smooth::hmin_unsmoothed(p);
  run.slack = run.hmin_at_eps - (double)key_bits;
  return run;
}

}  // namespace oneshot::protocols
