#include "oneshot/sweeps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "oneshot/classical_smooth.hpp"
#include "oneshot/common.hpp"
#include "oneshot/convex_split.hpp"
#include "oneshot/linalg.hpp"
#include "oneshot/lp.hpp"
#include "oneshot/prob.hpp"
#include "oneshot/protocols.hpp"
#include "oneshot/quantum.hpp"
#include "oneshot/spectrum.hpp"

namespace oneshot::sweeps {

using linalg::cplx;
using linalg::Mat;
using prob::Dist;
using quantum::Metric;
using quantum::QState;

namespace {

double now_seconds() {
  using clk = std::chrono::steady_clock;
  static const auto start = clk::now();
  return std::chrono::duration<double>(clk::now() - start).count();
}

void push_line(SweepReport* r, std::string label, double slack, double tol) {
  CheckLine l;
  l.label = std::move(label);
  l.slack = slack;
  l.tol = tol;
  l.pass = slack >= -tol;
  r->pass = r->pass && l.pass;
  r->lines.push_back(std::move(l));
}

void fold(double* worst, double slack) { *worst = std::min(*worst, slack); }

// seeded fixture helpers, one stream per trial

Mat random_mat(Rng& rng, int r, int c) {
  Mat m(r, c);
  for (auto& v : m.a) v = {rng.gaussian(), rng.gaussian()};
  return m;
}

Mat random_state(Rng& rng, int n, int rank = -1) {
  if (rank < 0) rank = n;
  Mat g = random_mat(rng, n, rank);
  Mat p = linalg::hermitize(linalg::mul(g, linalg::dagger(g)));
  return linalg::scale(p, 1.0 / linalg::trace(p).real());
}

Mat random_unitary(Rng& rng, int n) {
  return linalg::dagger(linalg::polar_unitary(random_mat(rng, n, n)));
}

Mat random_pure(Rng& rng, int n) {
  Mat v = random_mat(rng, n, 1);
  double s = 0.0;
  for (const auto& z : v.a) s += std::norm(z);
  v = linalg::scale(v, 1.0 / std::sqrt(s));
  return linalg::mul(v, linalg::dagger(v));
}

QState random_two_qubit(Rng& rng) {
  return quantum::make_state(2, 2, random_state(rng, 4));
}

Dist random_dist(Rng& rng, int nx, int ny) {
  std::vector<double> w((size_t)nx * ny);
  double tot = 0.0;
  for (auto& v : w) {
    v = -std::log(rng.uniform_pos());
    tot += v;
  }
  for (auto& v : w) v /= tot;
  return prob::make_normalized({nx, ny}, w);
}

Mat phi_state(int d) {
  Mat v(d * d, 1);
  for (int i = 0; i < d; ++i) v.at(i * d + i, 0) = 1.0 / std::sqrt((double)d);
  return linalg::mul(v, linalg::dagger(v));
}

Dist correlated_bits() {
  return prob::make_normalized({2, 2}, {0.45, 0.05, 0.05, 0.45});
}

Dist product_of_marginals(const Dist& p) {
  auto px = prob::marginal_x(p);
  auto py = prob::marginal_y(p);
  std::vector<double> w(px.size() * py.size());
  for (size_t x = 0; x < px.size(); ++x)
    for (size_t y = 0; y < py.size(); ++y) w[x * py.size() + y] = px[x] * py[y];
  return prob::make_normalized({(int)px.size(), (int)py.size()}, w);
}

// channels for the data-processing suite

std::vector<Mat> random_kraus(Rng& rng, int d, int k) {
  std::vector<Mat> g;
  Mat s = Mat::zero(d, d);
  for (int i = 0; i < k; ++i) {
    g.push_back(random_mat(rng, d, d));
    s = linalg::add(s, linalg::mul(linalg::dagger(g[i]), g[i]));
  }
  Mat fix = linalg::mat_pinv_sqrt(linalg::hermitize(s));
  for (auto& m : g) m = linalg::mul(m, fix);
  return g;
}

// convex mixture of unitaries: trace preserving and unital at once
std::vector<Mat> random_mixed_unitary(Rng& rng, int d, int k) {
  std::vector<double> w(k);
  double tot = 0.0;
  for (auto& v : w) {
    v = rng.uniform_pos();
    tot += v;
  }
  std::vector<Mat> g;
  for (int i = 0; i < k; ++i)
    g.push_back(linalg::scale(random_unitary(rng, d), std::sqrt(w[i] / tot)));
  return g;
}

Mat apply_local_pair(const Mat& rho, const std::vector<Mat>& ka,
                     const std::vector<Mat>& kb) {
  Mat out = Mat::zero(rho.rows, rho.cols);
  for (const auto& a : ka)
    for (const auto& b : kb) {
      Mat op = linalg::kron(a, b);
      out = linalg::add(out, linalg::mul(op, linalg::mul(rho, linalg::dagger(op))));
    }
  return linalg::hermitize(out);
}

// trace out the middle factor of a (da, db, dr) composite
Mat trace_middle(const Mat& rho, int da, int db, int dr) {
  Mat out = Mat::zero(da * dr, da * dr);
  for (int a = 0; a < da; ++a)
    for (int r = 0; r < dr; ++r)
      for (int a2 = 0; a2 < da; ++a2)
        for (int r2 = 0; r2 < dr; ++r2) {
          cplx s = 0.0;
          for (int b = 0; b < db; ++b)
            s += rho.at((a * db + b) * dr + r, (a2 * db + b) * dr + r2);
          out.at(a * dr + r, a2 * dr + r2) = s;
        }
  return out;
}

// brute-force LP optimum: visit every basis drawn from rows plus bounds

bool tiny_solve(std::vector<double> a, std::vector<double> b, int n,
                std::vector<double>* out) {
  for (int i = 0; i < n; ++i) {
    int piv = i;
    for (int r = i + 1; r < n; ++r)
      if (std::abs(a[(size_t)r * n + i]) > std::abs(a[(size_t)piv * n + i]))
        piv = r;
    if (std::abs(a[(size_t)piv * n + i]) < 1e-11) return false;
    for (int c = 0; c < n; ++c) std::swap(a[(size_t)i * n + c], a[(size_t)piv * n + c]);
    std::swap(b[i], b[piv]);
    for (int r = i + 1; r < n; ++r) {
      double f = a[(size_t)r * n + i] / a[(size_t)i * n + i];
      for (int c = i; c < n; ++c) a[(size_t)r * n + c] -= f * a[(size_t)i * n + c];
      b[r] -= f * b[i];
    }
  }
  out->assign(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[(size_t)i * n + j] * (*out)[j];
    (*out)[i] = s / a[(size_t)i * n + i];
  }
  return true;
}

double row_dot(const lp::Row& r, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& [v, c] : r.terms) s += c * x[v];
  return s;
}

bool lp_feasible(const lp::Problem& p, const std::vector<double>& x,
                 double tol) {
  for (double v : x)
    if (v < -tol) return false;
  for (const auto& r : p.rows) {
    double s = row_dot(r, x);
    if (r.sense == lp::Sense::LE && s > r.rhs + tol) return false;
    if (r.sense == lp::Sense::GE && s < r.rhs - tol) return false;
    if (r.sense == lp::Sense::EQ && std::abs(s - r.rhs) > tol) return false;
  }
  return true;
}

double vertex_oracle(const lp::Problem& p, bool* found) {
  int n = p.num_vars;
  int m = (int)p.rows.size();
  int total = m + n;
  std::vector<int> pick(n);
  double best = 0.0;
  *found = false;

  std::vector<double> a((size_t)n * n), b(n), x;
  auto consider = [&]() {
    for (int i = 0; i < n; ++i) {
      std::fill(a.begin() + (size_t)i * n, a.begin() + (size_t)(i + 1) * n, 0.0);
      if (pick[i] < m) {
        for (const auto& [v, c] : p.rows[pick[i]].terms)
          a[(size_t)i * n + v] += c;
        b[i] = p.rows[pick[i]].rhs;
      } else {
        a[(size_t)i * n + (pick[i] - m)] = 1.0;
        b[i] = 0.0;
      }
    }
    if (!tiny_solve(a, b, n, &x)) return;
    if (!lp_feasible(p, x, 1e-7)) return;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += p.c[j] * x[j];
    if (!*found || obj < best) best = obj;
    *found = true;
  };
  auto rec = [&](auto&& self, int start, int depth) -> void {
    if (depth == n) {
      consider();
      return;
    }
    for (int i = start; i <= total - (n - depth); ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

// feasible by anchor, bounded by a box row
lp::Problem random_lp(Rng& rng, int n, int m) {
  lp::Problem p;
  p.num_vars = n;
  p.c.resize(n);
  for (auto& v : p.c) v = rng.gaussian();

  std::vector<double> anchor(n);
  double anchor_sum = 0.0;
  for (auto& v : anchor) {
    v = rng.uniform() * 2.0;
    anchor_sum += v;
  }
  for (int i = 0; i < m; ++i) {
    lp::Row r;
    for (int j = 0; j < n; ++j) {
      double c = rng.gaussian();
      if (std::abs(c) > 0.3) r.terms.push_back({j, c});
    }
    if (r.terms.empty()) r.terms.push_back({(int)rng.below(n), 1.0});
    double at_anchor = row_dot(r, anchor);
    double roll = rng.uniform();
    if (roll < 0.2) {
      r.sense = lp::Sense::EQ;
      r.rhs = at_anchor;
    } else if (roll < 0.6) {
      r.sense = lp::Sense::LE;
      r.rhs = at_anchor + rng.uniform();
    } else {
      r.sense = lp::Sense::GE;
      r.rhs = at_anchor - rng.uniform();
    }
    p.rows.push_back(r);
  }
  lp::Row box;
  for (int j = 0; j < n; ++j) box.terms.push_back({j, 1.0});
  box.sense = lp::Sense::LE;
  box.rhs = anchor_sum + 5.0;
  p.rows.push_back(box);
  return p;
}

}  // namespace

SweepReport sandwich_sweep(std::uint64_t seed, int trials) {
  if (trials <= 0) trials = 200;
  SweepReport rep;
  rep.name = "sandwich";
  rep.trials = trials;
  double t0 = now_seconds();

  const double eps_grid[] = {0.05, 0.1, 0.3};
  double worst[4] = {1e300, 1e300, 1e300, 1e300};
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    int n = (t % 2) ? 4 : 3;
    Dist p = random_dist(rng, n, n);
    for (double eps : eps_grid) {
      auto r = classical_smooth::check_thm1_sandwich(p, eps, eps / 2.0);
      for (int i = 0; i < 4; ++i) fold(&worst[i], r.slack[i]);
    }
  }
  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "max-information above its spectral floor", worst[0], 1e-7);
  push_line(&rep, "max-information below its spectral ceiling", worst[1], 1e-7);
  push_line(&rep, "min-entropy below its spectral ceiling", worst[2], 1e-7);
  push_line(&rep, "min-entropy above its spectral floor", worst[3], 1e-7);
  return rep;
}

SweepReport second_order_sweep() {
  SweepReport rep;
  rep.name = "second-order";
  double t0 = now_seconds();

  Dist p = correlated_bits();
  Dist q = product_of_marginals(p);
  const double eps_grid[] = {0.25, 0.5, 0.75};
  const int block[] = {64, 128, 256, 512, 1024};
  for (double eps : eps_grid) {
    double worst = 1e300;
    for (int n : block) {
      auto row = spectrum::second_order_row(p, q, n, eps);
      fold(&worst, 10.0 - row.normalized);
      ++rep.trials;
    }
    char label[96];
    std::snprintf(label, sizeof label,
                  "normalized residual within 10 at eps %.2f", eps);
    push_line(&rep, label, worst, 0.0);
  }
  rep.elapsed = now_seconds() - t0;
  return rep;
}

SweepReport split_sweep(std::uint64_t seed, int trials) {
  if (trials <= 0) trials = 50;
  SweepReport rep;
  rep.name = "split";
  rep.trials = trials;
  double t0 = now_seconds();

  double worst_error = 1e300, worst_comm = 1e300, worst_converse = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 40000 + t);
    int nx = 2 + (t % 3);
    int ny = 2 + ((t / 3) % 3);
    Dist p = random_dist(rng, nx, ny);
    auto run = protocols::state_split_exact(p, 0.2, 0.05);
    fold(&worst_error, run.slack_error);
    fold(&worst_comm, run.slack_comm);
    fold(&worst_converse, run.slack_converse);
  }
  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "exact output stays within eps of the target", worst_error,
            1e-9);
  push_line(&rep, "communication within the achievability budget", worst_comm,
            1e-9);
  push_line(&rep, "rate at or above the converse value", worst_converse, 1e-9);
  return rep;
}

namespace {

Dist pa_fix_hidden_pair() {  // six input bits, one balanced leak bit
  std::vector<double> w(64 * 2, 0.0);
  for (int x = 0; x < 64; ++x) w[x * 2 + (x < 32 ? 0 : 1)] = 1.0 / 64.0;
  return prob::make_normalized({64, 2}, w);
}

Dist pa_fix_nibble_leak() {  // four input bits, low pair leaked verbatim
  std::vector<double> w(16 * 4, 0.0);
  for (int x = 0; x < 16; ++x) w[x * 4 + (x & 3)] = 1.0 / 16.0;
  return prob::make_normalized({16, 4}, w);
}

Dist pa_fix_skewed(std::uint64_t seed) {  // five input bits, soft bias
  Rng rng(seed, 777);
  return random_dist(rng, 32, 2);
}

Dist pa_fix_tiny(std::uint64_t seed) {  // three input bits, three outputs
  Rng rng(seed, 778);
  return random_dist(rng, 8, 3);
}

}  // namespace

SweepReport pa_sweep() {
  SweepReport rep;
  rep.name = "pa";
  double t0 = now_seconds();
  const double eps = 0.2, delta = 0.05;
  const std::uint64_t fixture_seed = 20260816;

  std::vector<std::pair<const char*, Dist>> fixtures;
  fixtures.emplace_back("hidden-pair", pa_fix_hidden_pair());
  fixtures.emplace_back("nibble-leak", pa_fix_nibble_leak());
  fixtures.emplace_back("skewed", pa_fix_skewed(fixture_seed));
  fixtures.emplace_back("tiny", pa_fix_tiny(fixture_seed));

  double worst_theorem = 1e300, worst_converse = 1e300;
  for (const auto& [name, p] : fixtures) {
    auto run = protocols::pa_theorem_run(p, eps, delta);
    fold(&worst_theorem, run.slack);
    ++rep.trials;

    int n = 0;
    while ((1 << n) < prob::nx(p)) ++n;
    for (int ell = 0; ell <= n; ++ell) {
      auto conv = protocols::pa_converse_check(p, eps, ell);
      if (conv.secure) fold(&worst_converse, conv.slack);
      ++rep.trials;
    }
  }

  // the seed family hits the pairwise collision ceiling exactly
  double worst_uni = 1e300;
  for (int n = 2; n <= 5; ++n)
    for (int ell = 1; ell <= n; ++ell) {
      protocols::ToeplitzHashFamily fam(n, ell);
      fold(&worst_uni, std::ldexp(1.0, -ell) - fam.max_collision_probability());
      ++rep.trials;
    }

  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "bound-driven key length is secure at eps", worst_theorem,
            0.0);
  push_line(&rep, "secure runs never beat the smoothed entropy",
            worst_converse, 1e-6);
  push_line(&rep, "exhaustive two-universality", worst_uni, 1e-15);
  return rep;
}

SweepReport hat_sweep(std::uint64_t seed, int trials) {
  if (trials <= 0) trials = 50;
  SweepReport rep;
  rep.name = "hat";
  rep.trials = trials;
  double t0 = now_seconds();

  const double eps = 0.1, delta = 0.05;
  const double wide = 2.0 * eps + delta;
  const double pen = std::log2((8.0 + delta * delta) / (delta * delta));

  double w_imax = 1e300, w_hmin = 1e300, w_idef = 1e300, w_hdef = 1e300;
  double w_imarg = 1e300, w_idist = 1e300, w_ibud = 1e300, w_icert = 1e300;
  double w_hmarg = 1e300, w_hdist = 1e300, w_hbud = 1e300, w_hcert = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 50000 + t);
    QState s = random_two_qubit(rng);

    auto i_full = quantum::imax_full(s, eps, Metric::Purified);
    auto i_wide = quantum::imax_partial(s, wide, Metric::Purified);
    auto i_eps = quantum::imax_partial(s, eps, Metric::Purified);
    fold(&w_imax, i_full.value + pen - i_wide.value);
    fold(&w_idef, i_eps.value - i_full.value);

    auto hi = quantum::imax_hat(s, i_full.optimizer, i_full.reference, delta);
    fold(&w_imarg, -hi.marginal_residual);
    fold(&w_idist, wide - hi.distance);
    fold(&w_ibud, hi.dmax_budget - hi.dmax_hat);
    fold(&w_icert, hi.dmax_hat - i_wide.value);

    auto h_full = quantum::hmin_full(s, eps, Metric::Purified);
    auto h_wide = quantum::hmin_partial(s, wide, Metric::Purified);
    auto h_eps = quantum::hmin_partial(s, eps, Metric::Purified);
    fold(&w_hmin, h_wide.value - (h_full.value - pen));
    fold(&w_hdef, h_full.value - h_eps.value);

    auto hh = quantum::hmin_hat(s, h_full.optimizer, delta);
    fold(&w_hmarg, -hh.marginal_residual);
    fold(&w_hdist, wide - hh.distance);
    fold(&w_hbud, hh.dmax_budget - hh.dmax_hat);
    fold(&w_hcert, h_wide.value + hh.dmax_hat);
  }
  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "widened max-information within the penalty", w_imax, 1e-5);
  push_line(&rep, "widened min-entropy within the penalty", w_hmin, 1e-5);
  push_line(&rep, "pinning only raises max-information", w_idef, 1e-5);
  push_line(&rep, "pinning only lowers min-entropy", w_hdef, 1e-5);
  push_line(&rep, "rotated state pins the A marginal", w_imarg, 1e-8);
  push_line(&rep, "rotated state stays in the widened ball", w_idist, 1e-6);
  push_line(&rep, "rotated state meets its divergence budget", w_ibud, 1e-7);
  push_line(&rep, "rotated state certifies the max-information bound",
            w_icert, 1e-5);
  push_line(&rep, "mirrored state pins the B marginal", w_hmarg, 1e-8);
  push_line(&rep, "mirrored state stays in the widened ball", w_hdist, 1e-6);
  push_line(&rep, "mirrored state meets its divergence budget", w_hbud, 1e-7);
  push_line(&rep, "mirrored state certifies the min-entropy bound", w_hcert,
            1e-5);
  return rep;
}

SweepReport solver_sweep(std::uint64_t seed, int trials) {
  if (trials <= 0) trials = 50;
  SweepReport rep;
  rep.name = "solver";
  rep.trials = trials;
  double t0 = now_seconds();

  double worst_phi = 1e300;
  for (int d : {2, 3}) {
    QState s = quantum::make_state(d, d, phi_state(d));
    double v = quantum::imax_unsmoothed(s).value;
    fold(&worst_phi, -std::abs(v - 2.0 * std::log2((double)d)));
  }

  double worst_imax = 1e300, worst_hmin = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 60000 + t);
    int nx = 2 + (t % 2);
    int ny = 2 + ((t / 2) % 2);
    Dist p = random_dist(rng, nx, ny);
    double eps = 0.05 + 0.25 * rng.uniform();
    QState s = quantum::from_classical(p);
    fold(&worst_imax,
         -std::abs(classical_smooth::imax_partial(p, eps).value -
                   quantum::imax_partial(s, eps, Metric::Trace).value));
    fold(&worst_hmin,
         -std::abs(classical_smooth::hmin_partial(p, eps).value -
                   quantum::hmin_partial(s, eps, Metric::Trace).value));
  }

  double worst_lp = 1e300;
  int lp_cases = trials > 20 ? 60 : trials;
  for (int t = 0; t < lp_cases; ++t) {
    Rng rng(seed, 61000 + t);
    int n = 2 + (t % 7);
    int m = 1 + (t % 5);
    lp::Problem p = random_lp(rng, n, m);
    auto sol = lp::solve(p);
    bool found = false;
    double oracle = vertex_oracle(p, &found);
    if (sol.status != lp::Status::Optimal || !found) {
      fold(&worst_lp, -1.0);  // generator promises a bounded optimum
      continue;
    }
    fold(&worst_lp, -std::abs(sol.value - oracle));
  }

  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "maximally entangled closed form, d = 2 and 3", worst_phi,
            1e-5);
  push_line(&rep, "diagonal cone solves match the LP: max-information",
            worst_imax, 1e-5);
  push_line(&rep, "diagonal cone solves match the LP: min-entropy",
            worst_hmin, 1e-5);
  push_line(&rep, "simplex agrees with vertex enumeration", worst_lp, 1e-8);
  return rep;
}

SweepReport convex_split_sweep() {
  SweepReport rep;
  rep.name = "convex-split";
  double t0 = now_seconds();
  const double delta = 0.25;

  struct Fixture {
    QState rho;
    QState rho_prime;
    Mat sigma;
  };
  std::vector<Fixture> fixtures;

  {  // independent registers: threshold sits exactly at 2 log2(2/delta)
    Rng rng(31, 0);
    Mat a = random_state(rng, 2);
    Mat b = random_state(rng, 2);
    QState s = quantum::make_state(2, 2, linalg::kron(a, b));
    fixtures.push_back({s, s, b});
  }
  auto bell_mix = [](double lam) {
    Mat m = linalg::add(linalg::scale(phi_state(2), lam),
                        linalg::scale(Mat::identity(4), (1.0 - lam) / 4.0));
    return quantum::make_state(2, 2, m);
  };
  {  // correlated pair smoothed onto itself
    QState s = bell_mix(0.05);
    fixtures.push_back({s, s, quantum::marginal_b(s)});
  }
  {  // distinct nearby pair: nonzero smoothing allowance
    QState s = bell_mix(0.08);
    QState sp = bell_mix(0.05);
    fixtures.push_back({s, sp, quantum::marginal_b(sp)});
  }

  double worst_at = 1e300, worst_t = 1e300, worst_p = 1e300;
  for (const auto& f : fixtures) {
    double thr = convex_split::split_threshold(f.rho_prime, f.sigma, delta);
    int r_exp = (int)std::ceil(std::max(0.0, thr - 1e-9));
    auto run = convex_split::convex_split_report(f.rho, f.rho_prime, f.sigma,
                                                 r_exp, delta);
    fold(&worst_at, (double)r_exp - run.threshold);
    fold(&worst_t, run.t_eps + delta - run.t_dist);
    fold(&worst_p, run.p_eps + delta - run.p_dist);
    ++rep.trials;
  }
  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "register count sits at the lemma threshold", worst_at,
            1e-9);
  push_line(&rep, "trace distance within eps + delta", worst_t, 1e-6);
  push_line(&rep, "purified distance within eps + delta", worst_p, 1e-6);
  return rep;
}

namespace {

// property sub-suites, one worst slack each; streams disjoint by block

double prop_radius(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 100000 + t);
    QState s = random_two_qubit(rng);
    double e1 = 0.02 + 0.3 * rng.uniform();
    double e2 = e1 + 0.02 + 0.25 * rng.uniform();
    Metric met = rng.uniform() < 0.5 ? Metric::Trace : Metric::Purified;
    if (t % 2 == 0)
      fold(&worst, quantum::imax_partial(s, e1, met).value -
                       quantum::imax_partial(s, e2, met).value);
    else
      fold(&worst, quantum::hmin_partial(s, e2, met).value -
                       quantum::hmin_partial(s, e1, met).value);
  }
  return worst;
}

double prop_triangle(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 110000 + t);
    QState rho = random_two_qubit(rng);
    double lam = 0.02 + 0.08 * rng.uniform();
    Mat other = random_state(rng, 4);
    QState near = quantum::make_state(
        2, 2,
        linalg::add(linalg::scale(rho.rho, 1.0 - lam),
                    linalg::scale(other, lam)));
    Metric met = rng.uniform() < 0.5 ? Metric::Trace : Metric::Purified;
    double eta = quantum::distance(met, rho.rho, near.rho) + 1e-12;
    double eps = 0.05 + 0.2 * rng.uniform();
    if (eps + eta > 0.9) eps = 0.9 - eta;
    if (t % 2 == 0)
      fold(&worst, quantum::imax_partial(near, eps, met).value -
                       quantum::imax_partial(rho, eps + eta, met).value);
    else
      fold(&worst, quantum::hmin_partial(rho, eps + eta, met).value -
                       quantum::hmin_partial(near, eps, met).value);
  }
  return worst;
}

double prop_processing(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 120000 + t);
    QState s = random_two_qubit(rng);
    double eps = 0.05 + 0.3 * rng.uniform();
    Metric met = rng.uniform() < 0.5 ? Metric::Trace : Metric::Purified;
    auto kb = random_kraus(rng, 2, 1 + (int)rng.below(4));
    if (t % 2 == 0) {
      auto ka = random_kraus(rng, 2, 1 + (int)rng.below(4));
      QState out = quantum::make_state(2, 2, apply_local_pair(s.rho, ka, kb));
      fold(&worst, quantum::imax_partial(s, eps, met).value -
                       quantum::imax_partial(out, eps, met).value);
    } else {
      auto ka = random_mixed_unitary(rng, 2, 1 + (int)rng.below(4));
      QState out = quantum::make_state(2, 2, apply_local_pair(s.rho, ka, kb));
      fold(&worst, quantum::hmin_partial(out, eps, met).value -
                       quantum::hmin_partial(s, eps, met).value);
    }
  }
  return worst;
}

double prop_isometry(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 130000 + t);
    QState s = random_two_qubit(rng);
    double eps = 0.05 + 0.3 * rng.uniform();
    Metric met = rng.uniform() < 0.5 ? Metric::Trace : Metric::Purified;
    Mat u = random_unitary(rng, 3);
    Mat v(3, 2);  // isometric embedding of a qubit
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) v.at(i, j) = u.at(i, j);
    bool embed_a = (t % 2 == 0);
    Mat op = embed_a ? linalg::kron(v, Mat::identity(2))
                     : linalg::kron(Mat::identity(2), v);
    Mat big = linalg::mul(op, linalg::mul(s.rho, linalg::dagger(op)));
    QState se = embed_a ? quantum::make_state(3, 2, big)
                        : quantum::make_state(2, 3, big);
    bool use_imax = ((t >> 1) % 2 == 0);
    double base = use_imax ? quantum::imax_partial(s, eps, met).value
                           : quantum::hmin_partial(s, eps, met).value;
    double lift = use_imax ? quantum::imax_partial(se, eps, met).value
                           : quantum::hmin_partial(se, eps, met).value;
    fold(&worst, -std::abs(lift - base));
  }
  return worst;
}

double prop_function(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 140000 + t);
    int nx = 2 + (t % 3);
    std::vector<Mat> blocks;
    double tot = 0.0;
    for (int x = 0; x < nx; ++x) {
      Mat b = linalg::scale(random_state(rng, 2), rng.uniform_pos());
      tot += linalg::trace(b).real();
      blocks.push_back(b);
    }
    for (auto& b : blocks) b = linalg::scale(b, 1.0 / tot);
    QState s = quantum::cq_state(blocks);
    int nz = 1 + (int)rng.below(nx);
    std::vector<int> f(nx);
    for (auto& v : f) v = (int)rng.below(nz);
    QState z = quantum::cq_apply_function(s, f, nz);
    double eps = 0.05 + 0.3 * rng.uniform();
    fold(&worst, quantum::hmin_partial(s, eps, Metric::Purified).value -
                     quantum::hmin_partial(z, eps, Metric::Purified).value);
  }
  return worst;
}

double prop_dimension(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 150000 + t);
    Mat psi = random_pure(rng, 8);  // A, B, R qubits
    double eps = 0.05 + 0.3 * rng.uniform();
    double both = quantum::hmin_partial(quantum::make_state(4, 2, psi), eps,
                                        Metric::Purified)
                      .value;
    Mat ar = trace_middle(psi, 2, 2, 2);
    double alone = quantum::hmin_partial(quantum::make_state(2, 2, ar), eps,
                                         Metric::Purified)
                       .value;
    fold(&worst, alone + 1.0 - both);
  }
  return worst;
}

double prop_coherent(std::uint64_t seed, int trials) {
  double worst = 1e300;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 160000 + t);
    int db = (t % 12 == 0) ? 2 : 1;  // occasional full-size fixture
    int dab = 2 * db;
    Mat v0 = random_mat(rng, dab, 1), v1 = random_mat(rng, dab, 1);
    auto normalize = [](Mat* v) {
      double s = 0.0;
      for (const auto& z : v->a) s += std::norm(z);
      *v = linalg::scale(*v, 1.0 / std::sqrt(s));
    };
    normalize(&v0);
    normalize(&v1);
    double p0 = 0.2 + 0.6 * rng.uniform();
    double eps = 0.05 + 0.3 * rng.uniform();

    // |psi> = sum_x sqrt(p_x) |phi_x>_{AB} |x>_X |x>_{X'}
    Mat psi(2 * db * 4, 1);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < db; ++b)
        for (int x = 0; x < 2; ++x) {
          cplx amp = (x == 0 ? std::sqrt(p0) * v0.at(a * db + b, 0)
                             : std::sqrt(1.0 - p0) * v1.at(a * db + b, 0));
          psi.at(a * (db * 4) + (b * 4 + x * 2 + x), 0) = amp;
        }
    Mat full = linalg::mul(psi, linalg::dagger(psi));

    // tracing the copy register leaves a state classical on X'
    Mat red = Mat::zero(2 * db * 2, 2 * db * 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < db; ++b)
        for (int a2 = 0; a2 < 2; ++a2)
          for (int b2 = 0; b2 < db; ++b2)
            for (int x = 0; x < 2; ++x) {
              cplx amp = (x == 0 ? std::sqrt(p0) * v0.at(a * db + b, 0)
                                 : std::sqrt(1.0 - p0) * v1.at(a * db + b, 0));
              cplx amp2 =
                  (x == 0 ? std::sqrt(p0) * v0.at(a2 * db + b2, 0)
                          : std::sqrt(1.0 - p0) * v1.at(a2 * db + b2, 0));
              red.at(a * (db * 2) + (b * 2 + x),
                     a2 * (db * 2) + (b2 * 2 + x)) += amp * std::conj(amp2);
            }

    double v_full = quantum::imax_partial(quantum::make_state(2, db * 4, full),
                                          eps, Metric::Purified)
                        .value;
    double v_red = quantum::imax_partial(quantum::make_state(2, db * 2, red),
                                         eps, Metric::Purified)
                       .value;
    fold(&worst, v_red + 1.0 - v_full);
  }
  return worst;
}

double prop_projective(std::uint64_t seed, int trials) {
  double worst = 1e300;
  std::vector<Mat> projs(2, Mat::zero(2, 2));
  projs[0].at(0, 0) = 1.0;
  projs[1].at(1, 1) = 1.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, 170000 + t);
    QState s = random_two_qubit(rng);
    Mat sigma = random_state(rng, 2);
    auto m = quantum::projective_measure(s, projs);
    Mat omega_x = Mat::zero(2, 2);
    omega_x.at(0, 0) = m.px[0];
    omega_x.at(1, 1) = m.px[1];
    double lhs = quantum::d_max(s.rho, linalg::kron(Mat::identity(2), sigma));
    double rhs = quantum::d_max(
        m.omega.rho,
        linalg::kron(Mat::identity(2), linalg::kron(sigma, omega_x)));
    fold(&worst, rhs - lhs);
  }
  return worst;
}

}  // namespace

SweepReport property_sweep(std::uint64_t seed, int trials) {
  if (trials <= 0) trials = 500;
  SweepReport rep;
  rep.name = "properties";
  rep.trials = trials;
  double t0 = now_seconds();

  push_line(&rep, "wider smoothing never hurts", prop_radius(seed, trials),
            1e-5);
  push_line(&rep, "nearby states shift values by at most the gap",
            prop_triangle(seed, trials), 1e-5);
  push_line(&rep, "local processing respects the data ordering",
            prop_processing(seed, trials), 1e-6);
  push_line(&rep, "isometric embeddings leave values fixed",
            prop_isometry(seed, trials), 1e-5);
  push_line(&rep, "functions of the register only lower min-entropy",
            prop_function(seed, trials), 1e-5);
  push_line(&rep, "tracing a register costs at most its size",
            prop_dimension(seed, trials), 1e-5);
  push_line(&rep, "dropping a coherent copy costs at most its size",
            prop_coherent(seed, trials), 1e-5);
  push_line(&rep, "projective readout only grows the divergence",
            prop_projective(seed, trials), 1e-7);
  rep.elapsed = now_seconds() - t0;
  return rep;
}

SweepReport trend_smoke(int max_copies) {
  if (max_copies <= 0) max_copies = 3;
  SweepReport rep;
  rep.name = "smoke";
  rep.trials = max_copies;
  double t0 = now_seconds();

  QState base = quantum::make_state(2, 2, phi_state(2));
  double target_i = quantum::mutual_information(base);
  double target_h = quantum::conditional_entropy(base);

  std::vector<double> per_i, per_h;
  QState power = base;
  for (int n = 1; n <= max_copies; ++n) {
    if (n > 1) power = quantum::tensor(power, base);
    per_i.push_back(quantum::imax_partial(power, 0.1, Metric::Purified).value /
                    n);
    per_h.push_back(quantum::hmin_partial(power, 0.1, Metric::Purified).value /
                    n);
  }
  double worst_i = 1e300, worst_h = 1e300;
  for (int n = 1; n < max_copies; ++n) {
    fold(&worst_i, std::abs(per_i[n - 1] - target_i) -
                       std::abs(per_i[n] - target_i));
    fold(&worst_h, std::abs(per_h[n - 1] - target_h) -
                       std::abs(per_h[n] - target_h));
  }
  rep.elapsed = now_seconds() - t0;
  push_line(&rep, "per-copy max-information approaches mutual information",
            worst_i, 0.0);
  push_line(&rep, "per-copy min-entropy approaches conditional entropy",
            worst_h, 0.0);
  return rep;
}

std::vector<std::string> sweep_names() {
  return {"sandwich", "second-order", "split",        "pa",        "hat",
          "solver",   "convex-split", "properties",   "smoke"};
}

SweepReport run_sweep(const std::string& name, std::uint64_t seed,
                      int trials) {
  if (name == "sandwich") return sandwich_sweep(seed, trials);
  if (name == "second-order") return second_order_sweep();
  if (name == "split") return split_sweep(seed, trials);
  if (name == "pa") return pa_sweep();
  if (name == "hat") return hat_sweep(seed, trials);
  if (name == "solver") return solver_sweep(seed, trials);
  if (name == "convex-split") return convex_split_sweep();
  if (name == "properties") return property_sweep(seed, trials);
  if (name == "smoke") return trend_smoke(trials);
  throw UsageError("run_sweep: unknown sweep '" + name + "'");
}

// Value-based only: elapsed is deliberately omitted so replays with the
// same seed serialize to identical bytes.
std::string format_report(const SweepReport& r) {
  char head[128];
  std::snprintf(head, sizeof head, "[%s] trials=%d %s\n", r.name.c_str(),
                r.trials, r.pass ? "PASS" : "FAIL");
  std::string out = head;
  for (const auto& l : r.lines) {
    char line[192];
    std::snprintf(line, sizeof line, "  %-52s slack %+12.4e  tol %7.0e  %s\n",
                  l.label.c_str(), l.slack, l.tol, l.pass ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace oneshot::sweeps
