#include "oneshot/classical_smooth.hpp"

#include <algorithm>
#include <cmath>

#include "oneshot/spectrum.hpp"

namespace oneshot::classical_smooth {

namespace {

constexpr double kCheckTol = 1e-8;

void validate_input(const Dist& p, double eps, const char* who) {
  if (p.shape.size() != 2)
    throw UsageError(std::string(who) + ": expected a two-factor table");
  if (!prob::is_normalized(p))
    throw UsageError(std::string(who) + ": table must be normalized");
  // ball validity: distance to the zero table is 1, so eps must stay below
  if (!(eps >= 0.0) || eps >= 1.0)
    throw UsageError(std::string(who) +
                     ": eps outside [0,1) violates the ball validity bound");
}

double clamp01(double v) { return v < 0.0 ? 0.0 : v; }

Dist table_from(const Dist& like, std::vector<double> w) {
  return Dist{like.shape, std::move(w)};
}

void verify_ball(const Dist& p, const Dist& pp, double eps, bool sub_ok,
                 const char* who) {
  for (double v : pp.w)
    if (v < -1e-9)
      throw NumericalError(std::string(who) + ": optimizer went negative");
  double t = prob::gen_trace_distance(pp, p);
  if (t > eps + kCheckTol)
    throw NumericalError(std::string(who) + ": optimizer left the ball");
  double tot = pp.total();
  if (sub_ok) {
    if (tot > 1.0 + kCheckTol)
      throw NumericalError(std::string(who) + ": optimizer not sub-normalized");
  } else if (std::abs(tot - 1.0) > kCheckTol) {
    throw NumericalError(std::string(who) + ": optimizer not normalized");
  }
}

}  // namespace

Dist swap_xy(const Dist& p) {
  int X = prob::nx(p), Y = prob::ny(p);
  std::vector<double> w((size_t)X * Y);
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) w[(size_t)y * X + x] = prob::cell(p, x, y);
  return Dist{{Y, X}, std::move(w)};
}

// Shared builder for the max-information LPs. When qy is empty the
// reference marginal is a free nonnegative vector R; otherwise a single
// scale t multiplies qy. fix_marginal selects between the pinned-marginal
// and ball-only variants.
static MeasureResult imax_lp(const Dist& p, const std::vector<double>* qy,
                             bool fix_marginal, double eps, const char* who) {
  validate_input(p, eps, who);
  int X = prob::nx(p), Y = prob::ny(p);
  auto px = prob::marginal_x(p);

  int cells = X * Y;
  int n_ref = qy ? 1 : Y;
  lp::Problem lpp;
  lpp.num_vars = cells + n_ref + cells;  // P', R|t, u
  lpp.c.assign(lpp.num_vars, 0.0);
  for (int k = 0; k < n_ref; ++k) lpp.c[cells + k] = 1.0;
  auto vp = [&](int x, int y) { return x * Y + y; };
  auto vref = [&](int y) { return cells + (qy ? 0 : y); };
  auto vu = [&](int x, int y) { return cells + n_ref + x * Y + y; };

  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) {
      double coef = px[x] * (qy ? (*qy)[y] : 1.0);
      lpp.rows.push_back(
          {{{vp(x, y), 1.0}, {vref(y), -coef}}, lp::Sense::LE, 0.0});
    }
  if (fix_marginal) {
    for (int x = 0; x < X; ++x) {
      lp::Row r;
      for (int y = 0; y < Y; ++y) r.terms.push_back({vp(x, y), 1.0});
      r.sense = lp::Sense::EQ;
      r.rhs = px[x];
      lpp.rows.push_back(r);
    }
  } else {
    lp::Row r;
    for (int i = 0; i < cells; ++i) r.terms.push_back({i, 1.0});
    r.sense = lp::Sense::EQ;
    r.rhs = 1.0;
    lpp.rows.push_back(r);
  }
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) {
      double pv = prob::cell(p, x, y);
      lpp.rows.push_back(
          {{{vp(x, y), 1.0}, {vu(x, y), -1.0}}, lp::Sense::LE, pv});
      lpp.rows.push_back(
          {{{vp(x, y), -1.0}, {vu(x, y), -1.0}}, lp::Sense::LE, -pv});
    }
  {
    lp::Row r;
    for (int i = 0; i < cells; ++i) r.terms.push_back({vu(0, 0) + i, 1.0});
    r.sense = lp::Sense::LE;
    r.rhs = 2.0 * eps;
    lpp.rows.push_back(r);
  }

  lp::Solution s = lp::solve(lpp);
  if (s.status != lp::Status::Optimal)
    throw NumericalError(std::string(who) + ": LP did not reach an optimum");

  MeasureResult out;
  out.lp_optimum = s.value;
  out.value = log2_clamped(s.value);
  std::vector<double> w(cells);
  for (int i = 0; i < cells; ++i) w[i] = clamp01(s.x[i]);
  out.optimizer = table_from(p, std::move(w));
  out.q.assign(Y, 0.0);
  if (qy) {
    for (int y = 0; y < Y; ++y) out.q[y] = (*qy)[y];
  } else {
    double tot = 0.0;
    for (int y = 0; y < Y; ++y) tot += s.x[cells + y];
    for (int y = 0; y < Y; ++y)
      out.q[y] = tot > 0.0 ? s.x[cells + y] / tot : 1.0 / Y;
  }
  out.achieved_distance = prob::gen_trace_distance(out.optimizer, p);

  verify_ball(p, out.optimizer, eps, false, who);
  if (fix_marginal) {
    auto m = prob::marginal_x(out.optimizer);
    for (int x = 0; x < X; ++x)
      if (std::abs(m[x] - px[x]) > kCheckTol)
        throw NumericalError(std::string(who) + ": optimizer marginal drifted");
  }
  // dominance against the reported reference at the reported scale
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      if (prob::cell(out.optimizer, x, y) >
          s.value * px[x] * out.q[y] + kCheckTol)
        throw NumericalError(std::string(who) + ": optimizer dominance failed");
  return out;
}

MeasureResult imax_partial(const Dist& p, double eps) {
  return imax_lp(p, nullptr, true, eps, "imax_partial");
}

MeasureResult imax_partial_given_q(const Dist& p,
                                   const std::vector<double>& qy, double eps) {
  if ((int)qy.size() != prob::ny(p))
    throw UsageError("imax_partial_given_q: reference length mismatch");
  double tot = 0.0;
  for (double v : qy) {
    if (v < 0.0) throw UsageError("imax_partial_given_q: negative reference");
    tot += v;
  }
  if (std::abs(tot - 1.0) > 1e-9)
    throw UsageError("imax_partial_given_q: reference must be normalized");
  return imax_lp(p, &qy, true, eps, "imax_partial_given_q");
}

MeasureResult imax_full(const Dist& p, double eps) {
  return imax_lp(p, nullptr, false, eps, "imax_full");
}

static MeasureResult hmin_lp(const Dist& p, bool dominate_marginal, double eps,
                             const char* who) {
  validate_input(p, eps, who);
  int X = prob::nx(p), Y = prob::ny(p);
  auto py = prob::marginal_y(p);

  int cells = X * Y;
  lp::Problem lpp;
  // P' | t | u | s (trace shortfall)
  lpp.num_vars = cells + 1 + cells + 1;
  lpp.c.assign(lpp.num_vars, 0.0);
  int vt = cells;
  int vs = cells + 1 + cells;
  lpp.c[vt] = 1.0;
  auto vp = [&](int x, int y) { return x * Y + y; };
  auto vu = [&](int x, int y) { return cells + 1 + x * Y + y; };

  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      lpp.rows.push_back(
          {{{vp(x, y), 1.0}, {vt, -py[y]}}, lp::Sense::LE, 0.0});
  if (dominate_marginal) {
    for (int y = 0; y < Y; ++y) {
      lp::Row r;
      for (int x = 0; x < X; ++x) r.terms.push_back({vp(x, y), 1.0});
      r.sense = lp::Sense::LE;
      r.rhs = py[y];
      lpp.rows.push_back(r);
    }
  }
  {
    lp::Row r;  // total weight + shortfall = 1
    for (int i = 0; i < cells; ++i) r.terms.push_back({i, 1.0});
    r.terms.push_back({vs, 1.0});
    r.sense = lp::Sense::EQ;
    r.rhs = 1.0;
    lpp.rows.push_back(r);
  }
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) {
      double pv = prob::cell(p, x, y);
      lpp.rows.push_back(
          {{{vp(x, y), 1.0}, {vu(x, y), -1.0}}, lp::Sense::LE, pv});
      lpp.rows.push_back(
          {{{vp(x, y), -1.0}, {vu(x, y), -1.0}}, lp::Sense::LE, -pv});
    }
  {
    lp::Row r;  // l1 part plus trace shortfall inside the ball
    for (int i = 0; i < cells; ++i) r.terms.push_back({vu(0, 0) + i, 1.0});
    r.terms.push_back({vs, 1.0});
    r.sense = lp::Sense::LE;
    r.rhs = 2.0 * eps;
    lpp.rows.push_back(r);
  }

  lp::Solution s = lp::solve(lpp);
  if (s.status != lp::Status::Optimal)
    throw NumericalError(std::string(who) + ": LP did not reach an optimum");

  MeasureResult out;
  out.lp_optimum = s.value;
  out.value = -log2_clamped(s.value);
  std::vector<double> w(cells);
  for (int i = 0; i < cells; ++i) w[i] = clamp01(s.x[i]);
  out.optimizer = table_from(p, std::move(w));
  out.achieved_distance = prob::gen_trace_distance(out.optimizer, p);

  verify_ball(p, out.optimizer, eps, true, who);
  double t = s.value;
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      if (prob::cell(out.optimizer, x, y) > t * py[y] + kCheckTol)
        throw NumericalError(std::string(who) + ": optimizer dominance failed");
  if (dominate_marginal) {
    auto m = prob::marginal_y(out.optimizer);
    for (int y = 0; y < Y; ++y)
      if (m[y] > py[y] + kCheckTol)
        throw NumericalError(std::string(who) +
                             ": optimizer marginal dominance failed");
  }
  return out;
}

MeasureResult hmin_partial(const Dist& p, double eps) {
  return hmin_lp(p, true, eps, "hmin_partial");
}

MeasureResult hmin_full(const Dist& p, double eps) {
  return hmin_lp(p, false, eps, "hmin_full");
}

double imax_unsmoothed(const Dist& p) {
  validate_input(p, 0.0, "imax_unsmoothed");
  int X = prob::nx(p), Y = prob::ny(p);
  auto px = prob::marginal_x(p);
  double total = 0.0;
  for (int y = 0; y < Y; ++y) {
    double best = 0.0;
    for (int x = 0; x < X; ++x)
      if (px[x] > 0.0) best = std::max(best, prob::cell(p, x, y) / px[x]);
    total += best;
  }
  return log2_clamped(total);
}

double hmin_unsmoothed(const Dist& p) {
  validate_input(p, 0.0, "hmin_unsmoothed");
  int X = prob::nx(p), Y = prob::ny(p);
  auto py = prob::marginal_y(p);
  double best = 0.0;
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      if (py[y] > 0.0) best = std::max(best, prob::cell(p, x, y) / py[y]);
  return -log2_clamped(best);
}

SmootherOutput thm1_smoother(const Dist& p, const std::vector<double>& qy,
                             double eps) {
  validate_input(p, eps, "thm1_smoother");
  if (!(eps > 0.0)) throw UsageError("thm1_smoother: eps must be positive");
  int X = prob::nx(p), Y = prob::ny(p);
  if ((int)qy.size() != Y)
    throw UsageError("thm1_smoother: reference length mismatch");
  auto px = prob::marginal_x(p);

  std::vector<double> qtab((size_t)X * Y);
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) qtab[(size_t)x * Y + y] = px[x] * qy[y];
  Dist qd{p.shape, qtab};

  SmootherOutput out;
  out.c = spectrum::d_s(p, qd, eps);
  if (!std::isfinite(out.c))
    throw UsageError("thm1_smoother: reference does not dominate the table");

  double lim = out.c + 1e-12 * (1.0 + std::abs(out.c));
  std::vector<double> w((size_t)X * Y, 0.0);
  double eps_used = 0.0;
  for (int x = 0; x < X; ++x) {
    if (px[x] <= 0.0) continue;
    double clipped = 0.0;
    for (int y = 0; y < Y; ++y) {
      double pv = prob::cell(p, x, y);
      if (pv <= 0.0) continue;
      bool good = qy[y] > 0.0 &&
                  (std::log2(pv) - std::log2(px[x] * qy[y])) <= lim;
      if (good)
        w[(size_t)x * Y + y] = pv;
      else
        clipped += pv / px[x];
    }
    if (clipped > 0.0)
      for (int y = 0; y < Y; ++y)
        w[(size_t)x * Y + y] += px[x] * clipped * qy[y];
    eps_used += px[x] * clipped;
  }
  out.p_prime = table_from(p, std::move(w));
  out.eps_used = eps_used;
  out.dmax_bound = std::log2(std::exp2(out.c) + 1.0);
  out.dmax_actual = spectrum::d_max_classical(out.p_prime, qd);
  return out;
}

double SandwichReport::min_slack() const {
  return std::min(std::min(slack[0], slack[1]), std::min(slack[2], slack[3]));
}

SandwichReport check_thm1_sandwich(const Dist& p, double eps, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw UsageError("check_thm1_sandwich: delta must lie in (0,1)");
  double relaxed_i = eps / (1.0 - delta) + delta;
  double relaxed_h = eps / (1.0 - delta);
  if (relaxed_i > 1.0)
    throw UsageError("check_thm1_sandwich: eps/(1-delta)+delta exceeds 1");

  SandwichReport r;
  r.eps = eps;
  r.delta = delta;
  r.imax = imax_partial(p, eps).value;
  r.hmin = hmin_partial(p, eps).value;
  r.is_at_eps = spectrum::i_s(p, eps);
  r.is_relaxed = spectrum::i_s(p, relaxed_i);
  r.hs_at_eps = spectrum::h_s(p, eps);
  r.hs_relaxed = spectrum::h_s(p, relaxed_h);

  double log_inv_delta = std::log2(1.0 / delta);
  r.slack[0] = r.imax - (r.is_relaxed - 2.0 * log_inv_delta);
  r.slack[1] = (r.is_at_eps + 1.0) - r.imax;
  r.slack[2] = (r.hs_relaxed + log_inv_delta) - r.hmin;
  r.slack[3] = r.hmin - (r.hs_at_eps - 1.0);
  return r;
}

double fixed_reference_gap_slack(const Dist& p, const std::vector<double>& qy,
                                 double eps, double delta) {
  if (!(delta > 0.0) || eps + delta > 1.0)
    throw UsageError("fixed_reference_gap_slack: need 0 < delta, eps+delta <= 1");
  int X = prob::nx(p), Y = prob::ny(p);
  auto px = prob::marginal_x(p);
  std::vector<double> qtab((size_t)X * Y);
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) qtab[(size_t)x * Y + y] = px[x] * qy[y];
  Dist qd{p.shape, qtab};
  double lhs = spectrum::d_s(p, qd, eps);
  double rhs = spectrum::i_s(p, eps + delta) - std::log2(1.0 / delta);
  return lhs - rhs;
}

double hmin_via_imax_slack(const Dist& p, double eps) {
  int X = prob::nx(p);
  std::vector<double> unif(X, 1.0 / X);
  double hm = hmin_partial(p, eps).value;
  double im = imax_partial_given_q(swap_xy(p), unif, eps).value;
  return hm - (std::log2((double)X) - im);
}

}  // namespace oneshot::classical_smooth
