#include "oneshot/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace oneshot::spectrum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool ratios_tie(double a, double b) {
  return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a));
}

// Atoms: (log-ratio, mass), finite part unsorted on entry. Returns the
// smallest log-ratio whose strictly-above mass is strictly below eps.
double scan_atoms(std::vector<std::pair<double, double>> atoms,
                  double mass_inf, double eps) {
  if (mass_inf >= eps) return kInf;
  std::sort(atoms.begin(), atoms.end());
  // merge ties
  std::vector<std::pair<double, double>> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && ratios_tie(merged.back().first, a.first))
      merged.back().second += a.second;
    else
      merged.push_back(a);
  }
  // suffix masses; long double keeps tails of many small atoms honest
  size_t m = merged.size();
  std::vector<long double> tail(m + 1, 0.0L);
  tail[m] = (long double)mass_inf;
  for (size_t i = m; i-- > 0;) tail[i] = tail[i + 1] + (long double)merged[i].second;
  for (size_t k = 0; k < m; ++k) {
    if ((double)tail[k + 1] < eps) return merged[k].first;
  }
  // all mass sits at infinite ratio yet is below eps: cannot happen for a
  // normalized first argument with eps <= 1
  throw NumericalError("scan_atoms: no admissible threshold");
}

void check_eps(double eps) {
  if (!(eps > 0.0) || eps > 1.0)
    throw UsageError("spectrum: eps must lie in (0, 1]");
}

void require_normalized(const Dist& p, const char* who) {
  if (!prob::is_normalized(p))
    throw UsageError(std::string(who) + ": first argument must be normalized");
}

}  // namespace

double d_max_classical(const Dist& p, const Dist& q) {
  if (p.shape != q.shape) throw UsageError("d_max: shape mismatch");
  double best = 0.0;
  bool any = false;
  for (size_t i = 0; i < p.w.size(); ++i) {
    if (p.w[i] <= 0.0) continue;
    if (q.w[i] <= 0.0) return kInf;
    any = true;
    best = std::max(best, p.w[i] / q.w[i]);
  }
  if (!any) return -kInf;
  return std::log2(best);
}

double d_s(const Dist& p, const Dist& q, double eps) {
  if (p.shape != q.shape) throw UsageError("d_s: shape mismatch");
  check_eps(eps);
  require_normalized(p, "d_s");
  std::vector<std::pair<double, double>> atoms;
  double mass_inf = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    if (p.w[i] <= 0.0) continue;
    if (q.w[i] <= 0.0)
      mass_inf += p.w[i];
    else
      atoms.push_back({std::log2(p.w[i]) - std::log2(q.w[i]), p.w[i]});
  }
  return scan_atoms(std::move(atoms), mass_inf, eps);
}

double i_s(const Dist& pxy, double eps) {
  int X = prob::nx(pxy), Y = prob::ny(pxy);
  auto px = prob::marginal_x(pxy);
  auto py = prob::marginal_y(pxy);
  std::vector<double> q((size_t)X * Y);
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) q[(size_t)x * Y + y] = px[x] * py[y];
  Dist qd{pxy.shape, std::move(q)};
  return d_s(pxy, qd, eps);
}

double h_s(const Dist& pxy, double eps) {
  int X = prob::nx(pxy), Y = prob::ny(pxy);
  auto py = prob::marginal_y(pxy);
  std::vector<double> q((size_t)X * Y);
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) q[(size_t)x * Y + y] = py[y];
  Dist qd{pxy.shape, std::move(q)};
  return -d_s(pxy, qd, eps);
}

KlVar kl_and_variance(const Dist& p, const Dist& q) {
  if (p.shape != q.shape) throw UsageError("kl_and_variance: shape mismatch");
  require_normalized(p, "kl_and_variance");
  double kl = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    if (p.w[i] <= 0.0) continue;
    if (q.w[i] <= 0.0) return {kInf, kInf};
    kl += p.w[i] * (std::log2(p.w[i]) - std::log2(q.w[i]));
  }
  double var = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    if (p.w[i] <= 0.0) continue;
    double r = std::log2(p.w[i]) - std::log2(q.w[i]);
    var += p.w[i] * (r - kl) * (r - kl);
  }
  return {kl, var};
}

double gaussian_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

double gaussian_cdf_inv(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw UsageError("gaussian_cdf_inv: eps must lie in (0,1)");

  // rational initial guess (Acklam), then Newton polish
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (eps < plow) {
    double u = std::sqrt(-2.0 * std::log(eps));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (eps <= phigh) {
    double u = eps - 0.5, r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double u = std::sqrt(-2.0 * std::log(1.0 - eps));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  for (int it = 0; it < 3; ++it) {
    double err = gaussian_cdf(x) - eps;
    double dens = std::exp(-0.5 * x * x) / 2.5066282746310005024;
    if (dens <= 0.0) break;
    double step = err / dens;
    x -= step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double d_s_iid_exact(const Dist& p, const Dist& q, int n, double eps) {
  if (p.shape != q.shape) throw UsageError("d_s_iid_exact: shape mismatch");
  check_eps(eps);
  require_normalized(p, "d_s_iid_exact");
  if (n < 1) throw UsageError("d_s_iid_exact: n must be positive");

  // per-cell log-ratios, merged into super-cells of tied ratio
  std::vector<std::pair<double, double>> cells;  // (ratio, prob)
  double p_inf = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    if (p.w[i] <= 0.0) continue;
    if (q.w[i] <= 0.0)
      p_inf += p.w[i];
    else
      cells.push_back({std::log2(p.w[i]) - std::log2(q.w[i]), p.w[i]});
  }
  std::sort(cells.begin(), cells.end());
  std::vector<double> ratio, pr;
  for (const auto& cp : cells) {
    if (!ratio.empty() && ratios_tie(ratio.back(), cp.first))
      pr.back() += cp.second;
    else {
      ratio.push_back(cp.first);
      pr.push_back(cp.second);
    }
  }
  int m = (int)ratio.size();

  // any sample hitting an unsupported cell sends the whole word to +inf
  double p_fin = 0.0;
  for (double v : pr) p_fin += v;
  double mass_inf =
      p_inf > 0.0 ? 1.0 - std::pow(p_fin, n) : 0.0;

  if (m == 0) return scan_atoms({}, 1.0, eps);

  // cap on the composition count C(n+m-1, m-1)
  {
    long double classes = 1.0L;
    for (int i = 1; i <= m - 1; ++i)
      classes = classes * (long double)(n + i) / (long double)i;
    if (classes > (long double)max_cells())
      throw ResourceError("d_s_iid_exact: type class cap exceeded");
  }

  std::vector<double> lg(n + 1);
  for (int k = 0; k <= n; ++k) lg[k] = std::lgamma((double)k + 1.0);
  std::vector<double> lnp(m);
  for (int i = 0; i < m; ++i) lnp[i] = std::log(pr[i]);

  std::vector<std::pair<double, double>> atoms;
  std::vector<int> counts(m, 0);
  // enumerate compositions of n over m super-cells
  auto rec = [&](auto&& self, int cell_ix, int rest, double logmass_partial,
                 double ratio_partial) -> void {
    if (cell_ix == m - 1) {
      double lmass = logmass_partial - lg[rest] + rest * lnp[cell_ix];
      double rat = ratio_partial + (double)rest * ratio[cell_ix];
      atoms.push_back({rat, std::exp(lmass)});
      return;
    }
    for (int k = 0; k <= rest; ++k) {
      self(self, cell_ix + 1, rest - k,
           logmass_partial - lg[k] + k * lnp[cell_ix],
           ratio_partial + (double)k * ratio[cell_ix]);
    }
  };
  double lg_n = lg[n];
  rec(rec, 0, n, lg_n, 0.0);

  return scan_atoms(std::move(atoms), mass_inf, eps);
}

SecondOrderRow second_order_row(const Dist& p, const Dist& q, int n,
                                double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw UsageError("second_order_row: eps must lie in (0,1)");
  SecondOrderRow row;
  row.n = n;
  row.exact_rate = d_s_iid_exact(p, q, n, eps) / (double)n;
  KlVar kv = kl_and_variance(p, q);
  row.predicted_rate =
      kv.kl + std::sqrt(kv.variance / (double)n) * gaussian_cdf_inv(eps);
  row.residual = std::abs(row.exact_rate - row.predicted_rate);
  double denom = n >= 2 ? std::log2((double)n) : 1.0;
  row.normalized = row.residual * (double)n / denom;
  return row;
}

}  // namespace oneshot::spectrum
