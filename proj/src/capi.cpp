// C surface over the library. Handles own their parsed objects; result
// strings are malloc'd here and released by oneshot_string_free.

#include "oneshot.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "json.hpp"

#include "oneshot/classical_smooth.hpp"
#include "oneshot/common.hpp"
#include "oneshot/json_io.hpp"
#include "oneshot/linalg.hpp"
#include "oneshot/prob.hpp"
#include "oneshot/protocols.hpp"
#include "oneshot/quantum.hpp"
#include "oneshot/spectrum.hpp"
#include "oneshot/sweeps.hpp"

using nlohmann::json;

struct oneshot_dist {
  oneshot::prob::Dist d;
};
struct oneshot_state {
  oneshot::quantum::QState s;
};

namespace {

thread_local std::string t_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Exceptions map onto status codes: usage and cap problems are INVALID,
// solver trouble (and anything unforeseen) is NUMERICAL.
template <typename F>
int guarded(F&& body) {
  t_error.clear();
  try {
    return body();
  } catch (const oneshot::UsageError& e) {
    t_error = e.what();
    return ONESHOT_INVALID;
  } catch (const oneshot::ResourceError& e) {
    t_error = e.what();
    return ONESHOT_INVALID;
  } catch (const oneshot::NumericalError& e) {
    t_error = e.what();
    return ONESHOT_NUMERICAL;
  } catch (const std::exception& e) {
    t_error = e.what();
    return ONESHOT_NUMERICAL;
  }
}

void need(bool ok, const char* what) {
  if (!ok) throw oneshot::UsageError(what);
}

json dist_json(const oneshot::prob::Dist& d) {
  return json::parse(oneshot::json_io::dump_dist(d));
}

json mat_json(const oneshot::linalg::Mat& m) {
  return json::parse(oneshot::json_io::dump_matrix(m));
}

int emit(const json& j, char** out) {
  *out = dup_string(j.dump(2) + "\n");
  need(*out != nullptr, "out of memory");
  return ONESHOT_OK;
}

oneshot::quantum::Metric parse_metric(const char* metric) {
  using oneshot::quantum::Metric;
  if (!metric || !*metric || std::strcmp(metric, "P") == 0)
    return Metric::Purified;
  if (std::strcmp(metric, "T") == 0) return Metric::Trace;
  throw oneshot::UsageError(std::string("unknown metric '") + metric +
                            "', expected P or T");
}

constexpr double kSlackTol = 1e-9;

json split_json(const oneshot::protocols::SplitRun& r) {
  json j;
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["k_bits"] = r.k_bits;
  j["r_bits"] = r.r_bits;
  j["n_samples"] = r.n_samples;
  j["comm_bits"] = r.comm_bits;
  j["comm_real"] = r.comm_real;
  j["comm_bound"] = r.comm_bound;
  j["slack_comm"] = r.slack_comm;
  j["gamma"] = r.gamma;
  j["error"] = r.error;
  j["slack_error"] = r.slack_error;
  j["converse_rate"] = r.converse_rate;
  j["slack_converse"] = r.slack_converse;
  j["p_out"] = dist_json(r.p_out);
  return j;
}

int split_status(const oneshot::protocols::SplitRun& r) {
  bool ok = r.slack_comm >= -kSlackTol && r.slack_error >= -kSlackTol &&
            r.slack_converse >= -kSlackTol;
  return ok ? ONESHOT_OK : ONESHOT_CHECK_FAILED;
}

}  // namespace

extern "C" {

const char* oneshot_last_error(void) { return t_error.c_str(); }

void oneshot_string_free(char* s) { std::free(s); }

int oneshot_dist_load(const char* json_text, oneshot_dist** out) {
  return guarded([&]() -> int {
    need(json_text && out, "null argument");
    auto d = oneshot::json_io::parse_dist(json_text);
    *out = new oneshot_dist{std::move(d)};
    return ONESHOT_OK;
  });
}

void oneshot_dist_free(oneshot_dist* d) { delete d; }

int oneshot_dist_shape(const oneshot_dist* d, int* nx, int* ny) {
  return guarded([&]() -> int {
    need(d != nullptr, "null argument");
    if (nx) *nx = oneshot::prob::nx(d->d);
    if (ny) *ny = oneshot::prob::ny(d->d);
    return ONESHOT_OK;
  });
}

int oneshot_state_load(const char* json_text, oneshot_state** out) {
  return guarded([&]() -> int {
    need(json_text && out, "null argument");
    auto s = oneshot::json_io::parse_state(json_text);
    *out = new oneshot_state{std::move(s)};
    return ONESHOT_OK;
  });
}

void oneshot_state_free(oneshot_state* s) { delete s; }

int oneshot_classical_measure(const oneshot_dist* d, const char* kind,
                              double eps, char** out_json) {
  return guarded([&]() -> int {
    need(d && kind && out_json, "null argument");
    std::string k = kind;
    json j;
    j["kind"] = k;
    j["eps"] = eps;
    if (k == "is") {
      j["value"] = oneshot::spectrum::i_s(d->d, eps);
      return emit(j, out_json);
    }
    if (k == "hs") {
      j["value"] = oneshot::spectrum::h_s(d->d, eps);
      return emit(j, out_json);
    }
    oneshot::classical_smooth::MeasureResult r;
    if (k == "imax-partial")
      r = oneshot::classical_smooth::imax_partial(d->d, eps);
    else if (k == "imax-full")
      r = oneshot::classical_smooth::imax_full(d->d, eps);
    else if (k == "hmin-partial")
      r = oneshot::classical_smooth::hmin_partial(d->d, eps);
    else if (k == "hmin-full")
      r = oneshot::classical_smooth::hmin_full(d->d, eps);
    else
      throw oneshot::UsageError("unknown classical measure kind '" + k + "'");
    j["value"] = r.value;
    j["optimizer"] = dist_json(r.optimizer);
    if (!r.q.empty()) j["reference_weights"] = r.q;
    j["achieved_distance"] = r.achieved_distance;
    j["lp_optimum"] = r.lp_optimum;
    return emit(j, out_json);
  });
}

int oneshot_quantum_measure(const oneshot_state* s, const char* kind,
                            const char* metric, double eps, char** out_json) {
  return guarded([&]() -> int {
    need(s && kind && out_json, "null argument");
    std::string k = kind;
    json j;
    j["kind"] = k;
    j["eps"] = eps;
    j["metric"] = (parse_metric(metric) == oneshot::quantum::Metric::Trace)
                      ? "T"
                      : "P";
    if (k == "dmax") {
      auto prod = oneshot::linalg::kron(oneshot::quantum::marginal_a(s->s),
                                        oneshot::quantum::marginal_b(s->s));
      j["value"] = oneshot::quantum::d_max(s->s.rho, prod);
      return emit(j, out_json);
    }
    auto m = parse_metric(metric);
    oneshot::quantum::QMeasureResult r;
    if (k == "imax")
      r = oneshot::quantum::imax_unsmoothed(s->s);
    else if (k == "hmin")
      r = oneshot::quantum::hmin_unsmoothed(s->s);
    else if (k == "imax-partial")
      r = oneshot::quantum::imax_partial(s->s, eps, m);
    else if (k == "imax-full")
      r = oneshot::quantum::imax_full(s->s, eps, m);
    else if (k == "hmin-partial")
      r = oneshot::quantum::hmin_partial(s->s, eps, m);
    else if (k == "hmin-full")
      r = oneshot::quantum::hmin_full(s->s, eps, m);
    else
      throw oneshot::UsageError("unknown quantum measure kind '" + k + "'");
    j["value"] = r.value;
    j["optimizer"] = mat_json(r.optimizer);
    j["reference"] = mat_json(r.reference);
    j["achieved_distance"] = r.achieved_distance;
    j["cone_optimum"] = r.cone_optimum;
    j["gap"] = r.gap;
    j["iterations"] = r.iterations;
    return emit(j, out_json);
  });
}

int oneshot_second_order(const oneshot_dist* d, const int* ns, int count,
                         double eps, char** out_csv) {
  return guarded([&]() -> int {
    need(d && ns && out_csv, "null argument");
    need(count > 0, "need at least one block length");
    for (int i = 0; i < count; ++i)
      need(ns[i] >= 2, "block lengths must be at least 2");
    auto mx = oneshot::prob::marginal_x(d->d);
    auto my = oneshot::prob::marginal_y(d->d);
    std::vector<double> w(mx.size() * my.size());
    for (size_t x = 0; x < mx.size(); ++x)
      for (size_t y = 0; y < my.size(); ++y) w[x * my.size() + y] = mx[x] * my[y];
    auto q = oneshot::prob::make_table(
        {(int)mx.size(), (int)my.size()}, std::move(w));
    std::string text = "n, exact, predicted, residual, residual*n/log2(n)\n";
    for (int i = 0; i < count; ++i) {
      auto row = oneshot::spectrum::second_order_row(d->d, q, ns[i], eps);
      char line[192];
      std::snprintf(line, sizeof line, "%d, %.12g, %.12g, %.12g, %.12g\n",
                    row.n, row.exact_rate, row.predicted_rate, row.residual,
                    row.normalized);
      text += line;
    }
    *out_csv = dup_string(text);
    need(*out_csv != nullptr, "out of memory");
    return ONESHOT_OK;
  });
}

int oneshot_split_exact(const oneshot_dist* d, double eps, double delta,
                        char** out_json) {
  return guarded([&]() -> int {
    need(d && out_json, "null argument");
    auto r = oneshot::protocols::state_split_exact(d->d, eps, delta);
    int status = emit(split_json(r), out_json);
    return status != ONESHOT_OK ? status : split_status(r);
  });
}

int oneshot_split_sample(const oneshot_dist* d, double eps, double delta,
                         long trials, uint64_t seed, char** out_json) {
  return guarded([&]() -> int {
    need(d && out_json, "null argument");
    need(trials > 0, "trials must be positive");
    auto r = oneshot::protocols::state_split_exact(d->d, eps, delta);
    auto m =
        oneshot::protocols::state_split_sample(d->d, eps, delta, trials, seed);
    json j;
    j["exact"] = split_json(r);
    json samp;
    samp["trials"] = m.trials;
    samp["decisions"] = m.decisions;
    samp["accepts"] = m.accepts;
    samp["accept_rate"] = m.accept_rate;
    samp["accept_expected"] = m.accept_expected;
    samp["accept_z"] = m.accept_z;
    samp["counts"] = m.counts;
    samp["empirical_t"] = m.empirical_t;
    samp["chi2"] = m.chi2;
    samp["chi2_cells"] = m.chi2_cells;
    j["sampled"] = samp;
    int status = emit(j, out_json);
    return status != ONESHOT_OK ? status : split_status(r);
  });
}

int oneshot_pa_exact(const oneshot_dist* d, int key_bits, char** out_json) {
  return guarded([&]() -> int {
    need(d && out_json, "null argument");
    auto r = oneshot::protocols::privacy_amplify_exact(d->d, key_bits);
    json j;
    j["n_bits"] = r.n_bits;
    j["key_bits"] = r.key_bits;
    j["error"] = r.error;
    j["hash_bound"] = r.hash_bound;
    j["slack"] = r.slack;
    int status = emit(j, out_json);
    if (status != ONESHOT_OK) return status;
    return r.slack >= -kSlackTol ? ONESHOT_OK : ONESHOT_CHECK_FAILED;
  });
}

int oneshot_pa_theorem(const oneshot_dist* d, double eps, double delta,
                       char** out_json) {
  return guarded([&]() -> int {
    need(d && out_json, "null argument");
    auto r = oneshot::protocols::pa_theorem_run(d->d, eps, delta);
    json j;
    j["eps"] = r.eps;
    j["delta"] = r.delta;
    j["hmin_smoothed"] = r.hmin_smoothed;
    j["key_bits"] = r.key_bits;
    j["error"] = r.error;
    j["slack"] = r.slack;
    int status = emit(j, out_json);
    if (status != ONESHOT_OK) return status;
    return r.slack >= -kSlackTol ? ONESHOT_OK : ONESHOT_CHECK_FAILED;
  });
}

int oneshot_pa_converse(const oneshot_dist* d, double eps, int key_bits,
                        char** out_json) {
  return guarded([&]() -> int {
    need(d && out_json, "null argument");
    auto r = oneshot::protocols::pa_converse_check(d->d, eps, key_bits);
    json j;
    j["eps"] = r.eps;
    j["key_bits"] = r.key_bits;
    j["error"] = r.error;
    j["secure"] = r.secure;
    j["hmin_at_eps"] = r.hmin_at_eps;
    j["slack"] = r.slack;
    int status = emit(j, out_json);
    if (status != ONESHOT_OK) return status;
    if (!r.secure) return ONESHOT_OK;
    return r.slack >= -kSlackTol ? ONESHOT_OK : ONESHOT_CHECK_FAILED;
  });
}

int oneshot_thmcheck(const char* which, uint64_t seed, int trials, int corrupt,
                     char** out_text) {
  return guarded([&]() -> int {
    need(out_text != nullptr, "null argument");
    std::string w = (which && *which) ? which : "all";
    std::vector<std::string> names;
    if (w == "all")
      names = oneshot::sweeps::sweep_names();
    else
      names.push_back(w);
    std::string text;
    bool all_pass = true;
    for (const auto& name : names) {
      auto rep = oneshot::sweeps::run_sweep(name, seed, trials);
      if (corrupt) {
        rep.pass = true;
        for (auto& line : rep.lines) {
          line.slack -= 1e9;
          line.pass = line.slack >= -line.tol;
          rep.pass = rep.pass && line.pass;
        }
      }
      all_pass = all_pass && rep.pass;
      text += oneshot::sweeps::format_report(rep);
    }
    *out_text = dup_string(text);
    need(*out_text != nullptr, "out of memory");
    return all_pass ? ONESHOT_OK : ONESHOT_CHECK_FAILED;
  });
}

int oneshot_thmcheck_names(char** out_text) {
  return guarded([&]() -> int {
    need(out_text != nullptr, "null argument");
    std::string text;
    for (const auto& name : oneshot::sweeps::sweep_names()) {
      text += name;
      text += '\n';
    }
    *out_text = dup_string(text);
    need(*out_text != nullptr, "out of memory");
    return ONESHOT_OK;
  });
}

}  // extern "C"
