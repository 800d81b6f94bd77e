// Command line front end. Every number it prints comes from the C API;
// this file only parses flags, moves text, and maps statuses to exit codes.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oneshot.h"

namespace {

int usage_fail(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return ONESHOT_INVALID;
}

bool read_file(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

// Writes the report (if any), surfaces the library error message (if any),
// and passes the status through as the exit code. Check failures still
// deliver their report.
int finish(int status, char* text, const std::string& out_path) {
  int write_rc = ONESHOT_OK;
  if (text) {
    if (out_path.empty()) {
      std::fputs(text, stdout);
    } else {
      std::ofstream outf(out_path, std::ios::binary);
      if (outf) outf << text;
      if (!outf) write_rc = usage_fail("cannot write '" + out_path + "'");
    }
    oneshot_string_free(text);
  }
  if (status != ONESHOT_OK) {
    const char* msg = oneshot_last_error();
    if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
    return status;
  }
  return write_rc;
}

struct DistGuard {
  oneshot_dist* d = nullptr;
  ~DistGuard() { oneshot_dist_free(d); }
};
struct StateGuard {
  oneshot_state* s = nullptr;
  ~StateGuard() { oneshot_state_free(s); }
};

int load_dist(const std::string& path, oneshot_dist** out) {
  std::string text;
  if (!read_file(path, &text)) return usage_fail("cannot read '" + path + "'");
  int rc = oneshot_dist_load(text.c_str(), out);
  if (rc != ONESHOT_OK) {
    const char* msg = oneshot_last_error();
    if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
  }
  return rc;
}

int load_state(const std::string& path, oneshot_state** out) {
  std::string text;
  if (!read_file(path, &text)) return usage_fail("cannot read '" + path + "'");
  int rc = oneshot_state_load(text.c_str(), out);
  if (rc != ONESHOT_OK) {
    const char* msg = oneshot_last_error();
    if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
  }
  return rc;
}

std::string sweep_name_help() {
  char* names = nullptr;
  std::string help = "sweep name: all";
  if (oneshot_thmcheck_names(&names) == ONESHOT_OK && names) {
    std::string list(names);
    for (char& ch : list)
      if (ch == '\n') ch = '|';
    if (!list.empty() && list.back() == '|') list.pop_back();
    help += "|" + list;
  }
  oneshot_string_free(names);
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partially smoothed one-shot measures and protocols"};
  app.require_subcommand(1);

  std::string input, output, kind, metric = "P", which = "all", format;
  double eps = 0.0, delta = 0.0;
  int ell = 0, nbits = 0, trials = 0;
  long samples = 0;
  std::uint64_t seed = 2026;
  std::vector<int> blocks;
  bool corrupt = false;

  auto* m = app.add_subcommand(
      "measure", "smoothed classical measure of a joint table");
  m->add_option("--kind", kind,
                "imax-partial|imax-full|hmin-partial|hmin-full|is|hs")
      ->required();
  m->add_option("--eps", eps, "smoothing radius, 0 gives the plain measure");
  m->add_option("--input", input, "table JSON file")->required();
  m->add_option("--output", output, "write the report here instead of stdout");
  m->add_option("--format", format, "json (the only measure format)");

  auto* q = app.add_subcommand(
      "qmeasure", "smoothed quantum measure of a bipartite state");
  q->add_option("--kind", kind,
                "imax-partial|imax-full|hmin-partial|hmin-full|dmax|imax|hmin")
      ->required();
  q->add_option("--metric", metric, "P (purified ball) or T (trace ball)");
  q->add_option("--eps", eps, "smoothing radius");
  q->add_option("--input", input, "state JSON file")->required();
  q->add_option("--output", output, "write the report here instead of stdout");
  q->add_option("--format", format, "json (the only qmeasure format)");

  auto* so = app.add_subcommand(
      "second-order", "exact spectrum rates against the Gaussian prediction");
  so->add_option("--eps", eps, "spectrum tail parameter")->required();
  so->add_option("--n", blocks,
                 "block lengths, repeatable (default 64..1024 doubling)");
  so->add_option("--input", input, "table JSON file")->required();
  so->add_option("--output", output, "write the CSV here instead of stdout");
  so->add_option("--format", format, "csv (the only second-order format)");

  auto* sp = app.add_subcommand(
      "split", "one exact run of the splitting protocol");
  sp->add_option("--eps", eps, "target output error")->required();
  sp->add_option("--delta", delta, "smoothing margin")->required();
  sp->add_option("--trials", samples,
                 "also replay the sampler this many times");
  sp->add_option("--seed", seed, "sampler seed");
  sp->add_option("--input", input, "table JSON file")->required();
  sp->add_option("--output", output, "write the report here instead of stdout");
  sp->add_option("--format", format, "json (the only split format)");

  auto* pa = app.add_subcommand(
      "pa", "privacy amplification against a known table");
  pa->add_option("--ell", ell, "key length in bits");
  pa->add_option("--n", nbits, "expected input bits, checked against the table");
  pa->add_option("--eps", eps, "security level, adds the converse check");
  pa->add_option("--delta", delta,
                 "smoothing margin, picks the key length from the entropy "
                 "bound instead of --ell");
  pa->add_option("--input", input, "cq table JSON file")->required();
  pa->add_option("--output", output, "write the report here instead of stdout");
  pa->add_option("--format", format, "json (the only pa format)");

  auto* tc = app.add_subcommand("thmcheck", "run the bundled check sweeps");
  tc->add_option("--which", which, sweep_name_help());
  tc->add_option("--seed", seed, "sweep seed");
  tc->add_option("--trials", trials, "0 keeps each sweep's default count");
  tc->add_option("--output", output, "write the report here instead of stdout");
  tc->add_flag("--corrupt-bound", corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : ONESHOT_INVALID;
  }

  if (m->parsed() || q->parsed() || sp->parsed() || pa->parsed()) {
    if (!format.empty() && format != "json")
      return usage_fail("only json output is available for this command");
  }
  if (so->parsed() && !format.empty() && format != "csv")
    return usage_fail("only csv output is available for second-order");

  if (m->parsed()) {
    DistGuard g;
    int rc = load_dist(input, &g.d);
    if (rc != ONESHOT_OK) return rc;
    char* out = nullptr;
    rc = oneshot_classical_measure(g.d, kind.c_str(), eps, &out);
    return finish(rc, out, output);
  }

  if (q->parsed()) {
    StateGuard g;
    int rc = load_state(input, &g.s);
    if (rc != ONESHOT_OK) return rc;
    char* out = nullptr;
    rc = oneshot_quantum_measure(g.s, kind.c_str(), metric.c_str(), eps, &out);
    return finish(rc, out, output);
  }

  if (so->parsed()) {
    DistGuard g;
    int rc = load_dist(input, &g.d);
    if (rc != ONESHOT_OK) return rc;
    if (blocks.empty()) blocks = {64, 128, 256, 512, 1024};
    char* out = nullptr;
    rc = oneshot_second_order(g.d, blocks.data(), (int)blocks.size(), eps,
                              &out);
    return finish(rc, out, output);
  }

  if (sp->parsed()) {
    DistGuard g;
    int rc = load_dist(input, &g.d);
    if (rc != ONESHOT_OK) return rc;
    char* out = nullptr;
    if (sp->count("--trials") > 0)
      rc = oneshot_split_sample(g.d, eps, delta, samples, seed, &out);
    else
      rc = oneshot_split_exact(g.d, eps, delta, &out);
    return finish(rc, out, output);
  }

  if (pa->parsed()) {
    bool has_ell = pa->count("--ell") > 0;
    bool has_eps = pa->count("--eps") > 0;
    bool has_delta = pa->count("--delta") > 0;
    if (has_ell && has_delta)
      return usage_fail("give either --ell or --delta, not both");
    if (!has_ell && !has_delta)
      return usage_fail("need --ell, or --eps with --delta");
    if (has_delta && !has_eps)
      return usage_fail("--delta needs --eps");
    DistGuard g;
    int rc = load_dist(input, &g.d);
    if (rc != ONESHOT_OK) return rc;
    if (pa->count("--n") > 0) {
      if (nbits < 1 || nbits > 30)
        return usage_fail("--n must lie in [1, 30]");
      int nx = 0;
      if (oneshot_dist_shape(g.d, &nx, nullptr) != ONESHOT_OK)
        return ONESHOT_INVALID;
      if (nx != (1 << nbits))
        return usage_fail("table has " + std::to_string(nx) +
                          " inputs, expected 2^" + std::to_string(nbits));
    }
    char* out = nullptr;
    if (has_delta)
      rc = oneshot_pa_theorem(g.d, eps, delta, &out);
    else if (has_eps)
      rc = oneshot_pa_converse(g.d, eps, ell, &out);
    else
      rc = oneshot_pa_exact(g.d, ell, &out);
    return finish(rc, out, output);
  }

  if (tc->parsed()) {
    char* out = nullptr;
    int rc = oneshot_thmcheck(which.c_str(), seed, trials, corrupt ? 1 : 0,
                              &out);
    return finish(rc, out, output);
  }

  return usage_fail("no command selected");
}
