#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oneshot::sweeps {

// One asserted inequality, aggregated over a whole sweep. The slack is the
// worst margin observed; the line passes when slack >= -tol.
struct CheckLine {
  std::string label;
  double slack = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct SweepReport {
  std::string name;
  int trials = 0;
  double elapsed = 0.0;  // seconds
  std::vector<CheckLine> lines;
  bool pass = true;
};

// Randomized verification sweeps. Each trial draws its own counter stream
// from (seed, trial), so reports are byte-stable and order-independent.
// Passing trials <= 0 selects the default count noted per sweep.

// Classical sandwich between the spectral divergences and the smoothed
// measures on random 3x3 and 4x4 tables. Default 200 trials.
SweepReport sandwich_sweep(std::uint64_t seed, int trials);

// Exact i.i.d. rates of the correlated-bits table against the Gaussian
// second-order prediction, block lengths 64..1024. No randomness.
SweepReport second_order_sweep();

// Exact splitting protocol on random tables up to 4x4: error, communication
// and converse margins. Default 50 trials.
SweepReport split_sweep(std::uint64_t seed, int trials);

// Hashing fixtures up to six input bits: theorem-driven key lengths are
// secure, secure runs never beat the smoothed entropy, and the seed family
// is exactly two-universal. No randomness beyond fixed fixture seeds.
SweepReport pa_sweep();

// Marginal-pinning penalty bounds on random two-qubit states, certified
// twice: once by SDP values, once by the explicit rotated constructions.
// Default 50 trials.
SweepReport hat_sweep(std::uint64_t seed, int trials);

// Cross-validation of the numerical engines: closed forms for maximally
// entangled states, diagonal SDPs against the LP, and the LP against a
// brute-force vertex enumerator. Default 50 trials.
SweepReport solver_sweep(std::uint64_t seed, int trials);

// Register-splitting fixtures at the lemma threshold with delta = 1/4,
// checked in both distance metrics. Fixed fixtures.
SweepReport convex_split_sweep();

// Structural property suites, default 500 trials each: radius monotonicity,
// nearby-state shifts, data processing, isometric invariance, functions on
// classical registers, the dimension bound, coherent copies, and divergence
// growth under projective measurement.
SweepReport property_sweep(std::uint64_t seed, int trials);

// Qualitative convergence of per-copy values on tensor powers of the
// two-qubit maximally entangled state. Slow: real SDP solves up to dim 64.
SweepReport trend_smoke(int max_copies);

// Registry used by the CLI: names in fixed order, and a dispatcher.
std::vector<std::string> sweep_names();
SweepReport run_sweep(const std::string& name, std::uint64_t seed,
                      int trials);

std::string format_report(const SweepReport& r);

}  // namespace oneshot::sweeps
