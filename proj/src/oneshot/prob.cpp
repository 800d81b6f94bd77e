#include "oneshot/prob.hpp"

#include <algorithm>
#include <cmath>

namespace oneshot::prob {

double Dist::total() const {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

static size_t flat_index(const Dist& p, const std::vector<int>& idx) {
  if (idx.size() != p.shape.size()) throw UsageError("Dist: index arity");
  size_t f = 0;
  for (size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= p.shape[k])
      throw UsageError("Dist: index out of range");
    f = f * p.shape[k] + idx[k];
  }
  return f;
}

double& Dist::at(const std::vector<int>& idx) { return w[flat_index(*this, idx)]; }
double Dist::at(const std::vector<int>& idx) const {
  return w[flat_index(*this, idx)];
}

Dist make_table(std::vector<int> shape, std::vector<double> w) {
  if (shape.empty()) throw UsageError("Dist: empty shape");
  std::uint64_t cells = 1;
  for (int d : shape) {
    if (d < 1) throw UsageError("Dist: factor dimension must be positive");
    cells *= (std::uint64_t)d;
    if (cells > max_cells()) throw ResourceError("Dist: cell cap exceeded");
  }
  if (w.size() != cells) throw UsageError("Dist: weight count != cells");
  for (double v : w) {
    if (!std::isfinite(v)) throw UsageError("Dist: non-finite weight");
    if (v < -1e-15) throw UsageError("Dist: negative weight");
  }
  for (double& v : w)
    if (v < 0.0) v = 0.0;
  return Dist{std::move(shape), std::move(w)};
}

Dist make_sub_normalized(std::vector<int> shape, std::vector<double> w) {
  Dist p = make_table(std::move(shape), std::move(w));
  if (p.total() > 1.0 + 1e-9)
    throw UsageError("Dist: table exceeds total weight 1");
  return p;
}

Dist make_normalized(std::vector<int> shape, std::vector<double> w) {
  Dist p = make_table(std::move(shape), std::move(w));
  if (std::abs(p.total() - 1.0) > 1e-9)
    throw UsageError("Dist: table is not normalized");
  return p;
}

bool is_normalized(const Dist& p, double tol) {
  return std::abs(p.total() - 1.0) <= tol;
}

int nx(const Dist& p) {
  if (p.shape.size() != 2) throw UsageError("Dist: expected two factors");
  return p.shape[0];
}
int ny(const Dist& p) {
  if (p.shape.size() != 2) throw UsageError("Dist: expected two factors");
  return p.shape[1];
}
double cell(const Dist& p, int x, int y) {
  return p.w[(size_t)x * p.shape[1] + y];
}

Dist marginal(const Dist& p, const std::vector<int>& keep) {
  if (keep.empty()) throw UsageError("marginal: empty factor list");
  for (size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= (int)p.shape.size())
      throw UsageError("marginal: factor index out of range");
    if (k > 0 && keep[k] <= keep[k - 1])
      throw UsageError("marginal: factor list must be strictly ascending");
  }
  std::vector<int> out_shape;
  for (int f : keep) out_shape.push_back(p.shape[f]);

  size_t out_cells = 1;
  for (int d : out_shape) out_cells *= (size_t)d;
  std::vector<double> out(out_cells, 0.0);

  int nf = (int)p.shape.size();
  std::vector<int> idx(nf, 0);
  for (size_t flat = 0; flat < p.w.size(); ++flat) {
    size_t o = 0;
    for (int f : keep) o = o * p.shape[f] + idx[f];
    out[o] += p.w[flat];
    for (int f = nf - 1; f >= 0; --f) {
      if (++idx[f] < p.shape[f]) break;
      idx[f] = 0;
    }
  }
  return Dist{std::move(out_shape), std::move(out)};
}

std::vector<double> marginal_x(const Dist& p) {
  return marginal(p, {0}).w;
}
std::vector<double> marginal_y(const Dist& p) {
  return marginal(p, {1}).w;
}

double gen_trace_distance(const Dist& p, const Dist& q) {
  if (p.shape != q.shape)
    throw UsageError("gen_trace_distance: shape mismatch");
  double l1 = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) l1 += std::abs(p.w[i] - q.w[i]);
  return 0.5 * l1 + 0.5 * std::abs(p.total() - q.total());
}

Dist iid_power(const Dist& p, int n) {
  if (n < 1) throw UsageError("iid_power: n must be positive");
  std::uint64_t cells = 1;
  for (int r = 0; r < n; ++r) {
    cells *= (std::uint64_t)p.w.size();
    if (cells > max_cells()) throw ResourceError("iid_power: cell cap exceeded");
  }
  std::vector<int> shape;
  for (int r = 0; r < n; ++r)
    shape.insert(shape.end(), p.shape.begin(), p.shape.end());

  std::vector<double> w(1, 1.0);
  for (int r = 0; r < n; ++r) {
    std::vector<double> nxt;
    nxt.reserve(w.size() * p.w.size());
    for (double base : w)
      for (double v : p.w) nxt.push_back(base * v);
    w.swap(nxt);
  }
  return Dist{std::move(shape), std::move(w)};
}

double event_gap_distance(const Dist& p, const Dist& q) {
  if (p.shape != q.shape)
    throw UsageError("event_gap_distance: shape mismatch");
  size_t k = p.w.size();
  if (k > 20) throw ResourceError("event_gap_distance: more than 20 outcomes");
  double best = 0.0;
  for (std::uint32_t s = 0; s < (1u << k); ++s) {
    double d = 0.0;
    for (size_t i = 0; i < k; ++i)
      if (s & (1u << i)) d += p.w[i] - q.w[i];
    best = std::max(best, std::abs(d));
  }
  return best;
}

}  // namespace oneshot::prob
