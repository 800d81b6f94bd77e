#include "oneshot/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oneshot/common.hpp"

namespace oneshot::json_io {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw UsageError("short write to '" + path + "'");
}

namespace {

json parse_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw UsageError("input is not valid JSON");
  return j;
}

// 2d array of numbers with the announced dimension
std::vector<std::vector<double>> grid(const json& j, const char* key, int n,
                                      bool required) {
  if (!j.contains(key)) {
    if (required) throw UsageError(std::string("missing field '") + key + "'");
    return std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
  }
  const json& g = j.at(key);
  if (!g.is_array() || (int)g.size() != n)
    throw UsageError(std::string("field '") + key + "' must be a " +
                     std::to_string(n) + "-row array");
  std::vector<std::vector<double>> out;
  for (const auto& row : g) {
    if (!row.is_array() || (int)row.size() != n)
      throw UsageError(std::string("rows of '") + key + "' must have length " +
                       std::to_string(n));
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) throw UsageError("matrix entries must be numbers");
      r.push_back(v.get<double>());
      if (!std::isfinite(r.back()))
        throw UsageError("matrix entries must be finite");
    }
    out.push_back(std::move(r));
  }
  return out;
}

linalg::Mat matrix_from(const json& j, int n) {
  auto re = grid(j, "re", n, true);
  auto im = grid(j, "im", n, false);
  linalg::Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m.at(i, k) = {re[i][k], im[i][k]};

  double scale = 1.0, skew = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      scale = std::max(scale, std::abs(m.at(i, k)));
      skew = std::max(skew, std::abs(m.at(i, k) - std::conj(m.at(k, i))));
    }
  if (skew > 1e-9 * scale)
    throw UsageError("matrix is not hermitian within tolerance");
  return linalg::hermitize(m);
}

}  // namespace

prob::Dist parse_dist(const std::string& text) {
  json j = parse_or_throw(text);
  if (!j.contains("shape") || !j.at("shape").is_array())
    throw UsageError("distribution needs a 'shape' array");
  std::vector<int> shape;
  for (const auto& v : j.at("shape")) {
    if (!v.is_number_integer() || v.get<long>() <= 0)
      throw UsageError("'shape' entries must be positive integers");
    shape.push_back(v.get<int>());
  }
  if (shape.empty()) throw UsageError("'shape' must be nonempty");
  if (!j.contains("weights") || !j.at("weights").is_array())
    throw UsageError("distribution needs a 'weights' array");
  std::vector<double> w;
  for (const auto& v : j.at("weights")) {
    if (!v.is_number()) throw UsageError("'weights' entries must be numbers");
    w.push_back(v.get<double>());
  }
  size_t want = 1;
  for (int s : shape) want *= (size_t)s;
  if (w.size() != want)
    throw UsageError("'weights' has " + std::to_string(w.size()) +
                     " entries, shape wants " + std::to_string(want));
  return prob::make_table(std::move(shape), std::move(w));
}

std::string dump_dist(const prob::Dist& p) {
  json j;
  j["shape"] = p.shape;
  j["weights"] = p.w;
  return j.dump();
}

linalg::Mat parse_matrix(const std::string& text) {
  json j = parse_or_throw(text);
  if (!j.contains("dim") || !j.at("dim").is_number_integer())
    throw UsageError("matrix needs an integer 'dim'");
  int n = j.at("dim").get<int>();
  if (n <= 0 || n > 256) throw UsageError("'dim' out of range");
  return matrix_from(j, n);
}

std::string dump_matrix(const linalg::Mat& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json r = json::array(), ii = json::array();
    for (int k = 0; k < m.cols; ++k) {
      r.push_back(m.at(i, k).real());
      ii.push_back(m.at(i, k).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(ii));
  }
  json j;
  j["dim"] = m.rows;
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j.dump();
}

quantum::QState parse_state(const std::string& text) {
  json j = parse_or_throw(text);
  if (!j.contains("dims") || !j.at("dims").is_array() ||
      j.at("dims").size() != 2)
    throw UsageError("state needs a two-entry 'dims' array");
  int da = 0, db = 0;
  if (j.at("dims")[0].is_number_integer()) da = j.at("dims")[0].get<int>();
  if (j.at("dims")[1].is_number_integer()) db = j.at("dims")[1].get<int>();
  if (da <= 0 || db <= 0 || da * db > 256)
    throw UsageError("'dims' entries out of range");
  return quantum::make_state(da, db, matrix_from(j, da * db));
}

}  // namespace oneshot::json_io
