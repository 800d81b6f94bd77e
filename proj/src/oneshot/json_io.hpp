#pragma once

#include <string>

#include "oneshot/linalg.hpp"
#include "oneshot/prob.hpp"
#include "oneshot/quantum.hpp"

namespace oneshot::json_io {

// File plumbing; both throw UsageError with the path in the message.
std::string slurp(const std::string& path);
void spill(const std::string& path, const std::string& text);

// {"shape": [nx, ny], "weights": [...]} row-major. Weights must be finite
// and nonnegative; normalization is left to the consuming operation.
prob::Dist parse_dist(const std::string& text);
std::string dump_dist(const prob::Dist& p);

// {"dim": n, "re": [[...]], "im": [[...]]}; "im" may be omitted for real
// input. Rejects non-hermitian matrices beyond a fixed tolerance.
linalg::Mat parse_matrix(const std::string& text);
std::string dump_matrix(const linalg::Mat& m);

// {"dims": [da, db], "re": [[...]], "im": [[...]]}: a bipartite density
// operator; hermiticity checked here, positivity by the state constructor.
quantum::QState parse_state(const std::string& text);

}  // namespace oneshot::json_io
