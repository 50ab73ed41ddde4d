#pragma once

#include <string>
#include <vector>

#include "blockdyn/objective.hpp"

namespace blockdyn::cli {

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 failed verdict (lemma violation, saddle convergence, instability
/// certificate missing, failed probe), 2 usage or configuration error.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

/// External function-spec files are JSON documents:
///   {
///     "name": "...", "dimension": n, "partition": [n_1, ...],
///     "body": {"kind": "polynomial", "terms": [{"coeff": c, "exponents": [e_1, ...]}]}
///         or  {"kind": "builtin", "id": "quartic-sep"},
///     "box": {"lo": [...], "hi": [...]},       // optional
///     "lipschitz": L                            // required for polynomial bodies
///   }
obj::BenchmarkFunction parse_function_spec(const std::string& json_text);
obj::BenchmarkFunction load_function_spec(const std::string& path);

}  // namespace blockdyn::cli
