#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "wlqc/errors.hpp"

namespace wlqc::detail {

// Binary search for the threshold of a monotone predicate ("fails below,
// succeeds above").  Every evaluation is recorded and the monotone shape is
// audited at the end: any success below a failure is a hard error.
//
// Returns lo immediately when the predicate already holds at lo (threshold
// below the search floor); throws `bracket_error` when it fails at hi.
inline double bisect_threshold(const std::function<bool(double)>& passes,
                               double lo, double hi, double tol,
                               ErrorCode bracket_error,
                               const char* bracket_message) {
  std::vector<std::pair<double, bool>> evals;
  auto probe = [&](double lambda) {
    const bool ok = passes(lambda);
    evals.push_back({lambda, ok});
    return ok;
  };

  double result;
  if (probe(lo)) {
    result = lo;
  } else if (!probe(hi)) {
    throw SolverError(bracket_error, bracket_message);
  } else {
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (probe(mid))
        hi = mid;
      else
        lo = mid;
    }
    result = 0.5 * (lo + hi);
  }

  double max_fail = -std::numeric_limits<double>::infinity();
  double min_pass = std::numeric_limits<double>::infinity();
  for (const auto& [lambda, ok] : evals) {
    if (ok)
      min_pass = std::min(min_pass, lambda);
    else
      max_fail = std::max(max_fail, lambda);
  }
  if (max_fail > min_pass)
    throw SolverError(ErrorCode::BracketFailure,
                      "predicate is not monotone in lambda");
  return result;
}

}  // namespace wlqc::detail
