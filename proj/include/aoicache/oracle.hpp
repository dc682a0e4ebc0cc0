#pragma once

// Brute-force references for the per-file problem, independent of the LP
// route: relative value iteration and exhaustive threshold enumeration.

#include <cstddef>
#include <vector>

#include "aoicache/matrix.hpp"
#include "aoicache/model.hpp"

namespace aoicache::oracle {

struct RviResult {
  double average_cost = 0.0;
  /// Relative values h(x, r), h(1, 0) = 0; row x-1 holds age x.
  Matrix bias_values;
  /// 1 where updating is the minimizing action; row x-1 holds age x.
  std::vector<std::vector<int>> greedy_policy;
  double bellman_residual = 0.0;
  std::size_t iterations = 0;
};

/// Relative value iteration on {1..age_bound} x modes with the update forced
/// at age_bound. Runs on the aperiodic transform P' = (P + I) / 2 so that
/// deterministic age cycles do not oscillate. Throws InvalidParameter when
/// age_bound is below the analytic bound, NumericalError past 10^6 sweeps.
RviResult rvi_solve(const FileModel& file, double multiplier, std::size_t age_bound);

struct ThresholdSearch {
  /// 1-based: update iff age >= thresholds[r].
  std::vector<std::size_t> thresholds;
  double cost = 0.0;
};

/// Evaluates every deterministic threshold vector in {1..age_bound}^R and
/// returns the cheapest by aoi + W * downloads, keeping the lexicographically
/// smallest on ties. Refuses search spaces larger than 10^6 points.
ThresholdSearch enumerate_thresholds(const FileModel& file, double multiplier,
                                     std::size_t age_bound);

}  // namespace aoicache::oracle
