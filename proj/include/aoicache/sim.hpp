#pragma once

// Slotted simulation of the cache: each slot charges sum_n w_n(R_n) X_n,
// asks the policy which files to download, resets their ages to 1, ages the
// rest by one slot, and then moves every file's popularity chain one step.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aoicache/matrix.hpp"
#include "aoicache/model.hpp"
#include "aoicache/policies.hpp"

namespace aoicache::sim {

struct SimulationConfig {
  std::uint64_t horizon = 1'000'000;
  /// Leading slots left out of every average.
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
  /// Keep mean/variance of the per-slot decision size.
  bool record_candidate_sizes = false;
  /// Per-slot CSV (slot,downloads,weighted_aoi) when non-empty. Debug aid.
  std::string trace_path;
};

struct SimulationReport {
  double avg_weighted_aoi = 0.0;
  double avg_downloads_per_slot = 0.0;
  /// Over all slots, warmup included.
  std::size_t max_downloads_in_any_slot = 0;
  std::size_t max_age = 0;
  std::vector<double> per_file_update_frequency;
  /// Fraction of averaged slots file n spent in mode r.
  Matrix mode_occupancy;
  bool has_candidate_stats = false;
  double candidate_size_mean = 0.0;
  double candidate_size_variance = 0.0;
  std::uint64_t averaged_slots = 0;

  friend bool operator==(const SimulationReport&, const SimulationReport&) = default;
};

/// Validates cfg (horizon > warmup) and runs one replication. Popularity
/// modes start from each chain's stationary law and every age starts at 1.
/// Mode trajectories use per-file sub-streams of cfg.seed, policy draws a
/// separate one, so different policies see the same popularity paths.
SimulationReport simulate(const Ensemble& ensemble, const policies::DecisionPolicy& policy,
                          const SimulationConfig& cfg);

}  // namespace aoicache::sim
