#pragma once

// Experiment drivers behind the command-line tool: relaxed solve, policy
// simulation, q sweeps and N-scaling runs, each producing CSV rows. All
// output is a function of the scenario and the explicit arguments; the
// optional wall-time column is the only exception.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aoicache/lagrange.hpp"
#include "aoicache/model.hpp"
#include "aoicache/scenario.hpp"

namespace aoicache::experiments {

struct ResultRow {
  std::string scenario;
  std::string policy;
  std::optional<double> q;
  std::size_t num_files = 0;
  std::size_t bandwidth = 0;
  /// Replication index, or "all" for the across-replication aggregate.
  std::string replication = "all";
  std::optional<double> analytic_aoi;
  double simulated_aoi = 0.0;
  double simulated_aoi_stderr = 0.0;
  double avg_downloads = 0.0;
  std::size_t max_downloads = 0;
  double wall_time = 0.0;
};

struct AsymptoticRow {
  std::size_t num_files = 0;
  std::size_t bandwidth = 0;
  std::size_t theta = 0;
  double w_star = 0.0;
  double lambda = 0.0;
  double analytic_aoi = 0.0;
  double simulated_aoi = 0.0;
  double simulated_aoi_stderr = 0.0;
  double gap = 0.0;
  double gap_stderr = 0.0;
  std::size_t max_downloads = 0;
  /// Largest |difference| of the per-file mixed measures from the first N.
  double solution_deviation = 0.0;
  double wall_time = 0.0;
};

struct SolveReport {
  Ensemble ensemble;
  lagrange::MultiplierResult result;
  lagrange::RelaxedPolicy relaxed;
};

/// Formats with 9 significant digits.
std::string format_number(double value);

SolveReport run_solve(const scenario::ScenarioConfig& config, std::size_t workers);
void write_solve_csv(std::ostream& out, const scenario::ScenarioConfig& config,
                     const SolveReport& report);

/// One row per (policy, replication) plus one "all" row per policy.
std::vector<ResultRow> run_simulate(const scenario::ScenarioConfig& config, std::size_t workers);

/// One aggregate row per (M, q, policy), M outermost. Empty lists fall back
/// to the scenario's sweep section.
std::vector<ResultRow> run_sweep(const scenario::ScenarioConfig& config, std::vector<double> q_values,
                                 std::vector<std::size_t> bandwidths, std::size_t workers);

/// Homogeneous ensembles with M = N / theta; simulates the truncated policy
/// against the relaxed bound. Throws ConfigError when theta does not divide
/// some N, NumericalError when the per-file relaxed solution drifts with N
/// by more than 1e-8.
std::vector<AsymptoticRow> run_asymptotic(const scenario::ScenarioConfig& config,
                                          std::vector<std::size_t> file_counts, std::size_t theta,
                                          std::size_t workers);

void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool timing);
void write_asymptotic_csv(std::ostream& out, const std::vector<AsymptoticRow>& rows, bool timing);

}  // namespace aoicache::experiments
