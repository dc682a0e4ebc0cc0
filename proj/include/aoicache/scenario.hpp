#pragma once

// Scenario files: JSON documents describing an ensemble, solver and
// simulation settings, the policies to run, and optional sweep grids.
// Unknown keys are rejected with the offending path in the message.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aoicache/lagrange.hpp"
#include "aoicache/matrix.hpp"
#include "aoicache/model.hpp"

namespace aoicache::scenario {

struct FileSpec {
  /// Set when the file was given as a two-mode chain; overrides `transition`.
  std::optional<double> q;
  Matrix transition;
  std::vector<double> weights;
};

struct EnsembleSpec {
  enum class Kind { kZipf, kHomogeneous, kExplicit };
  Kind kind = Kind::kZipf;
  std::size_t num_files = 0;
  std::size_t bandwidth = 0;
  // zipf
  double alpha = 1.5;
  double q = 0.9;
  double low_factor = 0.2;
  double high_factor = 1.8;
  // homogeneous: files[0]; explicit: one entry per file
  std::vector<FileSpec> files;

  /// Two-mode q of the ensemble, when it has one.
  std::optional<double> two_mode_q() const;
};

struct SolverSpec {
  double bisection_tolerance = 1e-8;
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  std::size_t initial_truncation = 32;

  lagrange::SearchOptions search_options(std::size_t workers) const;
};

struct SimulationSpec {
  std::uint64_t horizon = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
  std::size_t replications = 10;
};

struct ScenarioConfig {
  std::string id = "scenario";
  EnsembleSpec ensemble;
  SolverSpec solver;
  SimulationSpec simulation;
  std::vector<std::string> policies{"truncated", "sqrt"};
  std::vector<double> sweep_q;
  std::vector<std::size_t> sweep_bandwidth;
  std::vector<std::size_t> asymptotic_files;
  std::size_t asymptotic_theta = 0;
};

/// Throws ConfigError naming the offending field.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Builds the ensemble, optionally overriding q (two-mode kinds), N or M.
/// Invariant violations surface as ConfigError.
Ensemble build_ensemble(const EnsembleSpec& spec, std::optional<double> q = std::nullopt,
                        std::optional<std::size_t> num_files = std::nullopt,
                        std::optional<std::size_t> bandwidth = std::nullopt);

}  // namespace aoicache::scenario
