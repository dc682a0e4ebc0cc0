#pragma once

// Price search for the relaxed N-file problem. For a download price W the
// Lagrangian splits into independent per-file programs; the total expected
// download rate d*(W) is non-increasing in W. The search brackets the price
// where d*(W) crosses the bandwidth M and mixes the two bracketing policies
// so that the expected rate is exactly M.

#include <cstddef>
#include <utility>
#include <vector>

#include "aoicache/cmdp.hpp"
#include "aoicache/model.hpp"

namespace aoicache::lagrange {

struct SearchOptions {
  /// Bracket width target relative to max(1, W).
  double tolerance = 1e-8;
  cmdp::SolveSettings solver;
  std::size_t workers = 1;
};

struct FileMix {
  cmdp::OccupationSolution left;
  cmdp::OccupationSolution right;
  /// lambda * left + (1 - lambda) * right, zero-padded to the larger bound.
  Matrix mu_bar;
  Matrix nu_bar;
};

struct MultiplierResult {
  double w_star = 0.0;
  double w_left = 0.0;
  double w_right = 0.0;
  double d_left = 0.0;
  double d_right = 0.0;
  double lambda = 1.0;
  std::size_t bandwidth = 0;
  std::vector<FileMix> per_file;
  /// (W, d*(W)) for every price evaluated, in evaluation order.
  std::vector<std::pair<double, double>> trace;
};

struct RelaxedPolicy {
  std::vector<cmdp::StationaryPolicy> policies;
  /// Per-file sum_x,r w(r) x mu_bar(x, r).
  std::vector<double> file_aoi;
  /// Total expected weighted AoI and total expected downloads per slot.
  double aoi = 0.0;
  double download_rate = 0.0;
};

/// d*(W): the sum over files of the per-file download fraction at price W.
double ensemble_download_rate(const Ensemble& ensemble, double multiplier,
                              const SearchOptions& options = {});

/// Doubles W from 1 until d*(W) <= M, then bisects. When d*(0) <= M the
/// result is the pure W = 0 policy. Throws NumericalError past 200 steps.
MultiplierResult find_multiplier(const Ensemble& ensemble, const SearchOptions& options = {});

/// Extracts xi_bar = nu_bar / mu_bar per file; the analytic AoI and rate are
/// the lambda-mixtures of the bracketing solutions.
RelaxedPolicy build_relaxed_policy(const MultiplierResult& result);

}  // namespace aoicache::lagrange
