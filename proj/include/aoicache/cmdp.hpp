#pragma once

// Per-file relaxed problem for a fixed download price W: minimize the
// long-run average of w(R_t) X_t + W u_t over stationary randomized
// policies, via the occupation-measure linear program on the truncated
// state space {1..X_ub} x {modes}.

#include <cstddef>
#include <optional>
#include <vector>

#include "aoicache/lp.hpp"
#include "aoicache/matrix.hpp"
#include "aoicache/model.hpp"

namespace aoicache::cmdp {

/// Steady-state probabilities mu(x, r) and occupation measures nu(x, r) of
/// one file at price W. Row x-1 holds age x; column r holds mode r.
struct OccupationSolution {
  double multiplier = 0.0;
  std::size_t age_bound = 0;
  Matrix mu;
  Matrix nu;
  double aoi_cost = 0.0;
  double download_fraction = 0.0;
  /// Ages actually carried by the LP before zero padding.
  std::size_t solved_ages = 0;

  /// aoi_cost + W * download_fraction.
  double objective() const { return aoi_cost + multiplier * download_fraction; }
};

/// Update probabilities xi(x, r); row x-1 holds age x.
class StationaryPolicy {
 public:
  /// Checks entries in [0, 1] and xi(X_ub, r) == 1. Throws InvalidParameter.
  explicit StationaryPolicy(Matrix xi);

  std::size_t age_bound() const { return xi_.rows(); }
  std::size_t num_modes() const { return xi_.cols(); }
  const Matrix& xi() const { return xi_; }

  /// Probability of updating at `age` (>= 1) in `mode`; 1 beyond the bound.
  double update_probability(std::size_t age, std::size_t mode) const {
    return age > xi_.rows() ? 1.0 : xi_(age - 1, mode);
  }

 private:
  Matrix xi_;
};

struct Performance {
  double aoi_cost = 0.0;
  double download_fraction = 0.0;
  Matrix mu;
};

struct SolveSettings {
  lp::SolveOptions lp;
  /// First age truncation tried before certifying against the full bound;
  /// 0 solves the program on the full range {1..X_ub} directly.
  std::size_t initial_truncation = 32;
};

/// ceil(1 + W / min_r w(r)), never less than 1.
std::size_t age_upper_bound(const FileModel& file, double multiplier);

/// The occupation-measure program over variables (mu, nu), mu first, each
/// laid out as index (x-1) * R + r, with balance equalities for age 1 and
/// for ages x > 1, total mass 1, and nu <= mu.
lp::LinearProgram build_per_file_lp(const FileModel& file, double multiplier);

/// Solves the per-file program. The solver works on ages {1..K} with K
/// doubled until the LP duals, extended to ages up to X_ub, certify
/// optimality for the full range; the result is zero-padded to X_ub rows.
/// Throws NumericalError if the LP is not solved to optimality.
OccupationSolution solve_per_file(const FileModel& file, double multiplier,
                                  const SolveSettings& settings = {});

/// xi = nu / mu where mu exceeds 1e-9, and 1 elsewhere; clamped to [0, 1].
StationaryPolicy extract_policy(const OccupationSolution& solution);

/// Exact long-run averages of the chain on (age, mode) induced by `policy`.
/// Throws ModelError if that chain has more than one recurrent class.
Performance analytic_performance(const StationaryPolicy& policy, const FileModel& file);

/// Per-mode thresholds tau_r (1-based: first age with xi > tol) when every
/// mode's column reads 0..0 [one fractional entry] 1..1 under tolerance
/// `tol`; nullopt otherwise.
std::optional<std::vector<std::size_t>> threshold_vector(const StationaryPolicy& policy,
                                                         double tol = 1e-7);

}  // namespace aoicache::cmdp
