#pragma once

// Dense linear programming in the form
//
//   minimize    c' z
//   subject to  A z  = b
//               G z <= h
//               z   >= 0
//
// solved with a two-phase primal simplex on a dense tableau.

#include <cstddef>
#include <string_view>
#include <vector>

#include "aoicache/matrix.hpp"

namespace aoicache::lp {

class LinearProgram {
 public:
  /// Throws InvalidParameter when the dimensions are inconsistent. A matrix
  /// with zero rows stands for "no constraints of that kind".
  LinearProgram(std::vector<double> objective, Matrix eq_matrix, std::vector<double> eq_rhs,
                Matrix ub_matrix, std::vector<double> ub_rhs);

  std::size_t num_vars() const { return objective_.size(); }
  std::size_t num_eq() const { return eq_rhs_.size(); }
  std::size_t num_ub() const { return ub_rhs_.size(); }

  const std::vector<double>& objective() const { return objective_; }
  const Matrix& eq_matrix() const { return eq_matrix_; }
  const std::vector<double>& eq_rhs() const { return eq_rhs_; }
  const Matrix& ub_matrix() const { return ub_matrix_; }
  const std::vector<double>& ub_rhs() const { return ub_rhs_; }

 private:
  std::vector<double> objective_;
  Matrix eq_matrix_;
  std::vector<double> eq_rhs_;
  Matrix ub_matrix_;
  std::vector<double> ub_rhs_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

std::string_view to_string(Status status);

struct LpSolution {
  Status status = Status::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  /// Optimal dual prices, one per equality row and per inequality row, so
  /// that c_j - eq_duals' A_j - ub_duals' G_j >= 0 for every column j.
  /// Inequality duals are <= 0. Only filled when status is kOptimal.
  std::vector<double> eq_duals;
  std::vector<double> ub_duals;
  std::size_t pivots = 0;
};

struct SolveOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  std::size_t max_pivots = 1'000'000;
};

/// Pricing picks the most negative reduced cost; after a run of degenerate
/// pivots it switches to Bland's smallest-index rule until the objective
/// moves again, which rules out cycling. Deterministic for a given input.
/// Throws NumericalError when max_pivots is exceeded.
LpSolution solve(const LinearProgram& lp, const SolveOptions& options = {});

/// Largest violation of A z = b, G z <= h and z >= 0 at `values`.
double max_residual(const LinearProgram& lp, const std::vector<double>& values);

}  // namespace aoicache::lp
