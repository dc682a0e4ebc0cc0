#include "aoicache/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aoicache/errors.hpp"

namespace aoicache::lp {

namespace {

// Consecutive degenerate pivots tolerated under largest-coefficient pricing
// before falling back to Bland's rule.
constexpr std::size_t kDegenerateStreakLimit = 50;
// Smallest entry accepted when pivoting a zero-level artificial out.
constexpr double kDriveOutTolerance = 1e-7;
// Largest primal residual accepted from a final basis, relative to the rhs.
constexpr double kResidualLimit = 1e-7;
// Ratios within this relative distance count as tied.
constexpr double kRatioTie = 1e-12;
constexpr double kRefactorDrop = 1e-13;
constexpr double kSingularPivot = 1e-11;
constexpr double kMaxPivotTolerance = 1e-5;

bool shape_ok(const Matrix& m, std::size_t rows, std::size_t cols) {
  return m.rows() == rows && (rows == 0 || m.cols() == cols);
}

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SolveOptions& options)
      : options_(options), num_structural_(lp.num_vars()) {
    const std::size_t n = lp.num_vars();
    const std::size_t m_eq = lp.num_eq();
    const std::size_t m_ub = lp.num_ub();
    const std::size_t m = m_eq + m_ub;

    sign_.assign(m, 1.0);
    std::vector<bool> needs_artificial(m, false);
    for (std::size_t i = 0; i < m_eq; ++i) {
      if (lp.eq_rhs()[i] < 0.0) sign_[i] = -1.0;
      needs_artificial[i] = true;
    }
    for (std::size_t i = 0; i < m_ub; ++i) {
      if (lp.ub_rhs()[i] < 0.0) {
        sign_[m_eq + i] = -1.0;
        needs_artificial[m_eq + i] = true;
      }
    }
    const auto num_artificial =
        static_cast<std::size_t>(std::count(needs_artificial.begin(), needs_artificial.end(), true));
    num_enterable_ = n + m_ub;
    const std::size_t cols = num_enterable_ + num_artificial;

    t_ = Matrix(m, cols);
    rhs_.assign(m, 0.0);
    basis_.assign(m, 0);
    unit_column_.assign(m, 0);
    cost_.assign(cols, 0.0);

    std::size_t next_artificial = num_enterable_;
    for (std::size_t i = 0; i < m; ++i) {
      const bool is_eq = i < m_eq;
      const auto source = is_eq ? lp.eq_matrix().row(i) : lp.ub_matrix().row(i - m_eq);
      auto row = t_.row(i);
      for (std::size_t j = 0; j < n; ++j) row[j] = sign_[i] * source[j];
      rhs_[i] = sign_[i] * (is_eq ? lp.eq_rhs()[i] : lp.ub_rhs()[i - m_eq]);
      if (!is_eq) row[n + (i - m_eq)] = sign_[i];
      if (needs_artificial[i]) {
        row[next_artificial] = 1.0;
        basis_[i] = next_artificial;
        unit_column_[i] = next_artificial;
        ++next_artificial;
      } else {
        basis_[i] = n + (i - m_eq);
        unit_column_[i] = basis_[i];
      }
    }
    phase_cost_.assign(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (t_(i, j) != 0.0) original_.push_back({i, j, t_(i, j)});
      }
    }
    original_rhs_ = rhs_;
    refactor_interval_ = std::max<std::size_t>(50, m / 2);
    pivot_tolerance_ = options_.pivot_tolerance;
    good_basis_ = basis_;
  }

  std::size_t pivots() const { return pivots_; }

  /// Phase 1. Returns false when the program is infeasible.
  bool find_feasible_basis() {
    double rhs_scale = 1.0;
    for (double b : rhs_) rhs_scale = std::max(rhs_scale, std::abs(b));
    std::ranges::fill(phase_cost_, 0.0);
    for (std::size_t j = num_enterable_; j < t_.cols(); ++j) phase_cost_[j] = 1.0;
    reprice();

    if (iterate(num_enterable_) == Outcome::kUnbounded) {
      throw NumericalError("phase-one simplex reported an unbounded direction");
    }
    if (-cost_rhs_ > options_.feasibility_tolerance * rhs_scale) return false;

    // Pivot zero-level artificials out of the basis on the largest entry of
    // their row; rows where none is usable are redundant and stay inert.
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (!is_artificial(basis_[i])) continue;
      const auto row = t_.row(i);
      std::size_t best = num_enterable_;
      double largest = kDriveOutTolerance;
      for (std::size_t j = 0; j < num_enterable_; ++j) {
        if (std::abs(row[j]) > largest) {
          largest = std::abs(row[j]);
          best = j;
        }
      }
      rhs_[i] = 0.0;
      if (best < num_enterable_) pivot(i, best);
    }
    refresh();
    return true;
  }

  /// Phase 2 with the real objective. Returns false when unbounded.
  bool optimize(const std::vector<double>& objective) {
    std::ranges::fill(phase_cost_, 0.0);
    std::copy(objective.begin(), objective.end(), phase_cost_.begin());
    reprice();
    return iterate(num_enterable_) == Outcome::kOptimal;
  }

  std::vector<double> primal() const {
    std::vector<double> z(num_structural_, 0.0);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i] < num_structural_) z[basis_[i]] = std::max(rhs_[i], 0.0);
    }
    return z;
  }

  /// Row prices y with the original row signs restored.
  std::vector<double> duals() const {
    std::vector<double> y(basis_.size());
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      y[i] = -sign_[i] * cost_[unit_column_[i]];
    }
    return y;
  }

 private:
  enum class Outcome { kOptimal, kUnbounded };

  bool is_artificial(std::size_t col) const { return col >= num_enterable_; }

  Outcome iterate(std::size_t enter_limit) {
    const double tol = options_.feasibility_tolerance;
    std::size_t degenerate_streak = 0;
    bool bland = false;
    while (true) {
      std::size_t entering = enter_limit;
      double best = -tol;
      for (std::size_t j = 0; j < enter_limit; ++j) {
        if (cost_[j] < best) {
          entering = j;
          if (bland) break;
          best = cost_[j];
        }
      }
      if (entering == enter_limit) {
        // Confirm on a freshly computed tableau before stopping.
        if (since_refactor_ == 0) return Outcome::kOptimal;
        refresh();
        continue;
      }

      // Harris two-pass ratio test: bound the step with every row relaxed by
      // the feasibility tolerance, then take the largest pivot element among
      // rows whose exact ratio fits under that bound. Under Bland's rule the
      // smallest basic index among the minimum ratios leaves instead.
      std::size_t leaving = basis_.size();
      double bound = std::numeric_limits<double>::infinity();
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double a = t_(i, entering);
        if (a <= pivot_tolerance_) continue;
        const double value = std::max(rhs_[i], 0.0);
        bound = std::min(bound, (value + tol) / a);
        min_ratio = std::min(min_ratio, value / a);
      }
      double best_ratio = min_ratio;
      for (std::size_t i = 0; i < basis_.size() && std::isfinite(bound); ++i) {
        const double a = t_(i, entering);
        if (a <= pivot_tolerance_) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        bool take = false;
        if (bland) {
          take = ratio <= min_ratio + kRatioTie * std::max(1.0, min_ratio) &&
                 (leaving == basis_.size() || basis_[i] < basis_[leaving]);
        } else {
          take = ratio <= bound && (leaving == basis_.size() || a > t_(leaving, entering));
        }
        if (take) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving == basis_.size()) return Outcome::kUnbounded;

      if (best_ratio <= kRatioTie) {
        if (++degenerate_streak > kDegenerateStreakLimit) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
      pivot(leaving, entering);
      if (since_refactor_ >= refactor_interval_) refresh();
      if (pivots_ > options_.max_pivots) {
        std::ostringstream msg;
        msg << "simplex exceeded " << options_.max_pivots << " pivots";
        throw NumericalError(msg.str());
      }
    }
  }

  // Reduced costs of the current phase for the current basis.
  void reprice() {
    cost_ = phase_cost_;
    cost_rhs_ = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const double cb = phase_cost_[basis_[i]];
      if (cb == 0.0) continue;
      const auto row = t_.row(i);
      for (std::size_t j = 0; j < t_.cols(); ++j) cost_[j] -= cb * row[j];
      cost_rhs_ -= cb * rhs_[i];
    }
  }

  // Rebuilds the tableau as B^-1 [A | b] from the original data, discarding
  // the rounding error accumulated by successive pivots.
  // Refactors, and if the basis has become numerically singular falls back
  // to the last good basis and stops accepting small pivots.
  void refresh() {
    if (refactor()) {
      good_basis_ = basis_;
      return;
    }
    pivot_tolerance_ *= 100.0;
    if (pivot_tolerance_ > kMaxPivotTolerance || good_basis_.empty()) {
      std::ostringstream msg;
      msg << "simplex basis became singular after " << pivots_ << " pivots";
      throw NumericalError(msg.str());
    }
    basis_ = good_basis_;
    if (!refactor()) throw NumericalError("simplex could not restore a nonsingular basis");
  }

  bool refactor() {
    since_refactor_ = 0;
    const std::size_t m = basis_.size();
    std::vector<std::size_t> position(t_.cols(), m);
    for (std::size_t i = 0; i < m; ++i) position[basis_[i]] = i;
    Matrix b(m, m);
    for (const Entry& e : original_) {
      if (position[e.col] < m) b(e.row, position[e.col]) = e.value;
    }
    Matrix inverse(m, m);
    for (std::size_t i = 0; i < m; ++i) inverse(i, i) = 1.0;
    // Gauss-Jordan with partial pivoting; b's columns follow basis order.
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < m; ++i) {
        if (std::abs(b(i, k)) > std::abs(b(p, k))) p = i;
      }
      if (std::abs(b(p, k)) < kSingularPivot) return false;
      if (p != k) {
        for (std::size_t j = 0; j < m; ++j) {
          std::swap(b(p, j), b(k, j));
          std::swap(inverse(p, j), inverse(k, j));
        }
      }
      const double inv = 1.0 / b(k, k);
      for (std::size_t j = 0; j < m; ++j) {
        b(k, j) *= inv;
        inverse(k, j) *= inv;
      }
      for (std::size_t i = 0; i < m; ++i) {
        const double f = b(i, k);
        if (i == k || f == 0.0) continue;
        for (std::size_t j = k; j < m; ++j) b(i, j) -= f * b(k, j);
        for (std::size_t j = 0; j < m; ++j) inverse(i, j) -= f * inverse(k, j);
      }
    }
    // Row k of `inverse` now belongs to the k-th basic variable.
    t_ = Matrix(m, t_.cols());
    for (const Entry& e : original_) {
      for (std::size_t i = 0; i < m; ++i) t_(i, e.col) += inverse(i, e.row) * e.value;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) v += inverse(i, k) * original_rhs_[k];
      rhs_[i] = v;
      for (double& x : t_.row(i)) {
        if (std::abs(x) < kRefactorDrop) x = 0.0;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) t_(k, basis_[i]) = k == i ? 1.0 : 0.0;
    }
    reprice();
    return true;
  }

  void pivot(std::size_t r, std::size_t col) {
    ++pivots_;
    ++since_refactor_;
    auto pivot_row = t_.row(r);
    const double inv = 1.0 / pivot_row[col];
    nonzero_.clear();
    for (std::size_t j = 0; j < pivot_row.size(); ++j) {
      if (pivot_row[j] != 0.0) {
        pivot_row[j] *= inv;
        nonzero_.push_back(j);
      }
    }
    pivot_row[col] = 1.0;
    rhs_[r] *= inv;

    const auto eliminate = [&](std::span<double> row, double& rhs) {
      const double f = row[col];
      if (f == 0.0) return;
      for (std::size_t j : nonzero_) row[j] -= f * pivot_row[j];
      row[col] = 0.0;
      rhs -= f * rhs_[r];
    };
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (i != r) eliminate(t_.row(i), rhs_[i]);
    }
    eliminate(cost_, cost_rhs_);
    basis_[r] = col;
  }

  SolveOptions options_;
  std::size_t num_structural_;
  std::size_t num_enterable_ = 0;
  Matrix t_;
  std::vector<double> rhs_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> unit_column_;
  std::vector<double> sign_;
  std::vector<double> cost_;
  double cost_rhs_ = 0.0;
  std::vector<std::size_t> nonzero_;
  std::size_t pivots_ = 0;

  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };
  std::vector<Entry> original_;
  std::vector<double> original_rhs_;
  std::vector<double> phase_cost_;
  std::size_t refactor_interval_ = 50;
  std::size_t since_refactor_ = 0;
  std::vector<std::size_t> good_basis_;
  double pivot_tolerance_ = 0.0;
};

}  // namespace

LinearProgram::LinearProgram(std::vector<double> objective, Matrix eq_matrix,
                             std::vector<double> eq_rhs, Matrix ub_matrix,
                             std::vector<double> ub_rhs)
    : objective_(std::move(objective)),
      eq_matrix_(std::move(eq_matrix)),
      eq_rhs_(std::move(eq_rhs)),
      ub_matrix_(std::move(ub_matrix)),
      ub_rhs_(std::move(ub_rhs)) {
  const std::size_t n = objective_.size();
  if (n == 0) throw InvalidParameter("linear program needs at least one variable");
  if (!shape_ok(eq_matrix_, eq_rhs_.size(), n)) {
    throw InvalidParameter("equality matrix shape does not match rhs length and variable count");
  }
  if (!shape_ok(ub_matrix_, ub_rhs_.size(), n)) {
    throw InvalidParameter("inequality matrix shape does not match rhs length and variable count");
  }
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
  }
  return "unknown";
}

LpSolution solve(const LinearProgram& lp, const SolveOptions& options) {
  Tableau tableau(lp, options);
  LpSolution solution;
  if (!tableau.find_feasible_basis()) {
    solution.status = Status::kInfeasible;
    solution.pivots = tableau.pivots();
    return solution;
  }
  if (!tableau.optimize(lp.objective())) {
    solution.status = Status::kUnbounded;
    solution.pivots = tableau.pivots();
    return solution;
  }
  solution.status = Status::kOptimal;
  solution.values = tableau.primal();
  double scale = 1.0;
  for (double b : lp.eq_rhs()) scale = std::max(scale, std::abs(b));
  for (double h : lp.ub_rhs()) scale = std::max(scale, std::abs(h));
  const double residual = max_residual(lp, solution.values);
  if (residual > kResidualLimit * scale) {
    std::ostringstream msg;
    msg << "simplex basis lost feasibility (residual " << residual << ")";
    throw NumericalError(msg.str());
  }
  solution.objective_value = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    solution.objective_value += lp.objective()[j] * solution.values[j];
  }
  auto duals = tableau.duals();
  solution.eq_duals.assign(duals.begin(), duals.begin() + static_cast<std::ptrdiff_t>(lp.num_eq()));
  solution.ub_duals.assign(duals.begin() + static_cast<std::ptrdiff_t>(lp.num_eq()), duals.end());
  solution.pivots = tableau.pivots();
  return solution;
}

double max_residual(const LinearProgram& lp, const std::vector<double>& values) {
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, -v);
  const auto row_value = [&](std::span<const double> row) {
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * values[j];
    return s;
  };
  for (std::size_t i = 0; i < lp.num_eq(); ++i) {
    worst = std::max(worst, std::abs(row_value(lp.eq_matrix().row(i)) - lp.eq_rhs()[i]));
  }
  for (std::size_t i = 0; i < lp.num_ub(); ++i) {
    worst = std::max(worst, row_value(lp.ub_matrix().row(i)) - lp.ub_rhs()[i]);
  }
  return worst;
}

}  // namespace aoicache::lp
