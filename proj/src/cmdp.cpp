#include "aoicache/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aoicache/errors.hpp"

namespace aoicache::cmdp {

namespace {

constexpr double kUnreachedMass = 1e-9;
constexpr double kCertificateTolerance = 1e-9;

// Occupation program on ages {1..K} in the variables (nu, s) with s = mu - nu,
// which turns nu <= mu into plain non-negativity. Rows: one balance row per
// (x, r) followed by the total-mass row.
lp::LinearProgram build_reduced_lp(const FileModel& file, double w, std::size_t ages) {
  const std::size_t modes = file.num_modes();
  const std::size_t cells = ages * modes;
  const Matrix& p = file.chain().transition();
  const auto cell = [modes](std::size_t x, std::size_t r) { return (x - 1) * modes + r; };

  std::vector<double> objective(2 * cells);
  Matrix eq(cells + 1, 2 * cells);
  std::vector<double> rhs(cells + 1, 0.0);
  for (std::size_t x = 1; x <= ages; ++x) {
    for (std::size_t r = 0; r < modes; ++r) {
      const double age_cost = file.weight(r) * static_cast<double>(x);
      const std::size_t c = cell(x, r);
      objective[c] = age_cost + w;
      objective[cells + c] = age_cost;
      eq(c, c) += 1.0;
      eq(c, cells + c) += 1.0;
      // Every update in mode r re-enters age 1 in mode r''.
      for (std::size_t next = 0; next < modes; ++next) {
        eq(cell(1, next), c) -= p(r, next);
      }
      // Staying moves to age x + 1.
      if (x < ages) {
        for (std::size_t next = 0; next < modes; ++next) {
          eq(cell(x + 1, next), cells + c) -= p(r, next);
        }
      }
      eq(cells, c) = 1.0;
      eq(cells, cells + c) = 1.0;
    }
  }
  rhs[cells] = 1.0;
  return lp::LinearProgram(std::move(objective), std::move(eq), std::move(rhs), Matrix(0, 0), {});
}

// Extends the duals (h, g) of the program truncated at `ages` to ages up to
// `bound` by pricing every extra state at its update value, and checks the
// stay-constraints this leaves open. The terminal stay-constraint at `bound`
// is absorbed by shifting h by a constant.
bool certify(const FileModel& file, double w, std::size_t ages, std::size_t bound,
             const std::vector<double>& duals) {
  const std::size_t modes = file.num_modes();
  const Matrix& p = file.chain().transition();
  const double gain = duals.back();
  const double scale = std::max(1.0, std::abs(gain));

  std::vector<double> restart(modes, 0.0);  // W + sum_r'' P(r, r'') h(1, r'')
  for (std::size_t r = 0; r < modes; ++r) {
    restart[r] = w;
    for (std::size_t next = 0; next < modes; ++next) restart[r] += p(r, next) * duals[next];
  }
  const auto extended = [&](std::size_t x, std::size_t r) {
    return file.weight(r) * static_cast<double>(x) + restart[r] - gain;
  };
  for (std::size_t x = ages; x < bound; ++x) {
    for (std::size_t r = 0; r < modes; ++r) {
      const double h = x == ages ? duals[(x - 1) * modes + r] : extended(x, r);
      double stay = file.weight(r) * static_cast<double>(x) - gain - h;
      for (std::size_t next = 0; next < modes; ++next) stay += p(r, next) * extended(x + 1, next);
      if (stay < -kCertificateTolerance * scale) return false;
    }
  }
  return true;
}

// Solves a small dense system in place; false when numerically singular.
bool solve_dense(Matrix a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (std::abs(a(pivot, col)) < 1e-12) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a(r, r);
  return true;
}

}  // namespace

StationaryPolicy::StationaryPolicy(Matrix xi) : xi_(std::move(xi)) {
  if (xi_.rows() == 0 || xi_.cols() == 0) {
    throw InvalidParameter("stationary policy needs at least one age and one mode");
  }
  for (double v : xi_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidParameter("update probabilities must lie in [0, 1]");
    }
  }
  for (double v : xi_.row(xi_.rows() - 1)) {
    if (v != 1.0) {
      throw InvalidParameter("update probability at the age bound must be 1");
    }
  }
}

std::size_t age_upper_bound(const FileModel& file, double multiplier) {
  if (!(multiplier >= 0.0) || !std::isfinite(multiplier)) {
    throw InvalidParameter("multiplier W must be finite and non-negative");
  }
  const double bound = std::ceil(1.0 + multiplier / file.min_weight());
  return std::max<std::size_t>(1, static_cast<std::size_t>(bound));
}

lp::LinearProgram build_per_file_lp(const FileModel& file, double multiplier) {
  const std::size_t ages = age_upper_bound(file, multiplier);
  const std::size_t modes = file.num_modes();
  const std::size_t cells = ages * modes;
  const Matrix& p = file.chain().transition();
  const auto mu = [modes](std::size_t x, std::size_t r) { return (x - 1) * modes + r; };
  const auto nu = [=](std::size_t x, std::size_t r) { return cells + mu(x, r); };

  std::vector<double> objective(2 * cells);
  Matrix eq(cells + 1, 2 * cells);
  std::vector<double> eq_rhs(cells + 1, 0.0);
  Matrix ub(cells, 2 * cells);
  std::vector<double> ub_rhs(cells, 0.0);

  for (std::size_t x = 1; x <= ages; ++x) {
    for (std::size_t r = 0; r < modes; ++r) {
      objective[mu(x, r)] = file.weight(r) * static_cast<double>(x);
      objective[nu(x, r)] = multiplier;
      const std::size_t row = mu(x, r);
      eq(row, mu(x, r)) += 1.0;
      if (x == 1) {
        for (std::size_t y = 1; y <= ages; ++y) {
          for (std::size_t prev = 0; prev < modes; ++prev) {
            eq(row, nu(y, prev)) -= p(prev, r);
          }
        }
      } else {
        for (std::size_t prev = 0; prev < modes; ++prev) {
          eq(row, mu(x - 1, prev)) -= p(prev, r);
          eq(row, nu(x - 1, prev)) += p(prev, r);
        }
      }
      eq(cells, mu(x, r)) = 1.0;
      ub(row, nu(x, r)) = 1.0;
      ub(row, mu(x, r)) = -1.0;
    }
  }
  eq_rhs[cells] = 1.0;
  return lp::LinearProgram(std::move(objective), std::move(eq), std::move(eq_rhs), std::move(ub),
                           std::move(ub_rhs));
}

OccupationSolution solve_per_file(const FileModel& file, double multiplier,
                                  const SolveSettings& settings) {
  const std::size_t bound = age_upper_bound(file, multiplier);
  const std::size_t modes = file.num_modes();
  std::size_t ages = settings.initial_truncation == 0
                         ? bound
                         : std::min(bound, settings.initial_truncation);

  lp::LpSolution lp_solution;
  while (true) {
    lp_solution = lp::solve(build_reduced_lp(file, multiplier, ages), settings.lp);
    if (lp_solution.status != lp::Status::kOptimal) {
      std::ostringstream msg;
      msg << "per-file LP at W=" << multiplier << " returned status "
          << lp::to_string(lp_solution.status);
      throw NumericalError(msg.str());
    }
    if (ages == bound || certify(file, multiplier, ages, bound, lp_solution.eq_duals)) break;
    ages = std::min(bound, 2 * ages);
  }

  OccupationSolution solution;
  solution.multiplier = multiplier;
  solution.age_bound = bound;
  solution.solved_ages = ages;
  solution.mu = Matrix(bound, modes);
  solution.nu = Matrix(bound, modes);
  const std::size_t cells = ages * modes;
  double total_mass = 0.0;
  for (std::size_t x = 1; x <= ages; ++x) {
    for (std::size_t r = 0; r < modes; ++r) {
      const std::size_t c = (x - 1) * modes + r;
      const double update = lp_solution.values[c];
      const double stay = lp_solution.values[cells + c];
      solution.nu(x - 1, r) = update;
      solution.mu(x - 1, r) = update + stay;
      solution.aoi_cost += file.weight(r) * static_cast<double>(x) * (update + stay);
      solution.download_fraction += update;
      total_mass += update + stay;
    }
  }
  if (std::abs(total_mass - 1.0) > 1e-8 || solution.download_fraction > 1.0 + 1e-8) {
    std::ostringstream msg;
    msg << "per-file LP at W=" << multiplier << " produced mass " << total_mass
        << " and download fraction " << solution.download_fraction;
    throw NumericalError(msg.str());
  }
  return solution;
}

StationaryPolicy extract_policy(const OccupationSolution& solution) {
  Matrix xi(solution.mu.rows(), solution.mu.cols(), 1.0);
  for (std::size_t x = 0; x + 1 < xi.rows(); ++x) {
    for (std::size_t r = 0; r < xi.cols(); ++r) {
      const double mass = solution.mu(x, r);
      if (mass > kUnreachedMass) {
        xi(x, r) = std::clamp(solution.nu(x, r) / mass, 0.0, 1.0);
      }
    }
  }
  return StationaryPolicy(std::move(xi));
}

Performance analytic_performance(const StationaryPolicy& policy, const FileModel& file) {
  const std::size_t modes = file.num_modes();
  if (policy.num_modes() != modes) {
    throw InvalidParameter("policy and file disagree on the number of modes");
  }
  const std::size_t ages = policy.age_bound();
  const Matrix& p = file.chain().transition();

  // The age-x distribution is v_1 * reach[x], where v_1 is the (unnormalized)
  // distribution over modes at age 1. Renewal: v_1 = v_1 * restart.
  std::vector<Matrix> reach;
  reach.reserve(ages);
  Matrix current(modes, modes);
  for (std::size_t r = 0; r < modes; ++r) current(r, r) = 1.0;
  Matrix restart(modes, modes);
  for (std::size_t x = 1; x <= ages; ++x) {
    Matrix next(modes, modes);
    for (std::size_t i = 0; i < modes; ++i) {
      for (std::size_t r = 0; r < modes; ++r) {
        const double at = current(i, r);
        if (at == 0.0) continue;
        const double update = policy.update_probability(x, r);
        for (std::size_t s = 0; s < modes; ++s) {
          restart(i, s) += at * update * p(r, s);
          next(i, s) += at * (1.0 - update) * p(r, s);
        }
      }
    }
    reach.push_back(std::move(current));
    current = std::move(next);
  }

  // Solve v (restart - I) = 0 with the total-mass row replacing one equation.
  Matrix system(modes, modes);
  std::vector<double> rhs(modes, 0.0);
  for (std::size_t s = 0; s < modes; ++s) {
    for (std::size_t i = 0; i < modes; ++i) {
      system(s, i) = restart(i, s) - (i == s ? 1.0 : 0.0);
    }
  }
  for (std::size_t i = 0; i < modes; ++i) {
    double mass = 0.0;
    for (const Matrix& m : reach) {
      for (std::size_t r = 0; r < modes; ++r) mass += m(i, r);
    }
    system(modes - 1, i) = mass;
  }
  rhs[modes - 1] = 1.0;
  if (!solve_dense(std::move(system), rhs)) {
    throw ModelError("policy-induced chain is not ergodic");
  }

  Performance perf;
  perf.mu = Matrix(ages, modes);
  for (std::size_t x = 1; x <= ages; ++x) {
    for (std::size_t r = 0; r < modes; ++r) {
      double mass = 0.0;
      for (std::size_t i = 0; i < modes; ++i) mass += rhs[i] * reach[x - 1](i, r);
      mass = std::max(mass, 0.0);
      perf.mu(x - 1, r) = mass;
      perf.aoi_cost += file.weight(r) * static_cast<double>(x) * mass;
      perf.download_fraction += policy.update_probability(x, r) * mass;
    }
  }
  return perf;
}

std::optional<std::vector<std::size_t>> threshold_vector(const StationaryPolicy& policy,
                                                         double tol) {
  std::vector<std::size_t> thresholds(policy.num_modes());
  for (std::size_t r = 0; r < policy.num_modes(); ++r) {
    // 0: still in the idle prefix, 1: seen the fractional entry, 2: in the update suffix.
    int phase = 0;
    thresholds[r] = policy.age_bound();
    for (std::size_t x = 1; x <= policy.age_bound(); ++x) {
      const double v = policy.update_probability(x, r);
      const bool zero = v <= tol;
      const bool one = v >= 1.0 - tol;
      if (zero) {
        if (phase != 0) return std::nullopt;
        continue;
      }
      if (phase == 0) thresholds[r] = x;
      if (one) {
        phase = 2;
      } else {
        if (phase != 0) return std::nullopt;
        phase = 1;
      }
    }
  }
  return thresholds;
}

}  // namespace aoicache::cmdp
