#include "aoicache/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aoicache/errors.hpp"
#include "aoicache/parallel.hpp"

namespace aoicache::lagrange {

namespace {

constexpr std::size_t kStepCap = 200;
constexpr double kRateSlack = 1e-9;
constexpr double kFlatRate = 1e-9;

using Solutions = std::vector<cmdp::OccupationSolution>;

bool same_policy(const cmdp::OccupationSolution& a, const cmdp::OccupationSolution& b) {
  return std::abs(a.download_fraction - b.download_fraction) <= 1e-12 &&
         std::abs(a.aoi_cost - b.aoi_cost) <= 1e-12 * std::max(1.0, std::abs(a.aoi_cost));
}

Matrix pad_rows(const Matrix& m, std::size_t rows) {
  Matrix out(rows, m.cols());
  for (std::size_t x = 0; x < std::min(rows, m.rows()); ++x) {
    std::ranges::copy(m.row(x), out.row(x).begin());
  }
  return out;
}

// A solution optimal at both ends of [a, b] is optimal throughout: the value
// W -> min_pi (a_pi + W d_pi) is concave and the shared policy's value is
// linear in W. Re-labels such a solution for a price inside the interval.
cmdp::OccupationSolution relabel(const cmdp::OccupationSolution& sol, const FileModel& file,
                                 double w) {
  cmdp::OccupationSolution out = sol;
  out.multiplier = w;
  out.age_bound = std::max(sol.age_bound, cmdp::age_upper_bound(file, w));
  out.mu = pad_rows(sol.mu, out.age_bound);
  out.nu = pad_rows(sol.nu, out.age_bound);
  return out;
}

class EnsembleSolver {
 public:
  EnsembleSolver(const Ensemble& ensemble, const SearchOptions& options)
      : ensemble_(ensemble), options_(options), representative_(ensemble.size()) {
    for (std::size_t n = 0; n < ensemble.size(); ++n) {
      representative_[n] = n;
      for (std::size_t k = 0; k < n; ++k) {
        if (representative_[k] == k && ensemble.file(k) == ensemble.file(n)) {
          representative_[n] = k;
          break;
        }
      }
      if (representative_[n] == n) distinct_.push_back(n);
    }
  }

  /// Solves every file at price w. `below`/`above` are solutions at prices
  /// bracketing w; files whose policy agrees at both ends are not re-solved.
  Solutions solve(double w, const Solutions* below = nullptr, const Solutions* above = nullptr) {
    Solutions out(ensemble_.size());
    parallel_for(distinct_.size(), options_.workers, [&](std::size_t i) {
      const std::size_t n = distinct_[i];
      const FileModel& file = ensemble_.file(n);
      if (below && above && same_policy((*below)[n], (*above)[n])) {
        out[n] = relabel((*below)[n], file, w);
        return;
      }
      cmdp::SolveSettings settings = options_.solver;
      if (below && settings.initial_truncation != 0) {
        settings.initial_truncation =
            std::max(settings.initial_truncation, (*below)[n].solved_ages);
      }
      out[n] = cmdp::solve_per_file(file, w, settings);
    });
    for (std::size_t n = 0; n < ensemble_.size(); ++n) {
      if (representative_[n] != n) out[n] = out[representative_[n]];
    }
    double rate = 0.0;
    for (const auto& sol : out) rate += sol.download_fraction;
    trace_.emplace_back(w, rate);
    return out;
  }

  static double rate(const Solutions& sols) {
    double d = 0.0;
    for (const auto& sol : sols) d += sol.download_fraction;
    return d;
  }

  std::vector<std::pair<double, double>> take_trace() { return std::move(trace_); }

 private:
  const Ensemble& ensemble_;
  SearchOptions options_;
  std::vector<std::size_t> representative_;
  std::vector<std::size_t> distinct_;
  std::vector<std::pair<double, double>> trace_;
};

}  // namespace

double ensemble_download_rate(const Ensemble& ensemble, double multiplier,
                              const SearchOptions& options) {
  EnsembleSolver solver(ensemble, options);
  return EnsembleSolver::rate(solver.solve(multiplier));
}

MultiplierResult find_multiplier(const Ensemble& ensemble, const SearchOptions& options) {
  if (!(options.tolerance > 0.0)) {
    throw InvalidParameter("bisection tolerance must be positive");
  }
  const double target = static_cast<double>(ensemble.bandwidth());
  EnsembleSolver solver(ensemble, options);

  double w_left = 0.0;
  Solutions left = solver.solve(0.0);
  double w_right = 0.0;
  Solutions right = left;

  if (EnsembleSolver::rate(left) > target + kRateSlack) {
    w_right = 1.0;
    right = solver.solve(w_right, &left);
    std::size_t steps = 0;
    while (EnsembleSolver::rate(right) > target + kRateSlack) {
      if (++steps > kStepCap) {
        throw NumericalError("no price up to 2^200 brings the download rate under M");
      }
      w_left = w_right;
      left = std::move(right);
      w_right *= 2.0;
      right = solver.solve(w_right, &left);
    }
    steps = 0;
    while (w_right - w_left > options.tolerance * std::max(1.0, w_right)) {
      if (++steps > kStepCap) {
        std::ostringstream msg;
        msg << "bisection did not close the bracket [" << w_left << ", " << w_right << "] in "
            << kStepCap << " steps";
        throw NumericalError(msg.str());
      }
      const double mid = 0.5 * (w_left + w_right);
      Solutions middle = solver.solve(mid, &left, &right);
      if (EnsembleSolver::rate(middle) > target + kRateSlack) {
        w_left = mid;
        left = std::move(middle);
      } else {
        w_right = mid;
        right = std::move(middle);
      }
    }
  }

  MultiplierResult result;
  result.bandwidth = ensemble.bandwidth();
  result.w_left = w_left;
  result.w_right = w_right;
  result.w_star = w_right;
  result.d_left = EnsembleSolver::rate(left);
  result.d_right = EnsembleSolver::rate(right);
  if (w_right == 0.0 || std::abs(result.d_left - result.d_right) <= kFlatRate) {
    result.lambda = 1.0;
  } else {
    result.lambda = std::clamp((target - result.d_right) / (result.d_left - result.d_right), 0.0, 1.0);
  }
  result.trace = solver.take_trace();

  result.per_file.reserve(ensemble.size());
  for (std::size_t n = 0; n < ensemble.size(); ++n) {
    FileMix mix;
    const std::size_t rows = std::max(left[n].age_bound, right[n].age_bound);
    const Matrix mu_l = pad_rows(left[n].mu, rows);
    const Matrix nu_l = pad_rows(left[n].nu, rows);
    const Matrix mu_r = pad_rows(right[n].mu, rows);
    const Matrix nu_r = pad_rows(right[n].nu, rows);
    mix.mu_bar = Matrix(rows, mu_l.cols());
    mix.nu_bar = Matrix(rows, mu_l.cols());
    for (std::size_t x = 0; x < rows; ++x) {
      for (std::size_t r = 0; r < mu_l.cols(); ++r) {
        mix.mu_bar(x, r) = result.lambda * mu_l(x, r) + (1.0 - result.lambda) * mu_r(x, r);
        mix.nu_bar(x, r) = result.lambda * nu_l(x, r) + (1.0 - result.lambda) * nu_r(x, r);
      }
    }
    mix.left = std::move(left[n]);
    mix.right = std::move(right[n]);
    result.per_file.push_back(std::move(mix));
  }
  return result;
}

RelaxedPolicy build_relaxed_policy(const MultiplierResult& result) {
  RelaxedPolicy relaxed;
  const double lambda = result.lambda;
  for (const FileMix& mix : result.per_file) {
    cmdp::OccupationSolution mixed;
    mixed.mu = mix.mu_bar;
    mixed.nu = mix.nu_bar;
    mixed.age_bound = mix.mu_bar.rows();
    relaxed.policies.push_back(cmdp::extract_policy(mixed));
    const double aoi = lambda * mix.left.aoi_cost + (1.0 - lambda) * mix.right.aoi_cost;
    relaxed.file_aoi.push_back(aoi);
    relaxed.aoi += aoi;
    relaxed.download_rate +=
        lambda * mix.left.download_fraction + (1.0 - lambda) * mix.right.download_fraction;
  }
  return relaxed;
}

}  // namespace aoicache::lagrange
