#include "aoicache/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aoicache/cmdp.hpp"
#include "aoicache/errors.hpp"

namespace aoicache::oracle {

namespace {

constexpr double kSpanTolerance = 1e-10;
constexpr std::size_t kIterationCap = 1'000'000;
constexpr std::size_t kSearchCap = 1'000'000;
constexpr double kAperiodicity = 0.5;

}  // namespace

RviResult rvi_solve(const FileModel& file, double multiplier, std::size_t age_bound) {
  if (age_bound < cmdp::age_upper_bound(file, multiplier)) {
    throw InvalidParameter("RVI age bound is below the analytic bound");
  }
  const std::size_t modes = file.num_modes();
  const Matrix& p = file.chain().transition();

  // Q-values of the original (untransformed) problem under values h.
  const auto q_values = [&](const Matrix& h, std::size_t x, std::size_t r) {
    const double age_cost = file.weight(r) * static_cast<double>(x);
    double restart = 0.0;
    double advance = 0.0;
    for (std::size_t s = 0; s < modes; ++s) {
      restart += p(r, s) * h(0, s);
      if (x < age_bound) advance += p(r, s) * h(x, s);
    }
    const double update = age_cost + multiplier + restart;
    const double wait = x < age_bound ? age_cost + advance : std::numeric_limits<double>::infinity();
    return std::pair{update, wait};
  };

  Matrix h(age_bound, modes);
  Matrix next(age_bound, modes);
  RviResult result;
  double gain = 0.0;
  for (std::size_t iter = 1;; ++iter) {
    if (iter > kIterationCap) {
      throw NumericalError("relative value iteration exceeded the iteration cap");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t x = 1; x <= age_bound; ++x) {
      for (std::size_t r = 0; r < modes; ++r) {
        const auto [update, wait] = q_values(h, x, r);
        const double best = std::min(update, wait);
        next(x - 1, r) = kAperiodicity * best + (1.0 - kAperiodicity) * h(x - 1, r);
        const double diff = next(x - 1, r) - h(x - 1, r);
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
      }
    }
    const double reference = next(0, 0);
    for (std::size_t x = 0; x < age_bound; ++x) {
      for (std::size_t r = 0; r < modes; ++r) next(x, r) -= reference;
    }
    std::swap(h, next);
    gain = 0.5 * (lo + hi) / kAperiodicity;
    if (hi - lo <= kSpanTolerance) {
      result.iterations = iter;
      break;
    }
  }

  // The transform leaves h unchanged and scales the gain by the factor.
  result.average_cost = gain;
  result.greedy_policy.assign(age_bound, std::vector<int>(modes, 0));
  for (std::size_t x = 1; x <= age_bound; ++x) {
    for (std::size_t r = 0; r < modes; ++r) {
      const auto [update, wait] = q_values(h, x, r);
      result.greedy_policy[x - 1][r] = update < wait ? 1 : 0;
      result.bellman_residual =
          std::max(result.bellman_residual, std::abs(gain + h(x - 1, r) - std::min(update, wait)));
    }
  }
  result.bias_values = std::move(h);
  return result;
}

ThresholdSearch enumerate_thresholds(const FileModel& file, double multiplier,
                                     std::size_t age_bound) {
  const std::size_t modes = file.num_modes();
  double space = 1.0;
  for (std::size_t r = 0; r < modes; ++r) space *= static_cast<double>(age_bound);
  if (age_bound == 0 || space > static_cast<double>(kSearchCap)) {
    std::ostringstream msg;
    msg << "threshold search space " << age_bound << "^" << modes << " exceeds " << kSearchCap;
    throw InvalidParameter(msg.str());
  }

  ThresholdSearch best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> tau(modes, 1);
  while (true) {
    Matrix xi(age_bound, modes);
    for (std::size_t x = 1; x <= age_bound; ++x) {
      for (std::size_t r = 0; r < modes; ++r) xi(x - 1, r) = x >= tau[r] ? 1.0 : 0.0;
    }
    const auto perf = cmdp::analytic_performance(cmdp::StationaryPolicy(std::move(xi)), file);
    const double cost = perf.aoi_cost + multiplier * perf.download_fraction;
    if (best.thresholds.empty() || cost < best.cost - 1e-12 * std::max(1.0, std::abs(best.cost))) {
      best.cost = cost;
      best.thresholds = tau;
    }
    // Odometer over tau, last mode fastest, so visits are lexicographic.
    std::size_t r = modes;
    while (r > 0 && tau[r - 1] == age_bound) {
      tau[r - 1] = 1;
      --r;
    }
    if (r == 0) break;
    ++tau[r - 1];
  }
  return best;
}

}  // namespace aoicache::oracle
