#include <doctest.h>

#include "aoicache/cmdp.hpp"
#include "aoicache/lagrange.hpp"

using namespace aoicache;

namespace {

FileModel unit_file() {
  Matrix p(1, 1);
  p(0, 0) = 1.0;
  return FileModel(PopularityChain(p), {1.0});
}

}  // namespace

TEST_SUITE("lagrange") {

TEST_CASE("ensemble download rate") {
  const Ensemble zipf = zipf_ensemble(6, 1.5, 0.9, 0.2, 1.8, 2);
  CHECK(lagrange::ensemble_download_rate(zipf, 0.0) == doctest::Approx(6.0).epsilon(1e-12));

  const FileModel file(two_mode_chain(0.7), {0.5, 1.5});
  const Ensemble same = homogeneous_ensemble(5, 1, file);
  const double single = cmdp::solve_per_file(file, 6.0).download_fraction;
  CHECK(lagrange::ensemble_download_rate(same, 6.0) == doctest::Approx(5.0 * single).epsilon(1e-12));

  const double d = lagrange::ensemble_download_rate(homogeneous_ensemble(10, 3, unit_file()), 10.0);
  CHECK(d >= 2.0 - 1e-9);
  CHECK(d <= 2.5 + 1e-9);
}

TEST_CASE("vacuous bandwidth") {
  const Ensemble zipf = zipf_ensemble(8, 1.5, 0.9, 0.2, 1.8, 8);
  const auto result = lagrange::find_multiplier(zipf);
  CHECK(result.w_star == 0.0);
  CHECK(result.lambda == 1.0);
  const auto relaxed = lagrange::build_relaxed_policy(result);
  for (const auto& policy : relaxed.policies) {
    for (std::size_t r = 0; r < policy.num_modes(); ++r) CHECK(policy.update_probability(1, r) == 1.0);
  }
  CHECK(relaxed.download_rate == doctest::Approx(8.0).epsilon(1e-12));
  double expected = 0.0;
  for (const FileModel& f : zipf.files()) expected += mean_weight(f);
  CHECK(relaxed.aoi == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pure threshold meets the bandwidth") {
  const auto result = lagrange::find_multiplier(homogeneous_ensemble(10, 2, unit_file()));
  const auto relaxed = lagrange::build_relaxed_policy(result);
  CHECK(relaxed.download_rate == doctest::Approx(2.0).epsilon(1e-9));
  for (double a : relaxed.file_aoi) CHECK(a == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("mixing between two thresholds") {
  const auto result = lagrange::find_multiplier(homogeneous_ensemble(10, 3, unit_file()));
  CHECK(result.d_left >= 3.0);
  CHECK(result.d_right <= 3.0);
  CHECK(result.w_right - result.w_left <= 1e-8 * std::max(1.0, result.w_right) + 1e-15);
  CHECK(result.lambda == doctest::Approx(0.6).epsilon(1e-8));
  const auto relaxed = lagrange::build_relaxed_policy(result);
  CHECK(relaxed.aoi == doctest::Approx(22.0).epsilon(1e-9));
  CHECK(relaxed.download_rate == doctest::Approx(3.0).epsilon(1e-9));
  for (double a : relaxed.file_aoi) CHECK(a == doctest::Approx(2.2).epsilon(1e-9));
  // Mixed measures are a convex combination of the bracketing ones.
  const auto& mix = result.per_file.front();
  for (std::size_t x = 0; x < mix.mu_bar.rows(); ++x) {
    const double left = x < mix.left.mu.rows() ? mix.left.mu(x, 0) : 0.0;
    const double right = x < mix.right.mu.rows() ? mix.right.mu(x, 0) : 0.0;
    CHECK(mix.mu_bar(x, 0) == doctest::Approx(0.6 * left + 0.4 * right).epsilon(1e-12));
  }
}

TEST_CASE("bisection trace is monotone") {
  const auto result = lagrange::find_multiplier(zipf_ensemble(12, 1.5, 0.9, 0.2, 1.8, 3));
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    for (std::size_t j = 0; j < result.trace.size(); ++j) {
      if (result.trace[i].first < result.trace[j].first) {
        CHECK(result.trace[i].second >= result.trace[j].second - 1e-9);
      }
    }
  }
  const auto relaxed = lagrange::build_relaxed_policy(result);
  CHECK(relaxed.download_rate == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("workers do not change the answer") {
  const Ensemble zipf = zipf_ensemble(12, 1.5, 0.9, 0.2, 1.8, 3);
  lagrange::SearchOptions serial;
  lagrange::SearchOptions threaded;
  threaded.workers = 4;
  const auto a = lagrange::find_multiplier(zipf, serial);
  const auto b = lagrange::find_multiplier(zipf, threaded);
  CHECK(a.w_star == b.w_star);
  CHECK(a.lambda == b.lambda);
  CHECK(a.per_file.front().mu_bar == b.per_file.front().mu_bar);
}

}
