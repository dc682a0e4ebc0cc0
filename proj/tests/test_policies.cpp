#include <doctest.h>

#include <algorithm>

#include "aoicache/errors.hpp"
#include "aoicache/lagrange.hpp"
#include "aoicache/policies.hpp"
#include "aoicache/sim.hpp"

using namespace aoicache;
using policies::PolicyState;

namespace {

FileModel single_mode(double weight) {
  Matrix p(1, 1);
  p(0, 0) = 1.0;
  return FileModel(PopularityChain(p), {weight});
}

// Every file updates with probability `p` below age `bound` and surely at it.
lagrange::RelaxedPolicy constant_policy(std::size_t files, double p, std::size_t bound = 4) {
  lagrange::RelaxedPolicy relaxed;
  for (std::size_t n = 0; n < files; ++n) {
    Matrix xi(bound, 1);
    for (std::size_t x = 0; x + 1 < bound; ++x) xi(x, 0) = p;
    xi(bound - 1, 0) = 1.0;
    relaxed.policies.emplace_back(xi);
  }
  return relaxed;
}

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("relaxed runner follows xi") {
  const std::vector<std::size_t> ages{1, 2, 3};
  const std::vector<std::size_t> modes{0, 0, 0};
  Rng rng(7);
  const auto all = policies::relaxed_policy(constant_policy(3, 1.0));
  CHECK(all->decide(PolicyState{ages, modes, 1}, rng) == std::vector<std::size_t>{0, 1, 2});
  const auto none = policies::relaxed_policy(constant_policy(3, 0.0));
  CHECK(none->decide(PolicyState{ages, modes, 1}, rng).empty());

  // Past the policy's age bound the file is always taken, and counted.
  const std::vector<std::size_t> old{9, 1, 1};
  const auto runner = policies::RelaxedPolicyRunner(constant_policy(3, 0.0));
  CHECK(runner.decide(PolicyState{old, modes, 1}, rng) == std::vector<std::size_t>{0});
  CHECK(runner.overflow_count() == 1);
}

TEST_CASE("truncation keeps small candidate sets") {
  const std::vector<std::size_t> modes(4, 0);
  Rng rng(11);
  const auto none = policies::truncated_policy(constant_policy(4, 0.0), 2);
  CHECK(none->decide(PolicyState{std::vector<std::size_t>(4, 1), modes, 1}, rng).empty());
  // Two files at their bound: exactly M candidates.
  const std::vector<std::size_t> ages{4, 1, 4, 1};
  CHECK(none->decide(PolicyState{ages, modes, 1}, rng) == std::vector<std::size_t>{0, 2});
  CHECK(none->capacity() == 2);
}

TEST_CASE("truncation samples a uniform subset") {
  const auto policy = policies::truncated_policy(constant_policy(4, 1.0), 2);
  const std::vector<std::size_t> ages(4, 1);
  const std::vector<std::size_t> modes(4, 0);
  Rng rng(2024);
  std::vector<int> kept(4, 0);
  const int trials = 100000;
  std::vector<std::size_t> chosen;
  for (int t = 0; t < trials; ++t) {
    policy->decide(PolicyState{ages, modes, 1}, rng, chosen);
    REQUIRE(chosen.size() == 2);
    CHECK(chosen[0] != chosen[1]);
    for (std::size_t n : chosen) ++kept[n];
  }
  for (int k : kept) CHECK(std::abs(static_cast<double>(k) / trials - 0.5) <= 0.01);
}

TEST_CASE("truncated decisions are subsets of relaxed ones") {
  const auto relaxed = constant_policy(10, 0.35, 6);
  const auto full = policies::relaxed_policy(relaxed);
  const auto cut = policies::truncated_policy(relaxed, 3);
  Rng ages_rng(5);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::size_t> ages(10);
    for (auto& a : ages) a = 1 + uniform_index(ages_rng, 6);
    const std::vector<std::size_t> modes(10, 0);
    Rng a(static_cast<std::uint64_t>(t));
    Rng b = a;
    auto big = full->decide(PolicyState{ages, modes, 1}, a);
    auto small = cut->decide(PolicyState{ages, modes, 1}, b);
    CHECK(small.size() <= 3);
    std::sort(small.begin(), small.end());
    CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
}

TEST_CASE("square-root rates") {
  const Ensemble two({single_mode(4.0), single_mode(1.0)}, 1);
  const policies::SquareRootPolicy sqrt_policy(two);
  CHECK(sqrt_policy.rates()[0] == doctest::Approx(2.0 / 3.0));
  CHECK(sqrt_policy.rates()[1] == doctest::Approx(1.0 / 3.0));

  sim::SimulationConfig cfg;
  cfg.horizon = 100000;
  cfg.warmup = 0;
  const auto report = sim::simulate(two, sqrt_policy, cfg);
  const double ratio = report.per_file_update_frequency[0] / report.per_file_update_frequency[1];
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("square-root round robin on identical files") {
  const Ensemble same = homogeneous_ensemble(6, 2, single_mode(1.0));
  const auto policy = policies::square_root_policy(same);
  sim::SimulationConfig cfg;
  cfg.horizon = 30000;
  cfg.warmup = 30;
  const auto report = sim::simulate(same, *policy, cfg);
  for (double f : report.per_file_update_frequency) CHECK(f == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(report.avg_weighted_aoi == doctest::Approx(6.0 * 2.0).epsilon(1e-9));
}

TEST_CASE("greedy picks the largest weighted age") {
  const Ensemble two({single_mode(3.0), single_mode(1.0)}, 1);
  const auto greedy = policies::greedy_policy(two);
  Rng rng(1);
  const std::vector<std::size_t> modes{0, 0};
  CHECK(greedy->decide(PolicyState{std::vector<std::size_t>{2, 5}, modes, 1}, rng) ==
        std::vector<std::size_t>{0});
  CHECK(greedy->decide(PolicyState{std::vector<std::size_t>{1, 4}, modes, 1}, rng) ==
        std::vector<std::size_t>{1});
  // Tie goes to the lower index.
  CHECK(greedy->decide(PolicyState{std::vector<std::size_t>{1, 3}, modes, 1}, rng) ==
        std::vector<std::size_t>{0});

  const Ensemble full({single_mode(3.0), single_mode(1.0)}, 2);
  auto all = policies::greedy_policy(full)->decide(PolicyState{std::vector<std::size_t>{1, 1}, modes, 1}, rng);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 1});

  const Ensemble same = homogeneous_ensemble(5, 2, single_mode(2.0));
  auto oldest = policies::greedy_policy(same)->decide(
      PolicyState{std::vector<std::size_t>{3, 7, 1, 7, 2}, std::vector<std::size_t>(5, 0), 1}, rng);
  std::sort(oldest.begin(), oldest.end());
  CHECK(oldest == std::vector<std::size_t>{1, 3});
}

TEST_CASE("decisions are deterministic given the generator") {
  const Ensemble zipf = zipf_ensemble(16, 1.5, 0.9, 0.2, 1.8, 4);
  const auto relaxed = lagrange::build_relaxed_policy(lagrange::find_multiplier(zipf));
  for (const char* name : {"relaxed", "truncated", "sqrt", "greedy"}) {
    const auto policy = policies::make_policy(name, zipf, &relaxed);
    Rng a(99);
    Rng b(99);
    Rng state_rng(3);
    for (int t = 0; t < 500; ++t) {
      std::vector<std::size_t> ages(16);
      std::vector<std::size_t> modes(16);
      for (std::size_t n = 0; n < 16; ++n) {
        ages[n] = 1 + uniform_index(state_rng, 40);
        modes[n] = uniform_index(state_rng, 2);
      }
      CHECK(policy->decide(PolicyState{ages, modes, 1}, a) ==
            policy->decide(PolicyState{ages, modes, 1}, b));
    }
  }
}

TEST_CASE("policy factory") {
  const Ensemble zipf = zipf_ensemble(4, 1.5, 0.9, 0.2, 1.8, 2);
  CHECK(policies::is_known_policy("sqrt"));
  CHECK_FALSE(policies::is_known_policy("lru"));
  CHECK_THROWS_AS(policies::make_policy("lru", zipf, nullptr), InvalidParameter);
  CHECK_THROWS_AS(policies::make_policy("truncated", zipf, nullptr), InvalidParameter);
  CHECK(policies::make_policy("greedy", zipf, nullptr)->name() == "greedy");
}

}
