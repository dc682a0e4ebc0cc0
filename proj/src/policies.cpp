#include "aoicache/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoicache/errors.hpp"

namespace aoicache::policies {

namespace {

// Leaves in `chosen` the `count` indices with the largest key, ties to the
// lower index, ordered by decreasing key.
template <typename Key>
void top_by_key(std::size_t num_files, std::size_t count, Key key, std::vector<std::size_t>& chosen) {
  chosen.clear();
  if (count >= num_files) {
    for (std::size_t n = 0; n < num_files; ++n) chosen.push_back(n);
    return;
  }
  // Insertion into a short sorted list; M is small next to N in practice.
  thread_local std::vector<double> best;
  best.clear();
  for (std::size_t n = 0; n < num_files; ++n) {
    const double k = key(n);
    if (best.size() == count && !(k > best.back())) continue;
    std::size_t pos = best.size();
    while (pos > 0 && k > best[pos - 1]) --pos;
    if (best.size() == count) {
      best.pop_back();
      chosen.pop_back();
    }
    best.insert(best.begin() + static_cast<std::ptrdiff_t>(pos), k);
    chosen.insert(chosen.begin() + static_cast<std::ptrdiff_t>(pos), n);
  }
}

}  // namespace

RelaxedPolicyRunner::RelaxedPolicyRunner(lagrange::RelaxedPolicy policy)
    : policy_(std::move(policy)) {
  if (policy_.policies.empty()) {
    throw InvalidParameter("relaxed policy holds no files");
  }
}

void RelaxedPolicyRunner::draw_candidates(const PolicyState& state, Rng& rng,
                                          std::vector<std::size_t>& chosen) const {
  chosen.clear();
  const std::size_t n_files = policy_.policies.size();
  for (std::size_t n = 0; n < n_files; ++n) {
    const cmdp::StationaryPolicy& file_policy = policy_.policies[n];
    const std::size_t age = state.ages[n];
    if (age > file_policy.age_bound()) {
      overflow_.fetch_add(1, std::memory_order_relaxed);
      chosen.push_back(n);
      continue;
    }
    const double p = file_policy.update_probability(age, state.modes[n]);
    if (p >= 1.0 || (p > 0.0 && uniform01(rng) < p)) chosen.push_back(n);
  }
}

void RelaxedPolicyRunner::decide(const PolicyState& state, Rng& rng,
                                 std::vector<std::size_t>& chosen) const {
  draw_candidates(state, rng, chosen);
}

TruncatedPolicy::TruncatedPolicy(lagrange::RelaxedPolicy policy, std::size_t bandwidth)
    : RelaxedPolicyRunner(std::move(policy)), bandwidth_(bandwidth) {
  if (bandwidth_ < 1) throw InvalidParameter("bandwidth M must be at least 1");
}

void TruncatedPolicy::decide(const PolicyState& state, Rng& rng,
                             std::vector<std::size_t>& chosen) const {
  draw_candidates(state, rng, chosen);
  if (chosen.size() <= bandwidth_) return;
  // Partial Fisher-Yates: the first M slots become a uniform M-subset.
  for (std::size_t i = 0; i < bandwidth_; ++i) {
    const std::size_t j = i + uniform_index(rng, chosen.size() - i);
    std::swap(chosen[i], chosen[j]);
  }
  chosen.resize(bandwidth_);
}

SquareRootPolicy::SquareRootPolicy(const Ensemble& ensemble) : bandwidth_(ensemble.bandwidth()) {
  rates_.reserve(ensemble.size());
  double total = 0.0;
  for (const FileModel& file : ensemble.files()) {
    rates_.push_back(std::sqrt(mean_weight(file)));
    total += rates_.back();
  }
  for (double& c : rates_) c *= static_cast<double>(bandwidth_) / total;
}

void SquareRootPolicy::decide(const PolicyState& state, Rng&, std::vector<std::size_t>& chosen) const {
  top_by_key(
      rates_.size(), bandwidth_,
      [&](std::size_t n) { return static_cast<double>(state.ages[n]) * rates_[n]; }, chosen);
}

GreedyPolicy::GreedyPolicy(const Ensemble& ensemble) : bandwidth_(ensemble.bandwidth()) {
  for (const FileModel& file : ensemble.files()) weights_.push_back(file.mode_weight());
}

void GreedyPolicy::decide(const PolicyState& state, Rng&, std::vector<std::size_t>& chosen) const {
  top_by_key(
      weights_.size(), bandwidth_,
      [&](std::size_t n) {
        return weights_[n][state.modes[n]] * static_cast<double>(state.ages[n]);
      },
      chosen);
}

std::unique_ptr<DecisionPolicy> relaxed_policy(lagrange::RelaxedPolicy policy) {
  return std::make_unique<RelaxedPolicyRunner>(std::move(policy));
}

std::unique_ptr<DecisionPolicy> truncated_policy(lagrange::RelaxedPolicy policy,
                                                 std::size_t bandwidth) {
  return std::make_unique<TruncatedPolicy>(std::move(policy), bandwidth);
}

std::unique_ptr<DecisionPolicy> square_root_policy(const Ensemble& ensemble) {
  return std::make_unique<SquareRootPolicy>(ensemble);
}

std::unique_ptr<DecisionPolicy> greedy_policy(const Ensemble& ensemble) {
  return std::make_unique<GreedyPolicy>(ensemble);
}

bool is_known_policy(std::string_view name) {
  return name == "relaxed" || name == "truncated" || name == "sqrt" || name == "greedy";
}

std::unique_ptr<DecisionPolicy> make_policy(std::string_view name, const Ensemble& ensemble,
                                            const lagrange::RelaxedPolicy* relaxed) {
  if (name == "sqrt") return square_root_policy(ensemble);
  if (name == "greedy") return greedy_policy(ensemble);
  if (name == "relaxed" || name == "truncated") {
    if (relaxed == nullptr) {
      throw InvalidParameter("policy '" + std::string(name) + "' needs a relaxed solution");
    }
    if (name == "relaxed") return relaxed_policy(*relaxed);
    return truncated_policy(*relaxed, ensemble.bandwidth());
  }
  throw InvalidParameter("unknown policy '" + std::string(name) + "'");
}

}  // namespace aoicache::policies
