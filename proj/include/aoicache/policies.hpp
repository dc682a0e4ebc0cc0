#pragma once

// Slot-level download policies. A policy sees the current ages and modes of
// all files and returns the indices of the files to download this slot.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aoicache/cmdp.hpp"
#include "aoicache/lagrange.hpp"
#include "aoicache/model.hpp"
#include "aoicache/random.hpp"

namespace aoicache::policies {

struct PolicyState {
  std::span<const std::size_t> ages;   // X_{n,t} >= 1
  std::span<const std::size_t> modes;  // R_{n,t}, 0-based
  std::uint64_t slot = 0;
};

class DecisionPolicy {
 public:
  virtual ~DecisionPolicy() = default;

  /// Replaces `chosen` with the distinct file indices to download this slot.
  /// May consume randomness from `rng` only.
  virtual void decide(const PolicyState& state, Rng& rng, std::vector<std::size_t>& chosen) const = 0;

  /// Upper bound on the decision size, or 0 when the policy is unconstrained.
  virtual std::size_t capacity() const = 0;

  virtual std::string_view name() const = 0;

  std::vector<std::size_t> decide(const PolicyState& state, Rng& rng) const {
    std::vector<std::size_t> chosen;
    decide(state, rng, chosen);
    return chosen;
  }
};

/// Updates each file n independently with probability xi_bar(x_n, r_n).
/// Meets the bandwidth only on average.
class RelaxedPolicyRunner : public DecisionPolicy {
 public:
  explicit RelaxedPolicyRunner(lagrange::RelaxedPolicy policy);

  using DecisionPolicy::decide;
  void decide(const PolicyState& state, Rng& rng, std::vector<std::size_t>& chosen) const override;
  std::size_t capacity() const override { return 0; }
  std::string_view name() const override { return "relaxed"; }

  /// Number of draws made at an age beyond a file's policy bound.
  std::uint64_t overflow_count() const { return overflow_.load(std::memory_order_relaxed); }

 protected:
  void draw_candidates(const PolicyState& state, Rng& rng, std::vector<std::size_t>& chosen) const;

 private:
  lagrange::RelaxedPolicy policy_;
  mutable std::atomic<std::uint64_t> overflow_{0};
};

/// The relaxed candidate set, cut to a uniformly random M-subset whenever it
/// holds more than M files.
class TruncatedPolicy : public RelaxedPolicyRunner {
 public:
  TruncatedPolicy(lagrange::RelaxedPolicy policy, std::size_t bandwidth);

  using DecisionPolicy::decide;
  void decide(const PolicyState& state, Rng& rng, std::vector<std::size_t>& chosen) const override;
  std::size_t capacity() const override { return bandwidth_; }
  std::string_view name() const override { return "truncated"; }

 private:
  std::size_t bandwidth_;
};

/// Square-root-law baseline: target rate c_n proportional to sqrt of the
/// mode-averaged request count, realized by downloading the M files with the
/// largest X_n * c_n (ties to the lower index).
class SquareRootPolicy : public DecisionPolicy {
 public:
  explicit SquareRootPolicy(const Ensemble& ensemble);

  using DecisionPolicy::decide;
  void decide(const PolicyState& state, Rng& rng, std::vector<std::size_t>& chosen) const override;
  std::size_t capacity() const override { return bandwidth_; }
  std::string_view name() const override { return "sqrt"; }

  const std::vector<double>& rates() const { return rates_; }

 private:
  std::vector<double> rates_;
  std::size_t bandwidth_;
};

/// Downloads the M files with the largest w_n(r_n) * X_n (ties to the lower index).
class GreedyPolicy : public DecisionPolicy {
 public:
  explicit GreedyPolicy(const Ensemble& ensemble);

  using DecisionPolicy::decide;
  void decide(const PolicyState& state, Rng& rng, std::vector<std::size_t>& chosen) const override;
  std::size_t capacity() const override { return bandwidth_; }
  std::string_view name() const override { return "greedy"; }

 private:
  std::vector<std::vector<double>> weights_;
  std::size_t bandwidth_;
};

/// Never downloads. Test and diagnostics only.
class IdlePolicy : public DecisionPolicy {
 public:
  using DecisionPolicy::decide;
  void decide(const PolicyState&, Rng&, std::vector<std::size_t>& chosen) const override {
    chosen.clear();
  }
  std::size_t capacity() const override { return 0; }
  std::string_view name() const override { return "idle"; }
};

std::unique_ptr<DecisionPolicy> relaxed_policy(lagrange::RelaxedPolicy policy);
std::unique_ptr<DecisionPolicy> truncated_policy(lagrange::RelaxedPolicy policy, std::size_t bandwidth);
std::unique_ptr<DecisionPolicy> square_root_policy(const Ensemble& ensemble);
std::unique_ptr<DecisionPolicy> greedy_policy(const Ensemble& ensemble);

/// Policy names accepted in scenario files.
bool is_known_policy(std::string_view name);

/// Builds a policy by name; "relaxed" and "truncated" need `relaxed`.
/// Throws InvalidParameter for unknown names.
std::unique_ptr<DecisionPolicy> make_policy(std::string_view name, const Ensemble& ensemble,
                                            const lagrange::RelaxedPolicy* relaxed);

}  // namespace aoicache::policies
