#include "aoicache/sim.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aoicache/errors.hpp"
#include "aoicache/random.hpp"

namespace aoicache::sim {

namespace {

// Mode chains of all files in flat arrays. Each file owns a splitmix64
// stream so that mode paths do not depend on the policy's draws.
class ModeProcesses {
 public:
  ModeProcesses(const Ensemble& ensemble, std::uint64_t root_seed) {
    const std::size_t n_files = ensemble.size();
    for (std::size_t n = 0; n < n_files; ++n) {
      stride_ = std::max(stride_, ensemble.file(n).num_modes());
    }
    modes_.resize(n_files);
    cumulative_.assign(n_files * stride_ * stride_, 1.0);
    weights_.assign(n_files * stride_, 0.0);
    state_.resize(n_files);
    rngs_.reserve(n_files);
    for (std::size_t n = 0; n < n_files; ++n) {
      const FileModel& file = ensemble.file(n);
      const Matrix& p = file.chain().transition();
      modes_[n] = p.rows();
      for (std::size_t r = 0; r < modes_[n]; ++r) {
        weights_[n * stride_ + r] = file.weight(r);
        double acc = 0.0;
        for (std::size_t s = 0; s < modes_[n]; ++s) {
          acc += p(r, s);
          cumulative_[(n * stride_ + r) * stride_ + s] = acc;
        }
      }
      rngs_.emplace_back(derive_seed(root_seed, 1 + n));
      state_[n] = initial_mode(n, stationary_distribution(file.chain()));
    }
  }

  std::size_t stride() const { return stride_; }
  const std::vector<std::size_t>& modes() const { return state_; }
  double weight(std::size_t n) const { return weights_[n * stride_ + state_[n]]; }

  void step() {
    for (std::size_t n = 0; n < state_.size(); ++n) {
      if (modes_[n] == 1) continue;
      const double u = uniform01(rngs_[n]);
      const double* row = &cumulative_[(n * stride_ + state_[n]) * stride_];
      std::size_t next = 0;
      while (next + 1 < modes_[n] && u >= row[next]) ++next;
      state_[n] = next;
    }
  }

 private:
  std::size_t initial_mode(std::size_t n, const std::vector<double>& probabilities) {
    if (modes_[n] == 1) return 0;
    const double u = uniform01(rngs_[n]);
    double acc = 0.0;
    for (std::size_t r = 0; r + 1 < modes_[n]; ++r) {
      acc += probabilities[r];
      if (u < acc) return r;
    }
    return modes_[n] - 1;
  }

  std::size_t stride_ = 1;
  std::vector<std::size_t> modes_;
  std::vector<double> cumulative_;
  std::vector<double> weights_;
  std::vector<std::size_t> state_;
  std::vector<SplitMix64> rngs_;
};

}  // namespace

SimulationReport simulate(const Ensemble& ensemble, const policies::DecisionPolicy& policy,
                          const SimulationConfig& cfg) {
  if (cfg.horizon <= cfg.warmup) {
    throw InvalidParameter("simulation horizon must exceed the warmup");
  }
  const std::size_t n_files = ensemble.size();
  ModeProcesses chains(ensemble, cfg.seed);
  const std::size_t max_modes = chains.stride();
  Rng policy_rng(derive_seed(cfg.seed, 0));

  std::vector<std::size_t> ages(n_files, 1);
  std::vector<std::uint64_t> chosen_at(n_files, UINT64_MAX);
  std::vector<std::uint64_t> updates(n_files, 0);
  std::vector<std::uint64_t> occupancy(n_files * max_modes, 0);
  std::vector<std::size_t> chosen;

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    if (!trace) throw std::runtime_error("cannot open trace file " + cfg.trace_path);
    trace << "slot,downloads,weighted_aoi\n";
  }

  SimulationReport report;
  double cost_sum = 0.0;
  double download_sum = 0.0;
  // Welford accumulators for the decision size.
  double size_mean = 0.0;
  double size_m2 = 0.0;
  std::uint64_t averaged = 0;

  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    const bool averaging = t >= cfg.warmup;
    const std::vector<std::size_t>& modes = chains.modes();
    double slot_cost = 0.0;
    std::size_t oldest = 0;
    for (std::size_t n = 0; n < n_files; ++n) {
      slot_cost += chains.weight(n) * static_cast<double>(ages[n]);
      oldest = std::max(oldest, ages[n]);
    }
    if (averaging) {
      for (std::size_t n = 0; n < n_files; ++n) ++occupancy[n * max_modes + modes[n]];
    }
    report.max_age = std::max(report.max_age, oldest);

    const policies::PolicyState state{ages, modes, t + 1};
    policy.decide(state, policy_rng, chosen);
    for (std::size_t n : chosen) {
      if (n >= n_files || chosen_at[n] == t) {
        std::ostringstream msg;
        msg << "policy '" << policy.name() << "' returned invalid or repeated file index " << n
            << " in slot " << t + 1;
        throw std::logic_error(msg.str());
      }
      chosen_at[n] = t;
    }
    report.max_downloads_in_any_slot = std::max(report.max_downloads_in_any_slot, chosen.size());
    if (trace.is_open()) trace << t + 1 << ',' << chosen.size() << ',' << slot_cost << '\n';

    if (averaging) {
      ++averaged;
      cost_sum += slot_cost;
      const auto size = static_cast<double>(chosen.size());
      download_sum += size;
      const double delta = size - size_mean;
      size_mean += delta / static_cast<double>(averaged);
      size_m2 += delta * (size - size_mean);
      for (std::size_t n : chosen) ++updates[n];
    }

    for (std::size_t n = 0; n < n_files; ++n) ++ages[n];
    for (std::size_t n : chosen) ages[n] = 1;
    chains.step();
  }

  const auto slots = static_cast<double>(averaged);
  report.averaged_slots = averaged;
  report.avg_weighted_aoi = cost_sum / slots;
  report.avg_downloads_per_slot = download_sum / slots;
  report.per_file_update_frequency.resize(n_files);
  for (std::size_t n = 0; n < n_files; ++n) {
    report.per_file_update_frequency[n] = static_cast<double>(updates[n]) / slots;
  }
  report.mode_occupancy = Matrix(n_files, max_modes);
  for (std::size_t n = 0; n < n_files; ++n) {
    for (std::size_t r = 0; r < max_modes; ++r) {
      report.mode_occupancy(n, r) = static_cast<double>(occupancy[n * max_modes + r]) / slots;
    }
  }
  if (cfg.record_candidate_sizes) {
    report.has_candidate_stats = true;
    report.candidate_size_mean = size_mean;
    report.candidate_size_variance = averaged > 1 ? size_m2 / (slots - 1.0) : 0.0;
  }
  return report;
}

}  // namespace aoicache::sim
