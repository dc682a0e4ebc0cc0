#pragma once

// Popularity models: per-file Markov chains over popularity modes and the
// expected request counts attached to each mode.

#include <cstddef>
#include <vector>

#include "aoicache/matrix.hpp"

namespace aoicache {

/// Row-stochastic transition matrix over R popularity modes.
class PopularityChain {
 public:
  /// Validates shape, entry range and row sums (1e-12). Throws InvalidParameter.
  explicit PopularityChain(Matrix transition);

  std::size_t num_modes() const { return transition_.rows(); }
  const Matrix& transition() const { return transition_; }
  double probability(std::size_t from, std::size_t to) const { return transition_(from, to); }

  friend bool operator==(const PopularityChain&, const PopularityChain&) = default;

 private:
  Matrix transition_;
};

/// One cached file: its popularity chain and the expected number of requests
/// per slot in each mode.
class FileModel {
 public:
  FileModel(PopularityChain chain, std::vector<double> mode_weight);

  const PopularityChain& chain() const { return chain_; }
  std::size_t num_modes() const { return chain_.num_modes(); }
  const std::vector<double>& mode_weight() const { return mode_weight_; }
  double weight(std::size_t mode) const { return mode_weight_[mode]; }
  double min_weight() const;

  friend bool operator==(const FileModel&, const FileModel&) = default;

 private:
  PopularityChain chain_;
  std::vector<double> mode_weight_;
};

/// N files sharing a link that can carry at most M downloads per slot.
class Ensemble {
 public:
  Ensemble(std::vector<FileModel> files, std::size_t bandwidth);

  std::size_t size() const { return files_.size(); }
  std::size_t bandwidth() const { return bandwidth_; }
  const std::vector<FileModel>& files() const { return files_; }
  const FileModel& file(std::size_t n) const { return files_[n]; }

 private:
  std::vector<FileModel> files_;
  std::size_t bandwidth_;
};

/// Symmetric two-mode chain [[q, 1-q], [1-q, q]]; q must lie in (0, 1).
PopularityChain two_mode_chain(double q);

/// Stationary distribution by power iteration from the uniform vector.
/// Throws ModelError for reducible or periodic chains.
std::vector<double> stationary_distribution(const PopularityChain& chain);

/// Long-run mean request count sum_r p(r) * w(r).
double mean_weight(const FileModel& file);

/// Zipf base weights 1/n^alpha, scaled so that they sum to N.
std::vector<double> zipf_weights(std::size_t num_files, double alpha);

/// Files n = 1..N with base weight from zipf_weights, mode weights
/// (low_factor, high_factor) times the base weight, all sharing
/// two_mode_chain(q).
Ensemble zipf_ensemble(std::size_t num_files, double alpha, double q, double low_factor,
                       double high_factor, std::size_t bandwidth);

Ensemble homogeneous_ensemble(std::size_t num_files, std::size_t bandwidth, const FileModel& file);

}  // namespace aoicache
