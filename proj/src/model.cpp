#include "aoicache/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>

#include "aoicache/errors.hpp"

namespace aoicache {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr int kPowerIterationCap = 100000;
constexpr double kPowerIterationTolerance = 1e-12;

std::vector<int> bfs_levels(const Matrix& p, bool reverse) {
  const std::size_t n = p.rows();
  std::vector<int> level(n, -1);
  std::queue<std::size_t> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v = 0; v < n; ++v) {
      const double edge = reverse ? p(v, u) : p(u, v);
      if (edge > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

void check_ergodic(const Matrix& p) {
  const auto forward = bfs_levels(p, false);
  const auto backward = bfs_levels(p, true);
  const auto unreached = [](int l) { return l < 0; };
  if (std::ranges::any_of(forward, unreached) || std::ranges::any_of(backward, unreached)) {
    throw ModelError("popularity chain is reducible");
  }
  // Period = gcd over edges u->v of level(u) + 1 - level(v).
  int period = 0;
  for (std::size_t u = 0; u < p.rows(); ++u) {
    for (std::size_t v = 0; v < p.cols(); ++v) {
      if (p(u, v) > 0.0) {
        period = std::gcd(period, std::abs(forward[u] + 1 - forward[v]));
      }
    }
  }
  if (period != 1) {
    throw ModelError("popularity chain is periodic with period " + std::to_string(period));
  }
}

}  // namespace

PopularityChain::PopularityChain(Matrix transition) : transition_(std::move(transition)) {
  if (transition_.rows() == 0 || transition_.rows() != transition_.cols()) {
    throw InvalidParameter("transition matrix must be square with at least one mode");
  }
  for (std::size_t r = 0; r < transition_.rows(); ++r) {
    double sum = 0.0;
    for (double v : transition_.row(r)) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidParameter("transition probabilities must lie in [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg << "transition row " << r << " sums to " << sum;
      throw InvalidParameter(msg.str());
    }
  }
}

FileModel::FileModel(PopularityChain chain, std::vector<double> mode_weight)
    : chain_(std::move(chain)), mode_weight_(std::move(mode_weight)) {
  if (mode_weight_.size() != chain_.num_modes()) {
    throw InvalidParameter("mode_weight length must equal the number of popularity modes");
  }
  for (double w : mode_weight_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidParameter("mode weights must be finite and strictly positive");
    }
  }
}

double FileModel::min_weight() const { return *std::ranges::min_element(mode_weight_); }

Ensemble::Ensemble(std::vector<FileModel> files, std::size_t bandwidth)
    : files_(std::move(files)), bandwidth_(bandwidth) {
  if (files_.empty()) {
    throw InvalidParameter("ensemble needs at least one file");
  }
  if (bandwidth_ < 1 || bandwidth_ > files_.size()) {
    throw InvalidParameter("bandwidth M must satisfy 1 <= M <= N");
  }
}

PopularityChain two_mode_chain(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidParameter("two-mode chain parameter q must lie in (0, 1)");
  }
  Matrix p(2, 2);
  p(0, 0) = q;
  p(0, 1) = 1.0 - q;
  p(1, 0) = 1.0 - q;
  p(1, 1) = q;
  return PopularityChain(std::move(p));
}

std::vector<double> stationary_distribution(const PopularityChain& chain) {
  const Matrix& p = chain.transition();
  const std::size_t n = chain.num_modes();
  check_ergodic(p);

  std::vector<double> current(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < kPowerIterationCap; ++iter) {
    std::ranges::fill(next, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = 0; s < n; ++s) {
        next[s] += current[r] * p(r, s);
      }
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      next[s] /= total;
      delta = std::max(delta, std::abs(next[s] - current[s]));
    }
    current.swap(next);
    if (delta <= kPowerIterationTolerance) {
      return current;
    }
  }
  throw ModelError("power iteration did not converge; chain is not ergodic");
}

double mean_weight(const FileModel& file) {
  const auto p = stationary_distribution(file.chain());
  double mean = 0.0;
  for (std::size_t r = 0; r < p.size(); ++r) {
    mean += p[r] * file.weight(r);
  }
  return mean;
}

std::vector<double> zipf_weights(std::size_t num_files, double alpha) {
  if (num_files < 1) {
    throw InvalidParameter("Zipf ensemble needs at least one file");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidParameter("Zipf exponent must be finite and non-negative");
  }
  std::vector<double> weights(num_files);
  for (std::size_t n = 0; n < num_files; ++n) {
    weights[n] = std::pow(static_cast<double>(n + 1), -alpha);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double scale = static_cast<double>(num_files) / total;
  for (double& w : weights) {
    w *= scale;
  }
  return weights;
}

Ensemble zipf_ensemble(std::size_t num_files, double alpha, double q, double low_factor,
                       double high_factor, std::size_t bandwidth) {
  if (!(low_factor > 0.0) || !(high_factor > 0.0)) {
    throw InvalidParameter("mode factors must be strictly positive");
  }
  if (bandwidth < 1 || bandwidth > num_files) {
    throw InvalidParameter("bandwidth M must satisfy 1 <= M <= N");
  }
  const PopularityChain chain = two_mode_chain(q);
  std::vector<FileModel> files;
  files.reserve(num_files);
  for (double base : zipf_weights(num_files, alpha)) {
    files.emplace_back(chain, std::vector<double>{low_factor * base, high_factor * base});
  }
  return Ensemble(std::move(files), bandwidth);
}

Ensemble homogeneous_ensemble(std::size_t num_files, std::size_t bandwidth, const FileModel& file) {
  return Ensemble(std::vector<FileModel>(num_files, file), bandwidth);
}

}  // namespace aoicache
