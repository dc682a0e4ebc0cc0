#include "aoicache/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

#include "aoicache/errors.hpp"
#include "aoicache/parallel.hpp"
#include "aoicache/policies.hpp"
#include "aoicache/sim.hpp"

namespace aoicache::experiments {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  const auto n = static_cast<double>(values.size());
  for (double v : values) m.mean += v;
  m.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

sim::SimulationConfig replication_config(const scenario::SimulationSpec& spec, std::size_t rep) {
  sim::SimulationConfig cfg;
  cfg.horizon = spec.horizon;
  cfg.warmup = spec.warmup;
  cfg.seed = spec.seed + rep;
  return cfg;
}

struct Replication {
  sim::SimulationReport report;
  double wall_time = 0.0;
};

// Runs `reps` seeded replications of every (setting, policy) pair on the
// worker pool; result index is (setting * policies + policy) * reps + rep.
struct SimulationJob {
  const Ensemble* ensemble;
  const policies::DecisionPolicy* policy;
};

std::vector<Replication> run_replications(const std::vector<SimulationJob>& jobs,
                                          const scenario::SimulationSpec& spec, std::size_t workers) {
  const std::size_t reps = spec.replications;
  std::vector<Replication> out(jobs.size() * reps);
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const SimulationJob& job = jobs[i / reps];
    const auto start = Clock::now();
    out[i].report = sim::simulate(*job.ensemble, *job.policy, replication_config(spec, i % reps));
    out[i].wall_time = seconds_since(start);
  });
  return out;
}

ResultRow aggregate(ResultRow row, std::span<const Replication> reps) {
  std::vector<double> aoi;
  double downloads = 0.0;
  for (const auto& r : reps) {
    aoi.push_back(r.report.avg_weighted_aoi);
    downloads += r.report.avg_downloads_per_slot;
    row.max_downloads = std::max(row.max_downloads, r.report.max_downloads_in_any_slot);
    row.wall_time += r.wall_time;
  }
  const Moments m = moments(aoi);
  row.simulated_aoi = m.mean;
  row.simulated_aoi_stderr = m.stderr_;
  row.avg_downloads = downloads / static_cast<double>(reps.size());
  row.replication = "all";
  return row;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
  const std::size_t rows = std::max(a.rows(), b.rows());
  double worst = 0.0;
  for (std::size_t x = 0; x < rows; ++x) {
    for (std::size_t r = 0; r < std::max(a.cols(), b.cols()); ++r) {
      const double va = x < a.rows() && r < a.cols() ? a(x, r) : 0.0;
      const double vb = x < b.rows() && r < b.cols() ? b(x, r) : 0.0;
      worst = std::max(worst, std::abs(va - vb));
    }
  }
  return worst;
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

SolveReport run_solve(const scenario::ScenarioConfig& config, std::size_t workers) {
  Ensemble ensemble = scenario::build_ensemble(config.ensemble);
  auto result = lagrange::find_multiplier(ensemble, config.solver.search_options(workers));
  auto relaxed = lagrange::build_relaxed_policy(result);
  return SolveReport{std::move(ensemble), std::move(result), std::move(relaxed)};
}

void write_solve_csv(std::ostream& out, const scenario::ScenarioConfig& config,
                     const SolveReport& report) {
  out << "scenario,N,M,q,w_star,w_left,w_right,d_left,d_right,lambda,analytic_aoi,"
         "analytic_downloads\n";
  const auto& r = report.result;
  out << config.id << ',' << report.ensemble.size() << ',' << report.ensemble.bandwidth() << ','
      << optional_number(config.ensemble.two_mode_q()) << ',' << format_number(r.w_star) << ','
      << format_number(r.w_left) << ',' << format_number(r.w_right) << ','
      << format_number(r.d_left) << ',' << format_number(r.d_right) << ','
      << format_number(r.lambda) << ',' << format_number(report.relaxed.aoi) << ','
      << format_number(report.relaxed.download_rate) << '\n';
}

std::vector<ResultRow> run_simulate(const scenario::ScenarioConfig& config, std::size_t workers) {
  const SolveReport solved = run_solve(config, workers);
  std::vector<std::unique_ptr<policies::DecisionPolicy>> owned;
  std::vector<SimulationJob> jobs;
  for (const auto& name : config.policies) {
    owned.push_back(policies::make_policy(name, solved.ensemble, &solved.relaxed));
    jobs.push_back({&solved.ensemble, owned.back().get()});
  }
  const auto reps = run_replications(jobs, config.simulation, workers);
  const std::size_t n_reps = config.simulation.replications;

  std::vector<ResultRow> rows;
  for (std::size_t p = 0; p < jobs.size(); ++p) {
    ResultRow base;
    base.scenario = config.id;
    base.policy = config.policies[p];
    base.q = config.ensemble.two_mode_q();
    base.num_files = solved.ensemble.size();
    base.bandwidth = solved.ensemble.bandwidth();
    base.analytic_aoi = solved.relaxed.aoi;
    const std::span<const Replication> mine(reps.data() + p * n_reps, n_reps);
    for (std::size_t k = 0; k < n_reps; ++k) {
      ResultRow row = base;
      row.replication = std::to_string(k);
      row.simulated_aoi = mine[k].report.avg_weighted_aoi;
      row.avg_downloads = mine[k].report.avg_downloads_per_slot;
      row.max_downloads = mine[k].report.max_downloads_in_any_slot;
      row.wall_time = mine[k].wall_time;
      rows.push_back(std::move(row));
    }
    rows.push_back(aggregate(base, mine));
  }
  return rows;
}

std::vector<ResultRow> run_sweep(const scenario::ScenarioConfig& config, std::vector<double> q_values,
                                 std::vector<std::size_t> bandwidths, std::size_t workers) {
  if (q_values.empty()) q_values = config.sweep_q;
  if (bandwidths.empty()) bandwidths = config.sweep_bandwidth;
  if (q_values.empty() || bandwidths.empty()) {
    throw ConfigError("sweep needs non-empty q and bandwidth lists");
  }
  if (!config.ensemble.two_mode_q()) {
    throw ConfigError("sweep needs a two-mode ensemble (zipf, or homogeneous with 'q')");
  }
  for (double q : q_values) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("sweep q values must lie in (0, 1)");
  }

  struct GridPoint {
    double q;
    std::size_t bandwidth;
    std::optional<Ensemble> ensemble;
    std::optional<lagrange::RelaxedPolicy> relaxed;
    double solve_time = 0.0;
  };
  std::vector<GridPoint> grid;
  for (std::size_t m : bandwidths) {
    for (double q : q_values) {
      GridPoint point{q, m, scenario::build_ensemble(config.ensemble, q, std::nullopt, m), {}, 0.0};
      grid.push_back(std::move(point));
    }
  }
  const auto options = config.solver.search_options(1);
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    const auto start = Clock::now();
    const auto result = lagrange::find_multiplier(*grid[g].ensemble, options);
    grid[g].relaxed = lagrange::build_relaxed_policy(result);
    grid[g].solve_time = seconds_since(start);
  });

  std::vector<std::unique_ptr<policies::DecisionPolicy>> owned;
  std::vector<SimulationJob> jobs;
  for (const auto& point : grid) {
    for (const auto& name : config.policies) {
      owned.push_back(policies::make_policy(name, *point.ensemble, &*point.relaxed));
      jobs.push_back({&*point.ensemble, owned.back().get()});
    }
  }
  const auto reps = run_replications(jobs, config.simulation, workers);
  const std::size_t n_reps = config.simulation.replications;

  std::vector<ResultRow> rows;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const GridPoint& point = grid[j / config.policies.size()];
    ResultRow base;
    base.scenario = config.id;
    base.policy = config.policies[j % config.policies.size()];
    base.q = point.q;
    base.num_files = point.ensemble->size();
    base.bandwidth = point.bandwidth;
    base.analytic_aoi = point.relaxed->aoi;
    base.wall_time = point.solve_time;
    rows.push_back(aggregate(base, std::span<const Replication>(reps.data() + j * n_reps, n_reps)));
  }
  return rows;
}

std::vector<AsymptoticRow> run_asymptotic(const scenario::ScenarioConfig& config,
                                          std::vector<std::size_t> file_counts, std::size_t theta,
                                          std::size_t workers) {
  if (file_counts.empty()) file_counts = config.asymptotic_files;
  if (theta == 0) theta = config.asymptotic_theta;
  if (config.ensemble.kind != scenario::EnsembleSpec::Kind::kHomogeneous) {
    throw ConfigError("asymptotic runs need a homogeneous ensemble");
  }
  if (file_counts.empty() || theta == 0) {
    throw ConfigError("asymptotic runs need a file-count list and a positive theta");
  }
  for (std::size_t n : file_counts) {
    if (n % theta != 0) {
      throw ConfigError("theta " + std::to_string(theta) + " does not divide N = " + std::to_string(n));
    }
  }

  const auto options = config.solver.search_options(workers);
  std::vector<AsymptoticRow> rows;
  std::vector<Ensemble> ensembles;
  std::vector<lagrange::MultiplierResult> results;
  std::vector<std::unique_ptr<policies::DecisionPolicy>> owned;
  std::vector<SimulationJob> jobs;
  std::vector<double> solve_times;
  ensembles.reserve(file_counts.size());
  for (std::size_t n : file_counts) {
    const auto start = Clock::now();
    ensembles.push_back(scenario::build_ensemble(config.ensemble, std::nullopt, n, n / theta));
    results.push_back(lagrange::find_multiplier(ensembles.back(), options));
    solve_times.push_back(seconds_since(start));
  }
  for (std::size_t i = 0; i < file_counts.size(); ++i) {
    const auto relaxed = lagrange::build_relaxed_policy(results[i]);
    owned.push_back(policies::truncated_policy(relaxed, ensembles[i].bandwidth()));
    jobs.push_back({&ensembles[i], owned.back().get()});

    AsymptoticRow row;
    row.num_files = file_counts[i];
    row.bandwidth = ensembles[i].bandwidth();
    row.theta = theta;
    row.w_star = results[i].w_star;
    row.lambda = results[i].lambda;
    row.analytic_aoi = relaxed.aoi;
    row.wall_time = solve_times[i];
    for (const auto& mix : results[i].per_file) {
      const auto& first = results.front().per_file.front();
      row.solution_deviation = std::max({row.solution_deviation,
                                         max_abs_difference(mix.mu_bar, first.mu_bar),
                                         max_abs_difference(mix.nu_bar, first.nu_bar)});
    }
    if (row.solution_deviation > 1e-8) {
      std::ostringstream msg;
      msg << "per-file relaxed solution at N=" << file_counts[i] << " deviates by "
          << row.solution_deviation << " from N=" << file_counts.front();
      throw NumericalError(msg.str());
    }
    rows.push_back(row);
  }

  const auto reps = run_replications(jobs, config.simulation, workers);
  const std::size_t n_reps = config.simulation.replications;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> aoi;
    std::vector<double> gaps;
    for (std::size_t k = 0; k < n_reps; ++k) {
      const auto& rep = reps[i * n_reps + k];
      aoi.push_back(rep.report.avg_weighted_aoi);
      gaps.push_back((rep.report.avg_weighted_aoi - rows[i].analytic_aoi) / rows[i].analytic_aoi);
      rows[i].max_downloads = std::max(rows[i].max_downloads, rep.report.max_downloads_in_any_slot);
      rows[i].wall_time += rep.wall_time;
    }
    const Moments a = moments(aoi);
    const Moments g = moments(gaps);
    rows[i].simulated_aoi = a.mean;
    rows[i].simulated_aoi_stderr = a.stderr_;
    rows[i].gap = g.mean;
    rows[i].gap_stderr = g.stderr_;
  }
  return rows;
}

void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool timing) {
  out << "scenario,policy,q,N,M,replication,analytic_aoi,simulated_aoi,simulated_aoi_stderr,"
         "avg_downloads,max_downloads";
  if (timing) out << ",wall_time_s";
  out << '\n';
  for (const auto& row : rows) {
    out << row.scenario << ',' << row.policy << ',' << optional_number(row.q) << ','
        << row.num_files << ',' << row.bandwidth << ',' << row.replication << ','
        << optional_number(row.analytic_aoi) << ',' << format_number(row.simulated_aoi) << ','
        << format_number(row.simulated_aoi_stderr) << ',' << format_number(row.avg_downloads) << ','
        << row.max_downloads;
    if (timing) out << ',' << format_number(row.wall_time);
    out << '\n';
  }
}

void write_asymptotic_csv(std::ostream& out, const std::vector<AsymptoticRow>& rows, bool timing) {
  out << "N,M,theta,w_star,lambda,analytic_aoi,simulated_aoi,simulated_aoi_stderr,gap,gap_stderr,"
         "max_downloads,solution_deviation";
  if (timing) out << ",wall_time_s";
  out << '\n';
  for (const auto& row : rows) {
    out << row.num_files << ',' << row.bandwidth << ',' << row.theta << ','
        << format_number(row.w_star) << ',' << format_number(row.lambda) << ','
        << format_number(row.analytic_aoi) << ',' << format_number(row.simulated_aoi) << ','
        << format_number(row.simulated_aoi_stderr) << ',' << format_number(row.gap) << ','
        << format_number(row.gap_stderr) << ',' << row.max_downloads << ','
        << format_number(row.solution_deviation);
    if (timing) out << ',' << format_number(row.wall_time);
    out << '\n';
  }
}

}  // namespace aoicache::experiments
