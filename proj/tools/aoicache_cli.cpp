// Command-line front end: solve, simulate, sweep-q, asymptotic, oracle-check.
// Exit codes: 0 success, 2 configuration error, 3 numerical or solver error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoicache/cmdp.hpp"
#include "aoicache/errors.hpp"
#include "aoicache/experiments.hpp"
#include "aoicache/oracle.hpp"
#include "aoicache/scenario.hpp"

namespace {

using namespace aoicache;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "scenario JSON file")->required();
  cmd->add_option("--out", flags.out_path, "CSV output path (default: stdout)");
  cmd->add_option("--seed", flags.seed, "override the scenario's root seed");
  cmd->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
  cmd->add_flag("--timing", flags.timing, "append a wall-time column to CSV output");
}

scenario::ScenarioConfig load(const CommonFlags& flags) {
  auto config = scenario::load_scenario(flags.config_path);
  if (flags.seed) config.simulation.seed = *flags.seed;
  return config;
}

template <typename Writer>
void emit(const CommonFlags& flags, Writer&& write) {
  if (flags.out_path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(flags.out_path);
  if (!out) throw ConfigError("cannot open output file " + flags.out_path);
  write(out);
}

void cmd_solve(const CommonFlags& flags) {
  const auto config = load(flags);
  const auto report = experiments::run_solve(config, flags.workers);
  const auto& r = report.result;
  std::cerr << "scenario " << config.id << ": N=" << report.ensemble.size()
            << " M=" << report.ensemble.bandwidth() << '\n'
            << "  W* = " << experiments::format_number(r.w_star) << "  bracket ["
            << experiments::format_number(r.w_left) << ", " << experiments::format_number(r.w_right)
            << "]\n"
            << "  d(left) = " << experiments::format_number(r.d_left)
            << "  d(right) = " << experiments::format_number(r.d_right)
            << "  lambda = " << experiments::format_number(r.lambda) << '\n'
            << "  relaxed AoI = " << experiments::format_number(report.relaxed.aoi)
            << "  download rate = " << experiments::format_number(report.relaxed.download_rate)
            << '\n';
  emit(flags, [&](std::ostream& out) { experiments::write_solve_csv(out, config, report); });
}

void cmd_simulate(const CommonFlags& flags) {
  const auto config = load(flags);
  const auto rows = experiments::run_simulate(config, flags.workers);
  emit(flags, [&](std::ostream& out) { experiments::write_result_csv(out, rows, flags.timing); });
}

void cmd_sweep(const CommonFlags& flags, const std::vector<double>& q_values,
               const std::vector<std::size_t>& bandwidths) {
  const auto config = load(flags);
  const auto rows = experiments::run_sweep(config, q_values, bandwidths, flags.workers);
  emit(flags, [&](std::ostream& out) { experiments::write_result_csv(out, rows, flags.timing); });
}

void cmd_asymptotic(const CommonFlags& flags, const std::vector<std::size_t>& file_counts,
                    std::size_t theta) {
  const auto config = load(flags);
  const auto rows = experiments::run_asymptotic(config, file_counts, theta, flags.workers);
  emit(flags, [&](std::ostream& out) { experiments::write_asymptotic_csv(out, rows, flags.timing); });
}

void cmd_oracle_check(const CommonFlags& flags, double multiplier) {
  const auto config = load(flags);
  const Ensemble ensemble = scenario::build_ensemble(config.ensemble);
  emit(flags, [&](std::ostream& out) {
    out << "file,modes,age_bound,lp_objective,rvi_gain,threshold_cost,thresholds\n";
    for (std::size_t n = 0; n < ensemble.size(); ++n) {
      bool repeat = false;
      for (std::size_t k = 0; k < n && !repeat; ++k) repeat = ensemble.file(k) == ensemble.file(n);
      if (repeat) continue;
      const FileModel& file = ensemble.file(n);
      const std::size_t bound = cmdp::age_upper_bound(file, multiplier);
      const auto sol = cmdp::solve_per_file(file, multiplier);
      const auto rvi = oracle::rvi_solve(file, multiplier, bound);
      out << n << ',' << file.num_modes() << ',' << bound << ','
          << experiments::format_number(sol.objective()) << ','
          << experiments::format_number(rvi.average_cost) << ',';
      try {
        const auto best = oracle::enumerate_thresholds(file, multiplier, bound);
        out << experiments::format_number(best.cost) << ',';
        for (std::size_t r = 0; r < best.thresholds.size(); ++r) {
          out << (r ? " " : "") << best.thresholds[r];
        }
      } catch (const InvalidParameter&) {
        out << ',';  // search space too large
      }
      out << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information cache update policies under a bandwidth limit"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* solve = app.add_subcommand("solve", "find the price W*, mixing weight and relaxed AoI");
  add_common(solve, flags);

  auto* simulate = app.add_subcommand("simulate", "simulate the configured policies");
  add_common(simulate, flags);

  std::vector<double> q_values;
  std::vector<std::size_t> bandwidths;
  auto* sweep = app.add_subcommand("sweep-q", "sweep the two-mode persistence q and bandwidth M");
  add_common(sweep, flags);
  sweep->add_option("--q", q_values, "q grid (default: scenario sweep.q)")->delimiter(',');
  sweep->add_option("--bandwidth", bandwidths, "M grid (default: scenario sweep.bandwidth)")
      ->delimiter(',');

  std::vector<std::size_t> file_counts;
  std::size_t theta = 0;
  auto* asymptotic = app.add_subcommand("asymptotic", "relative gap of the truncated policy vs N");
  add_common(asymptotic, flags);
  asymptotic->add_option("--num-files", file_counts, "N grid (default: scenario asymptotic)")
      ->delimiter(',');
  asymptotic->add_option("--theta", theta, "N / M ratio (default: scenario asymptotic)");

  double multiplier = 5.0;
  auto* oracle_check = app.add_subcommand("oracle-check", "compare LP, RVI and threshold search");
  add_common(oracle_check, flags);
  oracle_check->add_option("--multiplier", multiplier, "download price W");
  oracle_check->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) cmd_solve(flags);
    if (*simulate) cmd_simulate(flags);
    if (*sweep) cmd_sweep(flags, q_values, bandwidths);
    if (*asymptotic) cmd_asymptotic(flags, file_counts, theta);
    if (*oracle_check) cmd_oracle_check(flags, multiplier);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
