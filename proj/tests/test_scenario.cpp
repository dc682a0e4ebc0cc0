#include <doctest.h>

#include <sstream>

#include "aoicache/errors.hpp"
#include "aoicache/experiments.hpp"
#include "aoicache/scenario.hpp"

using namespace aoicache;

namespace {

const char* kHomogeneous = R"({
  "id": "unit",
  "ensemble": {"kind": "homogeneous", "num_files": 10, "bandwidth": 3,
               "file": {"transition": [[1.0]], "weights": [1.0]}},
  "simulation": {"horizon": 20000, "warmup": 100, "seed": 5, "replications": 3},
  "policies": ["relaxed", "truncated"]
})";

std::string error_of(const std::string& text) {
  try {
    scenario::parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("parse a homogeneous scenario") {
  const auto config = scenario::parse_scenario(kHomogeneous);
  CHECK(config.id == "unit");
  CHECK(config.ensemble.kind == scenario::EnsembleSpec::Kind::kHomogeneous);
  CHECK(config.simulation.replications == 3);
  CHECK(config.policies == std::vector<std::string>{"relaxed", "truncated"});
  const Ensemble ensemble = scenario::build_ensemble(config.ensemble);
  CHECK(ensemble.size() == 10);
  CHECK(ensemble.bandwidth() == 3);
  CHECK(scenario::build_ensemble(config.ensemble, std::nullopt, 20, 4).size() == 20);
}

TEST_CASE("zipf defaults and q override") {
  const auto config = scenario::parse_scenario(
      R"({"ensemble": {"kind": "zipf", "num_files": 8, "bandwidth": 2}})");
  CHECK(config.ensemble.two_mode_q() == 0.9);
  CHECK(config.policies == std::vector<std::string>{"truncated", "sqrt"});
  const Ensemble swapped = scenario::build_ensemble(config.ensemble, 0.3);
  CHECK(swapped.file(0).chain() == two_mode_chain(0.3));
}

TEST_CASE("errors name the offending field") {
  CHECK(error_of(R"({"ensemble": {"kind": "zipf", "num_files": 8, "bandwidth": 2, "alhpa": 1}})")
            .find("ensemble.alhpa") != std::string::npos);
  CHECK(error_of(R"({"ensemble": {"kind": "zipf", "num_files": "many", "bandwidth": 2}})")
            .find("ensemble.num_files") != std::string::npos);
  CHECK(error_of(R"({"ensemble": {"kind": "zipf", "num_files": 8, "bandwidth": 2},
                     "policies": ["lru"]})")
            .find("policies") != std::string::npos);
  CHECK(error_of(R"({"ensemble": {"kind": "ring"}})").find("kind") != std::string::npos);
  CHECK_FALSE(error_of("{not json").empty());

  CHECK(error_of(R"({"ensemble": {"kind": "zipf", "num_files": 4, "bandwidth": 6}})")
            .find("bandwidth") != std::string::npos);
  const auto config = scenario::parse_scenario(
      R"({"ensemble": {"kind": "zipf", "num_files": 4, "bandwidth": 2}})");
  CHECK_THROWS_AS(scenario::build_ensemble(config.ensemble, std::nullopt, 4, 6), ConfigError);
}

TEST_CASE("solve report") {
  const auto config = scenario::parse_scenario(kHomogeneous);
  const auto report = experiments::run_solve(config, 1);
  CHECK(report.result.lambda == doctest::Approx(0.6).epsilon(1e-8));
  std::ostringstream out;
  experiments::write_solve_csv(out, config, report);
  CHECK(out.str().rfind("scenario,N,M,q,w_star,w_left,w_right,d_left,d_right,lambda,", 0) == 0);
  CHECK(out.str().find("unit,10,3,,") != std::string::npos);
}

TEST_CASE("simulate rows are worker independent") {
  const auto config = scenario::parse_scenario(kHomogeneous);
  const auto serial = experiments::run_simulate(config, 1);
  const auto threaded = experiments::run_simulate(config, 3);
  std::ostringstream a;
  std::ostringstream b;
  experiments::write_result_csv(a, serial, false);
  experiments::write_result_csv(b, threaded, false);
  CHECK(a.str() == b.str());
  CHECK(serial.size() == 2 * (3 + 1));
  CHECK(serial[3].replication == "all");
  for (const auto& row : serial) {
    if (row.policy == "truncated") CHECK(row.max_downloads <= 3);
  }
}

TEST_CASE("asymptotic runs need theta to divide N") {
  auto config = scenario::parse_scenario(kHomogeneous);
  CHECK_THROWS_AS(experiments::run_asymptotic(config, {10, 12}, 4, 1), ConfigError);
  config.simulation.replications = 2;
  const auto rows = experiments::run_asymptotic(config, {4, 8}, 2, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].bandwidth == 2);
  CHECK(rows[1].bandwidth == 4);
  CHECK(rows[1].solution_deviation <= 1e-8);
}

}
