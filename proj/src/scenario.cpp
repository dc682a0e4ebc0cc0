#include "aoicache/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aoicache/errors.hpp"
#include "aoicache/policies.hpp"

namespace aoicache::scenario {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("", "expected an object");
  }

  ~ObjectReader() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail(key, "is required");
    return node_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(key, "has the wrong type");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (has(key)) out = get<T>(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) fail(key, "is not a recognized field");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? (path_.empty() ? "<root>" : path_) : child(key);
    throw ConfigError("config field '" + where + "' " + what);
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

FileSpec parse_file(const json& node, const std::string& path) {
  ObjectReader reader(node, path);
  FileSpec file;
  file.weights = reader.get<std::vector<double>>("weights");
  if (reader.has("q")) {
    file.q = reader.get<double>("q");
    if (reader.has("transition")) reader.fail("transition", "conflicts with 'q'");
  } else {
    const auto rows = reader.get<std::vector<std::vector<double>>>("transition");
    file.transition = Matrix(rows.size(), rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.size()) reader.fail("transition", "must be a square matrix");
      for (std::size_t s = 0; s < rows.size(); ++s) file.transition(r, s) = rows[r][s];
    }
  }
  reader.finish();
  return file;
}

EnsembleSpec parse_ensemble(const json& node) {
  ObjectReader reader(node, "ensemble");
  EnsembleSpec spec;
  const auto kind = reader.get<std::string>("kind");
  if (kind == "zipf") {
    spec.kind = EnsembleSpec::Kind::kZipf;
    spec.num_files = reader.get<std::size_t>("num_files");
    reader.read("alpha", spec.alpha);
    reader.read("q", spec.q);
    reader.read("low_factor", spec.low_factor);
    reader.read("high_factor", spec.high_factor);
  } else if (kind == "homogeneous") {
    spec.kind = EnsembleSpec::Kind::kHomogeneous;
    spec.num_files = reader.get<std::size_t>("num_files");
    spec.files.push_back(parse_file(reader.at("file"), reader.child("file")));
  } else if (kind == "explicit") {
    spec.kind = EnsembleSpec::Kind::kExplicit;
    const json& list = reader.at("file_list");
    if (!list.is_array() || list.empty()) reader.fail("file_list", "must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      spec.files.push_back(parse_file(list[i], reader.child("file_list[" + std::to_string(i) + "]")));
    }
    spec.num_files = spec.files.size();
  } else {
    reader.fail("kind", "must be one of zipf, homogeneous, explicit");
  }
  spec.bandwidth = reader.get<std::size_t>("bandwidth");
  reader.finish();
  return spec;
}

}  // namespace

std::optional<double> EnsembleSpec::two_mode_q() const {
  if (kind == Kind::kZipf) return q;
  if (kind == Kind::kHomogeneous && files.front().q) return files.front().q;
  return std::nullopt;
}

lagrange::SearchOptions SolverSpec::search_options(std::size_t workers) const {
  lagrange::SearchOptions options;
  options.tolerance = bisection_tolerance;
  options.solver.lp.pivot_tolerance = pivot_tolerance;
  options.solver.lp.feasibility_tolerance = feasibility_tolerance;
  options.solver.initial_truncation = initial_truncation;
  options.workers = workers;
  return options;
}

ScenarioConfig parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ObjectReader reader(root, "");
  ScenarioConfig config;
  reader.read("id", config.id);
  config.ensemble = parse_ensemble(reader.at("ensemble"));

  if (reader.has("solver")) {
    ObjectReader solver(reader.at("solver"), "solver");
    solver.read("bisection_tolerance", config.solver.bisection_tolerance);
    solver.read("pivot_tolerance", config.solver.pivot_tolerance);
    solver.read("feasibility_tolerance", config.solver.feasibility_tolerance);
    solver.read("initial_truncation", config.solver.initial_truncation);
    solver.finish();
    if (!(config.solver.bisection_tolerance > 0.0)) {
      solver.fail("bisection_tolerance", "must be positive");
    }
  }
  if (reader.has("simulation")) {
    ObjectReader sim(reader.at("simulation"), "simulation");
    sim.read("horizon", config.simulation.horizon);
    sim.read("warmup", config.simulation.warmup);
    sim.read("seed", config.simulation.seed);
    sim.read("replications", config.simulation.replications);
    sim.finish();
    if (config.simulation.horizon <= config.simulation.warmup) {
      sim.fail("horizon", "must exceed warmup");
    }
    if (config.simulation.replications < 1) sim.fail("replications", "must be at least 1");
  }
  if (reader.has("policies")) {
    config.policies = reader.get<std::vector<std::string>>("policies");
    for (const auto& name : config.policies) {
      if (!policies::is_known_policy(name)) {
        reader.fail("policies", "names unknown policy '" + name + "'");
      }
    }
  }
  if (reader.has("sweep")) {
    ObjectReader sweep(reader.at("sweep"), "sweep");
    sweep.read("q", config.sweep_q);
    sweep.read("bandwidth", config.sweep_bandwidth);
    sweep.finish();
  }
  if (reader.has("asymptotic")) {
    ObjectReader asym(reader.at("asymptotic"), "asymptotic");
    config.asymptotic_files = asym.get<std::vector<std::size_t>>("num_files");
    config.asymptotic_theta = asym.get<std::size_t>("theta");
    asym.finish();
  }
  reader.finish();

  // Surface ensemble invariant violations now rather than mid-run.
  build_ensemble(config.ensemble);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

Ensemble build_ensemble(const EnsembleSpec& spec, std::optional<double> q,
                        std::optional<std::size_t> num_files, std::optional<std::size_t> bandwidth) {
  const std::size_t n = num_files.value_or(spec.num_files);
  const std::size_t m = bandwidth.value_or(spec.bandwidth);
  const auto make_file = [&](const FileSpec& f) {
    const std::optional<double> chain_q = (q && f.q) ? q : f.q;
    PopularityChain chain = chain_q ? two_mode_chain(*chain_q) : PopularityChain(f.transition);
    return FileModel(std::move(chain), f.weights);
  };
  try {
    switch (spec.kind) {
      case EnsembleSpec::Kind::kZipf:
        return zipf_ensemble(n, spec.alpha, q.value_or(spec.q), spec.low_factor, spec.high_factor, m);
      case EnsembleSpec::Kind::kHomogeneous:
        return homogeneous_ensemble(n, m, make_file(spec.files.front()));
      case EnsembleSpec::Kind::kExplicit: {
        if (num_files && *num_files != spec.files.size()) {
          throw InvalidParameter("explicit ensembles cannot be resized");
        }
        std::vector<FileModel> files;
        for (const auto& f : spec.files) files.push_back(make_file(f));
        return Ensemble(std::move(files), m);
      }
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("invalid ensemble: ") + e.what());
  }
  throw ConfigError("unknown ensemble kind");
}

}  // namespace aoicache::scenario
