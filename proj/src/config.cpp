#include "imputereg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "imputereg/error.hpp"

namespace imputereg {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "command", "data", "y", "x", "w", "z", "add_intercept_x", "add_intercept_w", "estimators",
      "level", "format", "output", "tol", "max_iter", "separation_norm", "ridge", "design", "C", "t",
      "k", "sigma", "n", "N", "B", "seed", "failure_threshold", "scale_separation_norm", "extended", "naive_variance"};
  return keys;
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::vector<std::string> read_names(const json& doc, const char* key) {
  std::vector<std::string> names;
  auto it = doc.find(key);
  if (it == doc.end()) return names;
  if (it->is_string()) return {it->get<std::string>()};
  read(doc, key, names);
  return names;
}

}  // namespace

void apply_extended(ScenarioConfig& scenario) {
  scenario.n = 8000;
  scenario.N = 200000;
  scenario.B = 1000;
}

std::vector<EstimatorKind> RunConfig::fit_estimators() const {
  if (!estimators.empty()) return estimators;
  return {EstimatorKind::Pilot, EstimatorKind::Imputed, EstimatorKind::NaiveCovariance, EstimatorKind::Weighted};
}

ScenarioConfig RunConfig::effective_scenario() const {
  ScenarioConfig s = scenario;
  s.base_seed = seed;
  s.fit = fit;
  s.naive_variance = naive_variance;
  if (!estimators.empty()) s.estimators = estimators;
  if (extended) apply_extended(s);
  return s;
}

void RunConfig::validate_fit() const {
  roles.validate();
  fit.validate();
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "config: level must lie in (0, 1)");
  for (auto kind : fit_estimators()) {
    if (kind == EstimatorKind::Oracle) {
      throw Error(ErrorKind::InvalidArgument, "config: the oracle estimator needs fully observed z (simulate only)");
    }
  }
}

void RunConfig::validate_simulate() const {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "config: level must lie in (0, 1)");
  effective_scenario().resolved().validate();
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::InvalidArgument, "config: top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) throw Error(ErrorKind::InvalidArgument, "config: unknown key '" + key + "'");
  }
  RunConfig c;
  read(doc, "command", c.command);
  if (!c.command.empty() && c.command != "fit" && c.command != "simulate") {
    throw Error(ErrorKind::InvalidArgument, "config: command must be 'fit' or 'simulate'");
  }
  read(doc, "data", c.input_path);
  read(doc, "y", c.roles.y);
  c.roles.x = read_names(doc, "x");
  c.roles.w = read_names(doc, "w");
  c.roles.z = read_names(doc, "z");
  read(doc, "add_intercept_x", c.roles.add_intercept_x);
  read(doc, "add_intercept_w", c.roles.add_intercept_w);
  for (const auto& name : read_names(doc, "estimators")) c.estimators.push_back(parse_estimator_kind(name));
  read(doc, "level", c.level);
  std::string format = "json";
  read(doc, "format", format);
  if (format == "json") {
    c.format = OutputFormat::Json;
  } else if (format == "csv") {
    c.format = OutputFormat::Csv;
  } else {
    throw Error(ErrorKind::InvalidArgument, "config: format must be 'json' or 'csv'");
  }
  read(doc, "output", c.output_path);
  read(doc, "tol", c.fit.tol);
  read(doc, "max_iter", c.fit.max_iter);
  read(doc, "separation_norm", c.fit.separation_norm);
  read(doc, "ridge", c.fit.ridge);
  std::string naive(to_string(c.naive_variance));
  read(doc, "naive_variance", naive);
  c.naive_variance = parse_naive_variance(naive);

  ScenarioConfig& s = c.scenario;
  std::string design(to_string(s.design));
  read(doc, "design", design);
  s.design = parse_design(design);
  read(doc, "C", s.C);
  read(doc, "t", s.t);
  read(doc, "k", s.k);
  read(doc, "sigma", s.sigma);
  read(doc, "n", s.n);
  read(doc, "N", s.N);
  read(doc, "B", s.B);
  read(doc, "failure_threshold", s.failure_threshold);
  read(doc, "scale_separation_norm", s.scale_separation_norm);
  read(doc, "seed", c.seed);
  read(doc, "extended", c.extended);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "config '" + path + "': " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
  json doc;
  if (!c.command.empty()) doc["command"] = c.command;
  if (!c.input_path.empty()) doc["data"] = c.input_path;
  if (!c.roles.y.empty()) doc["y"] = c.roles.y;
  doc["x"] = c.roles.x;
  doc["w"] = c.roles.w;
  doc["z"] = c.roles.z;
  doc["add_intercept_x"] = c.roles.add_intercept_x;
  doc["add_intercept_w"] = c.roles.add_intercept_w;
  std::vector<std::string> est;
  for (auto kind : c.estimators) est.emplace_back(to_string(kind));
  doc["estimators"] = est;
  doc["level"] = c.level;
  doc["format"] = c.format == OutputFormat::Json ? "json" : "csv";
  if (!c.output_path.empty()) doc["output"] = c.output_path;
  doc["tol"] = c.fit.tol;
  doc["max_iter"] = c.fit.max_iter;
  doc["separation_norm"] = c.fit.separation_norm;
  doc["ridge"] = c.fit.ridge;
  doc["naive_variance"] = std::string(to_string(c.naive_variance));
  const ScenarioConfig& s = c.scenario;
  doc["design"] = std::string(to_string(s.design));
  doc["C"] = s.C;
  doc["t"] = s.t;
  doc["k"] = s.k;
  doc["sigma"] = s.sigma;
  doc["n"] = s.n;
  doc["N"] = s.N;
  doc["B"] = s.B;
  doc["failure_threshold"] = s.failure_threshold;
  doc["scale_separation_norm"] = s.scale_separation_norm;
  doc["seed"] = c.seed;
  doc["extended"] = c.extended;
  return doc;
}

}  // namespace imputereg
