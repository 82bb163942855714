#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "imputereg/csv.hpp"
#include "imputereg/imputation.hpp"
#include "imputereg/simlab.hpp"

namespace imputereg {

enum class OutputFormat { Json, Csv };

/// Run configuration read from a flat JSON object. Keys:
///   command, data, y, x, w, z, add_intercept_x, add_intercept_w, estimators,
///   level, format, output, tol, max_iter, separation_norm, ridge,
///   design, C, t, k, sigma, n, N, B, seed, failure_threshold,
///   scale_separation_norm, extended, naive_variance.
/// Unknown keys are rejected so typos do not silently fall back to defaults.
struct RunConfig {
  std::string command;  // "fit" or "simulate"; empty when the CLI decides
  std::string input_path;
  ColumnRoles roles;
  // fit: any of pilot, imputed, naive, weighted. simulate: pilot, imputed, oracle, weighted.
  std::vector<EstimatorKind> estimators;
  double level = 0.95;
  OutputFormat format = OutputFormat::Json;
  std::string output_path;
  FitOptions fit;
  NaiveVariance naive_variance = NaiveVariance::Pilot;
  ScenarioConfig scenario;
  bool extended = false;
  std::uint64_t seed = 20240601;

  /// Estimators to run, applying the per-command defaults when none are listed.
  std::vector<EstimatorKind> fit_estimators() const;

  /// Scenario with seed, fit options, estimators and the extended preset applied.
  ScenarioConfig effective_scenario() const;

  void validate_fit() const;
  void validate_simulate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// Flat JSON echo; parse_run_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);

/// The n = 8000, N = 200000, B = 1000 preset used for full-size runs.
void apply_extended(ScenarioConfig& scenario);

}  // namespace imputereg
