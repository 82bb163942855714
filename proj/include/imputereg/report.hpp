#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "imputereg/covariance.hpp"
#include "imputereg/simlab.hpp"

namespace imputereg {

struct EstimatorTable {
  EstimatorKind estimator = EstimatorKind::Imputed;
  CovarianceSource source = CovarianceSource::Unified;
  std::vector<CoefficientInference> rows;

  bool operator==(const EstimatorTable&) const = default;
};

struct ImputationDiagnostics {
  std::string column;
  int iterations = 0;
  bool converged = false;
  double pilot_positive_rate = 0.0;
  double pilot_auc = 0.0;  // NaN when the pilot column has one class
  std::vector<double> alpha;

  bool operator==(const ImputationDiagnostics&) const = default;
};

struct FitReport {
  std::string version;
  std::uint64_t seed = 0;
  Index n = 0;
  Index N = 0;
  double level = 0.95;
  std::vector<EstimatorTable> estimators;
  std::optional<double> w_hat;
  std::optional<double> w_raw;
  std::vector<ImputationDiagnostics> imputation;
  std::vector<Index> row_order;
  nlohmann::json config;

  bool operator==(const FitReport&) const = default;
};

/// Area under the ROC curve of scores against 0/1 labels, ties counted as 1/2.
double auc(const Vector& scores, const Vector& labels);

/// Non-finite numbers are written as the strings "inf", "-inf" and "nan" so
/// the report stays valid JSON and re-parses to the same values.
nlohmann::json to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& doc);

/// One row per (estimator, coefficient), 17 significant digits.
void write_fit_csv(const FitReport& report, std::ostream& out);

/// metrics_coefficients.csv: per estimator, covariance source and coefficient.
void write_metrics_coefficients_csv(const MetricsTable& table, std::ostream& out);
/// metrics_mse.csv: per estimator and index set.
void write_metrics_mse_csv(const MetricsTable& table, std::ostream& out);
/// Everything above plus failures, weight summary, RNG description and config echo.
nlohmann::json metrics_to_json(const MetricsTable& table, const nlohmann::json& config_echo);

/// Per coefficient: SE, then mean SE-hat and CP for each covariance of each estimator.
void print_summary(const MetricsTable& table, std::ostream& out);

/// Description of the random number generation, frozen for reproducibility.
std::string rng_description();

}  // namespace imputereg
