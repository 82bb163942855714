#pragma once

#include <iosfwd>
#include <string>

#include "imputereg/config.hpp"
#include "imputereg/csv.hpp"
#include "imputereg/report.hpp"
#include "imputereg/simlab.hpp"

namespace imputereg {

/// Loads the data, runs the imputed-regression workflow and collects one
/// coefficient table per requested estimator. The imputed estimator reports
/// the unified covariance; "naive" adds the imputed estimate with the
/// covariance that ignores imputation error.
FitReport cmd_fit(const RunConfig& config, const std::string& data_path);
FitReport fit_dataset(const RunConfig& config, const LoadedData& data);

/// Writes the report to `path` (or `out` when path is empty) in the configured format.
void write_fit_report(const FitReport& report, OutputFormat format, const std::string& path, std::ostream& out);

/// Runs the scenario, writes metrics_coefficients.csv, metrics_mse.csv and
/// metrics.json into out_dir (skipped when empty) and prints the summary.
MetricsTable cmd_simulate(const RunConfig& config, unsigned threads, const std::string& out_dir,
                          std::ostream& summary);

}  // namespace imputereg
