#include "imputereg/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "imputereg/error.hpp"
#include "imputereg/pipeline.hpp"

namespace imputereg {

namespace {

EstimatorTable make_table(const EstimatorResult& result, EstimatorKind estimator, CovarianceSource source,
                          double level, const std::vector<std::string>& names) {
  EstimatorTable table;
  table.estimator = estimator;
  table.source = source;
  table.rows = confidence_intervals(result.theta, result.cov, level, source, names).rows;
  return table;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

FitReport fit_dataset(const RunConfig& config, const LoadedData& data) {
  config.validate_fit();
  const Dataset& ds = data.dataset;
  const auto wanted = config.fit_estimators();
  auto wants = [&](EstimatorKind k) { return std::find(wanted.begin(), wanted.end(), k) != wanted.end(); };

  AnalysisOptions options;
  options.fit = config.fit;
  options.naive_variance = config.naive_variance;
  options.naive = wants(EstimatorKind::NaiveCovariance);
  options.weighted = wants(EstimatorKind::Weighted);
  const Analysis a = analyze(ds, options);

  FitReport report;
  report.version = IMPUTEREG_VERSION;
  report.seed = config.seed;
  report.n = ds.pilot_size;
  report.N = ds.rows();
  report.level = config.level;
  const auto names = ds.coefficient_names();
  for (auto kind : wanted) {
    switch (kind) {
      case EstimatorKind::Pilot:
        report.estimators.push_back(make_table(a.pilot, kind, CovarianceSource::Pilot, config.level, names));
        break;
      case EstimatorKind::Imputed:
        report.estimators.push_back(make_table(a.imputed, kind, CovarianceSource::Unified, config.level, names));
        break;
      case EstimatorKind::NaiveCovariance:
        report.estimators.push_back(
            make_table(*a.naive, EstimatorKind::Imputed, CovarianceSource::Naive, config.level, names));
        break;
      case EstimatorKind::Weighted:
        report.estimators.push_back(
            make_table(*a.weighted_result, kind, CovarianceSource::Weighted, config.level, names));
        report.w_hat = a.weighted->weight.w_hat;
        report.w_raw = a.weighted->weight.w_raw;
        break;
      case EstimatorKind::Oracle:
        break;
    }
  }

  const Index n = ds.pilot_size;
  for (Index j = 0; j < ds.p(); ++j) {
    ImputationDiagnostics d;
    d.column = ds.z_names[static_cast<std::size_t>(j)];
    d.iterations = a.model.iterations[static_cast<std::size_t>(j)];
    d.converged = a.model.converged[static_cast<std::size_t>(j)];
    const Vector z = ds.z.col(j).head(n);
    d.pilot_positive_rate = z.mean();
    d.pilot_auc = auc(a.zhat.col(j).head(n), z);
    for (Index k = 0; k < a.model.r(); ++k) d.alpha.push_back(a.model.alpha(j, k));
    report.imputation.push_back(std::move(d));
  }
  report.row_order = data.row_order;
  RunConfig echo = config;
  echo.command = "fit";
  report.config = to_json(echo);
  return report;
}

FitReport cmd_fit(const RunConfig& config, const std::string& data_path) {
  config.validate_fit();
  RunConfig effective = config;
  effective.input_path = data_path;
  return fit_dataset(effective, load_csv(data_path, config.roles));
}

void write_fit_report(const FitReport& report, OutputFormat format, const std::string& path, std::ostream& out) {
  auto emit = [&](std::ostream& os) {
    if (format == OutputFormat::Json) {
      os << to_json(report).dump(2) << '\n';
    } else {
      write_fit_csv(report, os);
    }
  };
  if (path.empty()) {
    emit(out);
    return;
  }
  std::ofstream file = open_output(path);
  emit(file);
  if (!file) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

MetricsTable cmd_simulate(const RunConfig& config, unsigned threads, const std::string& out_dir,
                          std::ostream& summary) {
  config.validate_simulate();
  const MetricsTable table = run_replications(config.effective_scenario(), threads);
  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create '" + out_dir + "': " + ec.message());
    {
      auto out = open_output(dir / "metrics_coefficients.csv");
      write_metrics_coefficients_csv(table, out);
    }
    {
      auto out = open_output(dir / "metrics_mse.csv");
      write_metrics_mse_csv(table, out);
    }
    {
      RunConfig echo = config;
      echo.command = "simulate";
      auto out = open_output(dir / "metrics.json");
      out << metrics_to_json(table, to_json(echo)).dump(2) << '\n';
    }
  }
  print_summary(table, summary);
  return table;
}

}  // namespace imputereg
