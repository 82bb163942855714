#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "imputereg/commands.hpp"
#include "imputereg/error.hpp"

using namespace imputereg;

namespace {

void print_error(const Error& e) {
  std::cerr << "error [" << to_string(e.kind()) << "]";
  if (e.row()) std::cerr << " line " << *e.row();
  if (e.column()) std::cerr << " column " << *e.column();
  std::cerr << ": " << e.what() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear regression with imputed binary covariates"};
  app.set_version_flag("--version", std::string(IMPUTEREG_VERSION));
  app.require_subcommand(1);

  std::string data_path, config_path, out_path;
  std::optional<std::uint64_t> seed;
  bool extended = false;
  unsigned threads = 1;

  auto* fit = app.add_subcommand("fit", "Fit the imputed-regression estimators on a CSV file");
  fit->add_option("--data", data_path, "Input CSV")->required();
  fit->add_option("--config", config_path, "JSON run configuration")->required();
  fit->add_option("--out", out_path, "Report path (stdout when omitted)");
  fit->add_option("--seed", seed, "Seed recorded in the report");

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
  sim->add_option("--config", config_path, "JSON run configuration")->required();
  sim->add_flag("--extended", extended, "Use n=8000, N=200000, B=1000");
  sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_path, "Output directory for metrics files");
  sim->add_option("--seed", seed, "Override the base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = load_run_config(config_path);
    if (seed) config.seed = *seed;
    if (fit->parsed()) {
      const FitReport report = cmd_fit(config, data_path);
      write_fit_report(report, config.format, out_path, std::cout);
    } else {
      if (extended) config.extended = true;
      cmd_simulate(config, threads, out_path, std::cout);
    }
  } catch (const Error& e) {
    print_error(e);
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
