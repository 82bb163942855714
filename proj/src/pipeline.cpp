#include "imputereg/pipeline.hpp"

#include "imputereg/error.hpp"

namespace imputereg {

std::string_view to_string(NaiveVariance v) { return v == NaiveVariance::Pilot ? "pilot" : "stacked"; }

NaiveVariance parse_naive_variance(std::string_view name) {
  if (name == "pilot") return NaiveVariance::Pilot;
  if (name == "stacked") return NaiveVariance::Stacked;
  throw Error(ErrorKind::InvalidArgument, "naive_variance must be 'pilot' or 'stacked'");
}

Analysis analyze(const Dataset& dataset, const AnalysisOptions& options) {
  const Index n = dataset.pilot_size;
  const Index N = dataset.rows();
  const Index p = dataset.p();

  Analysis a;
  a.model = fit_imputation(dataset, options.fit);
  a.zhat = impute_probabilities(dataset.w, a.model);
  a.designs = assemble_designs(dataset, a.zhat);

  const Vector y_pilot = dataset.y.head(n);
  const Coefficients theta_pilot = ols_fit(a.designs.u_pilot, y_pilot, p);
  const Coefficients theta_imp = imputed_fit(a.designs, dataset.y, p);

  a.components = covariance_components(dataset, a.model, theta_pilot, a.zhat);
  const double sigma2 = a.components.sigma2_pilot;

  const Matrix pilot_cov = pilot_covariance(a.designs.u_pilot, sigma2, n);
  a.sigma_hat_u = symmetrize(a.designs.u_pilot.transpose() * a.designs.u_pilot / static_cast<double>(n));
  const Matrix unified = unified_covariance(a.components, n, N);

  a.pilot = EstimatorResult::make(EstimatorKind::Pilot, theta_pilot, pilot_cov, n, n);
  a.imputed = EstimatorResult::make(EstimatorKind::Imputed, theta_imp, unified, n, N);

  if (options.naive) {
    const double s2 = options.naive_variance == NaiveVariance::Pilot
                          ? sigma2
                          : stacked_residual_variance(a.designs, dataset.y, theta_imp, n, N);
    a.naive = EstimatorResult::make(EstimatorKind::NaiveCovariance, theta_imp, naive_covariance(a.designs, s2), n, N);
  }
  if (options.weighted) {
    WeightedEstimate est;
    est.weight = weight_hat(sigma2, unified, a.components.sigma_tilde_u, a.sigma_hat_u, n, N);
    est.theta = weighted_fit(theta_pilot, theta_imp, est.weight);
    const Matrix cov = weighted_covariance(est.weight, pilot_cov, unified, sigma2, a.components.sigma_tilde_u, N);
    a.weighted_result = EstimatorResult::make(EstimatorKind::Weighted, est.theta, cov, n, N);
    a.weighted = std::move(est);
  }
  return a;
}

}  // namespace imputereg
