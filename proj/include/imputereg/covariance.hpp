#pragma once

#include <string>
#include <vector>

#include "imputereg/imputation.hpp"
#include "imputereg/linalg.hpp"
#include "imputereg/model.hpp"

namespace imputereg {

/// Pilot-sample ingredients of the unified covariance estimator.
struct CovarianceComponents {
  Matrix sigma_tilde_u;             // n^-1 sum_{i<=n} Uhat_i Uhat_i'
  std::vector<Matrix> sigma_hat_uw;  // p blocks (p+q) x r: n^-1 sum beta_j d_ij U_i W_i'
  double sigma2_pilot = 0.0;
  Matrix omega_hat;                  // n^-1 sum (beta' D_i beta + s2) Uhat_i Uhat_i'
  std::vector<Matrix> fisher_inv_blocks;  // p blocks r x r
};

/// Evaluates every component over the pilot rows. Sigma_hat_uw uses the
/// observed U_i while Sigma_tilde_u and Omega_hat use the imputed Uhat_i.
CovarianceComponents covariance_components(const Dataset& dataset, const ImputationModel& model,
                                           const Coefficients& theta_pilot, const Matrix& zhat);

/// St^-1 { n^-1 sum_j B_j I_j^-1 B_j' + N^-1 Omega } St^-1, symmetrized.
Matrix unified_covariance(const CovarianceComponents& c, Index n, Index N);

/// n^-1 s2 (n^-1 sum U U')^-1. Throws Error(RankDeficient).
Matrix pilot_covariance(const Matrix& u_pilot, double sigma2_pilot, Index n);

/// Covariance that treats imputed probabilities as observed values:
/// sigma2 G^-1 with G = sum_{i<=n} U U' + sum_{i>n} Uhat Uhat'.
Matrix naive_covariance(const DesignBlocks& designs, double sigma2);

/// Residual variance of theta_imp over the stacked design, divisor N - p - q.
double stacked_residual_variance(const DesignBlocks& designs, const Vector& y, const Coefficients& theta_imp,
                                 Index n, Index N);

/// Textbook OLS covariance s2 (U'U)^-1 with divisor m - d.
Matrix ols_covariance(const Matrix& u, const Vector& y, const Coefficients& theta);

struct CoefficientInference {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool operator==(const CoefficientInference&) const = default;
};

struct InferenceReport {
  CovarianceSource source = CovarianceSource::Unified;
  double level = 0.95;
  std::vector<CoefficientInference> rows;
};

/// Wald intervals theta_j +- z_{(1+level)/2} sqrt(cov_jj) with tests against 0.
/// Diagonal entries below -1e-12 throw Error(NegativeVariance); tiny
/// negatives are clamped to zero. Zero-variance rows get z = 0, p = 1 when
/// the estimate is 0 and z = +-inf, p = 0 otherwise.
InferenceReport confidence_intervals(const Coefficients& theta, const Matrix& cov, double level = 0.95,
                                     CovarianceSource source = CovarianceSource::Unified,
                                     const std::vector<std::string>& names = {});

struct WaldResult {
  double z = 0.0;
  double p_value = 1.0;
};

/// z = (theta_j - null) / sqrt(cov_jj), p = 2 (1 - Phi(|z|)).
/// Throws Error(ZeroVariance) when cov_jj <= 0.
WaldResult wald_test(const Coefficients& theta, const Matrix& cov, Index j, double null_value = 0.0);

}  // namespace imputereg
