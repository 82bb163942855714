#pragma once

#include <optional>
#include <string_view>

#include "imputereg/covariance.hpp"
#include "imputereg/estimators.hpp"
#include "imputereg/imputation.hpp"

namespace imputereg {

// Noise variance plugged into the naive covariance: the pilot residual
// variance, or the residual variance of the imputed fit over all rows
// (which also absorbs the imputation noise beta' D beta).
enum class NaiveVariance { Pilot, Stacked };
std::string_view to_string(NaiveVariance v);
NaiveVariance parse_naive_variance(std::string_view name);

struct AnalysisOptions {
  FitOptions fit;
  NaiveVariance naive_variance = NaiveVariance::Pilot;
  bool naive = true;     // also compute the covariance that ignores imputation error
  bool weighted = true;  // also compute the A-optimal weighted estimator
};

/// Everything the imputed-regression workflow produces for one dataset:
/// imputation fit, probabilities, estimators and their covariances.
struct Analysis {
  ImputationModel model;
  Matrix zhat;
  DesignBlocks designs;
  CovarianceComponents components;
  Matrix sigma_hat_u;  // n^-1 sum_{i<=n} U_i U_i'

  EstimatorResult pilot;    // pilot covariance
  EstimatorResult imputed;  // unified covariance
  std::optional<EstimatorResult> naive;
  std::optional<WeightedEstimate> weighted;
  std::optional<EstimatorResult> weighted_result;
};

/// Fit imputation models, impute, estimate. Errors propagate as Error.
Analysis analyze(const Dataset& dataset, const AnalysisOptions& options = {});

}  // namespace imputereg
