#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imputereg/error.hpp"
#include "imputereg/imputation.hpp"
#include "imputereg/model.hpp"
#include "imputereg/pipeline.hpp"

namespace imputereg {

/// Population behind a simulated dataset.
///   W = (1, W~), W~ ~ N(0, w_cov);  Z_j | W ~ Bernoulli(sigmoid(W'alpha_j)) independently
///   X = (1, X~), X~ ~ N(x_mean, x_cov);  Y = Z'beta + X'gamma + sigma * eps
struct GeneratorSpec {
  Matrix alpha;  // p x r
  Vector beta;   // p
  Vector gamma;  // q
  Matrix w_cov;  // (r-1) x (r-1)
  Matrix x_cov;  // (q-1) x (q-1)
  double x_mean = 1.0;
  double sigma = 1.0;
  Index n = 0;
  Index N = 0;

  void validate() const;
};

struct SimulatedData {
  Dataset dataset;  // z observed on the first n rows only
  Matrix z_full;    // N x p, every row observed (for the oracle estimator)
  Coefficients truth;
  Matrix alpha;
};

/// Draws N rows with a fixed number of uniforms per row (r-1 normals for W,
/// p uniforms for Z, q-1 normals for X, one normal for the noise, in that
/// order), so scenarios sharing a seed share every non-Z draw.
SimulatedData generate(const GeneratorSpec& spec, std::uint64_t seed);

/// Toeplitz correlation matrix rho^|i-j|.
Matrix ar1_correlation(Index dim, double rho);

/// Imbalance design: alpha_1 = (a_N, 3/2, 0, 0, 3/4, 0, 0, -2, 0),
/// alpha_2 = (t a_N, 1, 1, 1, -3 sqrt(2)/2, 1/3, 0, 0, 0), a_N = -C log(n).
GeneratorSpec example1_spec(double C, double t, double sigma, Index n, Index N);
/// Predictability design: the C = 0 coefficients scaled by k.
GeneratorSpec example2_spec(double k, double sigma, Index n, Index N);

SimulatedData gen_example1(double C, double t, double sigma, Index n, Index N, std::uint64_t seed);
SimulatedData gen_example2(double k, double sigma, Index n, Index N, std::uint64_t seed);

struct OmegaEstimate {
  double omega = 0.0;      // max_j of the per-column means
  double std_error = 0.0;  // Monte Carlo standard error of the maximizing column mean
  std::vector<double> per_column;
};

/// Monte Carlo estimate of max_j E[p(W'alpha_j){1 - p(W'alpha_j)}] with W
/// drawn as in the example designs (W~ ~ N(0, 0.25^|i-j|)).
OmegaEstimate estimate_omega(const Matrix& alpha, Index mc_size, std::uint64_t seed);

/// |S|^-1 sum_{j in S} (theta_hat_j - theta_j)^2.
double mse(const Vector& theta_hat, const Vector& theta_true, std::span<const Index> index_set);

/// Per-coefficient fraction of replications whose interval
/// [est - crit * se, est + crit * se] contains the truth.
Vector coverage(const std::vector<Vector>& estimates, const std::vector<Vector>& ses, const Vector& truth,
                double crit = 1.96);

/// {(B-1)^-1 sum_b (est_b - mean)^2}^{1/2} per coefficient.
Vector empirical_se(const std::vector<Vector>& estimates);

enum class Design { Example1, Example2, Case1, Case2, Case3 };
std::string_view to_string(Design design);
Design parse_design(std::string_view name);

struct ScenarioConfig {
  Design design = Design::Case1;
  double C = 0.0;
  double t = 2.0;
  double k = 1.0;
  double sigma = 1.0;
  Index n = 2000;
  Index N = 20000;
  int B = 200;
  std::uint64_t base_seed = 20240601;
  std::vector<EstimatorKind> estimators{EstimatorKind::Pilot, EstimatorKind::Imputed, EstimatorKind::Oracle,
                                        EstimatorKind::Weighted};
  double failure_threshold = 0.05;
  FitOptions fit;
  NaiveVariance naive_variance = NaiveVariance::Pilot;
  // When set, replications use max(fit.separation_norm, 4 max_j ||alpha_j||) as the
  // separation threshold so strongly predictive designs are not misread as separated.
  bool scale_separation_norm = true;

  /// Case presets fix (C, t) or (k, sigma): case1 = example1 with C = 0,
  /// case2 = example1 with C = 0.45, t = 2, case3 = example2 with k = 15, sigma = 1.
  ScenarioConfig resolved() const;
  void validate() const;
  GeneratorSpec generator() const;
  bool wants(EstimatorKind kind) const;
};

struct CovarianceMetrics {
  CovarianceSource source = CovarianceSource::Unified;
  Vector mean_se;
  Vector cp;
};

struct MseSummary {
  std::string index_set;
  std::vector<Index> indices;
  double mean = 0.0;
  double median = 0.0;
  // Quantiles of log(MSE): min, 25%, 50%, 75%, max.
  std::array<double, 5> log_quantiles{};
};

struct EstimatorMetrics {
  EstimatorKind kind = EstimatorKind::Pilot;
  Vector mean_estimate;
  Vector empirical_se;
  std::vector<CovarianceMetrics> covariances;
  std::vector<MseSummary> mse;

  const CovarianceMetrics* find(CovarianceSource source) const;
  const MseSummary* find_mse(std::string_view index_set) const;
};

struct ReplicationFailure {
  int replication = 0;
  ErrorKind kind = ErrorKind::ReplicationFailed;
  std::string cause;
};

/// Per-replication output kept in memory alongside the aggregates.
struct ReplicationRecord {
  int replication = 0;
  bool ok = false;
  std::vector<Vector> estimates;              // aligned with MetricsTable::estimators
  std::vector<std::vector<Vector>> ses;       // [estimator][covariance]
  double w_hat = 0.0;
  double w_raw = 0.0;
  std::optional<ReplicationFailure> failure;
};

struct WeightSummary {
  double mean_w_hat = 0.0;
  double mean_w_raw = 0.0;
  double clamped_fraction = 0.0;
};

struct MetricsTable {
  ScenarioConfig config;  // resolved
  std::vector<std::string> coefficient_names;
  Vector truth;
  int requested = 0;
  int succeeded = 0;
  std::vector<ReplicationFailure> failures;
  std::vector<EstimatorMetrics> estimators;
  std::optional<WeightSummary> weight;
  std::vector<ReplicationRecord> records;

  const EstimatorMetrics& at(EstimatorKind kind) const;
};

/// Runs B seeded replications of the scenario across `threads` workers and
/// aggregates them in replication order, so the table does not depend on the
/// thread count. Throws Error(ReplicationThresholdExceeded) when more than
/// failure_threshold of the replications fail.
MetricsTable run_replications(const ScenarioConfig& cfg, unsigned threads = 1);

/// Runs replication b alone (exposed for tests).
ReplicationRecord run_replication(const ScenarioConfig& resolved_cfg, int b);

/// Estimator kinds and covariance sources recorded per replication.
std::vector<CovarianceSource> covariance_sources(EstimatorKind kind);

}  // namespace imputereg
