#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "imputereg/linalg.hpp"

namespace imputereg {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::string_view kInterceptName = "(intercept)";

/// Full sample with the binary covariates observed only on a pilot prefix.
///
/// Rows [0, pilot_size) carry observed z in {0,1}; rows [pilot_size, N) have
/// every z entry missing (NaN). Loaders reorder rows so this holds.
struct Dataset {
  Vector y;
  Matrix x;  // N x q controls, may include a leading intercept column
  Matrix w;  // N x r auxiliary features, may include a leading intercept column
  Matrix z;  // N x p, NaN = missing
  Index pilot_size = 0;

  std::string y_name = "y";
  std::vector<std::string> x_names;
  std::vector<std::string> w_names;
  std::vector<std::string> z_names;

  Index rows() const noexcept { return y.size(); }
  Index p() const noexcept { return z.cols(); }
  Index q() const noexcept { return x.cols(); }
  Index r() const noexcept { return w.cols(); }

  /// Throws Error(DimensionMismatch / InvalidArgument / EmptyPilot) on any
  /// broken invariant. Missing names are filled with defaults.
  void validate();

  Vector pilot_y() const { return y.head(pilot_size); }
  Matrix pilot_w() const { return w.topRows(pilot_size); }
  Matrix pilot_z() const { return z.topRows(pilot_size); }

  /// Coefficient names in theta order: z names then x names.
  std::vector<std::string> coefficient_names() const;
};

/// theta = (beta^T, gamma^T)^T.
struct Coefficients {
  Vector beta;
  Vector gamma;

  Index size() const noexcept { return beta.size() + gamma.size(); }
  Vector theta() const;
  static Coefficients from_theta(const Vector& theta, Index p);
};

/// Substantive-model design rows: U_i = (Z_i, X_i) on the pilot, and
/// Uhat_i = (Zhat_i, X_i) on both the remaining rows and the pilot rows.
struct DesignBlocks {
  Matrix u_pilot;
  Matrix u_hat_rest;
  Matrix u_hat_pilot;

  Index pilot_rows() const noexcept { return u_pilot.rows(); }
  Index dim() const noexcept { return u_pilot.cols(); }
};

enum class EstimatorKind { Pilot, Imputed, Oracle, Weighted, NaiveCovariance };
enum class CovarianceSource { Unified, Pilot, Naive, Oracle, Weighted };

std::string_view to_string(EstimatorKind kind);
std::string_view to_string(CovarianceSource source);
EstimatorKind parse_estimator_kind(std::string_view name);
CovarianceSource parse_covariance_source(std::string_view name);

struct EstimatorResult {
  EstimatorKind kind = EstimatorKind::Pilot;
  Coefficients theta;
  Matrix cov;
  Vector se;
  Index n_used = 0;
  Index N_used = 0;

  /// Symmetrizes cov and derives se = sqrt(diag(cov)); a diagonal entry below
  /// -1e-12 throws Error(NegativeVariance), smaller negatives become 0.
  static EstimatorResult make(EstimatorKind kind, Coefficients theta, const Matrix& cov,
                              Index n_used, Index N_used);
};

/// Builds U / Uhat blocks from a dataset and an N x p matrix of imputed
/// probabilities. Pure: same inputs, bit-identical outputs.
DesignBlocks assemble_designs(const Dataset& dataset, const Matrix& zhat);

/// Full-sample design (Z, X) from a fully observed N x p binary matrix.
Matrix full_design(const Matrix& z, const Matrix& x);

}  // namespace imputereg
