#pragma once

#include <array>

#include "imputereg/linalg.hpp"
#include "imputereg/model.hpp"

namespace imputereg {

/// OLS via the normal equations. Used for the pilot estimator (pilot rows,
/// observed Z) and the oracle estimator (all rows, fully observed Z).
/// Throws Error(RankDeficient) when u'u is numerically singular.
Coefficients ols_fit(const Matrix& u, const Vector& y, Index p);

/// Minimizer of the imputed-sample least squares loss: pilot rows enter with
/// observed Z, remaining rows with imputed probabilities.
Coefficients imputed_fit(const DesignBlocks& designs, const Vector& y, Index p);

/// Residual variance on the pilot sample with divisor n - p - q.
double pilot_sigma2(const Matrix& u_pilot, const Vector& y_pilot, const Coefficients& theta_pilot);

struct Weight {
  double w_hat = 0.0;  // clamped to [0, 1]
  double w_raw = 0.0;
  // tr(Sigma_hat), N^-1 s2 tr(Sigma_tilde_u^-1), n^-1 s2 tr(Sigma_hat_u^-1)
  std::array<double, 3> trace_terms{};
};

struct WeightedEstimate {
  Weight weight;
  Coefficients theta;
};

/// Plug-in A-optimal weight on the pilot estimator:
///   w = [tr(S) - N^-1 s2 tr(St^-1)] / [n^-1 s2 tr(Su^-1) + tr(S) - 2 N^-1 s2 tr(St^-1)]
/// where S is the unified covariance, St = n^-1 sum Uhat Uhat' and
/// Su = n^-1 sum U U' over the pilot rows. Throws Error(DegenerateWeight)
/// when the denominator is not positive.
Weight weight_hat(double sigma2_pilot, const Matrix& sigma_hat, const Matrix& sigma_tilde_u,
                  const Matrix& sigma_hat_u, Index n, Index N);

/// w * theta_pilot + (1 - w) * theta_imp, element-wise.
Coefficients weighted_fit(const Coefficients& theta_pilot, const Coefficients& theta_imp,
                          const Weight& weight);

/// Plug-in covariance of the weighted estimator:
///   w^2 V_pilot + 2 w (1 - w) N^-1 s2 St^-1 + (1 - w)^2 S.
Matrix weighted_covariance(const Weight& weight, const Matrix& pilot_cov, const Matrix& sigma_hat,
                           double sigma2_pilot, const Matrix& sigma_tilde_u, Index N);

}  // namespace imputereg
