#include "imputereg/estimators.hpp"

#include <algorithm>
#include <string>

#include "imputereg/error.hpp"

namespace imputereg {

namespace {

Vector solve_normal_equations(const Matrix& gram, const Vector& cross, const char* who) {
  try {
    return solve_spd(gram, cross);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    throw Error(ErrorKind::RankDeficient, std::string(who) + ": design is rank deficient (" + e.what() + ")");
  }
}

}  // namespace

Coefficients ols_fit(const Matrix& u, const Vector& y, Index p) {
  if (u.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "ols_fit: u and y row counts differ");
  if (p < 0 || p > u.cols()) throw Error(ErrorKind::DimensionMismatch, "ols_fit: p out of range");
  if (u.rows() <= u.cols()) {
    throw Error(ErrorKind::InsufficientPilot,
                "ols_fit: need more rows (" + std::to_string(u.rows()) + ") than coefficients (" +
                    std::to_string(u.cols()) + ")");
  }
  GramAccumulator acc(u.cols());
  acc.add_rows(u, y);
  return Coefficients::from_theta(solve_normal_equations(acc.gram(), acc.cross(), "ols_fit"), p);
}

Coefficients imputed_fit(const DesignBlocks& designs, const Vector& y, Index p) {
  const Index n = designs.pilot_rows();
  const Index rest = designs.u_hat_rest.rows();
  if (y.size() != n + rest) {
    throw Error(ErrorKind::DimensionMismatch, "imputed_fit: y length does not match the design blocks");
  }
  if (designs.u_hat_rest.cols() != designs.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "imputed_fit: design blocks have different widths");
  }
  GramAccumulator acc(designs.dim());
  acc.add_rows(designs.u_pilot, y.head(n));
  acc.add_rows(designs.u_hat_rest, y.tail(rest));
  return Coefficients::from_theta(solve_normal_equations(acc.gram(), acc.cross(), "imputed_fit"), p);
}

double pilot_sigma2(const Matrix& u_pilot, const Vector& y_pilot, const Coefficients& theta_pilot) {
  const Index n = u_pilot.rows();
  const Index d = u_pilot.cols();
  if (y_pilot.size() != n || theta_pilot.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "pilot_sigma2: dimension mismatch");
  }
  if (n <= d) {
    throw Error(ErrorKind::InsufficientPilot,
                "pilot_sigma2: pilot size " + std::to_string(n) + " must exceed p + q = " + std::to_string(d));
  }
  const Vector residual = y_pilot - u_pilot * theta_pilot.theta();
  return residual.squaredNorm() / static_cast<double>(n - d);
}

Weight weight_hat(double sigma2_pilot, const Matrix& sigma_hat, const Matrix& sigma_tilde_u,
                  const Matrix& sigma_hat_u, Index n, Index N) {
  if (n < 1 || N < 1) throw Error(ErrorKind::InvalidArgument, "weight_hat: sample sizes must be positive");
  Weight weight;
  const double tr_sigma = sigma_hat.trace();
  const double cross = sigma2_pilot * inverse_spd(sigma_tilde_u).trace() / static_cast<double>(N);
  const double pilot = sigma2_pilot * inverse_spd(sigma_hat_u).trace() / static_cast<double>(n);
  weight.trace_terms = {tr_sigma, cross, pilot};
  const double denominator = pilot + tr_sigma - 2.0 * cross;
  if (sigma2_pilot == 0.0) {
    // No residual noise: the pilot estimator is exact.
    weight.w_raw = 1.0;
    weight.w_hat = 1.0;
    return weight;
  }
  if (!(denominator > 0.0)) {
    throw Error(ErrorKind::DegenerateWeight,
                "weight_hat: non-positive denominator " + std::to_string(denominator));
  }
  weight.w_raw = (tr_sigma - cross) / denominator;
  weight.w_hat = std::clamp(weight.w_raw, 0.0, 1.0);
  return weight;
}

Coefficients weighted_fit(const Coefficients& theta_pilot, const Coefficients& theta_imp,
                          const Weight& weight) {
  if (theta_pilot.beta.size() != theta_imp.beta.size() || theta_pilot.gamma.size() != theta_imp.gamma.size()) {
    throw Error(ErrorKind::DimensionMismatch, "weighted_fit: coefficient shapes differ");
  }
  const double w = weight.w_hat;
  Coefficients out;
  out.beta = w * theta_pilot.beta.array() + (1.0 - w) * theta_imp.beta.array();
  out.gamma = w * theta_pilot.gamma.array() + (1.0 - w) * theta_imp.gamma.array();
  return out;
}

Matrix weighted_covariance(const Weight& weight, const Matrix& pilot_cov, const Matrix& sigma_hat,
                           double sigma2_pilot, const Matrix& sigma_tilde_u, Index N) {
  const double w = weight.w_hat;
  const Matrix cross = sigma2_pilot / static_cast<double>(N) * inverse_spd(sigma_tilde_u);
  return symmetrize(w * w * pilot_cov + 2.0 * w * (1.0 - w) * cross + (1.0 - w) * (1.0 - w) * sigma_hat);
}

}  // namespace imputereg
