#include "imputereg/covariance.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "imputereg/error.hpp"
#include "imputereg/estimators.hpp"
#include "imputereg/normal.hpp"

namespace imputereg {

namespace {

Matrix inverse_or_rank_deficient(const Matrix& a, const char* who) {
  try {
    return inverse_spd(a);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    throw Error(ErrorKind::RankDeficient, std::string(who) + ": " + e.what());
  }
}

}  // namespace

CovarianceComponents covariance_components(const Dataset& dataset, const ImputationModel& model,
                                           const Coefficients& theta_pilot, const Matrix& zhat) {
  const Index n = dataset.pilot_size;
  const Index p = dataset.p();
  const Index q = dataset.q();
  const Index r = dataset.r();
  const Index d = p + q;
  if (model.p() != p || model.r() != r || theta_pilot.beta.size() != p || theta_pilot.gamma.size() != q) {
    throw Error(ErrorKind::DimensionMismatch, "covariance_components: model/coefficients do not match dataset");
  }
  if (zhat.rows() != dataset.rows() || zhat.cols() != p) {
    throw Error(ErrorKind::DimensionMismatch, "covariance_components: zhat has wrong shape");
  }
  if (n <= d) {
    throw Error(ErrorKind::InsufficientPilot, "covariance_components: pilot size must exceed p + q");
  }

  CovarianceComponents c;
  c.fisher_inv_blocks = fisher_inverse_blocks(model);

  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector& beta = theta_pilot.beta;

  Matrix u_obs(n, d);
  u_obs.leftCols(p) = dataset.z.topRows(n);
  u_obs.rightCols(q) = dataset.x.topRows(n);
  Matrix u_hat(n, d);
  u_hat.leftCols(p) = zhat.topRows(n);
  u_hat.rightCols(q) = dataset.x.topRows(n);
  const Matrix w = dataset.w.topRows(n);
  c.sigma2_pilot = pilot_sigma2(u_obs, dataset.y.head(n), theta_pilot);

  // Per-row variance terms d_ij = p_ij (1 - p_ij) at alpha_hat.
  const Matrix dvar = zhat.topRows(n).array() * (1.0 - zhat.topRows(n).array());

  c.sigma_tilde_u = symmetrize(u_hat.transpose() * u_hat * inv_n);

  const Vector quad = (dvar.array().rowwise() * beta.array().square().transpose()).rowwise().sum();
  const Vector omega_weight = quad.array() + c.sigma2_pilot;
  const Matrix weighted_u_hat = u_hat.array().colwise() * omega_weight.array();
  c.omega_hat = symmetrize(u_hat.transpose() * weighted_u_hat * inv_n);

  c.sigma_hat_uw.reserve(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    const Vector row_weight = beta(j) * dvar.col(j);
    const Matrix weighted_w = w.array().colwise() * row_weight.array();
    c.sigma_hat_uw.push_back(u_obs.transpose() * weighted_w * inv_n);
  }
  return c;
}

Matrix unified_covariance(const CovarianceComponents& c, Index n, Index N) {
  if (n < 1 || N < 1) throw Error(ErrorKind::InvalidArgument, "unified_covariance: sample sizes must be positive");
  if (c.sigma_hat_uw.size() != c.fisher_inv_blocks.size()) {
    throw Error(ErrorKind::DimensionMismatch, "unified_covariance: block counts differ");
  }
  const Index d = c.sigma_tilde_u.rows();
  Matrix middle = c.omega_hat / static_cast<double>(N);
  Matrix imputation_term = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < c.sigma_hat_uw.size(); ++j) {
    const Matrix& block = c.sigma_hat_uw[j];
    imputation_term += block * c.fisher_inv_blocks[j] * block.transpose();
  }
  middle += imputation_term / static_cast<double>(n);
  const Matrix st_inv = inverse_spd(c.sigma_tilde_u);
  return symmetrize(st_inv * symmetrize(middle) * st_inv);
}

Matrix pilot_covariance(const Matrix& u_pilot, double sigma2_pilot, Index n) {
  if (u_pilot.rows() != n) throw Error(ErrorKind::DimensionMismatch, "pilot_covariance: n does not match u_pilot");
  GramAccumulator acc(u_pilot.cols());
  acc.add_rows(u_pilot);
  const Matrix sigma_u = acc.gram() / static_cast<double>(n);
  return symmetrize(sigma2_pilot / static_cast<double>(n) * inverse_or_rank_deficient(sigma_u, "pilot_covariance"));
}

Matrix naive_covariance(const DesignBlocks& designs, double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorKind::InvalidArgument, "naive_covariance: sigma2 must be finite and >= 0");
  }
  GramAccumulator acc(designs.dim());
  acc.add_rows(designs.u_pilot);
  acc.add_rows(designs.u_hat_rest);
  return symmetrize(sigma2 * inverse_or_rank_deficient(acc.gram(), "naive_covariance"));
}

double stacked_residual_variance(const DesignBlocks& designs, const Vector& y, const Coefficients& theta_imp,
                                 Index n, Index N) {
  const Index d = designs.dim();
  if (designs.pilot_rows() != n || designs.u_hat_rest.rows() != N - n || y.size() != N || theta_imp.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "stacked_residual_variance: sizes do not match the design blocks");
  }
  if (N <= d) throw Error(ErrorKind::InsufficientPilot, "stacked_residual_variance: N must exceed p + q");
  const Vector theta = theta_imp.theta();
  const double rss = (y.head(n) - designs.u_pilot * theta).squaredNorm() +
                     (y.tail(N - n) - designs.u_hat_rest * theta).squaredNorm();
  return rss / static_cast<double>(N - d);
}

Matrix ols_covariance(const Matrix& u, const Vector& y, const Coefficients& theta) {
  const Index m = u.rows();
  const Index d = u.cols();
  if (y.size() != m || theta.size() != d) throw Error(ErrorKind::DimensionMismatch, "ols_covariance: dimension mismatch");
  if (m <= d) throw Error(ErrorKind::InsufficientPilot, "ols_covariance: need more rows than coefficients");
  GramAccumulator acc(d);
  acc.add_rows(u);
  const double sigma2 = (y - u * theta.theta()).squaredNorm() / static_cast<double>(m - d);
  return symmetrize(sigma2 * inverse_or_rank_deficient(acc.gram(), "ols_covariance"));
}

InferenceReport confidence_intervals(const Coefficients& theta, const Matrix& cov, double level,
                                     CovarianceSource source, const std::vector<std::string>& names) {
  const Index d = theta.size();
  if (cov.rows() != d || cov.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "confidence_intervals: covariance has wrong shape");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "confidence_intervals: level must lie in (0, 1)");
  }
  if (!names.empty() && static_cast<Index>(names.size()) != d) {
    throw Error(ErrorKind::DimensionMismatch, "confidence_intervals: wrong number of names");
  }
  const double crit = normal_quantile(0.5 + 0.5 * level);
  const Vector t = theta.theta();

  InferenceReport report;
  report.source = source;
  report.level = level;
  report.rows.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    double var = cov(j, j);
    if (var < -1e-12) {
      throw Error(ErrorKind::NegativeVariance, "confidence_intervals: negative variance", static_cast<long>(j));
    }
    if (var < 0.0) var = 0.0;
    CoefficientInference row;
    row.name = names.empty() ? "theta" + std::to_string(j + 1) : names[static_cast<std::size_t>(j)];
    row.estimate = t(j);
    row.se = std::sqrt(var);
    if (row.se > 0.0) {
      row.z = row.estimate / row.se;
      row.p_value = 2.0 * normal_cdf(-std::abs(row.z));
    } else if (row.estimate == 0.0) {
      row.z = 0.0;
      row.p_value = 1.0;
    } else {
      row.z = std::copysign(std::numeric_limits<double>::infinity(), row.estimate);
      row.p_value = 0.0;
    }
    row.ci_lo = row.estimate - crit * row.se;
    row.ci_hi = row.estimate + crit * row.se;
    report.rows.push_back(std::move(row));
  }
  return report;
}

WaldResult wald_test(const Coefficients& theta, const Matrix& cov, Index j, double null_value) {
  const Index d = theta.size();
  if (j < 0 || j >= d || cov.rows() != d || cov.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "wald_test: index or covariance shape out of range");
  }
  const double var = cov(j, j);
  if (!(var > 0.0)) throw Error(ErrorKind::ZeroVariance, "wald_test: zero variance", static_cast<long>(j));
  WaldResult result;
  result.z = (theta.theta()(j) - null_value) / std::sqrt(var);
  // 2 (1 - Phi(|z|)) written through the lower tail to avoid cancellation.
  result.p_value = 2.0 * normal_cdf(-std::abs(result.z));
  return result;
}

}  // namespace imputereg
