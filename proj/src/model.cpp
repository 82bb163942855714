#include "imputereg/model.hpp"

#include <cmath>

#include "imputereg/error.hpp"

namespace imputereg {

namespace {

void fill_names(std::vector<std::string>& names, Index count, const std::string& prefix) {
  if (static_cast<Index>(names.size()) == count) return;
  if (!names.empty()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dataset: " + prefix + " has " + std::to_string(count) + " columns but " +
                    std::to_string(names.size()) + " names");
  }
  for (Index j = 0; j < count; ++j) names.push_back(prefix + std::to_string(j + 1));
}

}  // namespace

void Dataset::validate() {
  const Index n_rows = y.size();
  if (x.rows() != n_rows || w.rows() != n_rows || z.rows() != n_rows) {
    throw Error(ErrorKind::DimensionMismatch, "dataset: y, x, w, z row counts differ");
  }
  if (p() < 1 || q() < 1 || r() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "dataset: need p >= 1, q >= 1, r >= 1");
  }
  if (pilot_size < 1) throw Error(ErrorKind::EmptyPilot, "dataset: pilot sample is empty");
  if (pilot_size > n_rows) {
    throw Error(ErrorKind::InvalidArgument, "dataset: pilot size exceeds sample size");
  }
  if (!y.allFinite() || !x.allFinite() || !w.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "dataset: non-finite value in y, x or w");
  }
  for (Index i = 0; i < n_rows; ++i) {
    for (Index j = 0; j < p(); ++j) {
      const double v = z(i, j);
      if (i < pilot_size) {
        if (!(v == 0.0 || v == 1.0)) {
          throw Error(ErrorKind::InvalidArgument,
                      "dataset: pilot z must be 0 or 1", static_cast<long>(j), static_cast<long>(i));
        }
      } else if (!std::isnan(v)) {
        throw Error(ErrorKind::InvalidArgument,
                    "dataset: z must be missing outside the pilot prefix", static_cast<long>(j),
                    static_cast<long>(i));
      }
    }
  }
  fill_names(x_names, q(), "x");
  fill_names(w_names, r(), "w");
  fill_names(z_names, p(), "z");
}

std::vector<std::string> Dataset::coefficient_names() const {
  std::vector<std::string> names = z_names;
  names.insert(names.end(), x_names.begin(), x_names.end());
  return names;
}

Vector Coefficients::theta() const {
  Vector t(size());
  t << beta, gamma;
  return t;
}

Coefficients Coefficients::from_theta(const Vector& theta, Index p) {
  if (p < 0 || p > theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficients: p out of range");
  }
  return Coefficients{theta.head(p), theta.tail(theta.size() - p)};
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Pilot: return "pilot";
    case EstimatorKind::Imputed: return "imputed";
    case EstimatorKind::Oracle: return "oracle";
    case EstimatorKind::Weighted: return "weighted";
    case EstimatorKind::NaiveCovariance: return "naive";
  }
  return "unknown";
}

std::string_view to_string(CovarianceSource source) {
  switch (source) {
    case CovarianceSource::Unified: return "unified";
    case CovarianceSource::Pilot: return "pilot";
    case CovarianceSource::Naive: return "naive";
    case CovarianceSource::Oracle: return "oracle";
    case CovarianceSource::Weighted: return "weighted";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  for (auto kind : {EstimatorKind::Pilot, EstimatorKind::Imputed, EstimatorKind::Oracle,
                    EstimatorKind::Weighted, EstimatorKind::NaiveCovariance}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

CovarianceSource parse_covariance_source(std::string_view name) {
  for (auto source : {CovarianceSource::Unified, CovarianceSource::Pilot, CovarianceSource::Naive,
                      CovarianceSource::Oracle, CovarianceSource::Weighted}) {
    if (to_string(source) == name) return source;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown covariance source '" + std::string(name) + "'");
}

EstimatorResult EstimatorResult::make(EstimatorKind kind, Coefficients theta, const Matrix& cov,
                                      Index n_used, Index N_used) {
  if (cov.rows() != theta.size() || cov.cols() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "estimator result: covariance has wrong shape");
  }
  EstimatorResult result;
  result.kind = kind;
  result.theta = std::move(theta);
  result.cov = symmetrize(cov);
  result.se.resize(result.cov.rows());
  for (Index j = 0; j < result.cov.rows(); ++j) {
    const double v = result.cov(j, j);
    if (v < -1e-12) {
      throw Error(ErrorKind::NegativeVariance, "estimator result: negative variance", static_cast<long>(j));
    }
    if (v < 0.0) result.cov(j, j) = 0.0;
    result.se(j) = std::sqrt(result.cov(j, j));
  }
  result.n_used = n_used;
  result.N_used = N_used;
  return result;
}

DesignBlocks assemble_designs(const Dataset& dataset, const Matrix& zhat) {
  const Index n_rows = dataset.rows();
  const Index n = dataset.pilot_size;
  const Index p = dataset.p();
  const Index q = dataset.q();
  if (zhat.rows() != n_rows || zhat.cols() != p) {
    throw Error(ErrorKind::DimensionMismatch,
                "assemble_designs: zhat is " + std::to_string(zhat.rows()) + "x" +
                    std::to_string(zhat.cols()) + ", expected " + std::to_string(n_rows) + "x" +
                    std::to_string(p));
  }
  // Probabilities may saturate to exactly 0 or 1 in double precision.
  if (!zhat.allFinite() || zhat.minCoeff() < 0.0 || zhat.maxCoeff() > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "assemble_designs: zhat entries must lie in [0, 1]");
  }

  DesignBlocks blocks;
  blocks.u_pilot.resize(n, p + q);
  blocks.u_pilot.leftCols(p) = dataset.z.topRows(n);
  blocks.u_pilot.rightCols(q) = dataset.x.topRows(n);
  blocks.u_hat_pilot.resize(n, p + q);
  blocks.u_hat_pilot.leftCols(p) = zhat.topRows(n);
  blocks.u_hat_pilot.rightCols(q) = dataset.x.topRows(n);
  blocks.u_hat_rest.resize(n_rows - n, p + q);
  blocks.u_hat_rest.leftCols(p) = zhat.bottomRows(n_rows - n);
  blocks.u_hat_rest.rightCols(q) = dataset.x.bottomRows(n_rows - n);
  return blocks;
}

Matrix full_design(const Matrix& z, const Matrix& x) {
  if (z.rows() != x.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "full_design: z and x row counts differ");
  }
  if (!z.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "full_design: z must be fully observed");
  }
  Matrix u(z.rows(), z.cols() + x.cols());
  u.leftCols(z.cols()) = z;
  u.rightCols(x.cols()) = x;
  return u;
}

}  // namespace imputereg
