#include "imputereg/linalg.hpp"

#include <cmath>
#include <string>

#include "imputereg/error.hpp"

namespace imputereg {

namespace {

// Cholesky pivots below this fraction of the largest diagonal entry are
// treated as a breakdown (numerically singular normal equations).
constexpr double kPivotFloor = 1e-13;

inline void neumaier_add(double& sum, double& comp, double value) {
  const double t = sum + value;
  if (std::abs(sum) >= std::abs(value)) {
    comp += (sum - t) + value;
  } else {
    comp += (value - t) + sum;
  }
  sum = t;
}

}  // namespace

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "solve_spd: a is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    ", b has " + std::to_string(b.rows()) + " rows");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "solve_spd: non-finite input");
  }
  const double scale = a.cwiseAbs().maxCoeff();
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + scale)) {
    throw Error(ErrorKind::InvalidArgument, "solve_spd: matrix is not symmetric");
  }
  if (a.rows() == 0) return Matrix(0, b.cols());

  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "solve_spd: Cholesky factorization failed");
  }
  const Vector pivots = llt.matrixL().toDenseMatrix().diagonal();
  const double max_diag = a.diagonal().maxCoeff();
  for (Index i = 0; i < pivots.size(); ++i) {
    if (!(pivots(i) * pivots(i) > kPivotFloor * max_diag)) {
      throw Error(ErrorKind::NotPositiveDefinite,
                  "solve_spd: negligible pivot at index " + std::to_string(i));
    }
  }
  return llt.solve(b);
}

Matrix inverse_spd(const Matrix& a) {
  return solve_spd(a, Matrix::Identity(a.rows(), a.cols()));
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

GramAccumulator::GramAccumulator(Index dim)
    : dim_(dim),
      sum_(Matrix::Zero(dim, dim)),
      comp_(Matrix::Zero(dim, dim)),
      cross_sum_(Vector::Zero(dim)),
      cross_comp_(Vector::Zero(dim)) {}

void GramAccumulator::add_row(const Vector& u, double y) {
  if (u.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "GramAccumulator: row has wrong length");
  }
  for (Index b = 0; b < dim_; ++b) {
    const double ub = u(b);
    for (Index a = 0; a <= b; ++a) {
      neumaier_add(sum_(a, b), comp_(a, b), u(a) * ub);
    }
    neumaier_add(cross_sum_(b), cross_comp_(b), ub * y);
  }
  ++count_;
}

void GramAccumulator::add_rows(const Matrix& u, const Vector& y) {
  if (u.cols() != dim_ || u.rows() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "GramAccumulator: design/response size mismatch");
  }
  Vector row(dim_);
  for (Index i = 0; i < u.rows(); ++i) {
    row = u.row(i).transpose();
    add_row(row, y(i));
  }
}

void GramAccumulator::add_rows(const Matrix& u) { add_rows(u, Vector::Zero(u.rows())); }

void GramAccumulator::merge(const GramAccumulator& other) {
  if (other.dim_ != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "GramAccumulator: merge of different dimensions");
  }
  for (Index b = 0; b < dim_; ++b) {
    for (Index a = 0; a <= b; ++a) {
      neumaier_add(sum_(a, b), comp_(a, b), other.sum_(a, b));
      neumaier_add(sum_(a, b), comp_(a, b), other.comp_(a, b));
    }
    neumaier_add(cross_sum_(b), cross_comp_(b), other.cross_sum_(b));
    neumaier_add(cross_sum_(b), cross_comp_(b), other.cross_comp_(b));
  }
  count_ += other.count_;
}

Matrix GramAccumulator::gram() const {
  Matrix g(dim_, dim_);
  for (Index b = 0; b < dim_; ++b) {
    for (Index a = 0; a <= b; ++a) {
      g(a, b) = sum_(a, b) + comp_(a, b);
      g(b, a) = g(a, b);
    }
  }
  return g;
}

Vector GramAccumulator::cross() const { return cross_sum_ + cross_comp_; }

}  // namespace imputereg
