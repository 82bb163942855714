#pragma once

#include <Eigen/Dense>

namespace imputereg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Solves a·x = b for symmetric positive-definite a via Cholesky.
/// Throws Error(NotPositiveDefinite) when the factorization breaks down or a
/// pivot is negligible relative to the diagonal scale, and
/// Error(InvalidArgument) when a is not symmetric or contains non-finite values.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Inverse of a symmetric positive-definite matrix, as solve_spd(a, I).
Matrix inverse_spd(const Matrix& a);

/// (m + m^T) / 2.
Matrix symmetrize(const Matrix& m);

/// Single-pass accumulator of sum_i u_i u_i^T and sum_i u_i y_i over rows,
/// with Neumaier-compensated summation so that very tall designs (1e7 rows)
/// do not lose precision. Rows are reduced in the order they are added.
class GramAccumulator {
 public:
  explicit GramAccumulator(Index dim);

  void add_row(const Vector& u, double y);

  // Adds every row of u, optionally with responses y (same row count).
  void add_rows(const Matrix& u, const Vector& y);
  void add_rows(const Matrix& u);

  void merge(const GramAccumulator& other);

  Index dim() const noexcept { return dim_; }
  Index count() const noexcept { return count_; }
  Matrix gram() const;
  Vector cross() const;

 private:
  Index dim_;
  Index count_ = 0;
  Matrix sum_;
  Matrix comp_;
  Vector cross_sum_;
  Vector cross_comp_;
};

}  // namespace imputereg
