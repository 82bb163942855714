#pragma once

#include <cstdint>
#include <random>

#include "imputereg/model.hpp"
#include "imputereg/rng.hpp"

namespace testing_support {

using imputereg::Dataset;
using imputereg::Index;
using imputereg::Matrix;
using imputereg::Vector;

inline Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(gen);
  return m;
}

// Small logistic dataset: w = (1, N(0,1) features), z_j ~ Bernoulli(sigmoid(w'alpha_j)),
// x = (1, N(0,1) features), y = z'beta + x'gamma + sigma eps.
inline Dataset small_dataset(std::uint64_t seed, Index n, Index N, Index p, Index q, Index r, double sigma = 1.0,
                             double signal = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  Dataset ds;
  ds.w = Matrix(N, r);
  ds.x = Matrix(N, q);
  ds.z = Matrix(N, p);
  ds.y = Vector(N);
  Matrix alpha(p, r);
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < r; ++k) alpha(j, k) = signal * (k == 0 ? 0.2 : nd(gen) * 0.8);
  Vector beta(p), gamma(q);
  for (Index j = 0; j < p; ++j) beta(j) = 1.0 + j;
  for (Index k = 0; k < q; ++k) gamma(k) = 0.5 - 0.25 * k;
  for (Index i = 0; i < N; ++i) {
    ds.w(i, 0) = 1.0;
    for (Index k = 1; k < r; ++k) ds.w(i, k) = nd(gen);
    ds.x(i, 0) = 1.0;
    for (Index k = 1; k < q; ++k) ds.x(i, k) = nd(gen);
    double mean = ds.x.row(i).dot(gamma);
    for (Index j = 0; j < p; ++j) {
      const double prob = 1.0 / (1.0 + std::exp(-ds.w.row(i).dot(alpha.row(j))));
      ds.z(i, j) = ud(gen) < prob ? 1.0 : 0.0;
      mean += ds.z(i, j) * beta(j);
    }
    ds.y(i) = mean + sigma * nd(gen);
  }
  ds.z.bottomRows(N - n).setConstant(imputereg::kMissing);
  ds.pilot_size = n;
  ds.validate();
  return ds;
}

}  // namespace testing_support
