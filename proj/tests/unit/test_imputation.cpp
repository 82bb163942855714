#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "imputereg/error.hpp"
#include "imputereg/imputation.hpp"
#include "imputereg/simlab.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace imputereg;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("sigmoid: symmetry point and reflection") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double x : {1.0, 5.0, 30.0}) CHECK(sigmoid(-x) == doctest::Approx(1.0 - sigmoid(x)).epsilon(1e-15));
}

TEST_CASE("sigmoid: stable for large arguments") {
  const double v = sigmoid(500.0);
  CHECK(v > 1.0 - 1e-12);
  CHECK(v <= 1.0);
  CHECK(std::isfinite(sigmoid(-700.0)));
  CHECK(sigmoid(-700.0) > 0.0);
  CHECK(sigmoid(-700.0) == doctest::Approx(std::exp(-700.0)).epsilon(1e-12));
}

TEST_CASE("log1pexp: no overflow") {
  CHECK(log1pexp(800.0) == doctest::Approx(800.0));
  CHECK(log1pexp(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log1pexp(-800.0) >= 0.0);
}

TEST_CASE("logistic_loglik: alpha = 0 gives -n log 2") {
  std::mt19937_64 gen(1);
  const Matrix w = testing_support::random_matrix(gen, 7, 3);
  Vector z(7);
  z << 1, 0, 0, 1, 1, 0, 1;
  CHECK(logistic_loglik(w, z, Vector::Zero(3)) == doctest::Approx(-7.0 * std::log(2.0)));
}

TEST_CASE("logistic_loglik: single observation by hand") {
  Matrix w(1, 1);
  w << 1;
  Vector z(1);
  z << 1;
  Vector a(1);
  a << 2;
  CHECK(logistic_loglik(w, z, a) == doctest::Approx(2.0 - std::log(1.0 + std::exp(2.0))).epsilon(1e-14));
}

TEST_CASE("logistic_loglik: intercept-only maximum at the sample logit") {
  const Matrix w = Matrix::Ones(10, 1);
  Vector z = Vector::Zero(10);
  z.head(3).setOnes();
  Vector best(1);
  best << std::log(0.3 / 0.7);
  const double at_best = logistic_loglik(w, z, best);
  for (double a = -4.0; a <= 4.0; a += 0.01) {
    Vector g(1);
    g << a;
    CHECK(at_best >= logistic_loglik(w, z, g));
  }
}

TEST_CASE("fit_logistic: intercept-only closed form") {
  const Matrix w = Matrix::Ones(4, 1);
  Vector z(4);
  z << 1, 0, 0, 1;
  const auto fit = fit_logistic(w, z);
  CHECK(std::abs(fit.alpha(0)) <= 1e-12);
  CHECK(fit.converged);
}

TEST_CASE("fit_logistic: matches the grid maximizer on small instances") {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  int checked = 0;
  while (checked < 5) {
    Matrix w(12, 2);
    Vector z(12);
    for (Index i = 0; i < 12; ++i) {
      w(i, 0) = 1.0;
      w(i, 1) = nd(gen);
      z(i) = ud(gen) < oracle::logistic(0.3 + 0.8 * w(i, 1)) ? 1.0 : 0.0;
    }
    LogisticFit fit;
    try {
      fit = fit_logistic(w, z);
    } catch (const Error&) {
      continue;  // separated or one-class draw
    }
    if (fit.alpha.cwiseAbs().maxCoeff() > 4.0) continue;
    const Vector grid = oracle::grid_logistic_max(w, z);
    CHECK((fit.alpha - grid).cwiseAbs().maxCoeff() <= 1e-2);
    ++checked;
  }
}

TEST_CASE("fit_logistic: separated data") {
  Matrix w(8, 2);
  Vector z(8);
  for (Index i = 0; i < 8; ++i) {
    w(i, 0) = 1.0;
    w(i, 1) = -1.75 + 0.5 * i;
    z(i) = w(i, 1) > 0 ? 1.0 : 0.0;
  }
  CHECK(kind_of([&] { fit_logistic(w, z); }) == ErrorKind::SeparationDetected);
}

TEST_CASE("fit_logistic: contract errors") {
  const Matrix w = Matrix::Ones(5, 1);
  CHECK(kind_of([&] { fit_logistic(w, Vector::Zero(5)); }) == ErrorKind::OneClassOnly);
  Vector bad(5);
  bad << 0, 1, 2, 0, 1;
  CHECK(kind_of([&] { fit_logistic(w, bad); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { fit_logistic(Matrix::Ones(2, 3), Vector::Ones(2)); }) == ErrorKind::InsufficientPilot);
  FitOptions one_step;
  one_step.max_iter = 1;
  one_step.tol = 1e-15;
  std::mt19937_64 gen(3);
  Matrix w2 = testing_support::random_matrix(gen, 50, 2);
  w2.col(0).setOnes();
  Vector z2(50);
  for (Index i = 0; i < 50; ++i) z2(i) = (i % 3 == 0) ? 1.0 : 0.0;
  CHECK(kind_of([&] { fit_logistic(w2, z2, one_step); }) == ErrorKind::NotConverged);
  FitOptions bad_opts;
  bad_opts.tol = 0;
  CHECK_THROWS_AS(bad_opts.validate(), Error);
}

TEST_CASE("property: converged fit satisfies the score equation, Fisher block is correct") {
  const Dataset ds = testing_support::small_dataset(17, 400, 400, 1, 2, 4);
  const Matrix w = ds.pilot_w();
  const Vector z = ds.pilot_z().col(0);
  FitOptions opts;
  const auto fit = fit_logistic(w, z, opts);
  Vector score = Vector::Zero(4);
  Matrix fisher = Matrix::Zero(4, 4);
  for (Index i = 0; i < w.rows(); ++i) {
    const double pr = oracle::logistic(w.row(i).dot(fit.alpha));
    score += (z(i) - pr) * w.row(i).transpose();
    fisher += pr * (1 - pr) * w.row(i).transpose() * w.row(i);
  }
  CHECK(score.cwiseAbs().maxCoeff() <= opts.tol);
  CHECK((fit.fisher_block - fisher / 400.0).norm() <= 1e-12);
}

TEST_CASE("property: fit_logistic is invariant to row permutation") {
  const Dataset ds = testing_support::small_dataset(23, 300, 300, 1, 2, 3);
  const Matrix w = ds.pilot_w();
  const Vector z = ds.pilot_z().col(0);
  std::vector<Index> perm(300);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  Matrix wp(300, 3);
  Vector zp(300);
  for (Index i = 0; i < 300; ++i) wp.row(i) = w.row(perm[i]), zp(i) = z(perm[i]);
  const auto a = fit_logistic(w, z);
  const auto b = fit_logistic(wp, zp);
  CHECK((a.alpha - b.alpha).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("property: intercept-only fitted probability equals the sample mean") {
  const Matrix w = Matrix::Ones(37, 1);
  Vector z = Vector::Zero(37);
  z.head(11).setOnes();
  const auto fit = fit_logistic(w, z);
  CHECK(sigmoid(fit.alpha(0)) == doctest::Approx(11.0 / 37.0).epsilon(1e-10));
}

TEST_CASE("property: estimation error shrinks with the pilot size") {
  const GeneratorSpec spec = example2_spec(1.0, 1.0, 8000, 8000);
  const Vector truth = spec.alpha.row(0).transpose();
  std::vector<double> small_err, large_err;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SimulatedData sim = generate(spec, 1000 + seed);
    const Matrix w = sim.dataset.pilot_w();
    const Vector z = sim.dataset.pilot_z().col(0);
    small_err.push_back((fit_logistic(w.topRows(500), z.head(500)).alpha - truth).norm());
    large_err.push_back((fit_logistic(w, z).alpha - truth).norm());
  }
  std::nth_element(small_err.begin(), small_err.begin() + 25, small_err.end());
  std::nth_element(large_err.begin(), large_err.begin() + 25, large_err.end());
  CHECK(large_err[25] < small_err[25]);
}

TEST_CASE("fit_imputation: identical columns give identical rows") {
  Dataset ds = testing_support::small_dataset(31, 200, 300, 2, 2, 3);
  ds.z.col(1) = ds.z.col(0);
  const ImputationModel m = fit_imputation(ds);
  CHECK(m.alpha.row(0) == m.alpha.row(1));
  CHECK(m.fisher_blocks.size() == 2);
}

TEST_CASE("fit_imputation: constant pilot column is reported with its index") {
  Dataset ds = testing_support::small_dataset(37, 100, 150, 2, 2, 3);
  ds.z.col(1).head(100).setZero();
  try {
    fit_imputation(ds);
    FAIL("expected OneClassOnly");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OneClassOnly);
    CHECK(e.column() == 1);
  }
}

TEST_CASE("fit_imputation: Example 2 alpha_1 within 3 joint standard errors of the truth") {
  const SimulatedData sim = gen_example2(1.0, 1.0, 8000, 8000, 77);
  const ImputationModel m = fit_imputation(sim.dataset);
  const Vector diff = (m.alpha.row(0) - sim.alpha.row(0)).transpose();
  const Matrix cov = inverse_spd(m.fisher_blocks[0]) / 8000.0;
  for (Index k = 0; k < diff.size(); ++k) CHECK(std::abs(diff(k)) <= 3.0 * std::sqrt(cov(k, k)));
  // Joint version: n diff' I diff is roughly chi-square(9), so its root-mean scale stays below 3.
  const double stat = 8000.0 * diff.dot(m.fisher_blocks[0] * diff);
  CHECK(std::sqrt(stat / 9.0) < 3.0);
}

TEST_CASE("impute_probabilities: zero model, single row, shape") {
  ImputationModel m;
  m.alpha = Matrix::Zero(1, 2);
  const Matrix w = Matrix::Ones(5, 2);
  const Matrix z0 = impute_probabilities(w, m);
  CHECK(z0.rows() == 5);
  CHECK((z0.array() == 0.5).all());
  m.alpha << 1, 1;
  CHECK(impute_probabilities(Matrix::Ones(1, 2), m)(0, 0) == doctest::Approx(0.880797).epsilon(1e-6));
  CHECK_THROWS_AS(impute_probabilities(Matrix::Ones(1, 3), m), Error);
  const LogisticImputer imputer(m);
  CHECK(imputer.impute_probabilities(w).rows() == 5);
}

TEST_CASE("fisher_inverse_blocks: identity, diagonal, dense") {
  ImputationModel m;
  m.alpha = Matrix::Zero(3, 3);
  m.fisher_blocks.push_back(Matrix::Identity(3, 3));
  Matrix diag = Matrix::Zero(3, 3);
  diag.diagonal() << 2, 4, 1;
  m.fisher_blocks.push_back(diag);
  std::mt19937_64 gen(8);
  const Matrix g = testing_support::random_matrix(gen, 6, 3);
  const Matrix dense = g.transpose() * g;
  m.fisher_blocks.push_back(dense);
  const auto inv = fisher_inverse_blocks(m);
  CHECK((inv[0] - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(inv[1](0, 0) == doctest::Approx(0.5));
  CHECK(inv[1](1, 1) == doctest::Approx(0.25));
  CHECK((inv[2] * dense - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);

  m.fisher_blocks[1](2, 2) = -1.0;
  try {
    fisher_inverse_blocks(m);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    CHECK(e.column() == 1);
  }
}
