#pragma once

#include <vector>

#include "imputereg/linalg.hpp"
#include "imputereg/model.hpp"

namespace imputereg {

struct FitOptions {
  double tol = 1e-8;              // max-norm of the score at convergence
  int max_iter = 100;             // Newton iterations
  double separation_norm = 30.0;  // ||alpha|| beyond this declares (quasi-)separation
  double ridge = 0.0;             // only used to rescue a singular Newton step

  void validate() const;
};

/// Logistic function, evaluated on the branch that never exponentiates a
/// large positive argument.
double sigmoid(double x);

/// log(1 + exp(x)) without overflow.
double log1pexp(double x);

/// sum_i [ z_i w_i'alpha - log(1 + exp(w_i'alpha)) ].
double logistic_loglik(const Matrix& w, const Vector& z, const Vector& alpha);

struct LogisticFit {
  Vector alpha;
  Matrix fisher_block;  // n^-1 sum p(1-p) w w' at alpha
  double loglik = 0.0;
  double score_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton-Raphson maximum likelihood with step halving, started at alpha = 0.
LogisticFit fit_logistic(const Matrix& w, const Vector& z, const FitOptions& opts = {});

/// Per-covariate logistic models Z_j ~ W fitted on the pilot rows.
struct ImputationModel {
  Matrix alpha;                      // p x r, row j = alpha_j
  std::vector<Matrix> fisher_blocks;  // p blocks of r x r
  std::vector<int> iterations;
  std::vector<bool> converged;

  Index p() const noexcept { return alpha.rows(); }
  Index r() const noexcept { return alpha.cols(); }
};

/// Source of imputed probabilities. Only the logistic model ships; other
/// imputers (e.g. a network) can plug in through this interface.
class ProbabilityImputer {
 public:
  virtual ~ProbabilityImputer() = default;
  virtual Matrix impute_probabilities(const Matrix& w) const = 0;
};

class LogisticImputer final : public ProbabilityImputer {
 public:
  explicit LogisticImputer(ImputationModel model) : model_(std::move(model)) {}
  Matrix impute_probabilities(const Matrix& w) const override;
  const ImputationModel& model() const noexcept { return model_; }

 private:
  ImputationModel model_;
};

/// Fits each column of the pilot z independently. A failing column rethrows
/// its error tagged with the column index; the message lists every failing column.
ImputationModel fit_imputation(const Dataset& dataset, const FitOptions& opts = {});

/// Entry (i, j) = sigmoid(w_i' alpha_j). Never thresholded.
Matrix impute_probabilities(const Matrix& w, const ImputationModel& model);

/// Per-column inverses of the Fisher blocks. I_n(A) is block diagonal, so it
/// is kept as p r x r blocks and never densified.
std::vector<Matrix> fisher_inverse_blocks(const ImputationModel& model);

}  // namespace imputereg
