#include "imputereg/imputation.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "imputereg/error.hpp"

namespace imputereg {

namespace {

constexpr int kMaxHalvings = 30;

// Probabilities and weights p(1-p) for eta = w * alpha.
void logistic_terms(const Matrix& w, const Vector& alpha, Vector& prob, Vector& weight) {
  const Vector eta = w * alpha;
  prob.resize(eta.size());
  weight.resize(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    prob(i) = sigmoid(eta(i));
    weight(i) = prob(i) * (1.0 - prob(i));
  }
}

Matrix weighted_gram(const Matrix& w, const Vector& weight) {
  const Matrix scaled = w.array().colwise() * weight.array();
  return symmetrize(w.transpose() * scaled);
}

}  // namespace

void FitOptions::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "fit options: tol must be > 0");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "fit options: max_iter must be >= 1");
  if (!(separation_norm > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "fit options: separation_norm must be > 0");
  }
  if (!(ridge >= 0.0)) throw Error(ErrorKind::InvalidArgument, "fit options: ridge must be >= 0");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logistic_loglik(const Matrix& w, const Vector& z, const Vector& alpha) {
  if (w.rows() != z.size() || w.cols() != alpha.size()) {
    throw Error(ErrorKind::DimensionMismatch, "logistic_loglik: dimension mismatch");
  }
  const Vector eta = w * alpha;
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) total += z(i) * eta(i) - log1pexp(eta(i));
  return total;
}

LogisticFit fit_logistic(const Matrix& w, const Vector& z, const FitOptions& opts) {
  opts.validate();
  const Index n = w.rows();
  const Index r = w.cols();
  if (z.size() != n) throw Error(ErrorKind::DimensionMismatch, "fit_logistic: w and z row counts differ");
  if (n <= r) {
    throw Error(ErrorKind::InsufficientPilot,
                "fit_logistic: need more rows (" + std::to_string(n) + ") than features (" +
                    std::to_string(r) + ")");
  }
  double positives = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (!(z(i) == 0.0 || z(i) == 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "fit_logistic: z must be 0/1", std::nullopt, static_cast<long>(i));
    }
    positives += z(i);
  }
  if (positives == 0.0 || positives == static_cast<double>(n)) {
    throw Error(ErrorKind::OneClassOnly, "fit_logistic: z has a single class");
  }

  LogisticFit fit;
  fit.alpha = Vector::Zero(r);
  Vector prob;
  Vector weight;
  double loglik = logistic_loglik(w, z, fit.alpha);

  for (int iter = 0;; ++iter) {
    logistic_terms(w, fit.alpha, prob, weight);
    const Vector score = w.transpose() * (z - prob);
    fit.score_norm = score.cwiseAbs().maxCoeff();
    fit.iterations = iter;
    if (fit.score_norm <= opts.tol) {
      fit.converged = true;
      break;
    }
    if (iter >= opts.max_iter) {
      throw Error(ErrorKind::NotConverged,
                  "fit_logistic: no convergence after " + std::to_string(opts.max_iter) +
                      " iterations (score norm " + std::to_string(fit.score_norm) + ")");
    }

    const Matrix hessian = weighted_gram(w, weight);
    Vector step;
    try {
      step = solve_spd(hessian, score);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite || opts.ridge <= 0.0) {
        throw Error(ErrorKind::SingularHessian, std::string("fit_logistic: ") + e.what());
      }
      try {
        step = solve_spd(hessian + opts.ridge * Matrix::Identity(r, r), score);
      } catch (const Error& again) {
        throw Error(ErrorKind::SingularHessian,
                    std::string("fit_logistic: ridge rescue failed: ") + again.what());
      }
    }

    // Accept a step once the likelihood stops decreasing beyond rounding noise.
    const double slack = 1e-12 * (1.0 + std::abs(loglik));
    double scale = 1.0;
    bool accepted = false;
    Vector candidate;
    double candidate_loglik = 0.0;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      candidate = fit.alpha + scale * step;
      candidate_loglik = logistic_loglik(w, z, candidate);
      if (std::isfinite(candidate_loglik) && candidate_loglik >= loglik - slack) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      throw Error(ErrorKind::SeparationDetected,
                  "fit_logistic: step halving failed to increase the likelihood");
    }
    fit.alpha = candidate;
    loglik = candidate_loglik;
    if (fit.alpha.norm() > opts.separation_norm) {
      std::ostringstream msg;
      msg << "fit_logistic: ||alpha|| = " << fit.alpha.norm() << " exceeds separation threshold "
          << opts.separation_norm << " (MLE likely does not exist)";
      throw Error(ErrorKind::SeparationDetected, msg.str());
    }
  }

  fit.loglik = loglik;
  fit.fisher_block = weighted_gram(w, weight) / static_cast<double>(n);
  Eigen::LLT<Matrix> check(fit.fisher_block);
  if (check.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularHessian, "fit_logistic: Fisher information is not positive definite");
  }
  return fit;
}

ImputationModel fit_imputation(const Dataset& dataset, const FitOptions& opts) {
  const Index p = dataset.p();
  const Index r = dataset.r();
  const Matrix pilot_w = dataset.pilot_w();
  const Matrix pilot_z = dataset.pilot_z();

  ImputationModel model;
  model.alpha.resize(p, r);
  model.fisher_blocks.resize(static_cast<std::size_t>(p));
  model.iterations.resize(static_cast<std::size_t>(p));
  model.converged.resize(static_cast<std::size_t>(p));

  std::optional<Error> first_failure;
  std::ostringstream failures;
  for (Index j = 0; j < p; ++j) {
    try {
      LogisticFit fit = fit_logistic(pilot_w, pilot_z.col(j), opts);
      model.alpha.row(j) = fit.alpha.transpose();
      model.fisher_blocks[static_cast<std::size_t>(j)] = std::move(fit.fisher_block);
      model.iterations[static_cast<std::size_t>(j)] = fit.iterations;
      model.converged[static_cast<std::size_t>(j)] = fit.converged;
    } catch (const Error& e) {
      const std::string name = j < static_cast<Index>(dataset.z_names.size())
                                   ? dataset.z_names[static_cast<std::size_t>(j)]
                                   : std::to_string(j);
      failures << (first_failure ? "; " : "") << name << " [" << to_string(e.kind()) << "] " << e.what();
      if (!first_failure) first_failure = e.with_column(static_cast<long>(j));
    }
  }
  if (first_failure) {
    throw Error(first_failure->kind(), "fit_imputation: " + failures.str(), first_failure->column());
  }
  return model;
}

Matrix impute_probabilities(const Matrix& w, const ImputationModel& model) {
  if (w.cols() != model.r()) {
    throw Error(ErrorKind::DimensionMismatch,
                "impute_probabilities: w has " + std::to_string(w.cols()) + " columns, model expects " +
                    std::to_string(model.r()));
  }
  Matrix eta = w * model.alpha.transpose();
  return eta.unaryExpr([](double v) { return sigmoid(v); });
}

Matrix LogisticImputer::impute_probabilities(const Matrix& w) const {
  return imputereg::impute_probabilities(w, model_);
}

std::vector<Matrix> fisher_inverse_blocks(const ImputationModel& model) {
  std::vector<Matrix> inverses;
  inverses.reserve(model.fisher_blocks.size());
  for (std::size_t j = 0; j < model.fisher_blocks.size(); ++j) {
    try {
      inverses.push_back(inverse_spd(model.fisher_blocks[j]));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
      throw e.with_column(static_cast<long>(j));
    }
  }
  return inverses;
}

}  // namespace imputereg
