#include "imputereg/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "imputereg/covariance.hpp"
#include "imputereg/error.hpp"
#include "imputereg/estimators.hpp"
#include "imputereg/pipeline.hpp"
#include "imputereg/rng.hpp"

namespace imputereg {

namespace {

Matrix cholesky_factor(const Matrix& cov, const char* what) {
  if (cov.rows() == 0) return cov;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, std::string("generator: ") + what + " is not positive definite");
  }
  return llt.matrixL();
}

// Quantile of a sorted sample by linear interpolation (type 7).
double sorted_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::nan("");
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Matrix example_alpha(double intercept1, double intercept2, double scale) {
  Matrix alpha(2, 9);
  alpha.row(0) << intercept1, 1.5, 0, 0, 0.75, 0, 0, -2, 0;
  alpha.row(1) << intercept2, 1, 1, 1, -3.0 * std::numbers::sqrt2 / 2.0, 1.0 / 3.0, 0, 0, 0;
  alpha.rightCols(8) *= scale;
  return alpha;
}

GeneratorSpec example_base(double sigma, Index n, Index N) {
  GeneratorSpec spec;
  spec.beta = Vector(2);
  spec.beta << 3, 0;
  spec.gamma = Vector(7);
  spec.gamma << 1, 1.5, 0, 0, 0, 2, 0;
  spec.w_cov = ar1_correlation(8, 0.25);
  spec.x_cov = ar1_correlation(6, 0.5);
  spec.x_mean = 1.0;
  spec.sigma = sigma;
  spec.n = n;
  spec.N = N;
  return spec;
}

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> names;
  for (Index j = 1; j <= count; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

}  // namespace

void GeneratorSpec::validate() const {
  const Index p = alpha.rows();
  const Index r = alpha.cols();
  const Index q = gamma.size();
  if (p < 1 || r < 1 || q < 1) throw Error(ErrorKind::InvalidArgument, "generator: empty alpha or gamma");
  if (beta.size() != p) throw Error(ErrorKind::DimensionMismatch, "generator: beta length must equal alpha rows");
  if (w_cov.rows() != r - 1 || w_cov.cols() != r - 1) {
    throw Error(ErrorKind::DimensionMismatch, "generator: w_cov must be (r-1) x (r-1)");
  }
  if (x_cov.rows() != q - 1 || x_cov.cols() != q - 1) {
    throw Error(ErrorKind::DimensionMismatch, "generator: x_cov must be (q-1) x (q-1)");
  }
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "generator: sigma must be >= 0");
  if (n < 1 || n > N) throw Error(ErrorKind::InvalidArgument, "generator: need 1 <= n <= N");
}

Matrix ar1_correlation(Index dim, double rho) {
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) m(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return m;
}

SimulatedData generate(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index p = spec.alpha.rows();
  const Index r = spec.alpha.cols();
  const Index q = spec.gamma.size();
  const Index N = spec.N;
  const Matrix lw = cholesky_factor(spec.w_cov, "w_cov");
  const Matrix lx = cholesky_factor(spec.x_cov, "x_cov");

  SimulatedData out;
  Dataset& ds = out.dataset;
  ds.y.resize(N);
  ds.x.resize(N, q);
  ds.w.resize(N, r);
  out.z_full.resize(N, p);

  Rng rng(seed);
  Vector wz(r - 1);
  Vector xz(q - 1);
  Vector w_row(r);
  Vector x_row(q);
  for (Index i = 0; i < N; ++i) {
    for (Index k = 0; k < r - 1; ++k) wz(k) = rng.normal();
    w_row(0) = 1.0;
    w_row.tail(r - 1) = lw.triangularView<Eigen::Lower>() * wz;
    for (Index j = 0; j < p; ++j) {
      const double prob = sigmoid(spec.alpha.row(j).dot(w_row));
      out.z_full(i, j) = rng.bernoulli(prob);
    }
    for (Index k = 0; k < q - 1; ++k) xz(k) = rng.normal();
    x_row(0) = 1.0;
    x_row.tail(q - 1) = (lx.triangularView<Eigen::Lower>() * xz).array() + spec.x_mean;
    const double eps = rng.normal();
    ds.w.row(i) = w_row.transpose();
    ds.x.row(i) = x_row.transpose();
    ds.y(i) = out.z_full.row(i).dot(spec.beta) + x_row.dot(spec.gamma) + spec.sigma * eps;
  }

  ds.z = out.z_full;
  ds.z.bottomRows(N - spec.n).setConstant(kMissing);
  ds.pilot_size = spec.n;
  ds.y_name = "y";
  ds.x_names = numbered("x", q - 1);
  ds.x_names.insert(ds.x_names.begin(), std::string(kInterceptName));
  ds.w_names = numbered("w", r - 1);
  ds.w_names.insert(ds.w_names.begin(), std::string(kInterceptName));
  ds.z_names = numbered("z", p);

  out.truth = Coefficients{spec.beta, spec.gamma};
  out.alpha = spec.alpha;
  return out;
}

GeneratorSpec example1_spec(double C, double t, double sigma, Index n, Index N) {
  if (!(C >= 0.0)) throw Error(ErrorKind::InvalidArgument, "example1: C must be >= 0");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "example1: n must be >= 1");
  GeneratorSpec spec = example_base(sigma, n, N);
  const double a_n = -C * std::log(static_cast<double>(n));
  spec.alpha = example_alpha(a_n, t * a_n, 1.0);
  return spec;
}

GeneratorSpec example2_spec(double k, double sigma, Index n, Index N) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "example2: k must be > 0");
  GeneratorSpec spec = example_base(sigma, n, N);
  spec.alpha = example_alpha(0.0, 0.0, k);
  return spec;
}

SimulatedData gen_example1(double C, double t, double sigma, Index n, Index N, std::uint64_t seed) {
  return generate(example1_spec(C, t, sigma, n, N), seed);
}

SimulatedData gen_example2(double k, double sigma, Index n, Index N, std::uint64_t seed) {
  return generate(example2_spec(k, sigma, n, N), seed);
}

OmegaEstimate estimate_omega(const Matrix& alpha, Index mc_size, std::uint64_t seed) {
  if (mc_size < 10000) throw Error(ErrorKind::InvalidArgument, "estimate_omega: mc_size must be >= 1e4");
  const Index p = alpha.rows();
  const Index r = alpha.cols();
  if (p < 1 || r < 1) throw Error(ErrorKind::InvalidArgument, "estimate_omega: empty alpha");
  const Matrix lw = cholesky_factor(ar1_correlation(r - 1, 0.25), "w_cov");

  Rng rng(seed);
  Vector sum = Vector::Zero(p);
  Vector sum_sq = Vector::Zero(p);
  Vector wz(r - 1);
  Vector w_row(r);
  for (Index i = 0; i < mc_size; ++i) {
    for (Index k = 0; k < r - 1; ++k) wz(k) = rng.normal();
    w_row(0) = 1.0;
    w_row.tail(r - 1) = lw.triangularView<Eigen::Lower>() * wz;
    for (Index j = 0; j < p; ++j) {
      const double prob = sigmoid(alpha.row(j).dot(w_row));
      const double v = prob * (1.0 - prob);
      sum(j) += v;
      sum_sq(j) += v * v;
    }
  }
  OmegaEstimate est;
  const double m = static_cast<double>(mc_size);
  Index best = 0;
  for (Index j = 0; j < p; ++j) {
    const double mean = sum(j) / m;
    est.per_column.push_back(mean);
    if (mean > est.per_column[static_cast<std::size_t>(best)]) best = j;
  }
  est.omega = est.per_column[static_cast<std::size_t>(best)];
  const double var = std::max(0.0, (sum_sq(best) / m - est.omega * est.omega) * m / (m - 1.0));
  est.std_error = std::sqrt(var / m);
  return est;
}

double mse(const Vector& theta_hat, const Vector& theta_true, std::span<const Index> index_set) {
  if (theta_hat.size() != theta_true.size()) throw Error(ErrorKind::DimensionMismatch, "mse: length mismatch");
  if (index_set.empty()) throw Error(ErrorKind::InvalidArgument, "mse: empty index set");
  double total = 0.0;
  for (Index j : index_set) {
    if (j < 0 || j >= theta_hat.size()) throw Error(ErrorKind::InvalidArgument, "mse: index out of range");
    const double e = theta_hat(j) - theta_true(j);
    total += e * e;
  }
  return total / static_cast<double>(index_set.size());
}

Vector coverage(const std::vector<Vector>& estimates, const std::vector<Vector>& ses, const Vector& truth,
                double crit) {
  if (estimates.empty()) throw Error(ErrorKind::InvalidArgument, "coverage: no replications");
  if (estimates.size() != ses.size()) throw Error(ErrorKind::DimensionMismatch, "coverage: record counts differ");
  Vector hits = Vector::Zero(truth.size());
  for (std::size_t b = 0; b < estimates.size(); ++b) {
    if (estimates[b].size() != truth.size() || ses[b].size() != truth.size()) {
      throw Error(ErrorKind::DimensionMismatch, "coverage: record length mismatch");
    }
    for (Index j = 0; j < truth.size(); ++j) {
      const double lo = estimates[b](j) - crit * ses[b](j);
      const double hi = estimates[b](j) + crit * ses[b](j);
      if (lo <= truth(j) && truth(j) <= hi) hits(j) += 1.0;
    }
  }
  return hits / static_cast<double>(estimates.size());
}

Vector empirical_se(const std::vector<Vector>& estimates) {
  if (estimates.empty()) throw Error(ErrorKind::InvalidArgument, "empirical_se: no replications");
  const Index d = estimates.front().size();
  Vector mean = Vector::Zero(d);
  for (const auto& e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  if (estimates.size() < 2) return Vector::Zero(d);
  Vector ss = Vector::Zero(d);
  for (const auto& e : estimates) ss += (e - mean).array().square().matrix();
  return (ss / static_cast<double>(estimates.size() - 1)).cwiseSqrt();
}

std::string_view to_string(Design design) {
  switch (design) {
    case Design::Example1: return "example1";
    case Design::Example2: return "example2";
    case Design::Case1: return "case1";
    case Design::Case2: return "case2";
    case Design::Case3: return "case3";
  }
  return "unknown";
}

Design parse_design(std::string_view name) {
  for (auto d : {Design::Example1, Design::Example2, Design::Case1, Design::Case2, Design::Case3}) {
    if (to_string(d) == name) return d;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown design '" + std::string(name) + "'");
}

ScenarioConfig ScenarioConfig::resolved() const {
  ScenarioConfig cfg = *this;
  switch (design) {
    case Design::Case1:
      cfg.C = 0.0;
      break;
    case Design::Case2:
      cfg.C = 0.45;
      cfg.t = 2.0;
      break;
    case Design::Case3:
      cfg.k = 15.0;
      cfg.sigma = 1.0;
      break;
    default:
      break;
  }
  return cfg;
}

void ScenarioConfig::validate() const {
  if (n < 1 || n >= N) throw Error(ErrorKind::InvalidArgument, "scenario: need 1 <= n < N");
  if (B < 1) throw Error(ErrorKind::InvalidArgument, "scenario: B must be >= 1");
  if (!(C >= 0.0)) throw Error(ErrorKind::InvalidArgument, "scenario: C must be >= 0");
  if (!(t >= 1.0)) throw Error(ErrorKind::InvalidArgument, "scenario: t must be >= 1");
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "scenario: k must be > 0");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "scenario: sigma must be >= 0");
  if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "scenario: failure_threshold must lie in [0, 1]");
  }
  if (estimators.empty()) throw Error(ErrorKind::InvalidArgument, "scenario: no estimators requested");
  for (auto kind : estimators) {
    if (kind == EstimatorKind::NaiveCovariance) {
      throw Error(ErrorKind::InvalidArgument, "scenario: 'naive' is a covariance, not an estimator");
    }
  }
  fit.validate();
}

GeneratorSpec ScenarioConfig::generator() const {
  const ScenarioConfig cfg = resolved();
  switch (cfg.design) {
    case Design::Example1:
    case Design::Case1:
    case Design::Case2:
      return example1_spec(cfg.C, cfg.t, cfg.sigma, cfg.n, cfg.N);
    case Design::Example2:
    case Design::Case3:
      return example2_spec(cfg.k, cfg.sigma, cfg.n, cfg.N);
  }
  throw Error(ErrorKind::InvalidArgument, "scenario: unknown design");
}

bool ScenarioConfig::wants(EstimatorKind kind) const {
  return std::find(estimators.begin(), estimators.end(), kind) != estimators.end();
}

const CovarianceMetrics* EstimatorMetrics::find(CovarianceSource source) const {
  for (const auto& c : covariances) {
    if (c.source == source) return &c;
  }
  return nullptr;
}

const MseSummary* EstimatorMetrics::find_mse(std::string_view index_set) const {
  for (const auto& m : mse) {
    if (m.index_set == index_set) return &m;
  }
  return nullptr;
}

const EstimatorMetrics& MetricsTable::at(EstimatorKind kind) const {
  for (const auto& e : estimators) {
    if (e.kind == kind) return e;
  }
  throw Error(ErrorKind::InvalidArgument, "metrics: estimator '" + std::string(to_string(kind)) + "' not recorded");
}

std::vector<CovarianceSource> covariance_sources(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Pilot: return {CovarianceSource::Pilot};
    case EstimatorKind::Imputed: return {CovarianceSource::Unified, CovarianceSource::Naive};
    case EstimatorKind::Oracle: return {CovarianceSource::Oracle};
    case EstimatorKind::Weighted: return {CovarianceSource::Weighted};
    case EstimatorKind::NaiveCovariance: return {CovarianceSource::Naive};
  }
  return {};
}

ReplicationRecord run_replication(const ScenarioConfig& cfg, int b) {
  ReplicationRecord rec;
  rec.replication = b;
  try {
    const GeneratorSpec spec = cfg.generator();
    const SimulatedData sim = generate(spec, replication_seed(cfg.base_seed, static_cast<std::uint64_t>(b)));

    AnalysisOptions options;
    options.fit = cfg.fit;
    options.naive_variance = cfg.naive_variance;
    if (cfg.scale_separation_norm) {
      const double alpha_norm = spec.alpha.rowwise().norm().maxCoeff();
      options.fit.separation_norm = std::max(cfg.fit.separation_norm, 4.0 * alpha_norm);
    }
    options.weighted = cfg.wants(EstimatorKind::Weighted);
    options.naive = cfg.wants(EstimatorKind::Imputed);
    const Analysis a = analyze(sim.dataset, options);

    for (auto kind : cfg.estimators) {
      switch (kind) {
        case EstimatorKind::Pilot:
          rec.estimates.push_back(a.pilot.theta.theta());
          rec.ses.push_back({a.pilot.se});
          break;
        case EstimatorKind::Imputed:
          rec.estimates.push_back(a.imputed.theta.theta());
          rec.ses.push_back({a.imputed.se, a.naive->se});
          break;
        case EstimatorKind::Weighted:
          rec.estimates.push_back(a.weighted_result->theta.theta());
          rec.ses.push_back({a.weighted_result->se});
          rec.w_hat = a.weighted->weight.w_hat;
          rec.w_raw = a.weighted->weight.w_raw;
          break;
        case EstimatorKind::Oracle: {
          const Matrix u = full_design(sim.z_full, sim.dataset.x);
          const Coefficients theta = ols_fit(u, sim.dataset.y, sim.dataset.p());
          const auto result = EstimatorResult::make(EstimatorKind::Oracle, theta,
                                                    ols_covariance(u, sim.dataset.y, theta),
                                                    sim.dataset.rows(), sim.dataset.rows());
          rec.estimates.push_back(result.theta.theta());
          rec.ses.push_back({result.se});
          break;
        }
        case EstimatorKind::NaiveCovariance:
          break;
      }
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.estimates.clear();
    rec.ses.clear();
    rec.failure = ReplicationFailure{b, e.kind(), e.what()};
  }
  return rec;
}

MetricsTable run_replications(const ScenarioConfig& input, unsigned threads) {
  const ScenarioConfig cfg = input.resolved();
  cfg.validate();

  std::vector<ReplicationRecord> records(static_cast<std::size_t>(cfg.B));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int b = next.fetch_add(1); b < cfg.B; b = next.fetch_add(1)) {
      records[static_cast<std::size_t>(b)] = run_replication(cfg, b);
    }
  };
  const unsigned workers = std::max(1u, std::min(threads, static_cast<unsigned>(cfg.B)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MetricsTable table;
  table.config = cfg;
  const GeneratorSpec spec = cfg.generator();
  table.truth = Coefficients{spec.beta, spec.gamma}.theta();
  table.coefficient_names = numbered("beta", spec.beta.size());
  for (const auto& name : numbered("gamma", spec.gamma.size())) table.coefficient_names.push_back(name);
  table.requested = cfg.B;

  for (const auto& rec : records) {
    if (rec.ok) {
      ++table.succeeded;
    } else {
      table.failures.push_back(*rec.failure);
    }
  }
  const double failed_fraction = static_cast<double>(table.failures.size()) / static_cast<double>(cfg.B);
  if (table.succeeded == 0 || failed_fraction > cfg.failure_threshold) {
    std::ostringstream msg;
    msg << "run_replications: " << table.failures.size() << " of " << cfg.B
        << " replications failed (threshold " << cfg.failure_threshold << ")";
    if (!table.failures.empty()) {
      msg << "; first failure at replication " << table.failures.front().replication << ": "
          << table.failures.front().cause;
    }
    throw Error(ErrorKind::ReplicationThresholdExceeded, msg.str());
  }

  const Index p = spec.beta.size();
  const Index d = table.truth.size();
  std::vector<std::pair<std::string, std::vector<Index>>> index_sets;
  for (Index j = 0; j < p; ++j) index_sets.push_back({"beta" + std::to_string(j + 1), {j}});
  std::vector<Index> gamma_set;
  for (Index j = p; j < d; ++j) gamma_set.push_back(j);
  index_sets.push_back({"gamma", gamma_set});
  std::vector<Index> all;
  for (Index j = 0; j < d; ++j) all.push_back(j);
  index_sets.push_back({"theta", all});

  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    EstimatorMetrics metrics;
    metrics.kind = cfg.estimators[e];
    std::vector<Vector> estimates;
    for (const auto& rec : records) {
      if (rec.ok) estimates.push_back(rec.estimates[e]);
    }
    metrics.mean_estimate = Vector::Zero(d);
    for (const auto& est : estimates) metrics.mean_estimate += est;
    metrics.mean_estimate /= static_cast<double>(estimates.size());
    metrics.empirical_se = empirical_se(estimates);

    const auto sources = covariance_sources(metrics.kind);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      CovarianceMetrics cm;
      cm.source = sources[s];
      std::vector<Vector> ses;
      for (const auto& rec : records) {
        if (rec.ok) ses.push_back(rec.ses[e][s]);
      }
      cm.mean_se = Vector::Zero(d);
      for (const auto& se : ses) cm.mean_se += se;
      cm.mean_se /= static_cast<double>(ses.size());
      cm.cp = coverage(estimates, ses, table.truth);
      metrics.covariances.push_back(std::move(cm));
    }

    for (const auto& [name, indices] : index_sets) {
      MseSummary summary;
      summary.index_set = name;
      summary.indices = indices;
      std::vector<double> values;
      values.reserve(estimates.size());
      for (const auto& est : estimates) values.push_back(mse(est, table.truth, indices));
      double total = 0.0;
      for (double v : values) total += v;
      summary.mean = total / static_cast<double>(values.size());
      std::sort(values.begin(), values.end());
      summary.median = sorted_quantile(values, 0.5);
      std::vector<double> logs;
      logs.reserve(values.size());
      for (double v : values) logs.push_back(std::log(v));
      const double probs[] = {0.0, 0.25, 0.5, 0.75, 1.0};
      for (std::size_t k = 0; k < 5; ++k) summary.log_quantiles[k] = sorted_quantile(logs, probs[k]);
      metrics.mse.push_back(std::move(summary));
    }
    table.estimators.push_back(std::move(metrics));
  }

  if (cfg.wants(EstimatorKind::Weighted)) {
    WeightSummary ws;
    int clamped = 0;
    for (const auto& rec : records) {
      if (!rec.ok) continue;
      ws.mean_w_hat += rec.w_hat;
      ws.mean_w_raw += rec.w_raw;
      if (rec.w_hat != rec.w_raw) ++clamped;
    }
    ws.mean_w_hat /= table.succeeded;
    ws.mean_w_raw /= table.succeeded;
    ws.clamped_fraction = static_cast<double>(clamped) / table.succeeded;
    table.weight = ws;
  }
  table.records = std::move(records);
  return table;
}

}  // namespace imputereg
