#include "imputereg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "imputereg/csv.hpp"
#include "imputereg/error.hpp"

namespace imputereg {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
  }
  throw Error(ErrorKind::ParseError, "report: expected a number, got " + j.dump());
}

json vec(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

json row_json(const CoefficientInference& r) {
  return json{{"name", r.name},   {"estimate", num(r.estimate)}, {"se", num(r.se)},
              {"z", num(r.z)},    {"p", num(r.p_value)},         {"ci_lo", num(r.ci_lo)},
              {"ci_hi", num(r.ci_hi)}};
}

CoefficientInference row_from(const json& j) {
  CoefficientInference r;
  r.name = j.at("name").get<std::string>();
  r.estimate = num_from(j.at("estimate"));
  r.se = num_from(j.at("se"));
  r.z = num_from(j.at("z"));
  r.p_value = num_from(j.at("p"));
  r.ci_lo = num_from(j.at("ci_lo"));
  r.ci_hi = num_from(j.at("ci_hi"));
  return r;
}

}  // namespace

double auc(const Vector& scores, const Vector& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::DimensionMismatch, "auc: length mismatch");
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) < scores(b); });
  double pos = 0.0;
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores(order[j]) == scores(order[i])) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels(order[k]) == 1.0) {
        pos += 1.0;
        rank_sum += mid_rank;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(order.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nan("");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

json to_json(const FitReport& report) {
  json doc;
  doc["version"] = report.version;
  doc["seed"] = report.seed;
  doc["n"] = report.n;
  doc["N"] = report.N;
  doc["level"] = num(report.level);
  json tables = json::array();
  for (const auto& t : report.estimators) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(row_json(r));
    tables.push_back({{"estimator", std::string(to_string(t.estimator))},
                      {"covariance", std::string(to_string(t.source))},
                      {"coefficients", rows}});
  }
  doc["estimators"] = tables;
  if (report.w_hat) doc["w_hat"] = num(*report.w_hat);
  if (report.w_raw) doc["w_raw"] = num(*report.w_raw);
  json diag = json::array();
  for (const auto& d : report.imputation) {
    json alpha = json::array();
    for (double a : d.alpha) alpha.push_back(num(a));
    diag.push_back({{"column", d.column},
                    {"iterations", d.iterations},
                    {"converged", d.converged},
                    {"pilot_positive_rate", num(d.pilot_positive_rate)},
                    {"pilot_auc", num(d.pilot_auc)},
                    {"alpha", alpha}});
  }
  doc["imputation"] = diag;
  doc["row_order"] = report.row_order;
  doc["config"] = report.config;
  return doc;
}

FitReport fit_report_from_json(const json& doc) {
  try {
    FitReport report;
    report.version = doc.at("version").get<std::string>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.n = doc.at("n").get<Index>();
    report.N = doc.at("N").get<Index>();
    report.level = num_from(doc.at("level"));
    for (const auto& t : doc.at("estimators")) {
      EstimatorTable table;
      table.estimator = parse_estimator_kind(t.at("estimator").get<std::string>());
      table.source = parse_covariance_source(t.at("covariance").get<std::string>());
      for (const auto& r : t.at("coefficients")) table.rows.push_back(row_from(r));
      report.estimators.push_back(std::move(table));
    }
    if (doc.contains("w_hat")) report.w_hat = num_from(doc.at("w_hat"));
    if (doc.contains("w_raw")) report.w_raw = num_from(doc.at("w_raw"));
    for (const auto& d : doc.at("imputation")) {
      ImputationDiagnostics diag;
      diag.column = d.at("column").get<std::string>();
      diag.iterations = d.at("iterations").get<int>();
      diag.converged = d.at("converged").get<bool>();
      diag.pilot_positive_rate = num_from(d.at("pilot_positive_rate"));
      diag.pilot_auc = num_from(d.at("pilot_auc"));
      for (const auto& a : d.at("alpha")) diag.alpha.push_back(num_from(a));
      report.imputation.push_back(std::move(diag));
    }
    report.row_order = doc.at("row_order").get<std::vector<Index>>();
    report.config = doc.at("config");
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("report: ") + e.what());
  }
}

void write_fit_csv(const FitReport& report, std::ostream& out) {
  out << "estimator,covariance,coefficient,estimate,se,z,p,ci_lo,ci_hi\n";
  for (const auto& t : report.estimators) {
    for (const auto& r : t.rows) {
      out << to_string(t.estimator) << ',' << to_string(t.source) << ',' << r.name << ','
          << format_double(r.estimate) << ',' << format_double(r.se) << ',' << format_double(r.z) << ','
          << format_double(r.p_value) << ',' << format_double(r.ci_lo) << ',' << format_double(r.ci_hi) << '\n';
    }
  }
}

void write_metrics_coefficients_csv(const MetricsTable& table, std::ostream& out) {
  out << "estimator,covariance,coefficient,truth,mean_estimate,empirical_se,mean_se_hat,cp\n";
  for (const auto& e : table.estimators) {
    for (const auto& c : e.covariances) {
      for (Index j = 0; j < table.truth.size(); ++j) {
        out << to_string(e.kind) << ',' << to_string(c.source) << ','
            << table.coefficient_names[static_cast<std::size_t>(j)] << ',' << format_double(table.truth(j)) << ','
            << format_double(e.mean_estimate(j)) << ',' << format_double(e.empirical_se(j)) << ','
            << format_double(c.mean_se(j)) << ',' << format_double(c.cp(j)) << '\n';
      }
    }
  }
}

void write_metrics_mse_csv(const MetricsTable& table, std::ostream& out) {
  out << "estimator,index_set,mean_mse,median_mse,log_mse_min,log_mse_q25,log_mse_median,log_mse_q75,log_mse_max\n";
  for (const auto& e : table.estimators) {
    for (const auto& m : e.mse) {
      out << to_string(e.kind) << ',' << m.index_set << ',' << format_double(m.mean) << ','
          << format_double(m.median);
      for (double q : m.log_quantiles) out << ',' << format_double(q);
      out << '\n';
    }
  }
}

std::string rng_description() {
  return "xoshiro256** seeded through splitmix64; replication seed = mix64(mix64(base_seed) + (b + 1) * "
         "0x9E3779B97F4A7C15); uniform = ((x >> 11) + 0.5) * 2^-53; normal = Acklam inverse-CDF of one uniform; "
         "bernoulli(p) = 1{uniform < p}; per row: r-1 normals (W), p uniforms (Z), q-1 normals (X), 1 normal (noise)";
}

json metrics_to_json(const MetricsTable& table, const json& config_echo) {
  const ScenarioConfig& s = table.config;
  json doc;
  doc["version"] = IMPUTEREG_VERSION;
  doc["rng"] = rng_description();
  doc["config"] = config_echo;
  doc["scenario"] = {{"design", std::string(to_string(s.design))},
                     {"C", num(s.C)},
                     {"t", num(s.t)},
                     {"k", num(s.k)},
                     {"sigma", num(s.sigma)},
                     {"n", s.n},
                     {"N", s.N},
                     {"B", s.B},
                     {"base_seed", s.base_seed}};
  doc["coefficients"] = table.coefficient_names;
  doc["truth"] = vec(table.truth);
  doc["requested"] = table.requested;
  doc["succeeded"] = table.succeeded;
  json failures = json::array();
  for (const auto& f : table.failures) {
    failures.push_back({{"replication", f.replication}, {"kind", std::string(to_string(f.kind))}, {"cause", f.cause}});
  }
  doc["failures"] = failures;
  json estimators = json::array();
  for (const auto& e : table.estimators) {
    json covs = json::array();
    for (const auto& c : e.covariances) {
      covs.push_back({{"covariance", std::string(to_string(c.source))}, {"mean_se_hat", vec(c.mean_se)}, {"cp", vec(c.cp)}});
    }
    json mses = json::array();
    for (const auto& m : e.mse) {
      json q = json::array();
      for (double v : m.log_quantiles) q.push_back(num(v));
      mses.push_back({{"index_set", m.index_set},
                      {"indices", m.indices},
                      {"mean", num(m.mean)},
                      {"median", num(m.median)},
                      {"log_quantiles", q}});
    }
    estimators.push_back({{"estimator", std::string(to_string(e.kind))},
                          {"mean_estimate", vec(e.mean_estimate)},
                          {"empirical_se", vec(e.empirical_se)},
                          {"covariances", covs},
                          {"mse", mses}});
  }
  doc["estimators"] = estimators;
  if (table.weight) {
    doc["weight"] = {{"mean_w_hat", num(table.weight->mean_w_hat)},
                     {"mean_w_raw", num(table.weight->mean_w_raw)},
                     {"clamped_fraction", num(table.weight->clamped_fraction)}};
  }
  return doc;
}

void print_summary(const MetricsTable& table, std::ostream& out) {
  const ScenarioConfig& s = table.config;
  char buf[256];
  std::snprintf(buf, sizeof buf, "design=%s n=%ld N=%ld B=%d sigma=%g  (%d of %d replications succeeded)\n",
                std::string(to_string(s.design)).c_str(), static_cast<long>(s.n), static_cast<long>(s.N), s.B,
                s.sigma, table.succeeded, table.requested);
  out << buf;
  for (const auto& e : table.estimators) {
    out << "\n[" << to_string(e.kind) << "]\n";
    std::snprintf(buf, sizeof buf, "%-10s %12s", "coef", "SE");
    out << buf;
    for (const auto& c : e.covariances) {
      const std::string name(to_string(c.source));
      std::snprintf(buf, sizeof buf, " %14s %8s", ("SEhat_" + name).c_str(), ("CP_" + name).c_str());
      out << buf;
    }
    out << '\n';
    for (Index j = 0; j < table.truth.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%-10s %12.4e", table.coefficient_names[static_cast<std::size_t>(j)].c_str(),
                    e.empirical_se(j));
      out << buf;
      for (const auto& c : e.covariances) {
        std::snprintf(buf, sizeof buf, " %14.4e %7.1f%%", c.mean_se(j), 100.0 * c.cp(j));
        out << buf;
      }
      out << '\n';
    }
  }
  if (table.weight) {
    std::snprintf(buf, sizeof buf, "\nmean w_hat = %.4f (clamped in %.1f%% of replications)\n", table.weight->mean_w_hat,
                  100.0 * table.weight->clamped_fraction);
    out << buf;
  }
}

}  // namespace imputereg
