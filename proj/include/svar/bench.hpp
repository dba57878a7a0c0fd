#pragma once

#include "svar/pipeline.hpp"
#include "svar/varmodel.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace svar {

struct Metrics {
  double bias2 = 0;
  double variance = 0;
  double mse = 0;
  double tpr = 0;
  double fpr = 0;
};

/// Off-diagonal directed edges: edge(i, j) iff A_k(i, j) != 0 for some k.
BoolMatrix edge_matrix(const VarModel& model);

/// Squared bias and population variance (divisor R) of the AR coefficients,
/// summed over lags and entries after padding every model with zero lags up
/// to the largest order present. TPR and FPR are averaged over estimates.
Metrics metrics(const std::vector<VarModel>& estimates, const VarModel& truth);

/// RMSE(h) for h = 1 .. horizon from rolling-origin forecasts. Rows
/// [test_start, T) of `series` form the test window; every origin uses all
/// observations up to and including itself.
VectorXd rmse_h(const VarModel& model, const TimeSeries& series, Index test_start, Index horizon);

/// DOT digraph with one node per series and edge i -> j iff some A_k(i, j) != 0.
std::string export_digraph(const VarModel& model, const std::vector<std::string>& names = {});

/// DOT digraph of edges with positive detection fraction, carrying it as the
/// `weight` attribute.
std::string export_weighted_digraph(const MatrixXd& fraction, const std::vector<std::string>& names = {});

struct BenchConfig {
  std::string model = "model1";
  Index dim = 10;          // random-sparse only
  double density = 0.25;   // random-sparse only
  Index replicates = 50;
  Index length = 100;
  Index burn_in = 500;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"svar", "msvar"};  // svar | msvar | msvar-fixed
  int threads = 0;         // 0 = hardware concurrency
  Index test_length = 0;   // > 0 adds an RMSE(h) evaluation window after the training sample
  Index horizon = 0;
  bool keep_reports = false;
  SvarConfig svar;
  MsvarConfig msvar;
};

void from_json(const nlohmann::json& j, BenchConfig& c);

struct MethodSummary {
  std::string method;  // msvar-stage1 is derived from the msvar runs
  Metrics metrics;
  double mean_seconds = 0;
  Index failures = 0;
  MatrixXd edge_frequency;  // detection fraction per directed edge
  VectorXd rmse;            // mean over replicates, per h
  VectorXd rmse_sd;
  VectorXd baseline_rmse;   // zero forecast on the same windows
};

struct BenchResult {
  std::string model;
  VarModel truth;
  Index replicates = 0;
  Index length = 0;
  std::vector<MethodSummary> methods;
  std::vector<std::string> errors;             // "method replicate r: message"
  std::vector<std::vector<FitReport>> reports;  // per method, per replicate (keep_reports)

  const MethodSummary& at(const std::string& method) const;
};

/// Seed of replicate r derived from the master seed.
std::uint64_t replicate_seed(std::uint64_t master, Index r);

BenchResult run_bench(const BenchConfig& config);

void write_metrics_csv(std::ostream& out, const BenchResult& result);
void write_rmse_csv(std::ostream& out, const BenchResult& result);
void to_json(nlohmann::json& j, const BenchResult& result);

struct TimingConfig {
  Index dim = 50;
  Index length = 200;
  double density = 0.25;
  std::uint64_t seed = 1;
  Index replicates = 1;
  SvarConfig svar;
  MsvarConfig msvar;
};

struct TimingResult {
  Index dim = 0;
  double msvar_tuned = 0;  // seconds, summed over replicates
  double msvar_fixed = 0;
  double svar = 0;
  double tuned_ratio() const { return msvar_tuned / msvar_fixed; }
  double svar_ratio() const { return svar / msvar_fixed; }
};

/// Wall times of the three procedures on random sparse VAR(1) data.
TimingResult run_timing(const TimingConfig& config);

}  // namespace svar
