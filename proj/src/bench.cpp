#include "svar/bench.hpp"

#include "svar/fixtures.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace svar {

BoolMatrix edge_matrix(const VarModel& model) {
  const Index k = model.dim();
  BoolMatrix edges = BoolMatrix::Constant(k, k, false);
  for (const auto& a : model.coeffs) edges = edges || (a.array() != 0.0);
  edges.matrix().diagonal().setConstant(false);
  return edges;
}

Metrics metrics(const std::vector<VarModel>& estimates, const VarModel& truth) {
  require(!estimates.empty(), "metrics: empty ensemble");
  const Index k = truth.dim();
  Index p = truth.order();
  for (const auto& e : estimates) {
    require(e.dim() == k, "metrics: dimension mismatch");
    p = std::max(p, e.order());
  }
  auto lag = [&](const VarModel& m, Index s) -> MatrixXd {
    return s < m.order() ? m.coeffs[s] : MatrixXd::Zero(k, k);
  };
  const double r = static_cast<double>(estimates.size());
  Metrics out;
  for (Index s = 0; s < p; ++s) {
    MatrixXd mean = MatrixXd::Zero(k, k);
    for (const auto& e : estimates) mean += lag(e, s);
    mean /= r;
    MatrixXd var = MatrixXd::Zero(k, k);
    for (const auto& e : estimates) var += (lag(e, s) - mean).cwiseAbs2();
    out.bias2 += (mean - lag(truth, s)).squaredNorm();
    out.variance += var.sum() / r;
  }
  out.mse = out.bias2 + out.variance;

  const BoolMatrix truth_edges = edge_matrix(truth);
  const double positives = static_cast<double>(truth_edges.count());
  const double negatives = static_cast<double>(k * (k - 1)) - positives;
  for (const auto& e : estimates) {
    const BoolMatrix found = edge_matrix(e);
    if (positives > 0) out.tpr += static_cast<double>((found && truth_edges).count()) / positives;
    if (negatives > 0) out.fpr += static_cast<double>((found && !truth_edges).count()) / negatives;
  }
  out.tpr /= r;
  out.fpr /= r;
  return out;
}

VectorXd rmse_h(const VarModel& model, const TimeSeries& series, Index test_start, Index horizon) {
  const Index n = series.length();
  const Index k = series.dim();
  require(horizon >= 1, "rmse_h: horizon must be positive");
  require(test_start >= model.order() && test_start <= n, "rmse_h: test window must follow at least p observations");
  require(n - test_start >= horizon, "rmse_h: horizon exceeds the test window");
  VectorXd sse = VectorXd::Zero(horizon);
  VectorXd count = VectorXd::Zero(horizon);
  for (Index origin = test_start - 1; origin + 1 < n; ++origin) {
    const Index steps = std::min(horizon, n - 1 - origin);
    const MatrixXd f = forecast(model, series.values().topRows(origin + 1), steps);
    for (Index h = 1; h <= steps; ++h) {
      sse(h - 1) += (series.values().row(origin + h) - f.row(h - 1)).squaredNorm();
      count(h - 1) += 1;
    }
  }
  return (sse.array() / (count.array() * static_cast<double>(k))).sqrt();
}

namespace {

std::string quoted(const std::string& s) {
  std::ostringstream out;
  out << std::quoted(s);
  return out.str();
}

std::vector<std::string> node_names(const std::vector<std::string>& names, Index k) {
  if (names.empty()) return default_series_names(k);
  require(static_cast<Index>(names.size()) == k, "digraph: need one name per series");
  return names;
}

}  // namespace

std::string export_digraph(const VarModel& model, const std::vector<std::string>& names) {
  const Index k = model.dim();
  const auto labels = node_names(names, k);
  std::vector<std::pair<std::string, std::string>> edges;
  const BoolMatrix e = edge_matrix(model);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (e(i, j)) edges.emplace_back(labels[i], labels[j]);
  std::sort(edges.begin(), edges.end());
  std::ostringstream out;
  out << "digraph var {\n";
  for (const auto& l : labels) out << "  " << quoted(l) << ";\n";
  for (const auto& [a, b] : edges) out << "  " << quoted(a) << " -> " << quoted(b) << ";\n";
  out << "}\n";
  return out.str();
}

std::string export_weighted_digraph(const MatrixXd& fraction, const std::vector<std::string>& names) {
  const Index k = fraction.rows();
  require(fraction.cols() == k, "digraph: fraction matrix must be square");
  const auto labels = node_names(names, k);
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (i != j && fraction(i, j) > 0) edges.emplace_back(labels[i], labels[j], fraction(i, j));
  std::sort(edges.begin(), edges.end());
  std::ostringstream out;
  out << "digraph var {\n";
  for (const auto& l : labels) out << "  " << quoted(l) << ";\n";
  for (const auto& [a, b, w] : edges) out << "  " << quoted(a) << " -> " << quoted(b) << " [weight=" << w << "];\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------- bench

const MethodSummary& BenchResult::at(const std::string& method) const {
  for (const auto& m : methods)
    if (m.method == method) return m;
  throw InvalidInput("bench result has no method '" + method + "'");
}

std::uint64_t replicate_seed(std::uint64_t master, Index r) {
  // splitmix64 finalizer over (master, r)
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(r) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void from_json(const nlohmann::json& j, BenchConfig& c) {
  c.model = j.value("model", c.model);
  c.dim = j.value("dim", c.dim);
  c.density = j.value("density", c.density);
  c.replicates = j.value("replicates", c.replicates);
  c.length = j.value("length", c.length);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.seed = j.value("seed", c.seed);
  c.methods = j.value("methods", c.methods);
  for (const auto& m : c.methods)
    require(m == "svar" || m == "msvar" || m == "msvar-fixed", "bench: unknown method '" + m + "'");
  c.threads = j.value("threads", c.threads);
  c.test_length = j.value("test_length", c.test_length);
  c.horizon = j.value("horizon", c.horizon);
  c.keep_reports = j.value("keep_reports", c.keep_reports);
  if (j.contains("p_grid")) {
    c.svar.p_grid = j.at("p_grid").get<std::vector<Index>>();
    c.msvar.p_grid = c.svar.p_grid;
  }
  if (j.contains("m_grid")) c.svar.m_grid = j.at("m_grid").get<std::vector<Index>>();
  if (j.contains("half_window")) {
    c.svar.half_window = j.at("half_window").get<int>();
    c.msvar.half_window = c.svar.half_window;
  }
  c.msvar.q = j.value("q", c.msvar.q);
  c.msvar.by_correction = j.value("by_correction", c.msvar.by_correction);
  if (j.contains("glasso")) c.msvar.glasso = j.at("glasso").get<GlassoConfig>();
}

namespace {

struct Outcome {
  std::optional<FitReport> report;
  double seconds = 0;
  VectorXd rmse, stage1_rmse, baseline;
  std::string error;
};

Outcome run_method(const std::string& method, const TimeSeries& train, const TimeSeries& full,
                   const BenchConfig& config) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (method == "svar") {
      out.report = svar_fit(train, config.svar);
    } else if (method == "msvar" || method == "msvar-fixed") {
      MsvarConfig mc = config.msvar;
      if (method == "msvar-fixed" && !mc.glasso.lambda) mc.glasso.lambda = kFixedLambda;
      out.report = msvar_fit(train, mc);
    } else {
      throw InvalidInput("unknown bench method '" + method + "'");
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (config.test_length > 0) {
      out.rmse = rmse_h(out.report->final_model, full, train.length(), config.horizon);
      out.stage1_rmse = rmse_h(out.report->stage1_model, full, train.length(), config.horizon);
      VarModel zero = VarModel::zeros(full.dim(), 1);
      out.baseline = rmse_h(zero, full, train.length(), config.horizon);
    }
  } catch (const std::exception& e) {
    out.report.reset();
    out.error = e.what();
  }
  return out;
}

template <typename Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const Index workers = std::clamp<Index>(threads > 0 ? threads : static_cast<Index>(hw), 1, std::max<Index>(count, 1));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::jthread> pool;
  for (Index w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) fn(i);
    });
}

MethodSummary summarize(const std::string& name, const std::vector<Outcome>& outcomes, const VarModel& truth,
                        bool stage1, Index horizon) {
  MethodSummary s;
  s.method = name;
  std::vector<VarModel> models;
  std::vector<VectorXd> rmse, base;
  double seconds = 0;
  for (const auto& o : outcomes) {
    if (!o.report) {
      ++s.failures;
      continue;
    }
    models.push_back(stage1 ? o.report->stage1_model : o.report->final_model);
    seconds += o.seconds;
    if (horizon > 0) {
      rmse.push_back(stage1 ? o.stage1_rmse : o.rmse);
      base.push_back(o.baseline);
    }
  }
  const Index k = truth.dim();
  s.edge_frequency = MatrixXd::Zero(k, k);
  if (models.empty()) {
    s.metrics = {NAN, NAN, NAN, NAN, NAN};
    return s;
  }
  s.metrics = metrics(models, truth);
  s.mean_seconds = seconds / static_cast<double>(models.size());
  for (const auto& m : models) s.edge_frequency += edge_matrix(m).cast<double>().matrix();
  s.edge_frequency /= static_cast<double>(models.size());
  if (horizon > 0) {
    const double n = static_cast<double>(rmse.size());
    s.rmse = VectorXd::Zero(horizon);
    s.baseline_rmse = VectorXd::Zero(horizon);
    for (std::size_t i = 0; i < rmse.size(); ++i) {
      s.rmse += rmse[i];
      s.baseline_rmse += base[i];
    }
    s.rmse /= n;
    s.baseline_rmse /= n;
    s.rmse_sd = VectorXd::Zero(horizon);
    for (const auto& v : rmse) s.rmse_sd += (v - s.rmse).cwiseAbs2();
    s.rmse_sd = (s.rmse_sd / n).cwiseSqrt();
  }
  return s;
}

}  // namespace

BenchResult run_bench(const BenchConfig& config) {
  require(config.replicates >= 1, "bench: replicates must be positive");
  require(config.length >= 4, "bench: length too short");
  require(config.burn_in >= 0, "bench: negative burn-in");
  require(!config.methods.empty(), "bench: no methods");
  require(config.test_length == 0 || (config.horizon >= 1 && config.horizon <= config.test_length),
          "bench: horizon must lie in [1, test_length]");
  for (const auto& m : config.methods)
    require(m == "svar" || m == "msvar" || m == "msvar-fixed", "bench: unknown method '" + m + "'");

  BenchResult result;
  result.model = config.model;
  result.truth = fixture(config.model, config.dim, config.density, config.seed);
  result.replicates = config.replicates;
  result.length = config.length;
  require(is_stable(result.truth).stable, "bench: fixture model is not stable");

  const std::size_t nm = config.methods.size();
  std::vector<std::vector<Outcome>> outcomes(nm, std::vector<Outcome>(static_cast<std::size_t>(config.replicates)));
  parallel_for(config.replicates, config.threads, [&](Index r) {
    const TimeSeries full = simulate(result.truth, config.length + config.test_length, config.burn_in,
                                     replicate_seed(config.seed, r));
    const TimeSeries train = config.test_length > 0 ? full.slice(0, config.length) : full;
    for (std::size_t m = 0; m < nm; ++m) outcomes[m][r] = run_method(config.methods[m], train, full, config);
  });

  for (std::size_t m = 0; m < nm; ++m) {
    const auto& name = config.methods[m];
    for (Index r = 0; r < config.replicates; ++r)
      if (!outcomes[m][r].report)
        result.errors.push_back(name + " replicate " + std::to_string(r) + ": " + outcomes[m][r].error);
    result.methods.push_back(summarize(name, outcomes[m], result.truth, false, config.horizon));
    if (name == "msvar" && config.msvar.refine)
      result.methods.push_back(summarize("msvar-stage1", outcomes[m], result.truth, true, config.horizon));
    if (config.keep_reports) {
      std::vector<FitReport> reports;
      for (auto& o : outcomes[m])
        if (o.report) reports.push_back(std::move(*o.report));
      result.reports.push_back(std::move(reports));
    }
  }
  return result;
}

void write_metrics_csv(std::ostream& out, const BenchResult& result) {
  out << "model,method,Bias2,Variance,MSE,TPR,FPR,seconds,failures\n";
  out << std::setprecision(10);
  for (const auto& m : result.methods)
    out << result.model << ',' << m.method << ',' << m.metrics.bias2 << ',' << m.metrics.variance << ','
        << m.metrics.mse << ',' << m.metrics.tpr << ',' << m.metrics.fpr << ',' << m.mean_seconds << ','
        << m.failures << '\n';
}

void write_rmse_csv(std::ostream& out, const BenchResult& result) {
  out << "model,method,h,RMSE,SD,zero_forecast_RMSE\n";
  out << std::setprecision(10);
  for (const auto& m : result.methods)
    for (Index h = 0; h < m.rmse.size(); ++h)
      out << result.model << ',' << m.method << ',' << h + 1 << ',' << m.rmse(h) << ',' << m.rmse_sd(h) << ','
          << m.baseline_rmse(h) << '\n';
}

void to_json(nlohmann::json& j, const BenchResult& result) {
  auto methods = nlohmann::json::array();
  for (const auto& m : result.methods) {
    nlohmann::json e{{"method", m.method},
                     {"Bias2", m.metrics.bias2},
                     {"Variance", m.metrics.variance},
                     {"MSE", m.metrics.mse},
                     {"TPR", m.metrics.tpr},
                     {"FPR", m.metrics.fpr},
                     {"mean_seconds", m.mean_seconds},
                     {"failures", m.failures}};
    e["rmse"] = std::vector<double>(m.rmse.data(), m.rmse.data() + m.rmse.size());
    e["rmse_sd"] = std::vector<double>(m.rmse_sd.data(), m.rmse_sd.data() + m.rmse_sd.size());
    methods.push_back(std::move(e));
  }
  j = nlohmann::json{{"model", result.model},
                     {"replicates", result.replicates},
                     {"length", result.length},
                     {"methods", methods},
                     {"errors", result.errors}};
}

TimingResult run_timing(const TimingConfig& config) {
  require(config.replicates >= 1, "timing: replicates must be positive");
  TimingResult out;
  out.dim = config.dim;
  using Clock = std::chrono::steady_clock;
  auto timed = [](auto&& fn) {
    const auto start = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  for (Index r = 0; r < config.replicates; ++r) {
    const auto seed = replicate_seed(config.seed, r);
    const VarModel truth = random_sparse_model(config.dim, config.density, seed);
    const TimeSeries data = simulate(truth, config.length, 500, seed ^ 0x5EEDULL);
    MsvarConfig fixed = config.msvar;
    fixed.glasso.lambda = kFixedLambda;
    MsvarConfig tuned = config.msvar;
    tuned.glasso.lambda.reset();
    out.msvar_fixed += timed([&] { msvar_fit(data, fixed); });
    out.msvar_tuned += timed([&] { msvar_fit(data, tuned); });
    out.svar += timed([&] { svar_fit(data, config.svar); });
  }
  return out;
}

}  // namespace svar
