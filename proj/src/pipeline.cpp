#include "svar/pipeline.hpp"

#include "svar/psc.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace svar {

Method parse_method(const std::string& name) {
  if (name == "svar" || name == "sVAR") return Method::Svar;
  if (name == "msvar" || name == "msVAR") return Method::Msvar;
  throw InvalidInput("unknown method '" + name + "' (expected svar or msvar)");
}

std::string to_string(Method m) { return m == Method::Svar ? "sVAR" : "msVAR"; }

std::vector<double> default_lambda_grid() { return linear_grid(1.0, 20); }

bool FitReport::operator==(const FitReport& o) const {
  auto same_trace = [](const std::vector<CriterionPoint>& a, const std::vector<CriterionPoint>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const auto& x, const auto& y) {
      return x.lambda == y.lambda && x.value == y.value && x.pairs == y.pairs && x.iterations == y.iterations &&
             x.converged == y.converged;
    });
  };
  return method == o.method && series_names == o.series_names && final_model == o.final_model &&
         stage1_model == o.stage1_model && selected_p == o.selected_p && selected_pairs == o.selected_pairs &&
         final_nonzeros == o.final_nonzeros && stage1_support == o.stage1_support &&
         stage2_support == o.stage2_support && bic_trace == o.bic_trace && bic_m_path == o.bic_m_path &&
         same_trace(tuning_trace, o.tuning_trace) && half_window == o.half_window && lambda == o.lambda &&
         lambda_max == o.lambda_max && fdr_q == o.fdr_q && fdr_tests == o.fdr_tests &&
         fdr_rejections == o.fdr_rejections && flags == o.flags;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_p_grid(const std::vector<Index>& grid) {
  require(!grid.empty(), "p grid is empty");
  for (Index p : grid) require(p >= 1, "p grid entries must be at least 1");
}

std::vector<Index> sorted_unique(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

BoolMatrix top_pairs(const std::vector<std::pair<Index, Index>>& ranked, Index k, Index m) {
  BoolMatrix pairs = BoolMatrix::Constant(k, k, false);
  for (Index a = 0; a < m; ++a) {
    pairs(ranked[a].first, ranked[a].second) = true;
    pairs(ranked[a].second, ranked[a].first) = true;
  }
  return pairs;
}

SupportMask from_stats(const std::vector<CoefficientStat>& stats, const std::vector<std::size_t>& keep, Index k,
                       Index p) {
  std::vector<BoolMatrix> coeffs(static_cast<std::size_t>(p), BoolMatrix::Constant(k, k, false));
  for (std::size_t idx : keep) coeffs[stats[idx].lag](stats[idx].row, stats[idx].col) = true;
  return SupportMask::from_coefficients(std::move(coeffs));
}

int pick_window(int requested, Index k) {
  require(requested >= 0, "half window must be nonnegative");
  return requested == 0 ? default_half_window(k) : requested;
}

}  // namespace

FitReport svar_fit(const TimeSeries& data, const SvarConfig& config) {
  const auto p_grid = sorted_unique(config.p_grid);
  check_p_grid(p_grid);
  const Index k = data.dim();
  const Index pair_total = k * (k - 1) / 2;
  std::vector<Index> m_grid = config.m_grid;
  if (m_grid.empty()) {
    m_grid.resize(static_cast<std::size_t>(pair_total + 1));
    std::iota(m_grid.begin(), m_grid.end(), Index{0});
  }
  m_grid = sorted_unique(std::move(m_grid));
  require(m_grid.front() >= 0 && m_grid.back() <= pair_total, "m grid entries must lie in [0, K(K-1)/2]");

  FitReport report;
  report.method = Method::Svar;
  report.series_names = data.names();
  const auto t0 = Clock::now();

  report.half_window = pick_window(config.half_window, k);
  const auto spectrum = estimate_spectrum(data, report.half_window);
  const auto ranked = rank_pairs(psc_by_inversion(spectrum).summary);

  const Index p_max = p_grid.back();
  const double log_t = std::log(static_cast<double>(data.length()));
  RestrictedOptions quick;
  quick.presample = p_max;
  quick.std_errors = false;

  double best = std::numeric_limits<double>::infinity();
  Index best_p = p_grid.front(), best_m = m_grid.front();
  for (Index p : p_grid) {
    const RestrictedEstimator est(data, p, p_max);
    for (Index m : m_grid) {
      const auto fit = est.fit(SupportMask::from_pairs(top_pairs(ranked, k, m), p), quick);
      const double value = bic(fit, data.length(), (k + 2 * m) * p);
      report.bic_trace.push_back({p, m, value});
      if (value < best) {
        best = value;
        best_p = p;
        best_m = m;
      }
    }
  }
  report.selected_p = best_p;
  report.selected_pairs = best_m;
  report.stage1_support = SupportMask::from_pairs(top_pairs(ranked, k, best_m), best_p);

  const RestrictedEstimator est(data, best_p, p_max);
  RestrictedOptions full = quick;
  full.std_errors = true;
  const auto stage1 = est.fit(report.stage1_support, full);
  report.stage1_model = stage1.model;
  report.wall_time.stage1 = seconds_since(t0);

  const auto t1 = Clock::now();
  std::vector<std::size_t> order(stage1.stats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(stage1.stats[a].t_stat) > std::abs(stage1.stats[b].t_stat);
  });

  best = std::numeric_limits<double>::infinity();
  std::size_t best_count = 0;
  for (std::size_t m = 0; m <= order.size(); ++m) {
    const std::vector<std::size_t> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    const auto fit = est.fit(from_stats(stage1.stats, keep, k, best_p), quick);
    const double value = -2.0 * fit.loglik + log_t * static_cast<double>(m);
    report.bic_m_path.push_back({best_p, static_cast<Index>(m), value});
    if (value < best) {
      best = value;
      best_count = m;
    }
  }
  const std::vector<std::size_t> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_count));
  report.stage2_support = from_stats(stage1.stats, keep, k, best_p);
  report.final_model = est.fit(report.stage2_support, quick).model;
  report.final_nonzeros = report.stage2_support.free_count();
  report.wall_time.stage2 = seconds_since(t1);
  return report;
}

FitReport msvar_fit(const TimeSeries& data, const MsvarConfig& config) {
  const auto p_grid = sorted_unique(config.p_grid);
  check_p_grid(p_grid);
  require(config.q > 0 && config.q < 1, "FDR level q must lie in (0, 1)");
  const Index k = data.dim();

  FitReport report;
  report.method = Method::Msvar;
  report.series_names = data.names();
  report.fdr_q = config.q;
  const auto t0 = Clock::now();

  report.half_window = pick_window(config.half_window, k);
  const auto spectrum = estimate_spectrum(data, report.half_window);
  report.lambda_max = lambda_max(spectrum);

  const double scale = config.glasso.relative ? report.lambda_max : 1.0;
  BoolMatrix pairs;
  if (config.glasso.lambda) {
    require(*config.glasso.lambda >= 0, "lambda must be nonnegative");
    report.lambda = *config.glasso.lambda * scale;
    const auto sol = admm_solve(spectrum, report.lambda, config.glasso.admm);
    if (!sol.converged) report.flags.push_back("admm_not_converged");
    pairs = sol.support;
  } else {
    auto grid = config.glasso.lambda_grid.empty() ? default_lambda_grid() : config.glasso.lambda_grid;
    for (double& l : grid) {
      require(l >= 0, "lambda grid entries must be nonnegative");
      l *= scale;
    }
    auto tuned = tune(spectrum, grid, config.glasso.criterion, config.glasso.gamma, config.glasso.admm);
    report.tuning_trace = std::move(tuned.trace);
    report.lambda = tuned.best.lambda;
    if (!tuned.best.converged) report.flags.push_back("admm_not_converged");
    pairs = std::move(tuned.best.support);
  }
  report.selected_pairs = (pairs.count() - k) / 2;

  const Index p_max = p_grid.back();
  RestrictedOptions quick;
  quick.presample = p_max;
  quick.std_errors = false;
  double best = std::numeric_limits<double>::infinity();
  Index best_p = p_grid.front();
  for (Index p : p_grid) {
    const auto fit = fit_restricted(data, p, SupportMask::from_pairs(pairs, p), quick);
    const double value = bic(fit, data.length(), (k + 2 * report.selected_pairs) * p);
    report.bic_trace.push_back({p, report.selected_pairs, value});
    if (value < best) {
      best = value;
      best_p = p;
    }
  }
  report.selected_p = best_p;
  report.stage1_support = SupportMask::from_pairs(pairs, best_p);

  const RestrictedEstimator est(data, best_p, p_max);
  RestrictedOptions full = quick;
  full.std_errors = true;
  const auto stage1 = est.fit(report.stage1_support, full);
  report.stage1_model = stage1.model;
  report.wall_time.stage1 = seconds_since(t0);

  const auto t1 = Clock::now();
  if (!config.refine) {
    report.stage2_support = report.stage1_support;
    report.final_model = stage1.model;
  } else {
    std::vector<double> pv;
    pv.reserve(stage1.stats.size());
    for (const auto& s : stage1.stats) pv.push_back(s.p_value);
    const auto rejected = bh_fdr(pv, config.q, config.by_correction);
    report.fdr_tests = static_cast<Index>(pv.size());
    report.fdr_rejections = static_cast<Index>(rejected.size());
    if (rejected.empty()) report.flags.push_back("fdr_rejected_nothing");
    report.stage2_support = from_stats(stage1.stats, rejected, k, best_p);
    report.final_model = est.fit(report.stage2_support, quick).model;
  }
  report.final_nonzeros = report.stage2_support.free_count();
  report.wall_time.stage2 = seconds_since(t1);
  return report;
}

std::vector<std::size_t> bh_fdr(const std::vector<double>& p_values, double q, bool by) {
  require(q > 0 && q < 1, "bh_fdr: q must lie in (0, 1)");
  for (double p : p_values) require(p >= 0 && p <= 1, "bh_fdr: p-values must lie in [0, 1]");
  const std::size_t n = p_values.size();
  if (n == 0) return {};
  double level = q;
  if (by) {
    double harmonic = 0;
    for (std::size_t i = 1; i <= n; ++i) harmonic += 1.0 / static_cast<double>(i);
    level /= harmonic;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t count = 0;
  for (std::size_t i = n; i >= 1; --i)
    if (p_values[order[i - 1]] <= static_cast<double>(i) * level / static_cast<double>(n)) {
      count = i;
      break;
    }
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- json

namespace {

nlohmann::json trace_json(const std::vector<BicPoint>& trace) {
  auto a = nlohmann::json::array();
  for (const auto& b : trace) a.push_back({{"p", b.p}, {"count", b.count}, {"bic", b.value}});
  return a;
}

std::vector<BicPoint> trace_from(const nlohmann::json& j) {
  std::vector<BicPoint> out;
  for (const auto& b : j) out.push_back({b.at("p").get<Index>(), b.at("count").get<Index>(), b.at("bic").get<double>()});
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const FitReport& r) {
  auto tuning = nlohmann::json::array();
  for (const auto& c : r.tuning_trace)
    tuning.push_back({{"lambda", c.lambda},
                      {"criterion", c.value},
                      {"pairs", c.pairs},
                      {"iterations", c.iterations},
                      {"converged", c.converged}});
  j = nlohmann::json{{"method", to_string(r.method)},
                     {"series_names", r.series_names},
                     {"final_model", r.final_model},
                     {"stage1_model", r.stage1_model},
                     {"selected_p", r.selected_p},
                     {"selected_pairs", r.selected_pairs},
                     {"final_nonzeros", r.final_nonzeros},
                     {"stage1_support", r.stage1_support},
                     {"stage2_support", r.stage2_support},
                     {"bic_trace", trace_json(r.bic_trace)},
                     {"bic_m_path", trace_json(r.bic_m_path)},
                     {"tuning_trace", tuning},
                     {"half_window", r.half_window},
                     {"lambda", r.lambda},
                     {"lambda_max", r.lambda_max},
                     {"fdr_q", r.fdr_q},
                     {"fdr_tests", r.fdr_tests},
                     {"fdr_rejections", r.fdr_rejections},
                     {"flags", r.flags},
                     {"wall_time", {{"stage1", r.wall_time.stage1}, {"stage2", r.wall_time.stage2}}}};
}

void from_json(const nlohmann::json& j, FitReport& r) {
  r.method = parse_method(j.at("method").get<std::string>());
  r.series_names = j.at("series_names").get<std::vector<std::string>>();
  r.final_model = j.at("final_model").get<VarModel>();
  r.stage1_model = j.at("stage1_model").get<VarModel>();
  r.selected_p = j.at("selected_p").get<Index>();
  r.selected_pairs = j.at("selected_pairs").get<Index>();
  r.final_nonzeros = j.at("final_nonzeros").get<Index>();
  r.stage1_support = j.at("stage1_support").get<SupportMask>();
  r.stage2_support = j.at("stage2_support").get<SupportMask>();
  r.bic_trace = trace_from(j.at("bic_trace"));
  r.bic_m_path = trace_from(j.at("bic_m_path"));
  r.tuning_trace.clear();
  for (const auto& c : j.at("tuning_trace"))
    r.tuning_trace.push_back({c.at("lambda").get<double>(), c.at("criterion").get<double>(),
                              c.at("pairs").get<Index>(), c.at("iterations").get<int>(),
                              c.at("converged").get<bool>()});
  r.half_window = j.at("half_window").get<int>();
  r.lambda = j.at("lambda").get<double>();
  r.lambda_max = j.at("lambda_max").get<double>();
  r.fdr_q = j.at("fdr_q").get<double>();
  r.fdr_tests = j.at("fdr_tests").get<Index>();
  r.fdr_rejections = j.at("fdr_rejections").get<Index>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  r.wall_time.stage1 = j.at("wall_time").at("stage1").get<double>();
  r.wall_time.stage2 = j.at("wall_time").at("stage2").get<double>();
}

}  // namespace svar
