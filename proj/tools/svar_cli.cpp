// Command-line front end: simulate, fit, forecast, bench, export-graph.

#include "svar/bench.hpp"
#include "svar/fixtures.hpp"
#include "svar/pipeline.hpp"
#include "svar/psc.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace svar;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return nlohmann::json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

// A model file may hold a bare VarModel or a FitReport.
VarModel load_model(const std::string& spec) {
  if (!fs::exists(spec)) return fixture(spec);
  const auto j = read_json(spec);
  if (j.contains("final_model")) return j.at("final_model").get<VarModel>();
  return j.get<VarModel>();
}

struct FitOptions {
  std::string data;
  std::string method = "msvar";
  std::vector<Index> p_grid{1, 2, 3};
  double q = 0.1;
  std::optional<double> lambda;
  std::vector<double> lambda_grid;
  bool relative = false;
  std::string criterion = "ebic";
  double gamma = 0.5;
  int mt = 0;
  std::string out_dir = ".";
  std::string config;
};

// Config keys override the flags.
void apply_config(const nlohmann::json& j, FitOptions& o) {
  o.method = j.value("method", o.method);
  o.p_grid = j.value("p_grid", o.p_grid);
  o.q = j.value("q", o.q);
  if (j.contains("lambda")) o.lambda = j.at("lambda").get<double>();
  o.lambda_grid = j.value("lambda_grid", o.lambda_grid);
  o.relative = j.value("relative", o.relative);
  o.criterion = j.value("criterion", o.criterion);
  o.gamma = j.value("gamma", o.gamma);
  o.mt = j.value("half_window", o.mt);
}

void run_fit(FitOptions o) {
  MsvarConfig mc;
  if (!o.config.empty()) {
    const auto j = read_json(o.config);
    apply_config(j, o);
    if (j.contains("glasso")) mc.glasso = j.at("glasso").get<GlassoConfig>();
  }
  const TimeSeries data = read_csv_file(o.data);
  const Method method = parse_method(o.method);
  fs::create_directories(o.out_dir);

  FitReport report;
  PscSurface surface;
  if (method == Method::Svar) {
    SvarConfig sc;
    sc.p_grid = o.p_grid;
    sc.half_window = o.mt;
    report = svar_fit(data, sc);
    surface = psc_by_inversion(estimate_spectrum(data, report.half_window));
  } else {
    mc.p_grid = o.p_grid;
    mc.q = o.q;
    mc.half_window = o.mt;
    if (o.lambda) mc.glasso.lambda = o.lambda;
    if (!o.lambda_grid.empty()) mc.glasso.lambda_grid = o.lambda_grid;
    mc.glasso.relative = o.relative;
    mc.glasso.criterion = parse_criterion(o.criterion);
    mc.glasso.gamma = o.gamma;
    report = msvar_fit(data, mc);
    const auto spectrum = estimate_spectrum(data, report.half_window);
    surface = psc_from_precision(admm_solve(spectrum, report.lambda, mc.glasso.admm).theta);
  }

  const fs::path dir(o.out_dir);
  write_text(dir / "report.json", nlohmann::json(report).dump(2) + "\n");
  std::ofstream psc(dir / "psc.csv");
  write_psc_csv(psc, surface);
  write_text(dir / "graph.dot", export_digraph(report.final_model, data.names()));
  write_model_file((dir / "model.json").string(), report.final_model);

  std::cout << to_string(report.method) << ": p* = " << report.selected_p << ", M* = " << report.selected_pairs
            << ", m* = " << report.final_nonzeros << "\n";
  for (const auto& f : report.flags) std::cout << "warning: " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse VAR estimation through the time-series graphical lasso"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a VAR model to CSV");
  std::string sim_model = "model1", sim_out, sim_dump;
  Index sim_len = 100, sim_burn = 500, sim_dim = 10;
  double sim_density = 0.25;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "Fixture name (model1, model2, model3, random-sparse) or model JSON");
  sim->add_option("--length,-T", sim_len, "Series length")->check(CLI::PositiveNumber);
  sim->add_option("--burn-in", sim_burn, "Discarded initial samples")->check(CLI::NonNegativeNumber);
  sim->add_option("--dim", sim_dim, "Dimension of the random-sparse fixture");
  sim->add_option("--density", sim_density, "Nonzero probability of the random-sparse fixture");
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--out,-o", sim_out, "Output CSV (default stdout)");
  sim->add_option("--dump-model", sim_dump, "Also write the model as JSON");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit sVAR or msVAR to a CSV series");
  FitOptions fo;
  fit->add_option("--data,-d", fo.data, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
  fit->add_option("--method", fo.method, "svar or msvar")->check(CLI::IsMember({"svar", "msvar"}));
  fit->add_option("--p-grid", fo.p_grid, "Candidate lag orders")->delimiter(',');
  fit->add_option("--q", fo.q, "FDR level");
  auto* lam = fit->add_option("--lambda", fo.lambda, "Fixed lambda (skips tuning)");
  fit->add_option("--lambda-grid", fo.lambda_grid, "Lambda grid")
      ->delimiter(',')
      ->excludes(lam);
  fit->add_flag("--relative", fo.relative, "Read lambda values as fractions of lambda_max");
  fit->add_option("--criterion", fo.criterion, "aic or ebic")->check(CLI::IsMember({"aic", "ebic"}));
  fit->add_option("--gamma", fo.gamma, "eBIC gamma");
  fit->add_option("--mt", fo.mt, "Smoothing half window (0 = smallest with 2m+1 > K)");
  fit->add_option("--out-dir", fo.out_dir, "Output directory");
  fit->add_option("--config", fo.config, "JSON config; its keys override flags")->check(CLI::ExistingFile);

  // forecast
  auto* fc = app.add_subcommand("forecast", "Forecast from a fitted model");
  std::string fc_model, fc_data;
  Index fc_h = 1, fc_test = -1;
  fc->add_option("--model", fc_model, "Model JSON or report.json")->required();
  fc->add_option("--data,-d", fc_data, "History CSV")->required()->check(CLI::ExistingFile);
  fc->add_option("--horizon,-H", fc_h, "Forecast horizon")->check(CLI::PositiveNumber);
  fc->add_option("--test-start", fc_test,
                 "First test row; prints RMSE(h) from rolling origins instead of forecasts");

  // bench
  auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark on a fixture model");
  BenchConfig bc;
  std::string bench_config, bench_out = "bench-out";
  bool timing = false;
  TimingConfig tc;
  bench->add_option("--config", bench_config, "JSON config; its keys override flags")->check(CLI::ExistingFile);
  bench->add_option("--model", bc.model, "model1, model2, model3 or random-sparse");
  bench->add_option("--replicates,-R", bc.replicates, "Replicates")->check(CLI::PositiveNumber);
  bench->add_option("--length,-T", bc.length, "Series length")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bc.seed, "Master seed");
  bench->add_option("--methods", bc.methods, "svar, msvar, msvar-fixed")->delimiter(',');
  bench->add_option("--threads", bc.threads, "Worker threads (0 = all cores)");
  bench->add_option("--p-grid", bc.svar.p_grid, "Candidate lag orders")->delimiter(',');
  bench->add_option("--q", bc.msvar.q, "FDR level");
  bench->add_option("--mt", bc.svar.half_window, "Smoothing half window");
  bench->add_option("--test-length", bc.test_length, "Forecast evaluation window");
  bench->add_option("--horizon", bc.horizon, "Largest forecast horizon");
  bench->add_option("--out-dir", bench_out, "Output directory");
  bench->add_flag("--timing", timing, "Run the running-time study on random sparse VAR(1) data");
  bench->add_option("--dim", tc.dim, "Dimension for --timing and random-sparse");

  // export-graph
  auto* graph = app.add_subcommand("export-graph", "Directed graph of a model's nonzero coefficients as DOT");
  std::string graph_model, graph_out;
  graph->add_option("--model", graph_model, "Model JSON, report.json or fixture name")->required();
  graph->add_option("--out,-o", graph_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const VarModel model = sim_model == "random-sparse" ? random_sparse_model(sim_dim, sim_density, sim_seed)
                                                          : load_model(sim_model);
      const TimeSeries series = simulate(model, sim_len, sim_burn, sim_seed);
      if (!sim_dump.empty()) write_model_file(sim_dump, model);
      if (sim_out.empty()) {
        write_csv(std::cout, series);
      } else {
        std::ofstream out(sim_out);
        write_csv(out, series);
      }
    } else if (*fit) {
      run_fit(fo);
    } else if (*fc) {
      const VarModel model = load_model(fc_model);
      const TimeSeries data = read_csv_file(fc_data);
      std::cout.precision(10);
      if (fc_test >= 0) {
        const VectorXd rmse = rmse_h(model, data, fc_test, fc_h);
        std::cout << "h,RMSE\n";
        for (Index h = 0; h < rmse.size(); ++h) std::cout << h + 1 << ',' << rmse(h) << '\n';
      } else {
        const MatrixXd f = forecast(model, data.values(), fc_h);
        write_csv(std::cout, TimeSeries(f, data.names()));
      }
    } else if (*bench) {
      fs::create_directories(bench_out);
      const fs::path dir(bench_out);
      bc.msvar.p_grid = bc.svar.p_grid;
      bc.msvar.half_window = bc.svar.half_window;
      bc.dim = tc.dim;
      if (!bench_config.empty()) from_json(read_json(bench_config), bc);
      if (timing) {
        tc.seed = bc.seed;
        tc.replicates = bc.replicates;
        tc.length = bc.length;
        tc.svar = bc.svar;
        tc.msvar = bc.msvar;
        const TimingResult t = run_timing(tc);
        std::ofstream out(dir / "timing.csv");
        out << "K,msVAR_tuned,msVAR_fixed,sVAR,tuned_ratio,sVAR_ratio\n"
            << t.dim << ',' << t.msvar_tuned << ',' << t.msvar_fixed << ',' << t.svar << ',' << t.tuned_ratio()
            << ',' << t.svar_ratio() << '\n';
        std::cout << "K = " << t.dim << ": msVAR-tuned/fixed = " << t.tuned_ratio()
                  << ", sVAR/msVAR-fixed = " << t.svar_ratio() << "\n";
      } else {
        const BenchResult result = run_bench(bc);
        std::ofstream metrics_out(dir / "metrics.csv");
        write_metrics_csv(metrics_out, result);
        if (bc.test_length > 0) {
          std::ofstream rmse_out(dir / "rmse.csv");
          write_rmse_csv(rmse_out, result);
        }
        write_text(dir / "bench.json", nlohmann::json(result).dump(2) + "\n");
        write_text(dir / "graph_truth.dot", export_digraph(result.truth));
        for (const auto& m : result.methods)
          write_text(dir / ("graph_" + m.method + ".dot"), export_weighted_digraph(m.edge_frequency));
        write_metrics_csv(std::cout, result);
        for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";
      }
    } else if (*graph) {
      const std::string dot = export_digraph(load_model(graph_model));
      if (graph_out.empty())
        std::cout << dot;
      else
        write_text(graph_out, dot);
    }
  } catch (const std::exception& e) {
    std::cerr << "svar: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
