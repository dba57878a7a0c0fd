#include "oracles.hpp"
#include "svar/bench.hpp"
#include "svar/fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sstream>

using namespace svar;

namespace {

VarModel scalar_ar(double a) {
  VarModel m = VarModel::zeros(1, 1);
  m.coeffs[0](0, 0) = a;
  return m;
}

}  // namespace

TEST_CASE("metrics on a hand ensemble") {
  const VarModel truth = scalar_ar(0.5);
  const std::vector<VarModel> est{scalar_ar(0.4), scalar_ar(0.8)};
  const Metrics m = metrics(est, truth);
  CHECK(m.bias2 == doctest::Approx(0.01));     // mean 0.6
  CHECK(m.variance == doctest::Approx(0.04));  // (0.04 + 0.04) / 2
  CHECK(m.mse == doctest::Approx(0.05));
}

TEST_CASE("mse is the mean squared coefficient error") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  const VarModel truth = model3();
  std::vector<VarModel> est;
  double direct = 0;
  for (int r = 0; r < 7; ++r) {
    VarModel e = VarModel::zeros(6, r % 3 == 0 ? 1 : 3);  // ragged orders get zero padded
    for (auto& a : e.coeffs)
      for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) a(i, j) = n(rng);
    for (Index s = 0; s < 3; ++s) {
      const MatrixXd ta = s < truth.order() ? truth.coeffs[s] : MatrixXd::Zero(6, 6);
      const MatrixXd ea = s < e.order() ? e.coeffs[s] : MatrixXd::Zero(6, 6);
      direct += (ea - ta).squaredNorm() / 7.0;
    }
    est.push_back(e);
  }
  const Metrics m = metrics(est, truth);
  CHECK(m.mse == doctest::Approx(direct).epsilon(1e-12));
  CHECK(m.bias2 + m.variance == doctest::Approx(m.mse).epsilon(1e-14));
}

TEST_CASE("edge rates") {
  const VarModel truth = model1();
  const Metrics perfect = metrics({truth}, truth);
  CHECK(perfect.tpr == 1.0);
  CHECK(perfect.fpr == 0.0);
  CHECK(perfect.mse == 0.0);
  VarModel dense = VarModel::zeros(10, 1);
  dense.coeffs[0].setConstant(0.01);
  const Metrics all = metrics({dense}, truth);
  CHECK(all.tpr == 1.0);
  CHECK(all.fpr == 1.0);
  const Metrics none = metrics({VarModel::zeros(10, 1)}, truth);
  CHECK(none.tpr == 0.0);
  CHECK(none.fpr == 0.0);
  const Metrics half = metrics({dense, VarModel::zeros(10, 1)}, truth);
  CHECK(half.tpr == 0.5);
  CHECK(half.fpr == 0.5);
}

TEST_CASE("rmse hand example") {
  MatrixXd v(5, 1);
  v << 0, 0, 1, 2, 3;
  const TimeSeries y(v);
  const VarModel zero = VarModel::zeros(1, 1);
  const VectorXd r = rmse_h(zero, y, 3, 2);
  CHECK(r(0) == doctest::Approx(std::sqrt(6.5)));
  CHECK(r(1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(rmse_h(zero, y, 3, 3), InvalidInput);
  CHECK_THROWS_AS(rmse_h(zero, y, 3, 0), InvalidInput);
}

TEST_CASE("rmse of the generating recursion without noise is zero") {
  MatrixXd v(30, 1);
  v(0, 0) = 1.0;
  for (Index t = 1; t < 30; ++t) v(t, 0) = 0.9 * v(t - 1, 0);
  const VectorXd r = rmse_h(scalar_ar(0.9), TimeSeries(v), 10, 4);
  CHECK(r.maxCoeff() < 1e-14);
  const VectorXd c = rmse_h(VarModel::zeros(1, 1), TimeSeries(MatrixXd::Constant(20, 1, -2.0)), 5, 3);
  CHECK((c.array() - 2.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("digraph of a zero model has nodes only") {
  oracle::DotGraph g;
  REQUIRE(oracle::parse_dot(export_digraph(VarModel::zeros(3, 2)), g));
  CHECK(g.nodes == std::set<std::string>{"Y1", "Y2", "Y3"});
  CHECK(g.edges.empty());
}

TEST_CASE("digraph of the first fixture") {
  const VarModel m = model1();
  const std::string dot = export_digraph(m);
  oracle::DotGraph g;
  REQUIRE(oracle::parse_dot(dot, g));
  CHECK(g.nodes.size() == 10);
  CHECK(g.edges.size() == 19);
  CHECK(g.edges.count({"Y5", "Y10"}) == 1);
  CHECK(g.edges.count({"Y10", "Y5"}) == 1);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 10; ++j) {
      const std::pair<std::string, std::string> e{"Y" + std::to_string(i + 1), "Y" + std::to_string(j + 1)};
      CHECK(g.edges.count(e) == (i != j && m.coeffs[0](i, j) != 0.0 ? 1u : 0u));
    }
  CHECK(export_digraph(m) == dot);
}

TEST_CASE("digraph follows a relabelling") {
  const VarModel m = model3();
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 5, 0, 1, 4, 2;
  VarModel moved = m;
  for (auto& a : moved.coeffs) a = perm * a * perm.transpose();
  moved.noise_cov = perm * m.noise_cov * perm.transpose();
  std::vector<std::string> names{"a", "b", "c", "d", "e", "f"}, moved_names(6);
  for (Index i = 0; i < 6; ++i) moved_names[perm.indices()(i)] = names[i];
  oracle::DotGraph g1, g2;
  REQUIRE(oracle::parse_dot(export_digraph(m, names), g1));
  REQUIRE(oracle::parse_dot(export_digraph(moved, moved_names), g2));
  CHECK(g1.edges == g2.edges);
  CHECK(g1.nodes == g2.nodes);
}

TEST_CASE("quoted names and weights") {
  MatrixXd f = MatrixXd::Zero(2, 2);
  f(0, 1) = 0.25;
  oracle::DotGraph g;
  const std::string dot = export_weighted_digraph(f, {"gdp growth", "rate"});
  REQUIRE(oracle::parse_dot(dot, g));
  CHECK(g.edges.size() == 1);
  CHECK(g.weight.at({"gdp growth", "rate"}) == 0.25);
  CHECK_THROWS_AS(export_digraph(VarModel::zeros(2, 1), {"a"}), InvalidInput);
}

TEST_CASE("replicate seeds differ") {
  std::set<std::uint64_t> seen;
  for (Index r = 0; r < 1000; ++r) seen.insert(replicate_seed(1, r));
  CHECK(seen.size() == 1000);
  CHECK(replicate_seed(1, 0) != replicate_seed(2, 0));
}

TEST_CASE("bench smoke run") {
  BenchConfig c;
  c.model = "model3";
  c.replicates = 2;
  c.length = 120;
  c.test_length = 24;
  c.horizon = 3;
  c.threads = 2;
  c.keep_reports = true;
  const BenchResult a = run_bench(c);
  CHECK(a.errors.empty());
  CHECK(a.methods.size() == 3);
  CHECK(a.at("svar").failures == 0);
  CHECK(a.at("msvar").rmse.size() == 3);
  CHECK(a.at("msvar").baseline_rmse.allFinite());
  CHECK(a.reports.size() == 2);
  CHECK(a.reports[0].size() == 2);
  CHECK_THROWS_AS(a.at("lasso"), InvalidInput);

  c.threads = 1;
  const BenchResult b = run_bench(c);
  for (const auto& name : {"svar", "msvar", "msvar-stage1"}) {
    CHECK(a.at(name).metrics.mse == b.at(name).metrics.mse);
    CHECK(a.at(name).edge_frequency == b.at(name).edge_frequency);
    CHECK(a.at(name).rmse == b.at(name).rmse);
  }

  std::ostringstream csv;
  write_metrics_csv(csv, a);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "model,method,Bias2,Variance,MSE,TPR,FPR,seconds,failures");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
  const nlohmann::json j = a;
  CHECK(j.at("replicates") == 2);
}

TEST_CASE("bench config json") {
  const auto c = nlohmann::json::parse(R"({"model":"random-sparse","dim":8,"replicates":3,"length":80,
      "methods":["msvar-fixed"],"q":0.05,"p_grid":[2,1],"glasso":{"lambda":0.3}})")
                     .get<BenchConfig>();
  CHECK(c.model == "random-sparse");
  CHECK(c.dim == 8);
  CHECK(c.methods == std::vector<std::string>{"msvar-fixed"});
  CHECK(c.msvar.q == 0.05);
  CHECK(c.msvar.p_grid == std::vector<Index>{2, 1});
  CHECK(c.svar.p_grid == std::vector<Index>{2, 1});
  CHECK(c.msvar.glasso.lambda == 0.3);
  CHECK_THROWS(nlohmann::json::parse(R"({"methods":["ols"]})").get<BenchConfig>());
}
