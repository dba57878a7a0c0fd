#include "oracles.hpp"
#include "svar/spectral.hpp"
#include "svar/tsglasso.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace svar;
using cd = std::complex<double>;

namespace {

HermitianSpectrum single(const MatrixXcd& m, int window = 1) {
  return HermitianSpectrum({m}, {0.25}, window);
}

HermitianSpectrum white_noise_spectrum(Index k, Index t, std::uint64_t seed, int half_window) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  MatrixXd y(t, k);
  for (Index i = 0; i < t; ++i)
    for (Index j = 0; j < k; ++j) y(i, j) = n(rng);
  return estimate_spectrum(TimeSeries(y), half_window);
}

// Sample spectrum of a series with some cross-dependence, for solver tests.
HermitianSpectrum mixed_spectrum(Index k, Index t, std::uint64_t seed, int half_window) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  MatrixXd y = MatrixXd::Zero(t, k);
  for (Index i = 1; i < t; ++i)
    for (Index j = 0; j < k; ++j) y(i, j) = 0.5 * y(i - 1, (j + 1) % k) + n(rng);
  return estimate_spectrum(TimeSeries(y), half_window);
}

AdmmConfig tight() {
  AdmmConfig c;
  c.tol_abs = 1e-11;
  c.tol_rel = 1e-11;
  c.max_iter = 200000;
  return c;
}

}  // namespace

TEST_CASE("whittle objective examples") {
  MatrixXcd f(1, 1);
  f(0, 0) = 2.0;
  MatrixXcd t(1, 1);
  t(0, 0) = 1.0;
  CHECK(whittle_neg_loglik(single(t, 3), single(f, 3), 3) == doctest::Approx(6.0));

  std::mt19937_64 rng(1);
  const HermitianSpectrum spec = oracle::random_spectrum(3, 4, rng, 5);
  std::vector<MatrixXcd> inv;
  double expected = 0;
  for (const auto& m : spec.matrices()) {
    inv.push_back(m.inverse());
    expected += 5 * (oracle::logdet_eigen(m) + 3);
  }
  const HermitianSpectrum theta(inv, spec.frequencies(), 5);
  CHECK(whittle_neg_loglik(theta, spec, 5) == doctest::Approx(expected).epsilon(1e-12));

  const HermitianSpectrum other = oracle::random_spectrum(3, 4, rng, 5);
  double brute = 0;
  for (std::size_t n = 0; n < 4; ++n)
    brute += 5 * (-oracle::logdet_eigen(other[n]) + (spec[n] * other[n]).trace().real());
  CHECK(whittle_neg_loglik(other, spec, 5) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("whittle objective rejects indefinite precision") {
  MatrixXcd t = MatrixXcd::Identity(2, 2);
  t(0, 0) = -1.0;
  CHECK_THROWS_AS(whittle_neg_loglik(single(t), single(MatrixXcd::Identity(2, 2)), 1), NumericalError);
}

TEST_CASE("group penalty examples") {
  MatrixXcd diag = MatrixXcd::Identity(3, 3);
  CHECK(group_penalty(single(diag), 2.0) == 0.0);
  MatrixXcd a = MatrixXcd::Identity(2, 2), b = MatrixXcd::Identity(2, 2);
  a(1, 0) = 3.0;
  b(1, 0) = cd(0, 4);
  const HermitianSpectrum th({a, b}, {0.1, 0.2}, 1);
  CHECK(group_penalty(th, 1.0) == doctest::Approx(10.0));
  CHECK(group_penalty(th, 0.0) == 0.0);
  CHECK_THROWS_AS(group_penalty(th, -1.0), InvalidInput);
}

TEST_CASE("theta update scalar root") {
  MatrixXcd f(1, 1);
  f(0, 0) = 1.0;
  const auto spec = single(f);
  const auto zero = HermitianSpectrum::zeros_like(spec);
  const auto th = theta_update(zero, zero, spec, 1.0, 1);
  CHECK(std::abs(th[0](0, 0) - (std::sqrt(5.0) - 1) / 2) < 1e-12);
}

TEST_CASE("theta update fixed point at the identity") {
  const int window = 4;
  const double rho = 4.0;
  const auto spec = single(MatrixXcd::Identity(3, 3), window);
  const auto z = single(MatrixXcd::Identity(3, 3), window);
  const auto u = HermitianSpectrum::zeros_like(spec);
  const auto th = theta_update(z, u, spec, rho, window);
  CHECK((th[0] - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("theta update satisfies the stationarity condition") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int window = 1 + trial % 7;
    const double rho = 0.1 + 0.5 * trial;
    const auto spec = oracle::random_spectrum(4, 3, rng, window);
    const auto z = oracle::random_spectrum(4, 3, rng, window);
    auto u = oracle::random_spectrum(4, 3, rng, window);
    const auto th = theta_update(z, u, spec, rho, window);
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(max_asymmetry(th[n]) == 0.0);
      CHECK(oracle::min_eigen(th[n]) > 0);
      const MatrixXcd kkt = window * (-th[n].inverse() + spec[n]) + rho * (th[n] - z[n] + u[n]);
      CHECK(kkt.norm() < 1e-8);
    }
  }
}

TEST_CASE("z update examples") {
  MatrixXcd t = MatrixXcd::Identity(2, 2);
  t(1, 0) = cd(3, 4);
  const auto th = single(t);
  const auto u = HermitianSpectrum::zeros_like(th);
  const auto z = z_update(th, u, 1.0, 1.0);
  CHECK(std::abs(z[0](1, 0) - cd(2.4, 3.2)) < 1e-14);
  CHECK(std::abs(z[0](0, 1) - cd(2.4, -3.2)) < 1e-14);
  CHECK(z[0](0, 0) == t(0, 0));

  const auto killed = z_update(th, u, 5.0, 1.0);
  CHECK(killed[0](1, 0) == cd(0, 0));

  std::mt19937_64 rng(4);
  const auto a = oracle::random_spectrum(3, 2, rng);
  const auto b = oracle::random_spectrum(3, 2, rng);
  const auto id = z_update(a, b, 0.0, 2.0);
  for (std::size_t n = 0; n < 2; ++n)
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) {
        const cd expected = i == j ? a[n](i, i) : a[n](i, j) + b[n](i, j);
        CHECK(std::abs(id[n](i, j) - expected) < 1e-14);
      }
}

TEST_CASE("z update zeroes whole groups across frequencies") {
  MatrixXcd a = MatrixXcd::Identity(2, 2), b = MatrixXcd::Identity(2, 2);
  a(1, 0) = 0.3;
  b(1, 0) = cd(0, 0.4);  // group norm 0.5
  const HermitianSpectrum th({a, b}, {0.1, 0.2}, 1);
  const auto z = z_update(th, HermitianSpectrum::zeros_like(th), 0.5, 1.0);
  CHECK(z[0](1, 0) == cd(0, 0));
  CHECK(z[1](1, 0) == cd(0, 0));
}

TEST_CASE("group soft threshold is the exact prox minimizer") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> unif(0.05, 3.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Index m = 1 + trial % 3;
    VectorXcd a(m);
    for (Index i = 0; i < m; ++i) a(i) = cd(n(rng), n(rng));
    const double lambda = unif(rng), rho = unif(rng);
    const VectorXcd z = group_soft_threshold(a, lambda / rho);
    const double fz = oracle::prox_objective(z, a, lambda, rho);
    VectorXcd random(m);
    for (Index i = 0; i < m; ++i) random(i) = cd(n(rng), n(rng));
    // starts away from the kink at zero, where coordinate search can stall
    for (const VectorXcd& start : {VectorXcd(a), random, VectorXcd(2.0 * a)}) {
      const VectorXcd best = oracle::compass_minimize(start, a, lambda, rho);
      CHECK(fz <= oracle::prox_objective(best, a, lambda, rho) + 1e-6);
      CHECK((best - z).norm() < 1e-3);
    }
  }
}

TEST_CASE("lambda zero recovers the inverse spectrum") {
  const auto spec = mixed_spectrum(4, 256, 6, 3);
  const auto sol = admm_solve(spec, 0.0, tight());
  CHECK(sol.converged);
  for (std::size_t n = 0; n < spec.size(); ++n)
    CHECK((sol.theta[n] * spec[n] - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(sol.support.count() == 16);
}

TEST_CASE("lambda at lambda_max gives a diagonal solution") {
  const auto spec = mixed_spectrum(5, 200, 7, 3);
  const double top = lambda_max(spec);
  const auto sol = admm_solve(spec, top);
  CHECK(sol.support.count() == 5);
  CHECK(sol.pair_count() == 0);
  const auto below = admm_solve(spec, 0.9 * top);
  CHECK(below.pair_count() > 0);
}

TEST_CASE("invariants hold at every iteration") {
  const auto spec = mixed_spectrum(4, 200, 8, 2);
  const double lambda = 0.3 * lambda_max(spec);
  const AdmmConfig config;
  int calls = 0;
  double worst_kkt = 0;
  bool hermitian = true, pd = true;
  const auto sol = admm_solve(spec, lambda, config, [&](int, const auto& th, const auto& z, const auto& u) {
    ++calls;
    for (std::size_t n = 0; n < spec.size(); ++n) {
      hermitian = hermitian && max_asymmetry(th[n]) == 0.0 && max_asymmetry(z[n]) == 0.0 && max_asymmetry(u[n]) == 0.0;
      pd = pd && oracle::min_eigen(th[n]) > 0;
      const MatrixXcd kkt = spec.window() * (-th[n].inverse() + spec[n]) + config.rho * (th[n] - z[n] + u[n]);
      worst_kkt = std::max(worst_kkt, kkt.norm());
    }
  });
  CHECK(calls == sol.iterations);
  CHECK(hermitian);
  CHECK(pd);
  CHECK(worst_kkt < 1e-8);
  CHECK(sol.converged);
  CHECK((sol.support == sol.support.transpose()).all());
  CHECK(sol.support.matrix().diagonal().all());
  CHECK(sol.objective_trace.size() == static_cast<std::size_t>(sol.iterations));
  CHECK(sol.primal_residuals.size() == static_cast<std::size_t>(sol.iterations));
}

TEST_CASE("objective at the solution") {
  const auto spec = mixed_spectrum(4, 300, 9, 2);
  const double lambda = 0.2 * lambda_max(spec);
  const auto sol = admm_solve(spec, lambda, tight());
  REQUIRE(sol.converged);
  const double at_theta = penalized_objective(sol.theta, spec, spec.window(), lambda);
  const double at_z = penalized_objective(sol.z, spec, spec.window(), lambda);
  CHECK(std::abs(at_theta - at_z) < 1e-6 * std::abs(at_theta));
  std::vector<MatrixXcd> diag;
  for (const auto& m : spec.matrices()) diag.push_back(m.diagonal().real().cwiseInverse().cast<cd>().asDiagonal());
  const HermitianSpectrum diagonal(diag, spec.frequencies(), spec.window());
  CHECK(at_z <= penalized_objective(diagonal, spec, spec.window(), lambda) + 1e-9);
}

TEST_CASE("group support reads exact zeros off Z") {
  const auto spec = mixed_spectrum(5, 300, 10, 2);
  const auto sol = admm_solve(spec, 0.4 * lambda_max(spec));
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) {
      if (i == j) continue;
      double sq = 0;
      for (const auto& m : sol.z.matrices()) sq += std::norm(m(i, j));
      CHECK(sol.support(i, j) == (std::sqrt(sq) > kGroupZeroTolerance));
    }
}

TEST_CASE("independent blocks never connect") {
  std::mt19937_64 rng(11);
  const Index m = 3;
  std::vector<MatrixXcd> full, left, right;
  std::vector<double> freqs;
  for (Index n = 0; n < m; ++n) {
    const MatrixXcd a = oracle::random_hermitian_pd(2, rng);
    const MatrixXcd b = oracle::random_hermitian_pd(3, rng);
    MatrixXcd f = MatrixXcd::Zero(5, 5);
    f.topLeftCorner(2, 2) = a;
    f.bottomRightCorner(3, 3) = b;
    full.push_back(f);
    left.push_back(a);
    right.push_back(b);
    freqs.push_back(0.1 * static_cast<double>(n + 1));
  }
  const HermitianSpectrum whole(full, freqs, 4), sa(left, freqs, 4), sb(right, freqs, 4);
  for (double rel : {0.0, 0.05, 0.2, 0.5}) {
    const double lambda = rel * lambda_max(whole);
    const auto sol = admm_solve(whole, lambda, tight());
    for (Index i = 0; i < 2; ++i)
      for (Index j = 2; j < 5; ++j) CHECK_FALSE(sol.support(i, j));
    const auto a = admm_solve(sa, lambda, tight());
    const auto b = admm_solve(sb, lambda, tight());
    for (Index n = 0; n < m; ++n) {
      CHECK((sol.theta[n].topLeftCorner(2, 2) - a.theta[n]).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((sol.theta[n].bottomRightCorner(3, 3) - b.theta[n]).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("non-convergence is flagged, not thrown") {
  const auto spec = mixed_spectrum(4, 200, 12, 2);
  AdmmConfig c;
  c.max_iter = 2;
  const auto sol = admm_solve(spec, 0.1 * lambda_max(spec), c);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);
  CHECK(sol.primal_residuals.size() == 2);
}

TEST_CASE("information criteria") {
  const auto spec = mixed_spectrum(4, 200, 13, 2);
  const auto sol = admm_solve(spec, 0.3 * lambda_max(spec));
  const double lik = whittle_neg_loglik(sol.theta, spec, spec.window());
  const Index per = 4 + 2 * sol.pair_count();
  const double e = static_cast<double>(per * static_cast<Index>(spec.size()));
  CHECK(nonzero_entry_count(sol) == per * static_cast<Index>(spec.size()));
  CHECK(information_criterion(sol, spec, Criterion::Aic, 0.5) == doctest::Approx(lik + 2 * e));
  const double classical_bic = lik + std::log(static_cast<double>(spec.window())) * e;
  CHECK(information_criterion(sol, spec, Criterion::Ebic, 0.0) == doctest::Approx(classical_bic).epsilon(1e-14));
  CHECK(information_criterion(sol, spec, Criterion::Ebic, 0.5) ==
        doctest::Approx(classical_bic + 2 * e * std::log(4.0)));
}

TEST_CASE("tune") {
  const auto spec = mixed_spectrum(4, 200, 14, 2);
  SUBCASE("single lambda") {
    for (auto c : {Criterion::Aic, Criterion::Ebic}) {
      const auto r = tune(spec, {0.37}, c, 0.5);
      CHECK(r.best.lambda == 0.37);
      CHECK(r.trace.size() == 1);
    }
  }
  SUBCASE("returns the minimizer of its trace") {
    const auto grid = log_grid(lambda_max(spec), 0.01, 8);
    const auto r = tune(spec, grid, Criterion::Ebic, 0.5);
    REQUIRE(r.trace.size() == 8);
    auto best = std::min_element(r.trace.begin(), r.trace.end(),
                                 [](const auto& a, const auto& b) { return a.value < b.value; });
    CHECK(r.best.lambda == best->lambda);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(tune(spec, {}, Criterion::Aic, 0.5), InvalidInput);
    CHECK_THROWS_AS(tune(spec, {0.1}, Criterion::Ebic, 1.5), InvalidInput);
  }
}

TEST_CASE("ebic picks the diagonal graph on independent white noise") {
  int diagonal = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto spec = white_noise_spectrum(5, 2048, 100 + r, default_half_window(5));
    const auto grid = log_grid(lambda_max(spec), 0.05, 10);
    const auto res = tune(spec, grid, Criterion::Ebic, 0.5);
    if (res.best.pair_count() == 0) ++diagonal;
  }
  CHECK(diagonal >= 45);
}

TEST_CASE("grids") {
  const auto lin = linear_grid(1.0, 20);
  REQUIRE(lin.size() == 20);
  CHECK(lin.front() > 0);
  CHECK(lin.back() < 1);
  for (std::size_t i = 1; i < lin.size(); ++i) CHECK(lin[i] - lin[i - 1] == doctest::Approx(1.0 / 21));
  const auto lg = log_grid(10.0, 0.01, 5);
  CHECK(lg.front() == doctest::Approx(10.0));
  CHECK(lg.back() == doctest::Approx(0.1));
}

TEST_CASE("solver config json") {
  auto j = nlohmann::json::parse(R"({"lambda_grid":[0.1,0.2],"rho":3,"max_iter":50,"tol_abs":1e-7,
                                     "tol_rel":1e-5,"criterion":"aic","gamma":0.25,"relative":true})");
  const auto c = j.get<GlassoConfig>();
  CHECK(c.lambda_grid == std::vector<double>{0.1, 0.2});
  CHECK(c.admm.rho == 3);
  CHECK(c.admm.max_iter == 50);
  CHECK(c.criterion == Criterion::Aic);
  CHECK(c.gamma == 0.25);
  CHECK(c.relative);
  CHECK_FALSE(c.lambda.has_value());
  const auto back = nlohmann::json(c).get<GlassoConfig>();
  CHECK(back.lambda_grid == c.lambda_grid);
  CHECK(back.admm.tol_abs == c.admm.tol_abs);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"criterion":"bic"})").get<GlassoConfig>(), InvalidInput);
}
