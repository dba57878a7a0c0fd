#include "svar/tsglasso.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace svar {

namespace {

double hermitian_logdet(const MatrixXcd& m) {
  Eigen::LLT<MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
  double acc = 0;
  for (Index i = 0; i < m.rows(); ++i) acc += std::log(std::real(llt.matrixLLT()(i, i)));
  return 2.0 * acc;
}

// Re tr(A B) for Hermitian A, B: sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij).
double trace_product(const MatrixXcd& a, const MatrixXcd& b) {
  return std::real((a.array() * b.array().conjugate()).sum());
}

}  // namespace

double whittle_neg_loglik(const HermitianSpectrum& theta, const HermitianSpectrum& spectrum, int window) {
  require(theta.same_shape(spectrum), "whittle: shape mismatch");
  double acc = 0;
  for (std::size_t n = 0; n < theta.size(); ++n) {
    double logdet = 0;
    try {
      logdet = hermitian_logdet(theta[n]);
    } catch (const NumericalError&) {
      throw NumericalError("whittle: Theta[" + std::to_string(n) + "] is not positive definite");
    }
    acc += window * (-logdet + trace_product(spectrum[n], theta[n]));
  }
  return acc;
}

double group_penalty(const HermitianSpectrum& theta, double lambda) {
  require(lambda >= 0, "group_penalty: lambda must be non-negative");
  const Index k = theta.dim();
  double acc = 0;
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      if (i == j) continue;
      double sq = 0;
      for (const auto& m : theta.matrices()) sq += std::norm(m(i, j));
      acc += std::sqrt(sq);
    }
  }
  return lambda * acc;
}

double penalized_objective(const HermitianSpectrum& theta, const HermitianSpectrum& spectrum, int window,
                           double lambda) {
  return whittle_neg_loglik(theta, spectrum, window) + group_penalty(theta, lambda);
}

HermitianSpectrum theta_update(const HermitianSpectrum& z, const HermitianSpectrum& u,
                               const HermitianSpectrum& spectrum, double rho, int window) {
  require(rho > 0, "theta_update: rho must be positive");
  require(z.same_shape(u) && z.same_shape(spectrum), "theta_update: shape mismatch");
  const double l = static_cast<double>(window);
  auto out = HermitianSpectrum::zeros_like(spectrum);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es;
  for (std::size_t n = 0; n < spectrum.size(); ++n) {
    const MatrixXcd c = rho * (z[n] - u[n]) - l * spectrum[n];
    if (!c.allFinite()) throw NumericalError("theta_update: non-finite input");
    es.compute(c);
    if (es.info() != Eigen::Success) throw NumericalError("theta_update: eigendecomposition failed");
    const VectorXd& ev = es.eigenvalues();
    VectorXd updated(ev.size());
    for (Index j = 0; j < ev.size(); ++j) {
      const double root = std::sqrt(ev(j) * ev(j) + 4.0 * rho * l);
      // both forms are the positive root of rho x^2 - c x - L = 0
      updated(j) = ev(j) >= 0 ? (ev(j) + root) / (2.0 * rho) : 2.0 * l / (root - ev(j));
    }
    const MatrixXcd& v = es.eigenvectors();
    out.set(n, v * updated.asDiagonal() * v.adjoint());
  }
  return out;
}

HermitianSpectrum z_update(const HermitianSpectrum& theta, const HermitianSpectrum& u, double lambda,
                           double rho) {
  require(rho > 0, "z_update: rho must be positive");
  require(lambda >= 0, "z_update: lambda must be non-negative");
  require(theta.same_shape(u), "z_update: shape mismatch");
  const Index k = theta.dim();
  const std::size_t m = theta.size();
  std::vector<MatrixXcd> out(m, MatrixXcd::Zero(k, k));
  VectorXcd group(static_cast<Index>(m));
  for (Index i = 0; i < k; ++i) {
    for (std::size_t n = 0; n < m; ++n) out[n](i, i) = theta[n](i, i);
    for (Index j = 0; j < i; ++j) {
      for (std::size_t n = 0; n < m; ++n) group(static_cast<Index>(n)) = theta[n](i, j) + u[n](i, j);
      const VectorXcd shrunk = group_soft_threshold(group, lambda / rho);
      for (std::size_t n = 0; n < m; ++n) out[n](i, j) = shrunk(static_cast<Index>(n));
    }
  }
  return HermitianSpectrum(std::move(out), theta.frequencies(), theta.window());
}

double lambda_max(const HermitianSpectrum& spectrum) {
  const Index k = spectrum.dim();
  double best = 0;
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < i; ++j) {
      double sq = 0;
      for (const auto& m : spectrum.matrices()) sq += std::norm(m(i, j));
      best = std::max(best, spectrum.window() * std::sqrt(sq));
    }
  }
  return best;
}

BoolMatrix group_support(const HermitianSpectrum& z, double tol) {
  const Index k = z.dim();
  BoolMatrix s = BoolMatrix::Constant(k, k, false);
  for (Index i = 0; i < k; ++i) {
    s(i, i) = true;
    for (Index j = 0; j < i; ++j) {
      double sq = 0;
      for (const auto& m : z.matrices()) sq += std::norm(m(i, j));
      s(i, j) = s(j, i) = std::sqrt(sq) > tol;
    }
  }
  return s;
}

GlassoSolution admm_solve(const HermitianSpectrum& spectrum, double lambda, const AdmmConfig& config,
                          const AdmmObserver& observer) {
  require(lambda >= 0, "admm_solve: lambda must be non-negative");
  require(config.rho > 0, "admm_solve: rho must be positive");
  require(config.max_iter >= 1, "admm_solve: max_iter must be positive");
  require(spectrum.size() >= 1, "admm_solve: empty spectrum");
  const Index k = spectrum.dim();
  const int window = spectrum.window();

  // start from the inverse of the diagonal part of the spectrum
  std::vector<MatrixXcd> init(spectrum.size(), MatrixXcd::Zero(k, k));
  for (std::size_t n = 0; n < spectrum.size(); ++n)
    for (Index i = 0; i < k; ++i) {
      const double d = std::real(spectrum[n](i, i));
      init[n](i, i) = d > 0 ? 1.0 / d : 1.0;
    }
  HermitianSpectrum z(std::move(init), spectrum.frequencies(), window);
  HermitianSpectrum u = HermitianSpectrum::zeros_like(spectrum);
  HermitianSpectrum theta = z;

  GlassoSolution sol;
  sol.lambda = lambda;
  sol.window = window;
  for (int it = 1; it <= config.max_iter; ++it) {
    theta = theta_update(z, u, spectrum, config.rho, window);
    if (observer) observer(it, theta, z, u);
    HermitianSpectrum z_next = z_update(theta, u, lambda, config.rho);

    std::vector<MatrixXcd> u_next(spectrum.size());
    double primal_sq = 0, dual_sq = 0;
    for (std::size_t n = 0; n < spectrum.size(); ++n) {
      const MatrixXcd gap = theta[n] - z_next[n];
      u_next[n] = u[n] + gap;
      primal_sq += gap.squaredNorm();
      dual_sq += (z_next[n] - z[n]).squaredNorm();
    }
    u = HermitianSpectrum(std::move(u_next), spectrum.frequencies(), window);
    z = std::move(z_next);

    const double primal = std::sqrt(primal_sq);
    const double dual = config.rho * std::sqrt(dual_sq);
    sol.primal_residuals.push_back(primal);
    sol.dual_residuals.push_back(dual);
    sol.objective_trace.push_back(penalized_objective(theta, spectrum, window, lambda));
    sol.iterations = it;

    const double eps_pri = config.tol_abs + config.tol_rel * std::max(frobenius_norm(theta), frobenius_norm(z));
    const double eps_dual = config.tol_abs + config.tol_rel * config.rho * frobenius_norm(u);
    if (primal <= eps_pri && dual <= eps_dual) {
      sol.converged = true;
      break;
    }
  }
  sol.support = group_support(z);
  sol.theta = std::move(theta);
  sol.z = std::move(z);
  return sol;
}

Criterion parse_criterion(const std::string& name) {
  if (name == "aic" || name == "AIC") return Criterion::Aic;
  if (name == "ebic" || name == "eBIC" || name == "EBIC") return Criterion::Ebic;
  throw InvalidInput("unknown criterion '" + name + "' (expected aic or ebic)");
}

std::string to_string(Criterion c) { return c == Criterion::Aic ? "aic" : "ebic"; }

Index nonzero_entry_count(const GlassoSolution& solution) {
  const Index k = solution.support.rows();
  const Index per_frequency = k + 2 * solution.pair_count();
  return per_frequency * static_cast<Index>(solution.theta.size());
}

double information_criterion(const GlassoSolution& solution, const HermitianSpectrum& spectrum,
                             Criterion criterion, double gamma) {
  const double fit = whittle_neg_loglik(solution.theta, spectrum, solution.window);
  const double entries = static_cast<double>(nonzero_entry_count(solution));
  if (criterion == Criterion::Aic) return fit + 2.0 * entries;
  const double k = static_cast<double>(spectrum.dim());
  return fit + std::log(static_cast<double>(solution.window)) * entries + 4.0 * entries * gamma * std::log(k);
}

TuneResult tune(const HermitianSpectrum& spectrum, const std::vector<double>& lambdas, Criterion criterion,
                double gamma, const AdmmConfig& config) {
  require(!lambdas.empty(), "tune: empty lambda grid");
  require(gamma >= 0 && gamma <= 1, "tune: gamma must lie in [0, 1]");
  TuneResult result;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    GlassoSolution sol = admm_solve(spectrum, lambda, config);
    const double value = information_criterion(sol, spectrum, criterion, gamma);
    result.trace.push_back({lambda, value, sol.pair_count(), sol.iterations, sol.converged});
    if (value < best || result.trace.size() == 1) {
      best = value;
      result.best = std::move(sol);
    }
  }
  return result;
}

std::vector<double> log_grid(double top, double ratio, int count) {
  require(top > 0 && ratio > 0 && ratio < 1 && count >= 1, "log_grid: invalid arguments");
  std::vector<double> grid;
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid.push_back(top * std::pow(ratio, frac));
  }
  return grid;
}

std::vector<double> linear_grid(double top, int count) {
  require(top > 0 && count >= 1, "linear_grid: invalid arguments");
  std::vector<double> grid;
  for (int i = 1; i <= count; ++i) grid.push_back(top * i / (count + 1.0));
  return grid;
}

void to_json(nlohmann::json& j, const GlassoConfig& c) {
  j = nlohmann::json::object();
  if (c.lambda) j["lambda"] = *c.lambda;
  if (!c.lambda_grid.empty()) j["lambda_grid"] = c.lambda_grid;
  j["rho"] = c.admm.rho;
  j["max_iter"] = c.admm.max_iter;
  j["tol_abs"] = c.admm.tol_abs;
  j["tol_rel"] = c.admm.tol_rel;
  j["relative"] = c.relative;
  j["criterion"] = to_string(c.criterion);
  j["gamma"] = c.gamma;
}

void from_json(const nlohmann::json& j, GlassoConfig& c) {
  if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
  if (j.contains("lambda_grid")) c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  if (j.contains("rho")) c.admm.rho = j.at("rho").get<double>();
  if (j.contains("max_iter")) c.admm.max_iter = j.at("max_iter").get<int>();
  if (j.contains("tol_abs")) c.admm.tol_abs = j.at("tol_abs").get<double>();
  if (j.contains("tol_rel")) c.admm.tol_rel = j.at("tol_rel").get<double>();
  if (j.contains("relative")) c.relative = j.at("relative").get<bool>();
  if (j.contains("criterion")) c.criterion = parse_criterion(j.at("criterion").get<std::string>());
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
}

}  // namespace svar
