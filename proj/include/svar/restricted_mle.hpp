#pragma once

#include "svar/core.hpp"
#include "svar/spectral.hpp"
#include "svar/varmodel.hpp"

namespace svar {

struct CoefficientStat {
  Index lag = 0;  // 0-based: lag 0 is A_1
  Index row = 0;
  Index col = 0;
  double estimate = 0;
  double std_error = 0;
  double t_stat = 0;
  double p_value = 1;
};

struct RestrictedFit {
  VarModel model;  // constrained coefficients are exactly zero
  SupportMask support;
  Index free_params = 0;  // free AR coefficients, intercepts excluded
  std::vector<CoefficientStat> stats;  // one per free coefficient, ordered (row, col, lag)
  double loglik = 0;
  Index sample_size = 0;  // observations entering the likelihood
  bool converged = false;
  int iterations = 0;
};

enum class GlsSolver { Auto, Dense, Iterative };

struct RestrictedOptions {
  Index presample = -1;  // observations conditioned on; defaults to p
  int max_iter = 50;
  double tol = 1e-8;  // max absolute coefficient change between GLS rounds
  bool std_errors = true;
  GlsSolver solver = GlsSolver::Auto;
};

/// Holds the cross products of one (data, p, presample) design so that many
/// supports can be fitted against it.
///
/// Each round of feasible GLS estimates Sigma from the current residuals and
/// solves the normal equations
///   sum_j W_ij G[S_i, S_j] beta_j = (C W)[S_i, i],   W = Sigma^{-1},
/// where G = X'X and C = X'Y for the stacked regressors x_t = (1, Y_{t-1}, ..., Y_{t-p}).
/// The first round uses W = I, i.e. equation-by-equation least squares.
class RestrictedEstimator {
 public:
  RestrictedEstimator(const TimeSeries& data, Index p, Index presample = -1);

  RestrictedFit fit(const SupportMask& support, const RestrictedOptions& options = {}) const;

  Index order() const { return p_; }
  Index presample() const { return presample_; }
  Index sample_size() const { return x_.rows(); }

 private:
  const TimeSeries* data_;
  Index p_;
  Index presample_;
  MatrixXd x_;  // N x (1 + K p)
  MatrixXd y_;  // N x K
  MatrixXd gram_;
  MatrixXd cross_;
};

RestrictedFit fit_restricted(const TimeSeries& data, Index p, const SupportMask& support,
                             const RestrictedOptions& options = {});

/// -2 loglik + log(T) * param_count.
double bic(const RestrictedFit& fit, Index length, Index param_count);

/// Two-sided standard normal tail probability of |t|.
double normal_two_sided_p(double t);

}  // namespace svar
