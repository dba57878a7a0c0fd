#pragma once

#include "svar/core.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <optional>
#include <string>

namespace svar {

/// Penalized Whittle likelihood over M Hermitian precision matrices:
///
///   sum_n L [ -log det Theta[n] + tr(f[n] Theta[n]) ]
///     + lambda sum_{i != j} sqrt( sum_n |Theta_ij[n]|^2 )
///
/// solved by scaled ADMM on the split Theta = Z.

struct AdmmConfig {
  double rho = 2.0;
  int max_iter = 2000;
  double tol_abs = 1e-6;
  double tol_rel = 1e-4;
};

struct GlassoSolution {
  HermitianSpectrum theta;  // positive definite iterate, used for likelihoods
  HermitianSpectrum z;      // carries the exact zeros
  BoolMatrix support;       // group-level nonzeros of z, diagonal true
  std::vector<double> objective_trace;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  double lambda = 0;
  int window = 1;
  int iterations = 0;
  bool converged = false;

  Index pair_count() const { return (support.count() - support.rows()) / 2; }
};

/// Groups whose l2 norm over frequencies is at or below this are treated as zero.
inline constexpr double kGroupZeroTolerance = 1e-8;

/// sum_n L [ -log det Theta[n] + tr(f[n] Theta[n]) ]. Throws NumericalError if
/// some Theta[n] is not positive definite.
double whittle_neg_loglik(const HermitianSpectrum& theta, const HermitianSpectrum& spectrum, int window);

/// lambda sum over ordered pairs i != j of the l2 norm across frequencies.
double group_penalty(const HermitianSpectrum& theta, double lambda);

/// Whittle term plus group penalty.
double penalized_objective(const HermitianSpectrum& theta, const HermitianSpectrum& spectrum,
                           int window, double lambda);

/// Per frequency, the minimizer of
///   L[-log det T + tr(f T)] + rho/2 ||T - Z + U||_F^2
/// through the eigendecomposition of rho (Z - U) - L f.
HermitianSpectrum theta_update(const HermitianSpectrum& z, const HermitianSpectrum& u,
                               const HermitianSpectrum& spectrum, double rho, int window);

/// Group soft-threshold of Theta + U off the diagonal with threshold
/// lambda / rho; the diagonal copies Theta.
HermitianSpectrum z_update(const HermitianSpectrum& theta, const HermitianSpectrum& u, double lambda,
                           double rho);

/// (1 - mu / ||a||)_+ a, the proximal map of mu ||.||_2.
template <typename Derived>
typename Derived::PlainObject group_soft_threshold(const Eigen::MatrixBase<Derived>& a,
                                                   typename Derived::RealScalar mu) {
  using Real = typename Derived::RealScalar;
  const Real norm = a.norm();
  if (norm <= mu) return Derived::PlainObject::Zero(a.rows(), a.cols());
  return (Real(1) - mu / norm) * a;
}

/// Largest |L f_ij[.]|_2 over pairs; every lambda at or above this yields a
/// diagonal solution.
double lambda_max(const HermitianSpectrum& spectrum);

/// Group-level support of an iterate (diagonal forced true).
BoolMatrix group_support(const HermitianSpectrum& z, double tol = kGroupZeroTolerance);

/// Observer called after each theta update with (iteration, theta, z, u).
using AdmmObserver = std::function<void(int, const HermitianSpectrum&, const HermitianSpectrum&,
                                        const HermitianSpectrum&)>;

GlassoSolution admm_solve(const HermitianSpectrum& spectrum, double lambda, const AdmmConfig& config = {},
                          const AdmmObserver& observer = {});

enum class Criterion { Aic, Ebic };

Criterion parse_criterion(const std::string& name);
std::string to_string(Criterion c);

/// Likelihood term plus the AIC or eBIC complexity charge for `solution`.
double information_criterion(const GlassoSolution& solution, const HermitianSpectrum& spectrum,
                             Criterion criterion, double gamma);

/// Number of nonzero entries summed over frequencies: M (K + 2 * active pairs).
Index nonzero_entry_count(const GlassoSolution& solution);

struct CriterionPoint {
  double lambda = 0;
  double value = 0;
  Index pairs = 0;
  int iterations = 0;
  bool converged = false;
};

struct TuneResult {
  GlassoSolution best;
  std::vector<CriterionPoint> trace;
};

TuneResult tune(const HermitianSpectrum& spectrum, const std::vector<double>& lambdas, Criterion criterion,
                double gamma, const AdmmConfig& config = {});

/// `count` values geometrically spaced from `top` down to `top * ratio`.
std::vector<double> log_grid(double top, double ratio, int count);
/// `count` equally spaced interior points of (0, top).
std::vector<double> linear_grid(double top, int count);

/// Solver settings as read from a JSON block.
struct GlassoConfig {
  std::optional<double> lambda;             // fixed value
  std::vector<double> lambda_grid;          // empty = default grid
  bool relative = false;                    // lambda values are fractions of lambda_max
  Criterion criterion = Criterion::Ebic;
  double gamma = 0.5;
  AdmmConfig admm;
};

void to_json(nlohmann::json& j, const GlassoConfig& c);
void from_json(const nlohmann::json& j, GlassoConfig& c);

}  // namespace svar
