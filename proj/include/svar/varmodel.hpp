#pragma once

#include "svar/core.hpp"
#include "svar/spectral.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>

namespace svar {

/// Y_t = a + A_1 Y_{t-1} + ... + A_p Y_{t-p} + u_t,  u_t ~ N(0, noise_cov).
struct VarModel {
  VectorXd intercept;
  std::vector<MatrixXd> coeffs;
  MatrixXd noise_cov;

  Index order() const { return static_cast<Index>(coeffs.size()); }
  Index dim() const { return intercept.size(); }

  /// Zero intercept and coefficients, identity noise.
  static VarModel zeros(Index k, Index p);

  /// Throws InvalidInput on inconsistent shapes or a non-symmetric noise_cov.
  void validate() const;

  bool operator==(const VarModel& other) const;
};

/// Kp x Kp companion matrix of the lag polynomial.
MatrixXd companion_matrix(const VarModel& model);

struct Stability {
  bool stable = false;
  double spectral_radius = 0;
};

Stability is_stable(const VarModel& model);

/// Which coefficients may be nonzero during estimation. pair_support is over
/// unordered series pairs; its diagonal is always true.
struct SupportMask {
  std::vector<BoolMatrix> coeff_support;  // p matrices, K x K
  BoolMatrix pair_support;                // K x K, symmetric

  Index order() const { return static_cast<Index>(coeff_support.size()); }
  Index dim() const { return pair_support.rows(); }

  static SupportMask full(Index k, Index p);
  /// Frees A_k(i,j) and A_k(j,i) for every lag whenever pair (i,j) is present.
  static SupportMask from_pairs(const BoolMatrix& pairs, Index p);
  /// Explicit coefficient pattern; pair_support is derived from it.
  static SupportMask from_coefficients(std::vector<BoolMatrix> coeffs);

  Index free_count() const;
  Index pair_count() const;  // off-diagonal unordered pairs present
  /// Every coefficient free here is also free in `outer`.
  bool subset_of(const SupportMask& outer) const;

  bool operator==(const SupportMask& other) const;
};

/// Noise is drawn through the Cholesky factor of noise_cov from a
/// std::mt19937_64 keyed on `seed`; the recursion starts from zero.
TimeSeries simulate(const VarModel& model, Index length, Index burn_in, std::uint64_t seed);

/// Residuals r_t = Y_t - a - sum A_i Y_{t-i} for t = presample .. T-1 (rows).
/// presample defaults to the model order.
MatrixXd residuals(const VarModel& model, const MatrixXd& data, Index presample = -1);

/// Conditional Gaussian log-likelihood given the first `presample`
/// observations (defaults to p).
double log_likelihood(const VarModel& model, const TimeSeries& data, Index presample = -1);

/// Iterated conditional-mean forecasts for steps 1..h (rows of the result).
MatrixXd forecast(const VarModel& model, const MatrixXd& history, Index horizon);

void to_json(nlohmann::json& j, const VarModel& model);
void from_json(const nlohmann::json& j, VarModel& model);
void to_json(nlohmann::json& j, const SupportMask& mask);
void from_json(const nlohmann::json& j, SupportMask& mask);

VarModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const VarModel& model);

}  // namespace svar
