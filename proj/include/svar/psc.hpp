#pragma once

#include "svar/core.hpp"
#include "svar/varmodel.hpp"

#include <iosfwd>

namespace svar {

/// Partial spectral coherence per frequency and its sup-modulus summary.
struct PscSurface {
  std::vector<MatrixXcd> values;  // PSC_ij at each frequency, zero diagonal
  MatrixXd summary;               // S_ij = max_n |PSC_ij[n]|^2, symmetric
  std::vector<double> frequencies;
};

/// PSC_ij = -Theta_ij / sqrt(Theta_ii Theta_jj).
PscSurface psc_from_precision(const HermitianSpectrum& theta);

/// Inverts every spectral matrix, then psc_from_precision.
PscSurface psc_by_inversion(const HermitianSpectrum& spectrum);

/// Cross spectrum of the residuals of series i and j after removing the
/// linear effect of every other series:
///   f_ij - f_{i,-ij} f_{-ij,-ij}^{-1} f_{-ij,j}.
/// Requires K >= 3.
VectorXcd residual_cross_spectrum(const HermitianSpectrum& spectrum, Index i, Index j);

/// PSC_ij from residual spectra, without inverting the full matrix.
VectorXcd psc_by_partition(const HermitianSpectrum& spectrum, Index i, Index j);

/// Series pairs (i < j) ranked by S_ij descending; ties keep (i, j) order.
std::vector<std::pair<Index, Index>> rank_pairs(const MatrixXd& summary);

/// Long-format CSV: frequency,i,j,re,im,modulus2 (1-based indices, i < j).
void write_psc_csv(std::ostream& out, const PscSurface& surface);

/// Inverse spectrum of a VAR process as a trigonometric matrix polynomial,
///   Theta(w) = X_0 + sum_k ( e^{-i 2 pi k w} X_k + e^{i 2 pi k w} X_k^T ),
/// with X_k = sum_i B_i^T Sigma^{-1} B_{i+k}, B_0 = I, B_i = -A_i.
struct ArInverseSpectrum {
  HermitianSpectrum theta;      // evaluated on the requested grid
  std::vector<MatrixXd> x;      // X_0 .. X_p
  BoolMatrix psc_zero;          // (X_k)_ij = (X_k)_ji = 0 for every k

  /// (X_k)_ij == 0 for every k, the one-sided reading of the condition.
  bool entry_vanishes(Index i, Index j, double tol = 1e-10) const;
};

ArInverseSpectrum ar_inverse_spectrum(const VarModel& model, const std::vector<double>& frequencies,
                                      double tol = 1e-10);

/// Spectral density A(e^{-i 2 pi w})^{-1} Sigma A(e^{-i 2 pi w})^{-H} of a VAR
/// process in the periodogram scaling.
MatrixXcd var_spectral_density(const VarModel& model, double frequency);

}  // namespace svar
