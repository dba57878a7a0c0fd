#include "svar/psc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace svar {

PscSurface psc_from_precision(const HermitianSpectrum& theta) {
  const Index k = theta.dim();
  PscSurface out;
  out.frequencies = theta.frequencies();
  out.summary = MatrixXd::Zero(k, k);
  for (std::size_t n = 0; n < theta.size(); ++n) {
    const MatrixXcd& t = theta[n];
    VectorXd scale(k);
    for (Index i = 0; i < k; ++i) {
      const double d = std::real(t(i, i));
      require(d > 0, "psc: nonpositive diagonal entry in precision matrix at frequency " + std::to_string(n));
      scale(i) = std::sqrt(d);
    }
    MatrixXcd psc = MatrixXcd::Zero(k, k);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) {
        if (i == j) continue;
        psc(i, j) = -t(i, j) / (scale(i) * scale(j));
        out.summary(i, j) = std::max(out.summary(i, j), std::norm(psc(i, j)));
      }
    out.values.push_back(std::move(psc));
  }
  return out;
}

PscSurface psc_by_inversion(const HermitianSpectrum& spectrum) {
  std::vector<MatrixXcd> inv;
  inv.reserve(spectrum.size());
  for (std::size_t n = 0; n < spectrum.size(); ++n) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(spectrum[n], Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo >= 1e12)
      throw NumericalError("psc: spectral matrix at frequency " + std::to_string(spectrum.frequencies()[n]) +
                           " is singular or ill-conditioned; try a larger smoothing window");
    inv.push_back(spectrum[n].inverse());
  }
  return psc_from_precision(HermitianSpectrum(std::move(inv), spectrum.frequencies(), spectrum.window()));
}

namespace {

std::vector<Index> rest_indices(Index k, Index i, Index j) {
  std::vector<Index> rest;
  for (Index m = 0; m < k; ++m)
    if (m != i && m != j) rest.push_back(m);
  return rest;
}

// 2 x 2 Schur complement of the (i, j) block given the remaining series.
Eigen::Matrix2cd residual_block(const MatrixXcd& f, Index i, Index j, const std::vector<Index>& rest) {
  const Index r = static_cast<Index>(rest.size());
  const Index pick[2] = {i, j};
  MatrixXcd frr(r, r), fpr(2, r);
  Eigen::Matrix2cd fpp;
  for (Index a = 0; a < r; ++a) {
    for (Index b = 0; b < r; ++b) frr(a, b) = f(rest[a], rest[b]);
    for (Index c = 0; c < 2; ++c) fpr(c, a) = f(pick[c], rest[a]);
  }
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 2; ++b) fpp(a, b) = f(pick[a], pick[b]);
  Eigen::LDLT<MatrixXcd> ldlt(frr);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().real().minCoeff() <= 1e-14 * ldlt.vectorD().real().maxCoeff())
    throw NumericalError("residual spectrum: singular conditioning block");
  return fpp - fpr * ldlt.solve(fpr.adjoint());
}

}  // namespace

VectorXcd residual_cross_spectrum(const HermitianSpectrum& spectrum, Index i, Index j) {
  const Index k = spectrum.dim();
  require(k >= 3, "residual_cross_spectrum: need K >= 3");
  require(i >= 0 && j >= 0 && i < k && j < k && i != j, "residual_cross_spectrum: bad pair");
  const auto rest = rest_indices(k, i, j);
  VectorXcd out(static_cast<Index>(spectrum.size()));
  for (std::size_t n = 0; n < spectrum.size(); ++n)
    out(static_cast<Index>(n)) = residual_block(spectrum[n], i, j, rest)(0, 1);
  return out;
}

VectorXcd psc_by_partition(const HermitianSpectrum& spectrum, Index i, Index j) {
  const Index k = spectrum.dim();
  require(k >= 3, "psc_by_partition: need K >= 3");
  require(i >= 0 && j >= 0 && i < k && j < k && i != j, "psc_by_partition: bad pair");
  const auto rest = rest_indices(k, i, j);
  VectorXcd out(static_cast<Index>(spectrum.size()));
  for (std::size_t n = 0; n < spectrum.size(); ++n) {
    const auto s = residual_block(spectrum[n], i, j, rest);
    out(static_cast<Index>(n)) = s(0, 1) / std::sqrt(std::real(s(0, 0)) * std::real(s(1, 1)));
  }
  return out;
}

std::vector<std::pair<Index, Index>> rank_pairs(const MatrixXd& summary) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < summary.rows(); ++i)
    for (Index j = i + 1; j < summary.cols(); ++j) pairs.emplace_back(i, j);
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return summary(a.first, a.second) > summary(b.first, b.second);
  });
  return pairs;
}

void write_psc_csv(std::ostream& out, const PscSurface& surface) {
  out << "frequency,i,j,re,im,modulus2\n";
  out.precision(17);
  for (std::size_t n = 0; n < surface.values.size(); ++n) {
    const auto& v = surface.values[n];
    for (Index i = 0; i < v.rows(); ++i)
      for (Index j = i + 1; j < v.cols(); ++j)
        out << surface.frequencies[n] << ',' << i + 1 << ',' << j + 1 << ',' << v(i, j).real() + 0.0 << ','
            << v(i, j).imag() + 0.0 << ',' << std::norm(v(i, j)) << '\n';
  }
}

// ---------------------------------------------------------------- AR link

bool ArInverseSpectrum::entry_vanishes(Index i, Index j, double tol) const {
  return std::all_of(x.begin(), x.end(), [&](const MatrixXd& m) { return std::abs(m(i, j)) <= tol; });
}

ArInverseSpectrum ar_inverse_spectrum(const VarModel& model, const std::vector<double>& frequencies, double tol) {
  model.validate();
  const Index k = model.dim();
  const Index p = model.order();
  Eigen::LLT<MatrixXd> llt(model.noise_cov);
  if (llt.info() != Eigen::Success) throw NumericalError("ar_inverse_spectrum: singular noise covariance");
  const MatrixXd precision = llt.solve(MatrixXd::Identity(k, k));

  std::vector<MatrixXd> lag(static_cast<std::size_t>(p + 1));
  lag[0] = MatrixXd::Identity(k, k);
  for (Index i = 1; i <= p; ++i) lag[i] = -model.coeffs[i - 1];

  ArInverseSpectrum out;
  for (Index shift = 0; shift <= p; ++shift) {
    MatrixXd xk = MatrixXd::Zero(k, k);
    for (Index i = 0; i + shift <= p; ++i) xk.noalias() += lag[i].transpose() * precision * lag[i + shift];
    out.x.push_back(std::move(xk));
  }

  out.psc_zero = BoolMatrix::Constant(k, k, false);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      out.psc_zero(i, j) = i != j && out.entry_vanishes(i, j, tol) && out.entry_vanishes(j, i, tol);

  std::vector<MatrixXcd> mats;
  for (double w : frequencies) {
    MatrixXcd theta = out.x[0].cast<std::complex<double>>();
    for (Index s = 1; s <= p; ++s) {
      const std::complex<double> e = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(s) * w);
      theta += e * out.x[s].cast<std::complex<double>>() + std::conj(e) * out.x[s].transpose().cast<std::complex<double>>();
    }
    mats.push_back(std::move(theta));
  }
  out.theta = HermitianSpectrum(std::move(mats), frequencies, 1);
  return out;
}

MatrixXcd var_spectral_density(const VarModel& model, double frequency) {
  model.validate();
  const Index k = model.dim();
  MatrixXcd a = MatrixXcd::Identity(k, k);
  for (Index s = 1; s <= model.order(); ++s)
    a -= std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(s) * frequency) *
         model.coeffs[s - 1].cast<std::complex<double>>();
  const MatrixXcd transfer = a.inverse();
  return transfer * model.noise_cov.cast<std::complex<double>>() * transfer.adjoint();
}

}  // namespace svar
