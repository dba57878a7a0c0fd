#include "oracles.hpp"
#include "svar/psc.hpp"
#include "svar/spectral.hpp"
#include "svar/varmodel.hpp"

#include <doctest.h>

#include <sstream>

using namespace svar;
using cd = std::complex<double>;

namespace {

HermitianSpectrum one(const MatrixXcd& m) { return HermitianSpectrum({m}, {0.1}, 1); }

// A(w)^H Sigma^{-1} A(w) with A(w) = I - sum_s A_s e^{-i 2 pi s w}.
MatrixXcd transfer_precision(const VarModel& model, double w) {
  const Index k = model.dim();
  MatrixXcd a = MatrixXcd::Identity(k, k);
  for (Index s = 1; s <= model.order(); ++s)
    a -= std::exp(cd(0, -2 * std::numbers::pi * static_cast<double>(s) * w)) * model.coeffs[s - 1].cast<cd>();
  const MatrixXcd w_inv = model.noise_cov.inverse().cast<cd>();
  return a.adjoint() * w_inv * a;
}

VarModel random_stable_var(Index k, Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  VarModel v = VarModel::zeros(k, p);
  for (auto& a : v.coeffs)
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) a(i, j) = 0.2 * n(rng);
  v.noise_cov = oracle::random_spd(k, rng);
  return v;
}

}  // namespace

TEST_CASE("psc hand example") {
  MatrixXcd t(2, 2);
  t << 4.0, -1.0, -1.0, 1.0;
  const PscSurface s = psc_from_precision(one(t));
  CHECK(s.values[0](0, 1) == cd(0.5, 0));
  CHECK(s.values[0](1, 0) == cd(0.5, 0));
  CHECK(s.values[0](0, 0) == cd(0, 0));
  CHECK(s.summary(0, 1) == doctest::Approx(0.25));
  CHECK(s.summary(1, 0) == doctest::Approx(0.25));
  CHECK(s.summary(0, 0) == 0.0);
}

TEST_CASE("psc is invariant to diagonal rescaling of the precision") {
  std::mt19937_64 rng(1);
  const MatrixXcd t = oracle::random_hermitian_pd(4, rng);
  VectorXd d(4);
  d << 0.5, 2.0, 3.0, 7.0;
  const MatrixXcd scaled = d.cast<cd>().asDiagonal() * t * d.cast<cd>().asDiagonal();
  const auto a = psc_from_precision(one(t));
  const auto b = psc_from_precision(one(scaled));
  CHECK((a.values[0] - b.values[0]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("inversion route equals psc of the inverse") {
  std::mt19937_64 rng(2);
  const auto spec = oracle::random_spectrum(5, 4, rng, 3);
  std::vector<MatrixXcd> inv;
  for (const auto& m : spec.matrices()) inv.push_back(m.inverse());
  const auto a = psc_by_inversion(spec);
  const auto b = psc_from_precision(HermitianSpectrum(inv, spec.frequencies(), 3));
  for (std::size_t n = 0; n < spec.size(); ++n) CHECK(a.values[n] == b.values[n]);
  CHECK(a.summary == b.summary);
  CHECK(a.frequencies == spec.frequencies());
}

TEST_CASE("two series psc is the coherency") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXcd f = oracle::random_hermitian_pd(2, rng);
    const auto s = psc_by_inversion(one(f));
    const cd coherency = f(0, 1) / std::sqrt(f(0, 0).real() * f(1, 1).real());
    CHECK(std::abs(s.values[0](0, 1) - coherency) < 1e-12);
  }
}

TEST_CASE("partition route agrees with inversion") {
  std::mt19937_64 rng(4);
  for (Index k : {3, 4, 5}) {
    const auto spec = oracle::random_spectrum(k, 6, rng);
    const auto inv = psc_by_inversion(spec);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) {
        if (i == j) continue;
        const VectorXcd part = psc_by_partition(spec, i, j);
        for (std::size_t n = 0; n < spec.size(); ++n)
          CHECK(std::abs(part(static_cast<Index>(n)) - inv.values[n](i, j)) < 1e-10);
      }
  }
  const auto two = oracle::random_spectrum(2, 2, rng);
  CHECK_THROWS_AS(psc_by_partition(two, 0, 1), InvalidInput);
  const auto three = oracle::random_spectrum(3, 2, rng);
  CHECK_THROWS_AS(psc_by_partition(three, 1, 1), InvalidInput);
}

TEST_CASE("psc modulus is at most one and the summary is symmetric") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = psc_by_inversion(oracle::random_spectrum(6, 5, rng));
    for (const auto& v : s.values) CHECK(v.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK((s.summary - s.summary.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("permuting series permutes psc") {
  std::mt19937_64 rng(6);
  const auto spec = oracle::random_spectrum(4, 3, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.indices() << 2, 0, 3, 1;
  std::vector<MatrixXcd> moved;
  for (const auto& m : spec.matrices()) moved.push_back(perm * m * perm.transpose());
  const auto a = psc_by_inversion(spec);
  const auto b = psc_by_inversion(HermitianSpectrum(moved, spec.frequencies(), 1));
  for (std::size_t n = 0; n < spec.size(); ++n)
    CHECK((perm * a.values[n] * perm.transpose() - b.values[n]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank pairs") {
  MatrixXd s = MatrixXd::Zero(4, 4);
  s(0, 3) = s(3, 0) = 0.9;
  s(1, 2) = s(2, 1) = 0.5;
  s(0, 1) = s(1, 0) = 0.5;
  const auto r = rank_pairs(s);
  REQUIRE(r.size() == 6);
  CHECK(r[0] == std::pair<Index, Index>{0, 3});
  CHECK(r[1] == std::pair<Index, Index>{0, 1});  // tie keeps (i, j) order
  CHECK(r[2] == std::pair<Index, Index>{1, 2});
  CHECK(r[3] == std::pair<Index, Index>{0, 2});
}

TEST_CASE("psc csv layout") {
  MatrixXcd t(3, 3);
  t << 4, -1, 0, -1, 1, 0, 0, 0, 1;
  std::ostringstream out;
  write_psc_csv(out, psc_from_precision(one(t)));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "frequency,i,j,re,im,modulus2");
  std::getline(in, line);
  CHECK(line == "0.10000000000000001,1,2,0.5,0,0.25");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("ill-conditioned spectra are rejected") {
  MatrixXcd f = MatrixXcd::Identity(3, 3);
  f(2, 2) = 1e-14;
  CHECK_THROWS_AS(psc_by_inversion(one(f)), NumericalError);
  MatrixXcd rank1 = MatrixXcd::Ones(3, 3);
  CHECK_THROWS_AS(psc_by_inversion(one(rank1)), NumericalError);
}

TEST_CASE("inverse spectrum of white noise is constant") {
  VarModel m = VarModel::zeros(3, 2);
  m.noise_cov << 2, 0.5, 0, 0.5, 1, 0, 0, 0, 1;
  const auto r = ar_inverse_spectrum(m, {0.05, 0.2, 0.45});
  REQUIRE(r.x.size() == 3);
  CHECK((r.x[0] - m.noise_cov.inverse()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.x[1].isZero());
  CHECK(r.x[2].isZero());
  CHECK_FALSE(r.psc_zero(0, 1));
  CHECK(r.psc_zero(0, 2));
  CHECK(r.psc_zero(1, 2));
}

TEST_CASE("inverse spectrum matches the transfer function") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const VarModel m = random_stable_var(3, 2, rng);
    std::vector<double> grid;
    for (int n = 1; n < 10; ++n) grid.push_back(0.05 * n);
    const auto r = ar_inverse_spectrum(m, grid);
    for (std::size_t n = 0; n < grid.size(); ++n) {
      CHECK((r.theta[n] - transfer_precision(m, grid[n])).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((r.theta[n] * var_spectral_density(m, grid[n]) - MatrixXcd::Identity(m.dim(), m.dim()))
                .cwiseAbs()
                .maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("sample psc ranks the coupled pair first") {
  VarModel m = VarModel::zeros(4, 1);
  m.coeffs[0] << 0.3, 0.4, 0, 0, 0.4, 0.3, 0, 0, 0, 0, 0.3, 0, 0, 0, 0, 0.3;
  int first = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const TimeSeries y = simulate(m, 1000, 200, 50 + r);
    const auto s = psc_by_inversion(estimate_spectrum(y, 10));
    if (rank_pairs(s.summary).front() == std::pair<Index, Index>{0, 1}) ++first;
  }
  CHECK(first >= 19);
}
