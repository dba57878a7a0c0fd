#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace svar {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using MatrixXcd = Matrix<std::complex<double>>;
using VectorXcd = Vector<std::complex<double>>;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical step fails (singular system, non-PD matrix, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

/// Largest elementwise |X - X^H|.
template <typename Derived>
typename Derived::RealScalar max_asymmetry(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0;
  return (x - x.adjoint()).cwiseAbs().maxCoeff();
}

/// Rebuilds `x` from its lower triangle so that x == x^H holds bitwise.
/// The diagonal of a complex matrix is made real.
template <typename Derived>
void make_hermitian(Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.rows();
  for (Index j = 0; j < n; ++j) {
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
      x(j, j) = Scalar(std::real(x(j, j)), 0);
    }
    for (Index i = j + 1; i < n; ++i) {
      x(j, i) = Eigen::numext::conj(x(i, j));
    }
  }
}

template <typename Derived>
typename Derived::PlainObject hermitian_copy(const Eigen::MatrixBase<Derived>& x) {
  typename Derived::PlainObject out = x;
  make_hermitian(out);
  return out;
}

/// An ordered set of M Hermitian K x K matrices indexed by scaled frequency.
///
/// Houses sample spectra as well as the ADMM iterates. Every stored matrix is
/// exactly Hermitian: matrices are rebuilt from their lower triangle on entry.
template <typename Real>
class BasicHermitianSpectrum {
 public:
  using Scalar = std::complex<Real>;
  using MatrixType = Matrix<Scalar>;

  BasicHermitianSpectrum() = default;

  BasicHermitianSpectrum(std::vector<MatrixType> matrices, std::vector<Real> frequencies,
                         int window)
      : matrices_(std::move(matrices)), frequencies_(std::move(frequencies)), window_(window) {
    require(matrices_.size() == frequencies_.size(),
            "spectrum: matrix count and frequency count differ");
    require(window_ >= 1, "spectrum: window must be positive");
    for (auto& m : matrices_) {
      require(m.rows() == m.cols(), "spectrum: matrices must be square");
      require(m.rows() == matrices_.front().rows(), "spectrum: matrices must share a dimension");
      make_hermitian(m);
    }
  }

  /// M zero matrices of dimension K sharing the frequency grid of `like`.
  static BasicHermitianSpectrum zeros_like(const BasicHermitianSpectrum& like) {
    std::vector<MatrixType> m(like.size(), MatrixType::Zero(like.dim(), like.dim()));
    return BasicHermitianSpectrum(std::move(m), like.frequencies_, like.window_);
  }

  Index dim() const { return matrices_.empty() ? 0 : matrices_.front().rows(); }
  std::size_t size() const { return matrices_.size(); }
  int window() const { return window_; }

  const MatrixType& operator[](std::size_t n) const { return matrices_[n]; }
  const std::vector<MatrixType>& matrices() const { return matrices_; }
  const std::vector<Real>& frequencies() const { return frequencies_; }

  void set(std::size_t n, MatrixType value) {
    require(value.rows() == dim() && value.cols() == dim(), "spectrum: dimension mismatch");
    make_hermitian(value);
    matrices_[n] = std::move(value);
  }

  bool same_shape(const BasicHermitianSpectrum& other) const {
    return size() == other.size() && dim() == other.dim();
  }

 private:
  std::vector<MatrixType> matrices_;
  std::vector<Real> frequencies_;
  int window_ = 1;
};

using HermitianSpectrum = BasicHermitianSpectrum<double>;

/// Frobenius norm aggregated over every frequency.
template <typename Real>
Real frobenius_norm(const BasicHermitianSpectrum<Real>& s) {
  Real acc = 0;
  for (const auto& m : s.matrices()) acc += m.squaredNorm();
  return std::sqrt(acc);
}

template <typename Real>
Real frobenius_distance(const BasicHermitianSpectrum<Real>& a, const BasicHermitianSpectrum<Real>& b) {
  require(a.same_shape(b), "spectrum: shape mismatch");
  Real acc = 0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += (a[n] - b[n]).squaredNorm();
  return std::sqrt(acc);
}

}  // namespace svar
