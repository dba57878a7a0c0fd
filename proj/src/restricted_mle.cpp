#include "svar/restricted_mle.hpp"

#include <algorithm>
#include <cmath>

namespace svar {

double normal_two_sided_p(double t) { return std::erfc(std::abs(t) / std::sqrt(2.0)); }

RestrictedEstimator::RestrictedEstimator(const TimeSeries& data, Index p, Index presample)
    : data_(&data), p_(p), presample_(presample < 0 ? p : presample) {
  require(p >= 1, "restricted fit: lag order must be at least 1");
  require(presample_ >= p, "restricted fit: presample shorter than the lag order");
  require(data.length() > presample_, "restricted fit: need T > p");
  const Index k = data.dim();
  const Index n = data.length() - presample_;
  const Index d = 1 + k * p;
  x_.resize(n, d);
  x_.col(0).setOnes();
  for (Index lag = 1; lag <= p; ++lag)
    x_.middleCols(1 + (lag - 1) * k, k) = data.values().middleRows(presample_ - lag, n);
  y_ = data.values().bottomRows(n);
  gram_ = x_.transpose() * x_;
  cross_ = x_.transpose() * y_;
}

namespace {

// Free regressor columns of every equation, intercept first.
std::vector<std::vector<Index>> free_columns(const SupportMask& support, Index k, Index p) {
  std::vector<std::vector<Index>> cols(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    cols[i].push_back(0);
    for (Index lag = 0; lag < p; ++lag)
      for (Index j = 0; j < k; ++j)
        if (support.coeff_support[lag](i, j)) cols[i].push_back(1 + lag * k + j);
  }
  return cols;
}

struct GlsSystem {
  const MatrixXd& gram;
  const std::vector<std::vector<Index>>& cols;
  std::vector<Index> offsets;
  Index size = 0;

  GlsSystem(const MatrixXd& g, const std::vector<std::vector<Index>>& c) : gram(g), cols(c) {
    for (const auto& s : cols) {
      offsets.push_back(size);
      size += static_cast<Index>(s.size());
    }
  }

  Index equations() const { return static_cast<Index>(cols.size()); }

  // d x K coefficient matrix from the packed free vector
  MatrixXd embed(const VectorXd& v) const {
    MatrixXd b = MatrixXd::Zero(gram.rows(), equations());
    for (Index i = 0; i < equations(); ++i)
      for (std::size_t a = 0; a < cols[i].size(); ++a) b(cols[i][a], i) = v(offsets[i] + static_cast<Index>(a));
    return b;
  }

  VectorXd pack(const MatrixXd& m) const {
    VectorXd v(size);
    for (Index i = 0; i < equations(); ++i)
      for (std::size_t a = 0; a < cols[i].size(); ++a) v(offsets[i] + static_cast<Index>(a)) = m(cols[i][a], i);
    return v;
  }

  VectorXd apply(const VectorXd& v, const MatrixXd& w) const { return pack(gram * embed(v) * w); }

  MatrixXd assemble(const MatrixXd& w) const {
    MatrixXd n(size, size);
    for (Index i = 0; i < equations(); ++i)
      for (Index j = 0; j < equations(); ++j)
        for (std::size_t a = 0; a < cols[i].size(); ++a)
          for (std::size_t b = 0; b < cols[j].size(); ++b)
            n(offsets[i] + static_cast<Index>(a), offsets[j] + static_cast<Index>(b)) =
                w(i, j) * gram(cols[i][a], cols[j][b]);
    return n;
  }
};

MatrixXd submatrix(const MatrixXd& g, const std::vector<Index>& idx) {
  const Index n = static_cast<Index>(idx.size());
  MatrixXd s(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) s(a, b) = g(idx[a], idx[b]);
  return s;
}

// Preconditioned conjugate gradients with the block-diagonal part of the
// system; `x` holds the warm start on entry.
void solve_pcg(const GlsSystem& sys, const MatrixXd& w, const std::vector<Eigen::LLT<MatrixXd>>& blocks,
               const VectorXd& rhs, VectorXd& x) {
  auto precondition = [&](const VectorXd& r) {
    VectorXd z(r.size());
    for (Index i = 0; i < sys.equations(); ++i) {
      const Index len = static_cast<Index>(sys.cols[i].size());
      z.segment(sys.offsets[i], len) = blocks[i].solve(r.segment(sys.offsets[i], len)) / w(i, i);
    }
    return z;
  };
  const double target = 1e-13 * rhs.norm();
  VectorXd r = rhs - sys.apply(x, w);
  if (r.norm() <= target) return;
  VectorXd z = precondition(r);
  VectorXd dir = z;
  double rz = r.dot(z);
  const Index limit = std::max<Index>(200, 4 * sys.size);
  for (Index it = 0; it < limit; ++it) {
    const VectorXd q = sys.apply(dir, w);
    const double alpha = rz / dir.dot(q);
    x += alpha * dir;
    r -= alpha * q;
    if (r.norm() <= target) return;
    z = precondition(r);
    const double rz_next = r.dot(z);
    dir = z + (rz_next / rz) * dir;
    rz = rz_next;
  }
}

MatrixXd residual_covariance(const MatrixXd& y, const MatrixXd& x, const MatrixXd& b) {
  const MatrixXd e = y - x * b;
  return (e.transpose() * e) / static_cast<double>(y.rows());
}

}  // namespace

RestrictedFit RestrictedEstimator::fit(const SupportMask& support, const RestrictedOptions& options) const {
  const Index k = data_->dim();
  require(support.dim() == k && support.order() == p_, "restricted fit: support shape does not match (p, K)");
  require(options.max_iter >= 1, "restricted fit: max_iter must be positive");

  const auto cols = free_columns(support, k, p_);
  const GlsSystem sys(gram_, cols);
  Index widest = 0;
  for (const auto& c : cols) widest = std::max(widest, static_cast<Index>(c.size()));
  require(sample_size() > widest, "restricted fit: need more observations than free parameters per equation");

  std::vector<Eigen::LLT<MatrixXd>> blocks;
  VectorXd beta(sys.size);
  for (Index i = 0; i < k; ++i) {
    const MatrixXd g = submatrix(gram_, cols[i]);
    blocks.emplace_back(g);
    const auto& llt = blocks.back();
    const VectorXd diag = llt.matrixLLT().diagonal();
    if (llt.info() != Eigen::Success || diag.minCoeff() <= 1e-10 * diag.maxCoeff())
      throw NumericalError("restricted fit: design of equation " + std::to_string(i + 1) + " is rank deficient");
    VectorXd rhs(static_cast<Index>(cols[i].size()));
    for (std::size_t a = 0; a < cols[i].size(); ++a) rhs(static_cast<Index>(a)) = cross_(cols[i][a], i);
    beta.segment(sys.offsets[i], rhs.size()) = llt.solve(rhs);
  }

  const bool dense = options.solver == GlsSolver::Dense || (options.solver == GlsSolver::Auto && sys.size <= 500);
  RestrictedFit out;
  out.converged = false;
  MatrixXd sigma = residual_covariance(y_, x_, sys.embed(beta));
  for (int it = 1; it <= options.max_iter; ++it) {
    out.iterations = it;
    Eigen::LLT<MatrixXd> sllt(sigma);
    if (sllt.info() != Eigen::Success) throw NumericalError("restricted fit: residual covariance is singular");
    const MatrixXd w = sllt.solve(MatrixXd::Identity(k, k));
    const VectorXd rhs = sys.pack(cross_ * w);
    VectorXd next = beta;
    if (dense) {
      Eigen::LLT<MatrixXd> nllt(sys.assemble(w));
      if (nllt.info() != Eigen::Success) throw NumericalError("restricted fit: GLS normal equations are singular");
      next = nllt.solve(rhs);
    } else {
      solve_pcg(sys, w, blocks, rhs, next);
    }
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    sigma = residual_covariance(y_, x_, sys.embed(beta));
    if (change < options.tol) {
      out.converged = true;
      break;
    }
  }

  const MatrixXd b = sys.embed(beta);
  VarModel model;
  model.intercept = b.row(0).transpose();
  for (Index lag = 0; lag < p_; ++lag) model.coeffs.push_back(b.middleRows(1 + lag * k, k).transpose());
  model.noise_cov = 0.5 * (sigma + sigma.transpose());
  for (Index lag = 0; lag < p_; ++lag)
    model.coeffs[lag] = support.coeff_support[lag].select(model.coeffs[lag], 0.0);

  out.loglik = log_likelihood(model, *data_, presample_);
  out.sample_size = sample_size();
  out.free_params = support.free_count();

  VectorXd se = VectorXd::Zero(sys.size);
  if (options.std_errors) {
    Eigen::LLT<MatrixXd> sllt(model.noise_cov);
    if (sllt.info() != Eigen::Success) throw NumericalError("restricted fit: residual covariance is singular");
    const MatrixXd w = sllt.solve(MatrixXd::Identity(k, k));
    Eigen::LLT<MatrixXd> nllt(sys.assemble(w));
    if (nllt.info() != Eigen::Success) throw NumericalError("restricted fit: GLS normal equations are singular");
    const MatrixXd cov = nllt.solve(MatrixXd::Identity(sys.size, sys.size));
    se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }

  for (Index i = 0; i < k; ++i) {
    // cols[i] is ordered by (lag, col); emit per (col, lag)
    std::vector<CoefficientStat> row;
    for (std::size_t a = 1; a < cols[i].size(); ++a) {
      const Index c = cols[i][a] - 1;
      CoefficientStat s;
      s.lag = c / k;
      s.row = i;
      s.col = c % k;
      s.estimate = beta(sys.offsets[i] + static_cast<Index>(a));
      s.std_error = se(sys.offsets[i] + static_cast<Index>(a));
      if (s.std_error > 0) {
        s.t_stat = s.estimate / s.std_error;
        s.p_value = normal_two_sided_p(s.t_stat);
      }
      row.push_back(s);
    }
    std::stable_sort(row.begin(), row.end(), [](const CoefficientStat& x, const CoefficientStat& y) {
      return std::tie(x.col, x.lag) < std::tie(y.col, y.lag);
    });
    out.stats.insert(out.stats.end(), row.begin(), row.end());
  }
  out.model = std::move(model);
  out.support = support;
  return out;
}

RestrictedFit fit_restricted(const TimeSeries& data, Index p, const SupportMask& support,
                             const RestrictedOptions& options) {
  return RestrictedEstimator(data, p, options.presample).fit(support, options);
}

double bic(const RestrictedFit& fit, Index length, Index param_count) {
  require(param_count >= 0, "bic: negative parameter count");
  require(length >= 1, "bic: length must be positive");
  return -2.0 * fit.loglik + std::log(static_cast<double>(length)) * static_cast<double>(param_count);
}

}  // namespace svar
