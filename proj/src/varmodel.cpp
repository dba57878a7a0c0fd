#include "svar/varmodel.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace svar {

VarModel VarModel::zeros(Index k, Index p) {
  VarModel m;
  m.intercept = VectorXd::Zero(k);
  m.coeffs.assign(static_cast<std::size_t>(p), MatrixXd::Zero(k, k));
  m.noise_cov = MatrixXd::Identity(k, k);
  return m;
}

void VarModel::validate() const {
  const Index k = dim();
  require(k >= 1, "var model: empty intercept");
  for (const auto& a : coeffs)
    require(a.rows() == k && a.cols() == k, "var model: coefficient matrix is not K x K");
  require(noise_cov.rows() == k && noise_cov.cols() == k, "var model: noise covariance is not K x K");
  require((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1 + noise_cov.cwiseAbs().maxCoeff()),
          "var model: noise covariance is not symmetric");
}

bool VarModel::operator==(const VarModel& other) const {
  if (dim() != other.dim() || order() != other.order()) return false;
  if (intercept != other.intercept || noise_cov != other.noise_cov) return false;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != other.coeffs[i]) return false;
  return true;
}

MatrixXd companion_matrix(const VarModel& model) {
  const Index k = model.dim();
  const Index p = model.order();
  MatrixXd c = MatrixXd::Zero(k * p, k * p);
  for (Index i = 0; i < p; ++i) c.block(0, i * k, k, k) = model.coeffs[i];
  if (p > 1) c.bottomLeftCorner(k * (p - 1), k * (p - 1)).setIdentity();
  return c;
}

Stability is_stable(const VarModel& model) {
  model.validate();
  if (model.order() == 0) return {true, 0.0};
  const MatrixXd c = companion_matrix(model);
  Eigen::EigenSolver<MatrixXd> es(c, false);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return {radius < 1.0, radius};
}

// ---------------------------------------------------------------- support

SupportMask SupportMask::full(Index k, Index p) {
  SupportMask m;
  m.coeff_support.assign(static_cast<std::size_t>(p), BoolMatrix::Constant(k, k, true));
  m.pair_support = BoolMatrix::Constant(k, k, true);
  return m;
}

SupportMask SupportMask::from_pairs(const BoolMatrix& pairs, Index p) {
  require(pairs.rows() == pairs.cols(), "support: pair matrix must be square");
  SupportMask m;
  m.pair_support = pairs || pairs.transpose();
  m.pair_support.matrix().diagonal().setConstant(true);
  m.coeff_support.assign(static_cast<std::size_t>(p), m.pair_support);
  return m;
}

SupportMask SupportMask::from_coefficients(std::vector<BoolMatrix> coeffs) {
  require(!coeffs.empty(), "support: need at least one lag");
  const Index k = coeffs.front().rows();
  SupportMask m;
  m.pair_support = BoolMatrix::Constant(k, k, false);
  for (const auto& c : coeffs) {
    require(c.rows() == k && c.cols() == k, "support: lag patterns must be K x K");
    m.pair_support = m.pair_support || c || c.transpose();
  }
  m.pair_support.matrix().diagonal().setConstant(true);
  m.coeff_support = std::move(coeffs);
  return m;
}

Index SupportMask::free_count() const {
  Index n = 0;
  for (const auto& c : coeff_support) n += c.count();
  return n;
}

Index SupportMask::pair_count() const {
  return (pair_support.count() - pair_support.rows()) / 2;
}

bool SupportMask::subset_of(const SupportMask& outer) const {
  if (dim() != outer.dim()) return false;
  for (Index k = 0; k < order(); ++k) {
    const bool outer_has = k < outer.order();
    for (Index i = 0; i < dim(); ++i)
      for (Index j = 0; j < dim(); ++j)
        if (coeff_support[k](i, j) && !(outer_has && outer.coeff_support[k](i, j))) return false;
  }
  return true;
}

bool SupportMask::operator==(const SupportMask& other) const {
  if (order() != other.order() || dim() != other.dim()) return false;
  if (!(pair_support == other.pair_support).all()) return false;
  for (Index k = 0; k < order(); ++k)
    if (!(coeff_support[k] == other.coeff_support[k]).all()) return false;
  return true;
}

// ---------------------------------------------------------------- simulation

TimeSeries simulate(const VarModel& model, Index length, Index burn_in, std::uint64_t seed) {
  model.validate();
  require(length >= 1, "simulate: length must be positive");
  require(burn_in >= 0, "simulate: negative burn-in");
  const auto stab = is_stable(model);
  require(stab.stable, "simulate: model is not stable (spectral radius " +
                           std::to_string(stab.spectral_radius) + ")");
  Eigen::LLT<MatrixXd> llt(model.noise_cov);
  if (llt.info() != Eigen::Success) throw InvalidInput("simulate: noise covariance is not positive definite");
  const MatrixXd chol = llt.matrixL();

  const Index k = model.dim();
  const Index p = model.order();
  const Index total = length + burn_in;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  MatrixXd y = MatrixXd::Zero(total, k);
  VectorXd z(k);
  for (Index t = 0; t < total; ++t) {
    for (Index i = 0; i < k; ++i) z(i) = normal(rng);
    VectorXd v = model.intercept + chol * z;
    for (Index lag = 1; lag <= p && lag <= t; ++lag)
      v.noalias() += model.coeffs[lag - 1] * y.row(t - lag).transpose();
    y.row(t) = v.transpose();
  }
  return TimeSeries(y.bottomRows(length));
}

// ---------------------------------------------------------------- likelihood

MatrixXd residuals(const VarModel& model, const MatrixXd& data, Index presample) {
  const Index p = model.order();
  if (presample < 0) presample = p;
  require(presample >= p, "residuals: presample shorter than the lag order");
  require(data.cols() == model.dim(), "residuals: dimension mismatch");
  require(data.rows() > presample, "residuals: need T > p");
  const Index n = data.rows() - presample;
  MatrixXd r = data.bottomRows(n);
  r.rowwise() -= model.intercept.transpose();
  for (Index lag = 1; lag <= p; ++lag)
    r.noalias() -= data.middleRows(presample - lag, n) * model.coeffs[lag - 1].transpose();
  return r;
}

double log_likelihood(const VarModel& model, const TimeSeries& data, Index presample) {
  model.validate();
  const MatrixXd r = residuals(model, data.values(), presample);
  Eigen::LLT<MatrixXd> llt(model.noise_cov);
  if (llt.info() != Eigen::Success) throw NumericalError("log_likelihood: singular noise covariance");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const MatrixXd whitened = llt.matrixL().solve(r.transpose());
  const double n = static_cast<double>(r.rows());
  const double k = static_cast<double>(model.dim());
  return -0.5 * n * (k * std::log(2.0 * std::numbers::pi) + logdet) - 0.5 * whitened.squaredNorm();
}

MatrixXd forecast(const VarModel& model, const MatrixXd& history, Index horizon) {
  model.validate();
  const Index p = model.order();
  const Index k = model.dim();
  require(history.cols() == k, "forecast: dimension mismatch");
  require(history.rows() >= p, "forecast: history shorter than the lag order");
  require(horizon >= 0, "forecast: negative horizon");
  // rows: last p observations followed by the forecasts
  MatrixXd path(p + horizon, k);
  path.topRows(p) = history.bottomRows(p);
  for (Index h = 0; h < horizon; ++h) {
    VectorXd v = model.intercept;
    for (Index lag = 1; lag <= p; ++lag)
      v.noalias() += model.coeffs[lag - 1] * path.row(p + h - lag).transpose();
    path.row(p + h) = v.transpose();
  }
  return path.bottomRows(horizon);
}

// ---------------------------------------------------------------- json

namespace {

nlohmann::json matrix_rows(const MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd rows_matrix(const nlohmann::json& j, Index k, const char* what) {
  require(j.is_array() && static_cast<Index>(j.size()) == k, std::string("model json: ") + what + " must have K rows");
  MatrixXd m(k, k);
  for (Index r = 0; r < k; ++r) {
    require(j[r].is_array() && static_cast<Index>(j[r].size()) == k,
            std::string("model json: ") + what + " must be K x K");
    for (Index c = 0; c < k; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json bool_rows(const BoolMatrix& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  return rows;
}

BoolMatrix rows_bool(const nlohmann::json& j) {
  const Index k = static_cast<Index>(j.size());
  BoolMatrix m(k, k);
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < k; ++c) m(r, c) = j.at(r).at(c).get<int>() != 0;
  return m;
}

}  // namespace

void to_json(nlohmann::json& j, const VarModel& model) {
  j = nlohmann::json::object();
  j["p"] = model.order();
  j["intercept"] = std::vector<double>(model.intercept.data(), model.intercept.data() + model.intercept.size());
  auto coeffs = nlohmann::json::array();
  for (const auto& a : model.coeffs) coeffs.push_back(matrix_rows(a));
  j["coeffs"] = std::move(coeffs);
  j["noise_cov"] = matrix_rows(model.noise_cov);
}

void from_json(const nlohmann::json& j, VarModel& model) {
  const auto intercept = j.at("intercept").get<std::vector<double>>();
  const Index k = static_cast<Index>(intercept.size());
  const Index p = j.at("p").get<Index>();
  const auto& coeffs = j.at("coeffs");
  require(coeffs.is_array() && static_cast<Index>(coeffs.size()) == p, "model json: coeffs must list p matrices");
  model.intercept = Eigen::Map<const VectorXd>(intercept.data(), k);
  model.coeffs.clear();
  for (const auto& a : coeffs) model.coeffs.push_back(rows_matrix(a, k, "coeffs"));
  model.noise_cov = rows_matrix(j.at("noise_cov"), k, "noise_cov");
  model.validate();
}

void to_json(nlohmann::json& j, const SupportMask& mask) {
  j = nlohmann::json::object();
  auto lags = nlohmann::json::array();
  for (const auto& c : mask.coeff_support) lags.push_back(bool_rows(c));
  j["coeff_support"] = std::move(lags);
  j["pair_support"] = bool_rows(mask.pair_support);
}

void from_json(const nlohmann::json& j, SupportMask& mask) {
  mask.coeff_support.clear();
  for (const auto& c : j.at("coeff_support")) mask.coeff_support.push_back(rows_bool(c));
  mask.pair_support = rows_bool(j.at("pair_support"));
}

VarModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model file " + path);
  return nlohmann::json::parse(in).get<VarModel>();
}

void write_model_file(const std::string& path, const VarModel& model) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write model file " + path);
  out << nlohmann::json(model).dump(2) << '\n';
}

}  // namespace svar
