#include "svar/fixtures.hpp"

#include <random>

namespace svar {

namespace {

MatrixXd noise_from_precision(const MatrixXd& theta) {
  Eigen::LLT<MatrixXd> llt(theta);
  if (llt.info() != Eigen::Success) throw NumericalError("fixture: noise precision is not positive definite");
  MatrixXd sigma = llt.solve(MatrixXd::Identity(theta.rows(), theta.cols()));
  return 0.5 * (sigma + sigma.transpose());
}

MatrixXd circulant(Index k, double diag, double neighbour) {
  MatrixXd m = MatrixXd::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    m(i, i) = diag;
    m(i, (i + 1) % k) = neighbour;
    m(i, (i + k - 1) % k) = neighbour;
  }
  return m;
}

}  // namespace

VarModel model1() {
  const Index k = 10;
  MatrixXd a(k, k);
  a << 0, 0, 0, 0, 0, 0, 0, 0.3, 0, 0,
       0, 0, 0.1, 0, 0, 0, 0.4, 0, 0, 0.4,
       0, 0.6, 0, 0, 0, 0, 0, 0, 0, 0,
       0, 0.2, 0, 0, 0.5, 0, 0, 0, 0, 0,
       0, 0.3, 0, 0.1, 0, 0, 0.2, 0.1, 0.3, 0.5,
       0.2, 0, 0, 0, 0.4, 0, 0, 0, 0, 0,
       0, 0, 0, 0, 0, 0, 0, 0, 0, 0.6,
       0, 0, 0, 0, 0, 0.6, 0, 0, 0, 0,
       0.2, 0, 0, 0, 0, 0, 0, 0, 0.2, 0,
       0, 0, 0, 0, 0.4, 0, 0, 0, 0, 0;
  const double delta = 0.5;
  MatrixXd theta = MatrixXd::Identity(k, k);
  for (Index j = 0; j < k; ++j) {
    theta(0, j) = delta / static_cast<double>(j + 1);
    theta(j, 0) = theta(0, j);
  }
  return {VectorXd::Zero(k), {a}, noise_from_precision(theta)};
}

VarModel model2() {
  const Index k = 6;
  MatrixXd a(k, k);
  a << 0, 0.50, 0.50, 0.20, 0, 0,
       0, 0, 0.30, 0, 0, 0,
       0, 0.25, 0.50, 0, 0, 0,
       0, 0, 0, 0, 0.33, 0.33,
       0, 0, 0, 0, 0, 0.20,
       0, 0.50, 0, 0, 0.17, 0.33;
  MatrixXd theta(k, k);
  theta << 0.17, 0, 0.25, 0.030, 0, 0,
           0, 1.40, 0.34, 0.25, 0.04, 0.58,
           0.25, 0.34, 0.55, 0.05, 0, 0,
           0.03, 0.25, 0.05, 0.26, 0, 0.42,
           0, 0.04, 0, 0, 1.51, 0.36,
           0, 0.58, 0, 0.42, 0.36, 0.98;
  return {VectorXd::Zero(k), {a}, noise_from_precision(theta)};
}

VarModel model3() {
  const Index k = 6;
  return {VectorXd::Zero(k), {circulant(k, -0.6, 0.4), circulant(k, -0.3, 0.2)},
          noise_from_precision(circulant(k, 1.0, -0.3))};
}

VarModel random_sparse_model(Index k, double density, std::uint64_t seed) {
  require(k >= 1, "random sparse model: K must be positive");
  require(density >= 0 && density <= 1, "random sparse model: density must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> normal;
  MatrixXd a = MatrixXd::Zero(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i)
      if (keep(rng)) a(i, j) = normal(rng);
  const double sigma_max = Eigen::JacobiSVD<MatrixXd>(a).singularValues()(0);
  a /= sigma_max + 0.1;
  return {VectorXd::Zero(k), {a}, MatrixXd::Identity(k, k)};
}

VarModel fixture(const std::string& name, Index k, double density, std::uint64_t seed) {
  if (name == "model1") return model1();
  if (name == "model2") return model2();
  if (name == "model3") return model3();
  if (name == "random-sparse") return random_sparse_model(k, density, seed);
  throw InvalidInput("unknown fixture '" + name + "' (expected model1, model2, model3 or random-sparse)");
}

}  // namespace svar
