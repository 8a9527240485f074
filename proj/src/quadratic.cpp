#include "smom/quadratic.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace smom {

QuadraticProblem::QuadraticProblem(Matrix matrix, double mu, double L)
    : matrix_(std::move(matrix)), mu_(mu), L_(L) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("QuadraticProblem: matrix must be square, d >= 1");
  }
  if (!(mu_ > 0.0) || L_ < mu_) {
    throw std::invalid_argument("QuadraticProblem: need 0 < mu <= L");
  }
  const double asym = (matrix_ - matrix_.transpose()).norm();
  if (asym > 1e-12 * matrix_.norm()) {
    throw std::invalid_argument("QuadraticProblem: matrix is not symmetric");
  }
  optimum_ = Vector::Zero(matrix_.rows());
}

double QuadraticProblem::value(const Vector& x) const {
  if (x.size() != matrix_.rows()) {
    throw std::invalid_argument("QuadraticProblem::value: dimension mismatch");
  }
  return 0.5 * x.dot(matrix_ * x);
}

Vector QuadraticProblem::gradient(const Vector& x) const {
  if (x.size() != matrix_.rows()) {
    throw std::invalid_argument("QuadraticProblem::gradient: dimension mismatch");
  }
  return matrix_ * x;
}

QuadraticProblem generate_spd(int d, double mu, double L, RngStream rng) {
  if (d < 1) {
    throw std::invalid_argument("generate_spd: d must be >= 1");
  }
  if (!(mu > 0.0) || L < mu) {
    throw std::invalid_argument("generate_spd: need 0 < mu <= L");
  }
  if (d == 1 && mu != L) {
    throw std::invalid_argument("generate_spd: d = 1 cannot pin both mu and L");
  }

  Vector eigs(d);
  eigs[0] = mu;
  if (d >= 2) {
    eigs[d - 1] = L;
  }
  for (int i = 1; i + 1 < d; ++i) {
    eigs[i] = mu + (L - mu) * rng.uniform();
  }

  Matrix gauss(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      gauss(i, j) = rng.gaussian();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix column signs so Q is Haar distributed rather than biased by LAPACK
  // sign conventions.
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) {
      q.col(j) *= -1.0;
    }
  }

  Matrix a = q.transpose() * eigs.asDiagonal() * q;
  a = 0.5 * (a + a.transpose());
  return QuadraticProblem(std::move(a), mu, L);
}

}  // namespace smom
