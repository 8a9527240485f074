#pragma once

#include "smom/rng.hpp"
#include "smom/vector_ops.hpp"

namespace smom {

/// Deterministic part of the objective seen by the optimizers. Implementations
/// must expose the exact optimum so trajectories can log the optimality gap.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual double smoothness() const = 0;        // gradient Lipschitz constant L
  virtual double strong_convexity() const = 0;  // curvature lower bound mu
  virtual const Vector& optimum() const = 0;
  virtual double optimal_value() const = 0;
};

/// f(x) = 1/2 x^T A x for a symmetric positive definite A with spectrum inside
/// [mu, L]. The optimum is the origin with value 0.
class QuadraticProblem final : public Objective {
 public:
  QuadraticProblem(Matrix matrix, double mu, double L);

  int dimension() const override { return static_cast<int>(matrix_.rows()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double smoothness() const override { return L_; }
  double strong_convexity() const override { return mu_; }
  const Vector& optimum() const override { return optimum_; }
  double optimal_value() const override { return 0.0; }

  const Matrix& matrix() const { return matrix_; }

 private:
  Matrix matrix_;
  double mu_;
  double L_;
  Vector optimum_;
};

/// Random SPD test problem: A = Q^T diag(eigs) Q with Q drawn Haar-like from
/// the QR of a Gaussian matrix, eigenvalues uniform on [mu, L] with the
/// extremes pinned so the declared mu and L are exact. Deterministic in rng.
QuadraticProblem generate_spd(int d, double mu, double L, RngStream rng);

}  // namespace smom
