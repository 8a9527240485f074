#pragma once

#include <Eigen/Core>
#include <span>

namespace smom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Projects x onto the Euclidean ball of radius lambda:
/// clip(x, lambda) = min{1, lambda/||x||} x, with clip(0, lambda) = 0.
/// Inputs must be finite and lambda > 0.
Vector clip(const Vector& x, double lambda);

/// Component-wise median: coordinate j of the result is the (m+1)-th order
/// statistic of {samples[i][j]} for an odd sample count 2m+1.
Vector coordinate_median(std::span<const Vector> samples);

/// Arithmetic mean of a non-empty sample set.
Vector mean(std::span<const Vector> samples);

}  // namespace smom
