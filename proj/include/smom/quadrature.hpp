#pragma once

#include <functional>

namespace smom {

/// Adaptive Simpson quadrature of f over [a, b] with absolute tolerance tol.
/// Subdivision uses the Richardson error estimate |S2 - S1| / 15.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 52);

}  // namespace smom
