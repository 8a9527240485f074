#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "smom/estimators.hpp"
#include "smom/stats.hpp"

namespace smom {

/// Raised when a decay fit is attempted on points indistinguishable from zero.
struct InsufficientSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BiasVarianceReport {
  MonteCarloReport bias_norm;
  std::vector<MonteCarloReport> coordinate_bias;
  MonteCarloReport second_moment;  // E||agg - E agg||^2
};

/// Monte-Carlo bias and centered second moment of an aggregation rule applied
/// to pure noise. Trials are sharded into fixed sub-streams and merged in
/// shard order, so results do not depend on the executing thread count.
/// Rejects combinations whose second moment provably diverges (a mean-type
/// rule over noise without finite variance, unclipped).
BiasVarianceReport mc_bias_variance(const AggregatorSpec& aggregator,
                                    const NoiseSpec& noise, long long trials,
                                    RngStream rng,
                                    std::optional<double> lambda = std::nullopt,
                                    int threads = 1);

struct BiasDecayFit {
  double slope = 0.0;
  double slope_std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<int> n_used;
  std::vector<double> log_bias;  // aligned with n_used
};

/// Least-squares slope of log|bias| against log n for a smom family with
/// fixed (m, theta) over an n grid (>= 4 points spanning an 8x range).
/// Points whose bias is statistically indistinguishable from zero are
/// dropped; fewer than 3 surviving points raises InsufficientSignalError.
BiasDecayFit bias_decay_fit(int m, double theta, const NoiseSpec& noise,
                            std::span<const int> n_grid, long long trials_per_point,
                            RngStream rng, int threads = 1);

struct TheoryConstants {
  double C = 0.0;
  double D = 0.0;
  double theta = 0.0;
  int n = 0;
};

/// Closed-form bias/variance constants of the smoothed median of means under
/// the per-coordinate tail metadata:
///   C = (1+theta)/theta^2 sqrt(sum M_j^2)
///       + 1/theta^2 sqrt(sum M_j^2 (2^{b_j} B_j / n^{b_j-1})^{2/b_j})
///   D = sum [(M_j/(theta n))^2 + (2^{b_j} B_j/(b_j n^{b_j-1}))^{2/b_j}]
///       + sum (B_j M_j/(theta n^{b_j}))^{2/(b_j+1)}
TheoryConstants theory_constants_CD(double theta, int n,
                                    std::span<const TailConstants> tails);

/// Closed form of integral |t|^alpha (1/4 ^ a^beta/|t|^beta)^k dt for
/// beta k > alpha + 1.
double integral_closed_form(double a, double k, double alpha, double beta);

/// Same integral by adaptive quadrature over the bounded part plus the exact
/// power-law tail; an independent route against integral_closed_form.
double integral_quadrature(double a, double k, double alpha, double beta);

struct HermiteBoundReport {
  double max_ratio = 0.0;
  int argmax_n = 0;
  double argmax_x = 0.0;
};

/// Max over n <= k_max and a dense grid of |H_n(x) e^{-x^2/4}| / sqrt(n!) for
/// probabilists' Hermite polynomials via the three-term recurrence. The bound
/// asserts the ratio stays <= 1; k_max <= 10 keeps n! exact in doubles.
HermiteBoundReport hermite_bound_check(int k_max, double x_min = -30.0,
                                       double x_max = 30.0, double step = 1e-3);

/// KS test of sums of k standard Cauchy draws against the Cauchy CDF with
/// scale null_scale (defaults to k, the correct null).
KsResult convolution_check(int k, long long samples, RngStream rng, int null_scale = 0);

/// Exact C(2m, m) in 64-bit integer arithmetic, valid for m <= 30.
std::uint64_t central_binomial(int m);

}  // namespace smom
