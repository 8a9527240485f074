#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace smom {

/// Fixed-point iteration failed to settle; not expected for valid inputs.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-iteration stepsizes gamma_k and clipping levels lambda_k over a horizon
/// of K iterations. For the accelerated method, sstm_a > 0 carries the
/// stepsize parameter a and smoothness holds the L it was built against.
struct Schedule {
  int horizon = 0;
  double delta = 1.0;
  std::function<double(int)> gamma;
  std::function<double(int)> lambda;
  double sstm_a = 0.0;
  double smoothness = 0.0;

  static Schedule constant(int horizon, double gamma, double lambda);
};

/// alpha_k for the accelerated sequence: alpha_0 = 0, alpha_k = (k+1)/(2aL).
double sstm_alpha(int k, double a, double L);

/// A_k in closed form: A_k = k (k+3) / (4aL), consistent with the recurrence
/// A_{k+1} = A_k + alpha_{k+1}.
double sstm_big_a(int k, double a, double L);

/// Solves x = max(2, c / ln(x)^p) by damped iteration from x = 2.
double solve_log_fixed_point(double c, double p);

/// Constant-stepsize schedule for the convex regime:
/// gamma = min{1/(160 L A), R/(208 sigma sqrt(K A)), R/(160 b A), R/(1600 b (K+1))}
/// with A = ln(4(K+1)/delta); terms with sigma = 0 or b = 0 drop out.
/// lambda = R / (40 gamma A).
Schedule schedule_sgd_convex(double L, double R, double sigma, double b, int K,
                             double delta);

/// Quasi-strongly-convex schedule with exponentially decaying clip levels.
/// gamma = min{1/(400 L A), ln(B_K)/(mu(K+1)), ln(C_K)/(mu(1+K/2)), 2 ln(D)/(mu(K+1))}
/// where B_K, C_K, D solve their implicit defining equations, and
/// lambda_k = exp(-gamma mu (1 + k/2)) R / (120 gamma A).
Schedule schedule_sgd_strongly_convex(double L, double mu, double R, double sigma,
                                      double b, int K, double delta);

/// Accelerated schedule: a = max{97200 ln^2(4K/delta),
/// 1800 sigma (K+1) sqrt(K) sqrt(ln(4K/delta)) / (L R), 4 b (K+2)^2 / (15 L R),
/// 60 b (K+2) ln(4K/delta) / (L R)} and lambda_k = R / (30 alpha_{k+1} ln(4K/delta)).
Schedule schedule_sstm_convex(double L, double R, double sigma, double b, int K,
                              double delta);

/// One restart stage: run K iterations of the accelerated method with
/// parameter a and clip levels lambda_k = R_target / (30 alpha_{k+1} log_factor).
struct RestartStage {
  int K = 0;
  double R_prev = 0.0;  // starting radius R_{t-1}
  double R_target = 0.0;  // R_t
  double epsilon = 0.0;   // stage accuracy target eps_t = mu R_{t-1}^2 / 4
  double a = 0.0;
  double bias_budget = 0.0;  // largest admissible estimator bias at this stage
  double log_factor = 0.0;   // ln(4 K_t tau / delta)
};

/// Restart ladder for the strongly convex regime: tau = ceil(log2(mu R^2 / (2 eps)))
/// stages with halved squared-radius targets.
struct RestartLadder {
  int tau = 0;
  double mu = 0.0;
  double smoothness = 0.0;
  double delta = 1.0;
  std::vector<RestartStage> stages;

  Schedule stage_schedule(int t) const;  // t in [0, tau)
};

/// Builds the ladder. sigma_per_stage: empty means noiseless; one entry is
/// broadcast; otherwise entry t-1 applies to stage t (last entry repeats).
/// Requires 0 < eps < mu R^2 / 2.
RestartLadder restart_ladder(double L, double mu, double R,
                             const std::vector<double>& sigma_per_stage, double eps,
                             double delta);

}  // namespace smom
