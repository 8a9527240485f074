#include "smom/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_domain(double L, double R, double sigma, double b, int K, double delta) {
  if (!(L > 0.0) || !(R > 0.0)) {
    throw std::invalid_argument("schedule: L and R must be positive");
  }
  if (sigma < 0.0 || b < 0.0) {
    throw std::invalid_argument("schedule: sigma and b must be >= 0");
  }
  if (K < 1) {
    throw std::invalid_argument("schedule: K must be >= 1");
  }
  if (!(delta > 0.0) || delta > 1.0) {
    throw std::invalid_argument("schedule: delta must lie in (0, 1]");
  }
}

}  // namespace

Schedule Schedule::constant(int horizon, double gamma, double lambda) {
  if (horizon < 1 || !(gamma > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("Schedule::constant: bad parameters");
  }
  Schedule s;
  s.horizon = horizon;
  s.gamma = [gamma](int) { return gamma; };
  s.lambda = [lambda](int) { return lambda; };
  return s;
}

double sstm_alpha(int k, double a, double L) {
  if (k < 0 || !(a > 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("sstm_alpha: bad parameters");
  }
  if (k == 0) {
    return 0.0;
  }
  return static_cast<double>(k + 1) / (2.0 * a * L);
}

double sstm_big_a(int k, double a, double L) {
  if (k < 0 || !(a > 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("sstm_big_a: bad parameters");
  }
  const double kk = static_cast<double>(k);
  return kk * (kk + 3.0) / (4.0 * a * L);
}

double solve_log_fixed_point(double c, double p) {
  if (!(c > 0.0) || !(p > 0.0)) {
    throw std::invalid_argument("solve_log_fixed_point: need c, p > 0");
  }
  double x = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double next = std::max(2.0, c / std::pow(std::log(x), p));
    const double damped = 0.5 * (x + next);
    if (std::fabs(damped - x) <= 1e-12 * std::fabs(damped)) {
      return damped;
    }
    x = damped;
  }
  throw NumericError("solve_log_fixed_point: no convergence after 200 iterations");
}

Schedule schedule_sgd_convex(double L, double R, double sigma, double b, int K,
                             double delta) {
  check_domain(L, R, sigma, b, K, delta);
  const double A = std::log(4.0 * (K + 1) / delta);
  const double t1 = 1.0 / (160.0 * L * A);
  const double t2 = sigma > 0.0 ? R / (208.0 * sigma * std::sqrt(K * A)) : kInf;
  const double t3 = b > 0.0 ? R / (160.0 * b * A) : kInf;
  const double t4 = b > 0.0 ? R / (1600.0 * b * (K + 1)) : kInf;
  const double gamma = std::min({t1, t2, t3, t4});
  const double lambda = R / (40.0 * gamma * A);

  Schedule s = Schedule::constant(K, gamma, lambda);
  s.delta = delta;
  return s;
}

Schedule schedule_sgd_strongly_convex(double L, double mu, double R, double sigma,
                                      double b, int K, double delta) {
  check_domain(L, R, sigma, b, K, delta);
  if (!(mu > 0.0)) {
    throw std::invalid_argument("schedule_sgd_strongly_convex: mu must be positive");
  }
  const double A = std::log(4.0 * (K + 1) / delta);
  const double t1 = 1.0 / (400.0 * L * A);

  double t2 = kInf;
  if (sigma > 0.0) {
    const double c = (K + 1) * mu * mu * R * R / (5400.0 * sigma * sigma * A);
    t2 = std::log(solve_log_fixed_point(c, 2.0)) / (mu * (K + 1));
  }
  double t3 = kInf;
  double t4 = kInf;
  if (b > 0.0) {
    const double cC = (0.5 * K + 1.0) * mu * R / (480.0 * b * A);
    t3 = std::log(solve_log_fixed_point(cC, 1.0)) / (mu * (1.0 + 0.5 * K));
    const double cD = mu * R / (80.0 * b);
    t4 = 2.0 * std::log(solve_log_fixed_point(cD, 1.0)) / (mu * (K + 1));
  }
  const double gamma = std::min({t1, t2, t3, t4});

  Schedule s;
  s.horizon = K;
  s.delta = delta;
  s.gamma = [gamma](int) { return gamma; };
  s.lambda = [gamma, mu, R, A](int k) {
    return std::exp(-gamma * mu * (1.0 + 0.5 * k)) * R / (120.0 * gamma * A);
  };
  return s;
}

Schedule schedule_sstm_convex(double L, double R, double sigma, double b, int K,
                              double delta) {
  check_domain(L, R, sigma, b, K, delta);
  const double A = std::log(4.0 * K / delta);
  const double t1 = 97200.0 * A * A;
  const double t2 =
      sigma > 0.0 ? 1800.0 * sigma * (K + 1) * std::sqrt(static_cast<double>(K)) *
                        std::sqrt(A) / (L * R)
                  : 0.0;
  const double t3 = b > 0.0 ? 4.0 * b * (K + 2) * (K + 2) / (15.0 * L * R) : 0.0;
  const double t4 = b > 0.0 ? 60.0 * b * (K + 2) * A / (L * R) : 0.0;
  const double a = std::max({t1, t2, t3, t4});

  Schedule s;
  s.horizon = K;
  s.delta = delta;
  s.sstm_a = a;
  s.smoothness = L;
  s.gamma = [a, L](int k) { return sstm_alpha(k + 1, a, L); };
  s.lambda = [R, A, a, L](int k) { return R / (30.0 * sstm_alpha(k + 1, a, L) * A); };
  return s;
}

Schedule RestartLadder::stage_schedule(int t) const {
  if (t < 0 || t >= tau) {
    throw std::invalid_argument("RestartLadder::stage_schedule: stage out of range");
  }
  const RestartStage& st = stages[static_cast<std::size_t>(t)];
  Schedule s;
  s.horizon = st.K;
  s.delta = delta;
  s.sstm_a = st.a;
  s.smoothness = smoothness;
  const double a = st.a;
  const double L = smoothness;
  const double R_target = st.R_target;
  const double lf = st.log_factor;
  s.gamma = [a, L](int k) { return sstm_alpha(k + 1, a, L); };
  s.lambda = [R_target, lf, a, L](int k) {
    return R_target / (30.0 * sstm_alpha(k + 1, a, L) * lf);
  };
  return s;
}

RestartLadder restart_ladder(double L, double mu, double R,
                             const std::vector<double>& sigma_per_stage, double eps,
                             double delta) {
  if (!(L > 0.0) || !(mu > 0.0) || !(R > 0.0)) {
    throw std::invalid_argument("restart_ladder: L, mu, R must be positive");
  }
  if (!(delta > 0.0) || delta > 1.0) {
    throw std::invalid_argument("restart_ladder: delta must lie in (0, 1]");
  }
  if (!(eps > 0.0) || eps >= mu * R * R / 2.0) {
    throw std::invalid_argument("restart_ladder: need 0 < eps < mu R^2 / 2");
  }

  RestartLadder lad;
  lad.mu = mu;
  lad.smoothness = L;
  lad.delta = delta;
  lad.tau = static_cast<int>(std::ceil(std::log2(mu * R * R / (2.0 * eps))));

  const auto stage_sigma = [&sigma_per_stage](int t) {
    if (sigma_per_stage.empty()) {
      return 0.0;
    }
    const std::size_t idx =
        std::min(static_cast<std::size_t>(t - 1), sigma_per_stage.size() - 1);
    return sigma_per_stage[idx];
  };

  for (int t = 1; t <= lad.tau; ++t) {
    RestartStage st;
    st.R_prev = R / std::pow(2.0, 0.5 * (t - 1));
    st.R_target = R / std::pow(2.0, 0.5 * t);
    st.epsilon = mu * st.R_prev * st.R_prev / 4.0;
    st.bias_budget = 15.0 * mu * R / (24.0 * std::pow(2.0, t + 1));

    const double sigma_t = stage_sigma(t);
    const double tau_d = static_cast<double>(lad.tau);
    const double k1 = 2160.0 * std::sqrt(L * st.R_prev * st.R_prev / st.epsilon) *
                      std::log(4320.0 * std::sqrt(L * st.R_prev * st.R_prev) * tau_d /
                               (std::sqrt(st.epsilon) * delta));
    double k2 = 0.0;
    if (sigma_t > 0.0) {
      const double q = 5400.0 * sigma_t * st.R_prev / st.epsilon;
      k2 = 4.0 * q * q * std::log(8.0 * tau_d / delta * q * q);
    }
    st.K = static_cast<int>(std::ceil(std::max(k1, k2)));

    st.log_factor = std::log(4.0 * st.K * tau_d / delta);
    const double b_t = st.bias_budget;
    const double a1 = 97200.0 * st.log_factor * st.log_factor;
    const double a2 =
        sigma_t > 0.0 ? 1800.0 * sigma_t * (st.K + 1) *
                            std::sqrt(static_cast<double>(st.K)) *
                            std::sqrt(st.log_factor) / (L * st.R_target)
                      : 0.0;
    const double a3 = 4.0 * b_t * (st.K + 2.0) * (st.K + 2.0) / (15.0 * L * st.R_target);
    const double a4 =
        60.0 * b_t * (st.K + 2.0) * std::log(4.0 * st.K / delta) / (L * st.R_target);
    st.a = std::max({a1, a2, a3, a4});

    lad.stages.push_back(st);
  }
  return lad;
}

}  // namespace smom
