#include "smom/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "smom/quadrature.hpp"

namespace smom {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr int kShards = 64;

bool mean_like(const AggregatorSpec& spec) {
  if (spec.rule == AggregatorSpec::Rule::mean) {
    return true;
  }
  // m = 0 collapses every median-family rule to a single block mean.
  return spec.m == 0;
}

}  // namespace

BiasVarianceReport mc_bias_variance(const AggregatorSpec& aggregator,
                                    const NoiseSpec& noise, long long trials,
                                    RngStream rng, std::optional<double> lambda,
                                    int threads) {
  aggregator.validate();
  noise.validate();
  if (trials < 10000) {
    throw std::invalid_argument("mc_bias_variance: need trials >= 10^4");
  }
  if (!aggregator.uses_clipping() && mean_like(aggregator) && !noise.has_finite_variance()) {
    throw std::invalid_argument(
        "mc_bias_variance: mean-type aggregation of heavy-tailed noise has a "
        "divergent second moment; use a median-family rule or clipping");
  }

  const GradientSource pure_noise = [&noise](RngStream& rs) {
    return sample_noise(noise, rs);
  };

  std::vector<VectorMoments> shard_acc(kShards, VectorMoments(noise.dimension));
  std::atomic<int> next_shard{0};
  const int workers = std::max(1, std::min(threads, kShards));
  auto work = [&]() {
    for (int s = next_shard.fetch_add(1); s < kShards; s = next_shard.fetch_add(1)) {
      const long long lo = trials * s / kShards;
      const long long hi = trials * (s + 1) / kShards;
      RngStream shard_rng = rng.child(static_cast<std::uint64_t>(s));
      VectorMoments acc(noise.dimension);
      for (long long t = lo; t < hi; ++t) {
        RngStream trial_rng = shard_rng.child(static_cast<std::uint64_t>(t - lo));
        acc.add(aggregate(aggregator, pure_noise, lambda, trial_rng).vector);
      }
      shard_acc[static_cast<std::size_t>(s)] = std::move(acc);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(work);
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  VectorMoments total(noise.dimension);
  for (const VectorMoments& acc : shard_acc) {
    total.merge(acc);
  }

  BiasVarianceReport rep;
  rep.bias_norm = total.norm_of_mean_report();
  rep.coordinate_bias = total.coordinate_reports();
  rep.second_moment = MonteCarloReport::from(
      total.second_central_moment(), total.second_moment_std_error(), total.count());
  return rep;
}

BiasDecayFit bias_decay_fit(int m, double theta, const NoiseSpec& noise,
                            std::span<const int> n_grid, long long trials_per_point,
                            RngStream rng, int threads) {
  if (n_grid.size() < 4) {
    throw std::invalid_argument("bias_decay_fit: need at least 4 grid points");
  }
  const auto [lo_it, hi_it] = std::minmax_element(n_grid.begin(), n_grid.end());
  if (*lo_it < 1 || *hi_it < 8 * *lo_it) {
    throw std::invalid_argument("bias_decay_fit: grid must span an 8x range of n >= 1");
  }

  BiasDecayFit fit;
  std::vector<double> xs;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const AggregatorSpec spec = AggregatorSpec::smom_of(m, n_grid[i], theta);
    const BiasVarianceReport rep =
        mc_bias_variance(spec, noise, trials_per_point,
                         rng.child(static_cast<std::uint64_t>(i)), std::nullopt, threads);
    const MonteCarloReport& b = rep.bias_norm;
    if (b.ci_contains(0.0) && std::fabs(b.estimate) < 3.0 * b.std_error) {
      continue;  // indistinguishable from zero bias
    }
    xs.push_back(std::log(static_cast<double>(n_grid[i])));
    fit.n_used.push_back(n_grid[i]);
    fit.log_bias.push_back(std::log(std::fabs(b.estimate)));
  }
  if (xs.size() < 3) {
    throw InsufficientSignalError("bias_decay_fit: fewer than 3 points carry signal");
  }

  const double p = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += fit.log_bias[i];
  }
  mx /= p;
  my /= p;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (fit.log_bias[i] - my);
  }
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = fit.log_bias[i] - intercept - fit.slope * xs[i];
    rss += r * r;
  }
  fit.slope_std_error = xs.size() > 2 ? std::sqrt(rss / (p - 2.0) / sxx) : 0.0;
  fit.ci_lo = fit.slope - 1.96 * fit.slope_std_error;
  fit.ci_hi = fit.slope + 1.96 * fit.slope_std_error;
  return fit;
}

TheoryConstants theory_constants_CD(double theta, int n,
                                    std::span<const TailConstants> tails) {
  if (!(theta > 0.0)) {
    throw std::invalid_argument("theory_constants_CD: theta must be positive");
  }
  if (n < 1 || tails.empty()) {
    throw std::invalid_argument("theory_constants_CD: need n >= 1 and d >= 1");
  }
  double sum_m2 = 0.0;
  double sum_m2_env = 0.0;
  double d_sum = 0.0;
  for (const TailConstants& t : tails) {
    const double nb = std::pow(static_cast<double>(n), t.beta - 1.0);
    const double env = std::pow(std::pow(2.0, t.beta) * t.B / nb, 2.0 / t.beta);
    sum_m2 += t.M * t.M;
    sum_m2_env += t.M * t.M * env;
    const double term1 = (t.M / (theta * n)) * (t.M / (theta * n));
    const double term2 =
        std::pow(std::pow(2.0, t.beta) * t.B / (t.beta * nb), 2.0 / t.beta);
    const double term3 = std::pow(
        t.B * t.M / (theta * std::pow(static_cast<double>(n), t.beta)),
        2.0 / (t.beta + 1.0));
    d_sum += term1 + term2 + term3;
  }
  TheoryConstants out;
  out.theta = theta;
  out.n = n;
  out.C = (1.0 + theta) / (theta * theta) * std::sqrt(sum_m2) +
          std::sqrt(sum_m2_env) / (theta * theta);
  out.D = d_sum;
  return out;
}

namespace {

void check_integral_domain(double a, double k, double alpha, double beta) {
  if (!(a > 0.0) || !(k > 0.0) || alpha < 0.0 || !(beta > 0.0)) {
    throw std::invalid_argument("integral: a, k, beta must be positive, alpha >= 0");
  }
  if (!(beta * k > alpha + 1.0)) {
    throw std::invalid_argument("integral: requires beta k > alpha + 1");
  }
}

}  // namespace

double integral_closed_form(double a, double k, double alpha, double beta) {
  check_integral_domain(a, k, alpha, beta);
  const double bk = beta * k;
  return bk / ((alpha + 1.0) * (bk - alpha - 1.0)) * 2.0 *
         std::pow(std::pow(4.0, 1.0 / beta) * a, alpha + 1.0) / std::pow(4.0, k);
}

double integral_quadrature(double a, double k, double alpha, double beta) {
  check_integral_domain(a, k, alpha, beta);
  // The integrand is even: 2x the positive half. min(1/4, (a/t)^beta) switches
  // at t0 = 4^{1/beta} a; beyond T the integrand is a pure power law whose
  // tail integral is exact, so only [0, T] needs quadrature.
  const double t0 = std::pow(4.0, 1.0 / beta) * a;
  const double T = 16.0 * t0;
  const auto integrand = [&](double t) {
    const double body = t > 0.0 ? std::min(0.25, std::pow(a / t, beta)) : 0.25;
    return std::pow(t, alpha) * std::pow(body, k);
  };
  const double coarse = std::pow(t0, alpha + 1.0) / std::pow(4.0, k);
  const double tol = 1e-11 * std::max(coarse, 1e-300);
  const double left = adaptive_simpson(integrand, 0.0, t0, tol);
  const double mid = adaptive_simpson(integrand, t0, T, tol);
  const double tail = std::pow(a, beta * k) * std::pow(T, alpha + 1.0 - beta * k) /
                      (beta * k - alpha - 1.0);
  return 2.0 * (left + mid + tail);
}

HermiteBoundReport hermite_bound_check(int k_max, double x_min, double x_max,
                                       double step) {
  if (k_max < 0 || k_max > 10) {
    throw std::invalid_argument("hermite_bound_check: k_max must lie in [0, 10]");
  }
  if (!(step > 0.0) || !(x_max > x_min)) {
    throw std::invalid_argument("hermite_bound_check: bad grid");
  }
  std::vector<double> inv_sqrt_fact(static_cast<std::size_t>(k_max) + 1);
  double fact = 1.0;
  for (int n = 0; n <= k_max; ++n) {
    if (n > 0) {
      fact *= static_cast<double>(n);
    }
    inv_sqrt_fact[static_cast<std::size_t>(n)] = 1.0 / std::sqrt(fact);
  }

  HermiteBoundReport rep;
  const long long steps = static_cast<long long>(std::floor((x_max - x_min) / step));
  for (long long i = 0; i <= steps; ++i) {
    const double x = std::min(x_min + static_cast<double>(i) * step, x_max);
    const double damp = std::exp(-0.25 * x * x);
    double h_prev = 0.0;  // H_{-1}
    double h = 1.0;       // H_0
    for (int n = 0; n <= k_max; ++n) {
      const double ratio = std::fabs(h) * damp * inv_sqrt_fact[static_cast<std::size_t>(n)];
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.argmax_n = n;
        rep.argmax_x = x;
      }
      const double h_next = x * h - static_cast<double>(n) * h_prev;
      h_prev = h;
      h = h_next;
    }
  }
  return rep;
}

KsResult convolution_check(int k, long long samples, RngStream rng, int null_scale) {
  if (k < 1) {
    throw std::invalid_argument("convolution_check: k must be >= 1");
  }
  if (samples < 10000) {
    throw std::invalid_argument("convolution_check: need samples >= 10^4");
  }
  const double scale = static_cast<double>(null_scale > 0 ? null_scale : k);
  std::vector<double> sums(static_cast<std::size_t>(samples));
  for (long long i = 0; i < samples; ++i) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      s += rng.cauchy();
    }
    sums[static_cast<std::size_t>(i)] = s;
  }
  return ks_test_one_sample(std::move(sums), [scale](double u) {
    return 0.5 + std::atan(u / scale) / kPi;
  });
}

std::uint64_t central_binomial(int m) {
  if (m < 0 || m > 30) {
    throw std::invalid_argument("central_binomial: m must lie in [0, 30]");
  }
  std::uint64_t c = 1;
  for (int i = 1; i <= m; ++i) {
    // C(2m, m) via the multiplicative recurrence C(2i, i) = C(2i-2, i-1) * 2(2i-1)/i
    c = c * 2ull * static_cast<std::uint64_t>(2 * i - 1) / static_cast<std::uint64_t>(i);
  }
  return c;
}

}  // namespace smom
