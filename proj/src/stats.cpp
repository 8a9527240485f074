#include "smom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smom {

MonteCarloReport MonteCarloReport::from(double estimate, double std_error,
                                        long long trials) {
  MonteCarloReport r;
  r.estimate = estimate;
  r.std_error = std_error;
  r.trials = trials;
  r.ci_lo = estimate - 1.96 * std_error;
  r.ci_hi = estimate + 1.96 * std_error;
  return r;
}

VectorMoments::VectorMoments(int dimension)
    : mean_(Vector::Zero(dimension)), m2_(Vector::Zero(dimension)) {}

void VectorMoments::add(const Vector& x) {
  if (mean_.size() == 0) {
    mean_ = Vector::Zero(x.size());
    m2_ = Vector::Zero(x.size());
  }
  if (x.size() != mean_.size()) {
    throw std::invalid_argument("VectorMoments::add: dimension mismatch");
  }
  count_ += 1;
  const double inv = 1.0 / static_cast<double>(count_);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double delta = x[j] - mean_[j];
    mean_[j] += delta * inv;
    m2_[j] += delta * (x[j] - mean_[j]);
  }
  const double s = x.squaredNorm();
  const double ds = s - norm2_mean_;
  norm2_mean_ += ds * inv;
  norm2_m2_ += ds * (s - norm2_mean_);
}

void VectorMoments::merge(const VectorMoments& other) {
  if (other.count_ == 0) {
    return;
  }
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.mean_.size() != mean_.size()) {
    throw std::invalid_argument("VectorMoments::merge: dimension mismatch");
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (Eigen::Index j = 0; j < mean_.size(); ++j) {
    const double delta = other.mean_[j] - mean_[j];
    m2_[j] += other.m2_[j] + delta * delta * na * nb / n;
    mean_[j] += delta * nb / n;
  }
  const double d2 = other.norm2_mean_ - norm2_mean_;
  norm2_m2_ += other.norm2_m2_ + d2 * d2 * na * nb / n;
  norm2_mean_ += d2 * nb / n;
  count_ += other.count_;
}

Vector VectorMoments::coordinate_variance() const {
  if (count_ < 2) {
    throw std::logic_error("VectorMoments: need at least 2 samples");
  }
  return m2_ / static_cast<double>(count_ - 1);
}

double VectorMoments::second_central_moment() const {
  return coordinate_variance().sum();
}

double VectorMoments::second_moment_std_error() const {
  if (count_ < 2) {
    throw std::logic_error("VectorMoments: need at least 2 samples");
  }
  const double var_of_norm2 = norm2_m2_ / static_cast<double>(count_ - 1);
  return std::sqrt(var_of_norm2 / static_cast<double>(count_));
}

std::vector<MonteCarloReport> VectorMoments::coordinate_reports() const {
  const Vector var = coordinate_variance();
  std::vector<MonteCarloReport> out;
  out.reserve(static_cast<std::size_t>(mean_.size()));
  for (Eigen::Index j = 0; j < mean_.size(); ++j) {
    out.push_back(MonteCarloReport::from(
        mean_[j], std::sqrt(var[j] / static_cast<double>(count_)), count_));
  }
  return out;
}

MonteCarloReport VectorMoments::norm_of_mean_report() const {
  const Vector var = coordinate_variance();
  const double norm = mean_.norm();
  double se;
  if (norm > 1e-300) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < mean_.size(); ++j) {
      const double g = mean_[j] / norm;
      acc += g * g * var[j] / static_cast<double>(count_);
    }
    se = std::sqrt(acc);
  } else {
    se = std::sqrt(var.maxCoeff() / static_cast<double>(count_));
  }
  return MonteCarloReport::from(norm, se, count_);
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) {
    return 1.0;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) {
      break;
    }
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_one_sample(std::vector<double> values,
                            const std::function<double(double)>& cdf) {
  if (values.empty()) {
    throw std::invalid_argument("ks_test_one_sample: empty sample");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  const double sn = std::sqrt(n);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_test_two_sample: empty sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    throw std::invalid_argument("percentile_sorted: empty sample");
  }
  if (q <= 0.0) {
    return sorted.front();
  }
  if (q >= 100.0) {
    return sorted.back();
  }
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) {
    return sorted.back();
  }
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace smom
