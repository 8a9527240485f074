#pragma once

#include <functional>
#include <vector>

#include "smom/vector_ops.hpp"

namespace smom {

/// Point estimate with a normal-approximation 95% confidence interval.
struct MonteCarloReport {
  double estimate = 0.0;
  double std_error = 0.0;
  long long trials = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;

  static MonteCarloReport from(double estimate, double std_error, long long trials);
  bool ci_contains(double v) const { return ci_lo <= v && v <= ci_hi; }
};

/// Streaming per-coordinate moments (Welford) plus a scalar accumulator for
/// ||x||^2, merged across workers with the pairwise (count, mean, M2) rule.
class VectorMoments {
 public:
  VectorMoments() = default;
  explicit VectorMoments(int dimension);

  void add(const Vector& x);
  void merge(const VectorMoments& other);

  long long count() const { return count_; }
  int dimension() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }

  /// Unbiased per-coordinate variances.
  Vector coordinate_variance() const;

  /// Estimate of E||X - EX||^2 (sum of per-coordinate variances).
  double second_central_moment() const;

  /// Std error of second_central_moment via the ||x||^2 sequence; accurate
  /// when the true mean is near zero, which is the certification setting.
  double second_moment_std_error() const;

  /// Per-coordinate mean reports.
  std::vector<MonteCarloReport> coordinate_reports() const;

  /// ||mean|| with a delta-method standard error.
  MonteCarloReport norm_of_mean_report() const;

 private:
  long long count_ = 0;
  Vector mean_;
  Vector m2_;
  double norm2_mean_ = 0.0;
  double norm2_m2_ = 0.0;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Complementary Kolmogorov distribution Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_q(double lambda);

/// One-sample Kolmogorov-Smirnov test against a CDF. Sorts a copy of the data.
KsResult ks_test_one_sample(std::vector<double> values,
                            const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test. Sorts copies of both samples.
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

/// Percentile in [0, 100] with linear interpolation between closest ranks.
/// `sorted` must be ascending and non-empty.
double percentile_sorted(const std::vector<double>& sorted, double q);

}  // namespace smom
