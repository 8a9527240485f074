#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smom/noise.hpp"
#include "smom/rng.hpp"
#include "smom/stats.hpp"
#include "smom/vector_ops.hpp"

namespace smom {

/// Stochastic gradient source bound to one evaluation point; each call costs
/// exactly one oracle call.
using GradientSource = std::function<Vector(RngStream&)>;

/// Gradient aggregation rule plus the clipping composition applied to it.
///
/// Per-iteration oracle cost: mean uses n samples, median uses 2m+1,
/// mom/smom use (2m+1)n blocks-of-n, and clip_each_then_mean uses n (it clips
/// every raw sample, then averages, and is only meaningful with rule = mean).
struct AggregatorSpec {
  enum class Rule { mean, median, mom, smom };
  enum class ClipMode { none, clip_after, clip_each_then_mean };

  Rule rule = Rule::mean;
  int m = 0;
  int n = 1;
  double theta = 0.0;
  ClipMode clip_mode = ClipMode::none;

  static AggregatorSpec mean_of(int n);
  static AggregatorSpec median_of(int m);
  static AggregatorSpec mom_of(int m, int n);
  static AggregatorSpec smom_of(int m, int n, double theta);
  AggregatorSpec clipped(ClipMode mode = ClipMode::clip_after) const;

  int oracle_cost() const;
  bool uses_clipping() const { return clip_mode != ClipMode::none; }
  void validate() const;

  friend bool operator==(const AggregatorSpec&, const AggregatorSpec&) = default;
};

std::string to_string(AggregatorSpec::Rule rule);
std::string to_string(AggregatorSpec::ClipMode mode);
AggregatorSpec::Rule aggregator_rule_from_string(const std::string& name);
AggregatorSpec::ClipMode clip_mode_from_string(const std::string& name);

struct GradientEstimate {
  Vector vector;
  long long oracle_calls = 0;
  bool clipped = false;
};

/// Smoothed median of means of (2m+1) n samples grouped consecutively into
/// 2m+1 blocks of n in input order: each block mean is perturbed by theta
/// times a standard Gaussian vector drawn from rng.child(block), then the
/// component-wise median is taken. theta = 0 draws nothing and degrades to
/// the plain median of means.
Vector smoothed_median_of_means(std::span<const Vector> samples, int m, int n, double theta, RngStream& rng);

/// Draws exactly oracle_cost() samples from the source, applies the rule and
/// the clip composition. `lambda` is required whenever clipping is requested.
/// Sample draws come from rng.child(0) and SMoM smoothing noise from
/// rng.child(1), so the two are independent and replayable.
GradientEstimate aggregate(const AggregatorSpec& spec, const GradientSource& source,
                           std::optional<double> lambda, RngStream& rng);

/// Monte-Carlo certificate of the bias/variance contract for an aggregation
/// rule applied to pure noise (true gradient = 0 suffices because all shipped
/// noise is additive and state independent).
struct Assumption5Certificate {
  MonteCarloReport bias_norm;
  MonteCarloReport second_moment;  // E||agg - E agg||^2
  std::vector<MonteCarloReport> coordinate_bias;
  std::vector<std::string> warnings;  // declared tail constants violating the
                                      // guaranteed (m, theta, n) ranges
};

Assumption5Certificate assumption5_certificate(const AggregatorSpec& spec,
                                               const NoiseSpec& noise, long long trials,
                                               RngStream rng,
                                               std::optional<double> lambda = std::nullopt);

}  // namespace smom
