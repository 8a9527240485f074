#include "smom/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace smom {

AggregatorSpec AggregatorSpec::mean_of(int n) {
  AggregatorSpec s;
  s.rule = Rule::mean;
  s.n = n;
  s.validate();
  return s;
}

AggregatorSpec AggregatorSpec::median_of(int m) {
  AggregatorSpec s;
  s.rule = Rule::median;
  s.m = m;
  s.n = 1;
  s.validate();
  return s;
}

AggregatorSpec AggregatorSpec::mom_of(int m, int n) {
  AggregatorSpec s;
  s.rule = Rule::mom;
  s.m = m;
  s.n = n;
  s.validate();
  return s;
}

AggregatorSpec AggregatorSpec::smom_of(int m, int n, double theta) {
  AggregatorSpec s;
  s.rule = Rule::smom;
  s.m = m;
  s.n = n;
  s.theta = theta;
  s.validate();
  return s;
}

AggregatorSpec AggregatorSpec::clipped(ClipMode mode) const {
  AggregatorSpec s = *this;
  s.clip_mode = mode;
  s.validate();
  return s;
}

int AggregatorSpec::oracle_cost() const {
  if (clip_mode == ClipMode::clip_each_then_mean) {
    return n;
  }
  switch (rule) {
    case Rule::mean: return n;
    case Rule::median: return 2 * m + 1;
    case Rule::mom:
    case Rule::smom: return (2 * m + 1) * n;
  }
  throw std::logic_error("AggregatorSpec: unknown rule");
}

void AggregatorSpec::validate() const {
  if (n < 1) {
    throw std::invalid_argument("AggregatorSpec: n must be >= 1");
  }
  if (m < 0) {
    throw std::invalid_argument("AggregatorSpec: m must be >= 0");
  }
  if (theta < 0.0) {
    throw std::invalid_argument("AggregatorSpec: theta must be >= 0");
  }
  if (clip_mode == ClipMode::clip_each_then_mean && rule != Rule::mean) {
    throw std::invalid_argument(
        "AggregatorSpec: clip_each_then_mean applies to the mean rule only");
  }
}

std::string to_string(AggregatorSpec::Rule rule) {
  switch (rule) {
    case AggregatorSpec::Rule::mean: return "mean";
    case AggregatorSpec::Rule::median: return "median";
    case AggregatorSpec::Rule::mom: return "mom";
    case AggregatorSpec::Rule::smom: return "smom";
  }
  throw std::invalid_argument("unknown aggregator rule");
}

std::string to_string(AggregatorSpec::ClipMode mode) {
  switch (mode) {
    case AggregatorSpec::ClipMode::none: return "none";
    case AggregatorSpec::ClipMode::clip_after: return "clip_after";
    case AggregatorSpec::ClipMode::clip_each_then_mean: return "clip_each_then_mean";
  }
  throw std::invalid_argument("unknown clip mode");
}

AggregatorSpec::Rule aggregator_rule_from_string(const std::string& name) {
  if (name == "mean") return AggregatorSpec::Rule::mean;
  if (name == "median") return AggregatorSpec::Rule::median;
  if (name == "mom") return AggregatorSpec::Rule::mom;
  if (name == "smom") return AggregatorSpec::Rule::smom;
  throw std::invalid_argument("unknown aggregator rule: " + name);
}

AggregatorSpec::ClipMode clip_mode_from_string(const std::string& name) {
  if (name == "none") return AggregatorSpec::ClipMode::none;
  if (name == "clip_after") return AggregatorSpec::ClipMode::clip_after;
  if (name == "clip_each_then_mean") return AggregatorSpec::ClipMode::clip_each_then_mean;
  throw std::invalid_argument("unknown clip mode: " + name);
}

Vector smoothed_median_of_means(std::span<const Vector> samples, int m, int n, double theta, RngStream& rng) {
  if (m < 0 || n < 1 || theta < 0.0) {
    throw std::invalid_argument("smom: need m >= 0, n >= 1, theta >= 0");
  }
  const std::size_t blocks = static_cast<std::size_t>(2 * m + 1);
  if (samples.size() != blocks * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("smom: sample count must equal (2m+1) n");
  }
  const Eigen::Index d = samples[0].size();
  std::vector<Vector> block_means(blocks);
  for (std::size_t j = 0; j < blocks; ++j) {
    Vector acc = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
      acc += samples[j * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
    }
    acc /= static_cast<double>(n);
    if (theta > 0.0) {
      RngStream block_rng = rng.child(j);
      for (Eigen::Index c = 0; c < d; ++c) {
        acc[c] += theta * block_rng.gaussian();
      }
    }
    block_means[j] = std::move(acc);
  }
  return coordinate_median(block_means);
}

GradientEstimate aggregate(const AggregatorSpec& spec, const GradientSource& source,
                           std::optional<double> lambda, RngStream& rng) {
  spec.validate();
  if (spec.uses_clipping()) {
    if (!lambda.has_value()) {
      throw std::invalid_argument("aggregate: clip level required by clip_mode");
    }
    if (!(*lambda > 0.0)) {
      throw std::invalid_argument("aggregate: clip level must be positive");
    }
  }

  RngStream sample_rng = rng.child(0);
  RngStream smooth_rng = rng.child(1);

  const int cost = spec.oracle_cost();
  std::vector<Vector> samples;
  samples.reserve(static_cast<std::size_t>(cost));
  for (int i = 0; i < cost; ++i) {
    samples.push_back(source(sample_rng));
  }

  GradientEstimate est;
  est.oracle_calls = cost;

  if (spec.clip_mode == AggregatorSpec::ClipMode::clip_each_then_mean) {
    Vector acc = Vector::Zero(samples[0].size());
    for (const Vector& s : samples) {
      acc += clip(s, *lambda);
    }
    est.vector = acc / static_cast<double>(cost);
    est.clipped = true;
    return est;
  }

  switch (spec.rule) {
    case AggregatorSpec::Rule::mean:
      est.vector = mean(samples);
      break;
    case AggregatorSpec::Rule::median:
      est.vector = coordinate_median(samples);
      break;
    case AggregatorSpec::Rule::mom:
      est.vector = smoothed_median_of_means(samples, spec.m, spec.n, 0.0, smooth_rng);
      break;
    case AggregatorSpec::Rule::smom:
      est.vector = smoothed_median_of_means(samples, spec.m, spec.n, spec.theta, smooth_rng);
      break;
  }

  if (spec.clip_mode == AggregatorSpec::ClipMode::clip_after) {
    est.vector = clip(est.vector, *lambda);
    est.clipped = true;
  }
  return est;
}

namespace {

std::vector<std::string> tail_condition_warnings(const AggregatorSpec& spec,
                                                 const NoiseSpec& noise) {
  std::vector<std::string> out;
  const TailConstants tc = tail_constants(noise);
  if (!tc.known) {
    return out;
  }
  if (spec.rule == AggregatorSpec::Rule::median &&
      static_cast<double>(spec.m) <= 3.0 / tc.beta) {
    out.push_back("median: m <= 3/beta, unbiasedness contract not guaranteed");
  }
  if (spec.rule == AggregatorSpec::Rule::smom || spec.rule == AggregatorSpec::Rule::mom) {
    if (static_cast<double>(spec.m) <= 2.0 + 3.0 / tc.beta) {
      out.push_back("smom: m <= 2 + 3/beta, bias/variance contract not guaranteed");
    }
    const double mm = static_cast<double>(spec.m);
    if (spec.theta * spec.theta * spec.n < std::max(2.0, mm * mm) * tc.M) {
      out.push_back("smom: theta^2 n < (2 v m^2) M, bias contract not guaranteed");
    }
  }
  return out;
}

}  // namespace

Assumption5Certificate assumption5_certificate(const AggregatorSpec& spec,
                                               const NoiseSpec& noise, long long trials,
                                               RngStream rng,
                                               std::optional<double> lambda) {
  spec.validate();
  noise.validate();
  if (trials < 1000) {
    throw std::invalid_argument("assumption5_certificate: need trials >= 1000");
  }

  const GradientSource pure_noise = [&noise](RngStream& rs) {
    return sample_noise(noise, rs);
  };

  VectorMoments acc(noise.dimension);
  for (long long t = 0; t < trials; ++t) {
    RngStream trial_rng = rng.child(static_cast<std::uint64_t>(t));
    acc.add(aggregate(spec, pure_noise, lambda, trial_rng).vector);
  }

  Assumption5Certificate cert;
  cert.bias_norm = acc.norm_of_mean_report();
  cert.second_moment =
      MonteCarloReport::from(acc.second_central_moment(), acc.second_moment_std_error(),
                             acc.count());
  cert.coordinate_bias = acc.coordinate_reports();
  cert.warnings = tail_condition_warnings(spec, noise);
  return cert;
}

}  // namespace smom
