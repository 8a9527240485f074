#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smom/estimators.hpp"
#include "smom/quadratic.hpp"
#include "smom/schedules.hpp"

namespace smom {

/// Stochastic first-order oracle: one gradient sample at x per call.
using StochasticGradient = std::function<Vector(const Vector& x, RngStream&)>;

/// Oracle for objective f with additive state-independent noise. The true
/// gradient is memoized per evaluation point, so batched draws at one iterate
/// pay for a single deterministic gradient.
StochasticGradient make_additive_noise_oracle(const Objective& f, const NoiseSpec& noise);

struct TrajectoryRecord {
  int iteration = 0;
  long long oracle_calls = 0;
  double f_gap = 0.0;
  double dist2 = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Vector final_point;
  Vector final_avg_point;        // running average of the iterates (SGD only)
  bool diverged = false;
  std::vector<int> stage_starts;  // restart boundaries as record indices
  std::string method;
  long long total_oracle_calls = 0;
};

/// The iterate left the 1e12 R guard ball or turned non-finite. Carries the
/// partial trajectory so batch drivers can score the run as worst case.
struct DivergedError : std::runtime_error {
  explicit DivergedError(Trajectory partial)
      : std::runtime_error("optimizer diverged"), trajectory(std::move(partial)) {}
  Trajectory trajectory;
};

/// x^{k+1} = x^k - gamma_k agg_k where agg_k is the aggregated (and, per the
/// aggregator spec, clipped at level lambda_k) gradient estimate at x^k.
/// Records the gap and squared distance each recorded iteration and maintains
/// the running iterate average for the convex-regime guarantee.
Trajectory clipped_sgd(const Objective& f, const StochasticGradient& oracle,
                       const Vector& x0, const Schedule& schedule,
                       const AggregatorSpec& aggregator, RngStream rng,
                       int record_stride = 1);

/// Accelerated similar-triangles update with clipped gradient estimates taken
/// at the extrapolated point x^{k+1}; reports the gap at y^k.
Trajectory clipped_sstm(const Objective& f, const StochasticGradient& oracle,
                        const Vector& x0, const Schedule& schedule,
                        const AggregatorSpec& aggregator, RngStream rng,
                        int record_stride = 1);

/// Runs tau stages of clipped_sstm, warm-starting each stage at the previous
/// stage output; the concatenated trajectory marks stage boundaries.
Trajectory restarted_sstm(const Objective& f, const StochasticGradient& oracle,
                          const Vector& x0, const RestartLadder& ladder,
                          const AggregatorSpec& aggregator, RngStream rng,
                          int record_stride = 1);

}  // namespace smom
