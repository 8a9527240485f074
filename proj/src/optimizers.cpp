#include "smom/optimizers.hpp"

#include <cmath>

namespace smom {

StochasticGradient make_additive_noise_oracle(const Objective& f, const NoiseSpec& noise) {
  noise.validate();
  if (noise.dimension != f.dimension()) {
    throw std::invalid_argument("make_additive_noise_oracle: dimension mismatch");
  }
  return [&f, noise, x_cache = Vector(), g_cache = Vector()](
             const Vector& x, RngStream& rs) mutable {
    if (x_cache.size() != x.size() || x_cache != x) {
      x_cache = x;
      g_cache = f.gradient(x);
    }
    Vector g = g_cache + sample_noise(noise, rs);
    return g;
  };
}

namespace {

struct RunGuard {
  double limit;
  explicit RunGuard(const Vector& x0, const Vector& opt)
      : limit(1e12 * std::max(1.0, (x0 - opt).norm())) {}
  bool violated(const Vector& x) const { return !x.allFinite() || x.norm() > limit; }
};

void record_point(Trajectory& traj, const Objective& f, const Vector& x, int iteration,
                  long long calls) {
  TrajectoryRecord r;
  r.iteration = iteration;
  r.oracle_calls = calls;
  r.f_gap = f.value(x) - f.optimal_value();
  r.dist2 = (x - f.optimum()).squaredNorm();
  traj.records.push_back(r);
}

int checked_stride(int record_stride) {
  if (record_stride < 1) {
    throw std::invalid_argument("record_stride must be >= 1");
  }
  return record_stride;
}

void check_inputs(const Objective& f, const Vector& x0, const Schedule& schedule) {
  if (x0.size() != f.dimension()) {
    throw std::invalid_argument("optimizer: x0 dimension mismatch");
  }
  if (schedule.horizon < 1 || !schedule.lambda || !schedule.gamma) {
    throw std::invalid_argument("optimizer: schedule must cover K >= 1 iterations");
  }
}

}  // namespace

Trajectory clipped_sgd(const Objective& f, const StochasticGradient& oracle,
                       const Vector& x0, const Schedule& schedule,
                       const AggregatorSpec& aggregator, RngStream rng,
                       int record_stride) {
  check_inputs(f, x0, schedule);
  aggregator.validate();
  const int stride = checked_stride(record_stride);
  const int K = schedule.horizon;
  const RunGuard guard(x0, f.optimum());

  Trajectory traj;
  traj.method = "clipped_sgd";
  Vector x = x0;
  Vector xbar = x0;
  long long calls = 0;
  record_point(traj, f, x, 0, calls);

  for (int k = 0; k < K; ++k) {
    RngStream iter_rng = rng.child(static_cast<std::uint64_t>(k));
    const std::optional<double> lambda =
        aggregator.uses_clipping() ? std::optional<double>(schedule.lambda(k)) : std::nullopt;
    const GradientSource source = [&](RngStream& rs) { return oracle(x, rs); };
    const GradientEstimate est = aggregate(aggregator, source, lambda, iter_rng);
    calls += est.oracle_calls;

    x -= schedule.gamma(k) * est.vector;
    xbar = (xbar * static_cast<double>(k + 1) + x) / static_cast<double>(k + 2);

    if (guard.violated(x)) {
      traj.diverged = true;
      traj.final_point = x;
      traj.final_avg_point = xbar;
      traj.total_oracle_calls = calls;
      throw DivergedError(std::move(traj));
    }
    if ((k + 1) % stride == 0 || k + 1 == K) {
      record_point(traj, f, x, k + 1, calls);
    }
  }

  traj.final_point = x;
  traj.final_avg_point = xbar;
  traj.total_oracle_calls = calls;
  return traj;
}

Trajectory clipped_sstm(const Objective& f, const StochasticGradient& oracle,
                        const Vector& x0, const Schedule& schedule,
                        const AggregatorSpec& aggregator, RngStream rng,
                        int record_stride) {
  check_inputs(f, x0, schedule);
  aggregator.validate();
  const double a = schedule.sstm_a;
  const double L = f.smoothness();
  if (!(a > 0.0)) {
    throw std::invalid_argument("clipped_sstm: schedule lacks stepsize parameter a");
  }
  if (!(L > 0.0)) {
    throw std::invalid_argument("clipped_sstm: smoothness must be positive");
  }
  const int stride = checked_stride(record_stride);
  const int K = schedule.horizon;
  const RunGuard guard(x0, f.optimum());

  Trajectory traj;
  traj.method = "clipped_sstm";
  Vector y = x0;
  Vector z = x0;
  long long calls = 0;
  record_point(traj, f, y, 0, calls);

  for (int k = 0; k < K; ++k) {
    const double big_a_k = sstm_big_a(k, a, L);
    const double alpha_next = sstm_alpha(k + 1, a, L);
    const double big_a_next = sstm_big_a(k + 1, a, L);

    const Vector x_next = (big_a_k * y + alpha_next * z) / big_a_next;

    RngStream iter_rng = rng.child(static_cast<std::uint64_t>(k));
    const std::optional<double> lambda =
        aggregator.uses_clipping() ? std::optional<double>(schedule.lambda(k)) : std::nullopt;
    const GradientSource source = [&](RngStream& rs) { return oracle(x_next, rs); };
    const GradientEstimate est = aggregate(aggregator, source, lambda, iter_rng);
    calls += est.oracle_calls;

    z -= alpha_next * est.vector;
    y = (big_a_k * y + alpha_next * z) / big_a_next;

    if (guard.violated(y) || guard.violated(z)) {
      traj.diverged = true;
      traj.final_point = y;
      traj.total_oracle_calls = calls;
      throw DivergedError(std::move(traj));
    }
    if ((k + 1) % stride == 0 || k + 1 == K) {
      record_point(traj, f, y, k + 1, calls);
    }
  }

  traj.final_point = y;
  traj.total_oracle_calls = calls;
  return traj;
}

Trajectory restarted_sstm(const Objective& f, const StochasticGradient& oracle,
                          const Vector& x0, const RestartLadder& ladder,
                          const AggregatorSpec& aggregator, RngStream rng,
                          int record_stride) {
  if (ladder.tau < 1 || ladder.stages.size() != static_cast<std::size_t>(ladder.tau)) {
    throw std::invalid_argument("restarted_sstm: inconsistent ladder");
  }
  const double L = f.smoothness();
  if (std::fabs(ladder.smoothness - L) > 1e-12 * std::max(1.0, L)) {
    throw std::invalid_argument("restarted_sstm: ladder built for a different smoothness");
  }

  Trajectory traj;
  traj.method = "restarted_sstm";
  Vector x = x0;
  long long calls = 0;
  int iterations = 0;

  for (int t = 0; t < ladder.tau; ++t) {
    traj.stage_starts.push_back(static_cast<int>(traj.records.size()));
    const Schedule stage = ladder.stage_schedule(t);
    Trajectory part;
    try {
      part = clipped_sstm(f, oracle, x, stage, aggregator,
                          rng.child(static_cast<std::uint64_t>(t)), record_stride);
    } catch (DivergedError& e) {
      for (TrajectoryRecord r : e.trajectory.records) {
        if (t > 0 && r.iteration == 0) continue;  // stage seams share a point
        r.iteration += iterations;
        r.oracle_calls += calls;
        traj.records.push_back(r);
      }
      traj.diverged = true;
      traj.final_point = e.trajectory.final_point;
      traj.total_oracle_calls = calls + e.trajectory.total_oracle_calls;
      throw DivergedError(std::move(traj));
    }
    for (TrajectoryRecord r : part.records) {
      if (t > 0 && r.iteration == 0) continue;
      r.iteration += iterations;
      r.oracle_calls += calls;
      traj.records.push_back(r);
    }
    x = part.final_point;
    calls += part.total_oracle_calls;
    iterations += stage.horizon;
  }

  traj.final_point = x;
  traj.total_oracle_calls = calls;
  return traj;
}

}  // namespace smom
