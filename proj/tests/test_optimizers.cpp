#include <doctest.h>

#include <cmath>
#include <vector>

#include "smom/optimizers.hpp"

using namespace smom;

namespace {

QuadraticProblem identity_problem() {
  return QuadraticProblem(Matrix::Identity(1, 1), 1.0, 1.0);
}

StochasticGradient noiseless(const Objective& f) {
  return [&f](const Vector& x, RngStream&) { return f.gradient(x); };
}

Vector ones(int d, double v) { return Vector::Constant(d, v); }

}  // namespace

TEST_SUITE_BEGIN("optimizers");

TEST_CASE("accelerated sequences: recurrence matches the closed form") {
  for (double a : {1.0, 1000.0}) {
    for (double L : {1.0, 10.0}) {
      double acc = 0.0;
      double comp = 0.0;  // Kahan compensation keeps the oracle tight
      for (int k = 0; k <= 100000; ++k) {
        const double term = sstm_alpha(k + 1, a, L) - comp;
        const double next = acc + term;
        comp = (next - acc) - term;
        acc = next;
        const double closed = sstm_big_a(k + 1, a, L);
        CHECK(std::fabs(acc - closed) <= 1e-12 * closed);
      }
    }
  }
}

TEST_CASE("accelerated sequences: base values and convex combination") {
  CHECK(sstm_alpha(0, 1.0, 1.0) == 0.0);
  CHECK(sstm_big_a(0, 1.0, 1.0) == 0.0);
  CHECK(sstm_alpha(1, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(sstm_big_a(1, 1.0, 1.0) == doctest::Approx(1.0));
  for (int k = 0; k <= 100000; k += 97) {
    const double ratio = (sstm_big_a(k, 2.0, 3.0) + sstm_alpha(k + 1, 2.0, 3.0)) /
                         sstm_big_a(k + 1, 2.0, 3.0);
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sgd: exact step for unit spectrum") {
  const QuadraticProblem p = identity_problem();
  const Trajectory t = clipped_sgd(p, noiseless(p), ones(1, 1.0),
                                   Schedule::constant(1, 1.0, 10.0),
                                   AggregatorSpec::mean_of(1).clipped(
                                       AggregatorSpec::ClipMode::clip_after),
                                   RngStream(1));
  CHECK(t.final_point[0] == doctest::Approx(0.0));
  CHECK(t.records.back().f_gap == doctest::Approx(0.0));
}

TEST_CASE("sgd: noiseless descent is monotone for gamma <= 1/L") {
  const QuadraticProblem p = generate_spd(6, 1.0, 7.0, RngStream(2));
  const Trajectory t =
      clipped_sgd(p, noiseless(p), ones(6, 2.0), Schedule::constant(50, 1.0 / 7.0, 1e9),
                  AggregatorSpec::mean_of(1), RngStream(3));
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    CHECK(t.records[i].f_gap <= t.records[i - 1].f_gap * (1.0 + 1e-12));
  }
  CHECK(t.records.front().f_gap > 10.0 * t.records.back().f_gap);
}

TEST_CASE("sgd with inactive clip replays plain sgd bit for bit") {
  const QuadraticProblem p = generate_spd(4, 1.0, 5.0, RngStream(4));
  const NoiseSpec noise = NoiseSpec::cauchy(4);
  const double gamma = 0.02;
  const int K = 40;
  const std::uint64_t seed = 99;

  const Trajectory t = clipped_sgd(
      p, make_additive_noise_oracle(p, noise), ones(4, 1.0),
      Schedule::constant(K, gamma, 1e18),
      AggregatorSpec::mean_of(1).clipped(AggregatorSpec::ClipMode::clip_after),
      RngStream(seed));

  // plain SGD with the same stream discipline: iteration k draws its sample
  // from child(k).child(0)
  Vector x = ones(4, 1.0);
  RngStream rng(seed);
  for (int k = 0; k < K; ++k) {
    RngStream sample_rng = rng.child(static_cast<std::uint64_t>(k)).child(0);
    const Vector g = p.gradient(x) + sample_noise(noise, sample_rng);
    x -= gamma * g;
  }
  CHECK(t.final_point == x);
}

TEST_CASE("sgd records the running iterate average") {
  const QuadraticProblem p = identity_problem();
  const double gamma = 0.5;
  const Trajectory t =
      clipped_sgd(p, noiseless(p), ones(1, 1.0), Schedule::constant(2, gamma, 1e9),
                  AggregatorSpec::mean_of(1), RngStream(5));
  // x0 = 1, x1 = 0.5, x2 = 0.25 -> average 7/12
  CHECK(t.final_avg_point[0] == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("step displacement is bounded by gamma lambda") {
  const QuadraticProblem p = generate_spd(3, 1.0, 4.0, RngStream(6));
  const double gamma = 0.05, lambda = 1.5;
  const Trajectory t = clipped_sgd(
      p, make_additive_noise_oracle(p, NoiseSpec::cauchy(3)), ones(3, 2.0),
      Schedule::constant(60, gamma, lambda),
      AggregatorSpec::median_of(2).clipped(AggregatorSpec::ClipMode::clip_after),
      RngStream(7));
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    const double step =
        std::fabs(std::sqrt(t.records[i].dist2) - std::sqrt(t.records[i - 1].dist2));
    CHECK(step <= gamma * lambda * (1.0 + 1e-9));
  }
}

TEST_CASE("trajectories are deterministic in the seed") {
  const QuadraticProblem p = generate_spd(3, 1.0, 4.0, RngStream(8));
  const auto run = [&p](std::uint64_t seed) {
    return clipped_sgd(p, make_additive_noise_oracle(p, NoiseSpec::cauchy_exp_mix(3)),
                       ones(3, 1.0), Schedule::constant(30, 0.01, 2.0),
                       AggregatorSpec::smom_of(1, 2, 0.1)
                           .clipped(AggregatorSpec::ClipMode::clip_after),
                       RngStream(seed));
  };
  const Trajectory t1 = run(500);
  const Trajectory t2 = run(500);
  REQUIRE(t1.records.size() == t2.records.size());
  for (std::size_t i = 0; i < t1.records.size(); ++i) {
    CHECK(t1.records[i].f_gap == t2.records[i].f_gap);
    CHECK(t1.records[i].dist2 == t2.records[i].dist2);
  }
  const Trajectory t3 = run(501);
  bool any_differ = false;
  for (std::size_t i = 0; i < t1.records.size(); ++i) {
    any_differ = any_differ || t1.records[i].f_gap != t3.records[i].f_gap;
  }
  CHECK(any_differ);
}

TEST_CASE("divergence raises an error carrying the partial trajectory") {
  const QuadraticProblem p = identity_problem();
  bool thrown = false;
  try {
    clipped_sgd(p, noiseless(p), ones(1, 1.0), Schedule::constant(10, 1e9, 1e18),
                AggregatorSpec::mean_of(1), RngStream(9));
  } catch (const DivergedError& e) {
    thrown = true;
    CHECK(e.trajectory.diverged);
    CHECK(!e.trajectory.records.empty());
  }
  CHECK(thrown);
}

TEST_CASE("oracle call accounting in trajectories") {
  const QuadraticProblem p = generate_spd(2, 1.0, 2.0, RngStream(10));
  const Trajectory t = clipped_sgd(
      p, make_additive_noise_oracle(p, NoiseSpec::gaussian(2, 0.1)), ones(2, 1.0),
      Schedule::constant(12, 0.1, 5.0),
      AggregatorSpec::smom_of(2, 2, 0.1).clipped(AggregatorSpec::ClipMode::clip_after),
      RngStream(11));
  CHECK(t.total_oracle_calls == 12 * 10);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    CHECK(t.records[i].oracle_calls > t.records[i - 1].oracle_calls);
  }
}

TEST_CASE("sstm: first extrapolation point equals the start") {
  // x^1 = z^0 = x^0, so with one noiseless step y^1 = x^0 - alpha_1 grad f(x^0).
  Matrix a(1, 1);
  a << 2.0;
  const QuadraticProblem p(a, 2.0, 2.0);
  const double par_a = 3.0;
  Schedule s = Schedule::constant(1, 1.0, 1e9);
  s.sstm_a = par_a;
  s.smoothness = p.smoothness();
  const Trajectory t = clipped_sstm(p, noiseless(p), ones(1, 1.0), s,
                                    AggregatorSpec::mean_of(1), RngStream(12));
  const double alpha1 = sstm_alpha(1, par_a, 2.0);
  CHECK(t.final_point[0] == doctest::Approx(1.0 - alpha1 * 2.0).epsilon(1e-14));
}

TEST_CASE("sstm converges on a noiseless quadratic") {
  // practical stepsize parameter; the theoretical a is sized for worst-case
  // noise and needs K in the hundreds of thousands before it bites
  const QuadraticProblem p = generate_spd(5, 1.0, 10.0, RngStream(13));
  Schedule s = Schedule::constant(300, 1.0, 1e18);
  s.sstm_a = 2.0;
  s.smoothness = p.smoothness();
  const Trajectory t = clipped_sstm(p, noiseless(p), ones(5, 1.0), s,
                                    AggregatorSpec::mean_of(1).clipped(
                                        AggregatorSpec::ClipMode::clip_after),
                                    RngStream(14), 10);
  CHECK(t.records.back().f_gap < 1e-3 * t.records.front().f_gap);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    CHECK(t.records[i].oracle_calls > t.records[i - 1].oracle_calls);
  }
}

TEST_CASE("schedule builders: convex sgd example values") {
  const Schedule s = schedule_sgd_convex(1.0, 1.0, 1.0, 0.0, 100, 0.1);
  CHECK(s.gamma(0) == doctest::Approx(0.0001668372395678198).epsilon(1e-12));
  CHECK(s.lambda(0) == doctest::Approx(18.04511583165539).epsilon(1e-12));

  // noiseless, unbiased: only the smoothness term remains
  const Schedule s0 = schedule_sgd_convex(2.0, 1.0, 0.0, 0.0, 100, 0.1);
  const double A = std::log(4.0 * 101.0 / 0.1);
  CHECK(s0.gamma(0) == doctest::Approx(1.0 / (320.0 * A)).epsilon(1e-14));

  // builder identity gamma lambda 40 A = R
  for (double b : {0.0, 0.3}) {
    const Schedule sx = schedule_sgd_convex(2.0, 1.7, 0.5, b, 55, 0.05);
    const double Ax = std::log(4.0 * 56.0 / 0.05);
    CHECK(sx.gamma(0) * sx.lambda(0) * 40.0 * Ax == doctest::Approx(1.7).epsilon(1e-12));
  }
}

TEST_CASE("schedule builders: strongly convex sgd") {
  const double A = std::log(4.0 * 101.0 / 0.1);
  const Schedule s0 = schedule_sgd_strongly_convex(2.0, 1.0, 1.0, 0.0, 0.0, 100, 0.1);
  CHECK(s0.gamma(0) == doctest::Approx(1.0 / (800.0 * A)).epsilon(1e-14));

  // lambda_k / lambda_{k+1} = exp(gamma mu / 2) exactly as written
  const Schedule s = schedule_sgd_strongly_convex(2.0, 0.7, 1.3, 0.4, 0.2, 64, 0.1);
  const double ratio = std::exp(s.gamma(0) * 0.7 / 2.0);
  for (int k = 0; k < 64; ++k) {
    CHECK(s.lambda(k) / s.lambda(k + 1) == doctest::Approx(ratio).epsilon(1e-12));
  }
}

TEST_CASE("fixed point solver agrees with bisection") {
  // x ln x = 1000
  double lo = 2.0, hi = 1e9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::log(mid) < 1000.0 ? lo : hi) = mid;
  }
  const double bisect = 0.5 * (lo + hi);
  const double fp = solve_log_fixed_point(1000.0, 1.0);
  CHECK(std::fabs(fp - bisect) <= 1e-9 * bisect);
  // degenerate branch pins at 2
  CHECK(solve_log_fixed_point(1e-8, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("schedule builders: accelerated") {
  const Schedule s = schedule_sstm_convex(1.0, 1.0, 0.0, 0.0, 100, 0.1);
  CHECK(s.sstm_a == doctest::Approx(6686510.416836724).epsilon(1e-12));
  // lambda_k alpha_{k+1} is constant in k
  const Schedule sx = schedule_sstm_convex(2.0, 1.5, 0.3, 0.1, 200, 0.05);
  const double c0 = sx.lambda(0) * sstm_alpha(1, sx.sstm_a, 2.0);
  for (int k = 1; k < 200; k += 13) {
    CHECK(sx.lambda(k) * sstm_alpha(k + 1, sx.sstm_a, 2.0) ==
          doctest::Approx(c0).epsilon(1e-12));
  }
}

TEST_CASE("schedule builders: monotone in the noise scale") {
  double prev_gamma = std::numeric_limits<double>::infinity();
  for (double sigma : {0.0, 0.5, 1.0, 2.0, 8.0}) {
    const Schedule s = schedule_sgd_convex(1.0, 1.0, sigma, 0.0, 100, 0.1);
    CHECK(s.gamma(0) <= prev_gamma);
    prev_gamma = s.gamma(0);
  }
  prev_gamma = std::numeric_limits<double>::infinity();
  for (double b : {0.0, 0.1, 0.5, 2.0}) {
    const Schedule s = schedule_sgd_convex(1.0, 1.0, 1.0, b, 100, 0.1);
    CHECK(s.gamma(0) <= prev_gamma);
    prev_gamma = s.gamma(0);
  }
  prev_gamma = std::numeric_limits<double>::infinity();
  for (int K : {10, 100, 1000}) {
    const Schedule s = schedule_sgd_convex(1.0, 1.0, 1.0, 0.1, K, 0.1);
    CHECK(s.gamma(0) <= prev_gamma);
    prev_gamma = s.gamma(0);
  }
  double prev_a = 0.0;
  for (double sigma : {0.0, 0.5, 2.0}) {
    const Schedule s = schedule_sstm_convex(1.0, 1.0, sigma, 0.0, 100, 0.1);
    CHECK(s.sstm_a >= prev_a);
    prev_a = s.sstm_a;
  }
  prev_a = 0.0;
  for (double b : {0.0, 0.5, 2.0}) {
    const Schedule s = schedule_sstm_convex(1.0, 1.0, 0.0, b, 100, 0.1);
    CHECK(s.sstm_a >= prev_a);
    prev_a = s.sstm_a;
  }
}

TEST_CASE("restart ladder: stage bookkeeping") {
  const RestartLadder lad = restart_ladder(1.0, 1.0, 1.0, {}, 0.125, 0.1);
  CHECK(lad.tau == 2);
  CHECK(lad.stages[0].epsilon == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(lad.stages[1].epsilon == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(lad.stages[0].R_prev == doctest::Approx(1.0));
  CHECK(lad.stages[0].R_target == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(lad.stages[1].R_target == doctest::Approx(0.5).epsilon(1e-14));
  for (const RestartStage& st : lad.stages) {
    CHECK(st.epsilon == doctest::Approx(1.0 * st.R_prev * st.R_prev / 4.0).epsilon(1e-12));
  }
  // noiseless stages use only the smoothness term of K_t
  const RestartStage& st = lad.stages[0];
  const double k1 = 2160.0 * std::sqrt(1.0 * st.R_prev * st.R_prev / st.epsilon) *
                    std::log(4320.0 * std::sqrt(1.0 * st.R_prev * st.R_prev) * 2.0 /
                             (std::sqrt(st.epsilon) * 0.1));
  CHECK(st.K == static_cast<int>(std::ceil(k1)));

  CHECK_THROWS_AS(restart_ladder(1.0, 1.0, 1.0, {}, 0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(restart_ladder(1.0, 0.0, 1.0, {}, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("restarted run with one stage equals a single accelerated run") {
  const QuadraticProblem p = generate_spd(3, 1.0, 3.0, RngStream(20));
  // eps in [mu R^2/4, mu R^2/2) gives tau = 1
  const RestartLadder lad = restart_ladder(3.0, 1.0, 2.0, {}, 1.3, 0.1);
  REQUIRE(lad.tau == 1);
  const AggregatorSpec agg =
      AggregatorSpec::mean_of(1).clipped(AggregatorSpec::ClipMode::clip_after);
  const StochasticGradient oracle = make_additive_noise_oracle(p, NoiseSpec::gaussian(3, 0.01));
  const Trajectory whole =
      restarted_sstm(p, oracle, ones(3, 1.0), lad, agg, RngStream(21), 50);
  const Trajectory single = clipped_sstm(p, oracle, ones(3, 1.0), lad.stage_schedule(0),
                                         agg, RngStream(21).child(0), 50);
  REQUIRE(whole.records.size() == single.records.size());
  for (std::size_t i = 0; i < whole.records.size(); ++i) {
    CHECK(whole.records[i].f_gap == single.records[i].f_gap);
  }
}

TEST_CASE("restarted run hits every stage target without noise") {
  const QuadraticProblem p = generate_spd(3, 1.0, 4.0, RngStream(22));
  const Vector x0 = ones(3, 0.5);
  const double R = (x0 - p.optimum()).norm() * 1.05;
  const double eps = 1.0 * R * R / 16.0;  // tau = 3
  const RestartLadder lad = restart_ladder(p.smoothness(), 1.0, R, {}, eps, 0.1);
  REQUIRE(lad.tau == 3);
  const Trajectory t = restarted_sstm(
      p, noiseless(p), x0, lad,
      AggregatorSpec::mean_of(1).clipped(AggregatorSpec::ClipMode::clip_after),
      RngStream(23), 1000);
  REQUIRE(t.stage_starts.size() == 3);
  for (int st = 0; st < 3; ++st) {
    const std::size_t end_idx = st + 1 < 3
                                    ? static_cast<std::size_t>(t.stage_starts[st + 1]) - 1
                                    : t.records.size() - 1;
    CHECK(t.records[end_idx].f_gap <= lad.stages[st].epsilon);
  }
}

TEST_SUITE_END();
