#include <doctest.h>

#include <cmath>
#include <vector>

#include "smom/estimators.hpp"

using namespace smom;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

std::vector<Vector> vecs1(std::initializer_list<double> xs) {
  std::vector<Vector> out;
  for (double x : xs) {
    out.push_back(vec1(x));
  }
  return out;
}

GradientSource constant_source(const Vector& g) {
  return [g](RngStream&) { return g; };
}

}  // namespace

TEST_SUITE_BEGIN("estimators");

TEST_CASE("smom hand examples") {
  RngStream rng(1);
  {
    auto s = vecs1({5});
    CHECK(smoothed_median_of_means(s, 0, 1, 0.0, rng) == vec1(5));
  }
  {
    auto s = vecs1({1, 5, 2});
    CHECK(smoothed_median_of_means(s, 1, 1, 0.0, rng) == vec1(2));
  }
  {
    auto s = vecs1({0, 2, 10, 10, -4, 0});
    CHECK(smoothed_median_of_means(s, 1, 2, 0.0, rng) == vec1(1));  // block means 1, 10, -2
  }
  auto bad = vecs1({1, 2, 3, 4});
  CHECK_THROWS_AS(smoothed_median_of_means(bad, 1, 2, 0.0, rng), std::invalid_argument);
}

TEST_CASE("smom special cases collapse to mean and median") {
  RngStream rng(2);
  auto s = vecs1({3, -1, 7, 5, 9, 1, 2, 0, 4, 6, 8, -2});  // 12 samples
  CHECK(smoothed_median_of_means(s, 0, 12, 0.0, rng) == mean(s));
  auto odd = vecs1({3, -1, 7, 5, 9});
  CHECK(smoothed_median_of_means(odd, 2, 1, 0.0, rng) == coordinate_median(odd));
}

TEST_CASE("smom translation equivariance under replayed smoothing") {
  RngStream rng(3);
  auto s = vecs1({0.5, 2.25, -1.5, 4.0, 8.5, -3.25});
  const Vector base = smoothed_median_of_means(s, 1, 2, 0.7, rng);
  auto shifted = s;
  for (Vector& v : shifted) {
    v.array() += 2.5;
  }
  const Vector moved = smoothed_median_of_means(shifted, 1, 2, 0.7, rng);
  CHECK(moved[0] == doctest::Approx(base[0] + 2.5).epsilon(1e-15));
}

TEST_CASE("smom smoothing is deterministic and actually smooths") {
  RngStream rng(4);
  auto s = vecs1({1, 2, 3, 4, 5});
  const Vector a = smoothed_median_of_means(s, 2, 1, 0.5, rng);
  const Vector b = smoothed_median_of_means(s, 2, 1, 0.5, rng);
  CHECK(a == b);
  const Vector plain = smoothed_median_of_means(s, 2, 1, 0.0, rng);
  CHECK(a != plain);
}

TEST_CASE("aggregate oracle accounting is exact") {
  RngStream rng(5);
  const GradientSource src = constant_source(vec1(1.0));
  struct Case {
    AggregatorSpec spec;
    long long cost;
  };
  const std::vector<Case> cases{
      {AggregatorSpec::mean_of(1), 1},
      {AggregatorSpec::mean_of(5).clipped(AggregatorSpec::ClipMode::clip_after), 5},
      {AggregatorSpec::mean_of(5).clipped(AggregatorSpec::ClipMode::clip_each_then_mean), 5},
      {AggregatorSpec::median_of(2), 5},
      {AggregatorSpec::mom_of(2, 3), 15},
      {AggregatorSpec::smom_of(2, 2, 0.1), 10},
  };
  for (const Case& c : cases) {
    RngStream r = rng.child(static_cast<std::uint64_t>(c.cost));
    const auto est = aggregate(c.spec, src,
                               c.spec.uses_clipping() ? std::optional<double>(1.0)
                                                      : std::nullopt,
                               r);
    CHECK(est.oracle_calls == c.cost);
    CHECK(est.oracle_calls == c.spec.oracle_cost());
  }
}

TEST_CASE("aggregate mean(1) passthrough") {
  RngStream rng(6);
  const auto est =
      aggregate(AggregatorSpec::mean_of(1), constant_source(vec1(3.5)), std::nullopt, rng);
  CHECK(est.vector == vec1(3.5));
  CHECK(est.oracle_calls == 1);
  CHECK_FALSE(est.clipped);
}

TEST_CASE("clip-each-then-mean hand example") {
  RngStream rng(7);
  int calls = 0;
  const GradientSource src = [&calls](RngStream&) {
    Vector v(2);
    if (calls++ % 2 == 0) {
      v << 3.0, 0.0;
    } else {
      v << 0.0, 3.0;
    }
    return v;
  };
  const AggregatorSpec spec =
      AggregatorSpec::mean_of(2).clipped(AggregatorSpec::ClipMode::clip_each_then_mean);
  const auto est = aggregate(spec, src, 1.0, rng);
  CHECK(est.vector[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(est.vector[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(est.clipped);
}

TEST_CASE("clip composition bounds the output norm") {
  RngStream rng(8);
  const NoiseSpec noise = NoiseSpec::cauchy(3);
  const GradientSource src = [&noise](RngStream& rs) { return sample_noise(noise, rs); };
  for (int trial = 0; trial < 200; ++trial) {
    RngStream r = rng.child(static_cast<std::uint64_t>(trial));
    const auto after = aggregate(
        AggregatorSpec::smom_of(1, 2, 0.3).clipped(AggregatorSpec::ClipMode::clip_after),
        src, 2.0, r);
    CHECK(after.vector.norm() <= 2.0 * (1.0 + 1e-12));
    RngStream r2 = rng.child(static_cast<std::uint64_t>(1000 + trial));
    const auto each = aggregate(
        AggregatorSpec::mean_of(4).clipped(AggregatorSpec::ClipMode::clip_each_then_mean),
        src, 2.0, r2);
    CHECK(each.vector.norm() <= 2.0 * (1.0 + 1e-12));
  }
}

TEST_CASE("aggregate requires a clip level when clipping") {
  RngStream rng(9);
  const AggregatorSpec spec =
      AggregatorSpec::mean_of(2).clipped(AggregatorSpec::ClipMode::clip_after);
  CHECK_THROWS_AS(aggregate(spec, constant_source(vec1(1.0)), std::nullopt, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(aggregate(spec, constant_source(vec1(1.0)), -1.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(AggregatorSpec::median_of(1).clipped(
                      AggregatorSpec::ClipMode::clip_each_then_mean),
                  std::invalid_argument);
}

TEST_CASE("certificate: mean over gaussian has the exact variance") {
  const NoiseSpec noise = NoiseSpec::gaussian(2, 1.5);
  const auto cert =
      assumption5_certificate(AggregatorSpec::mean_of(4), noise, 20000, RngStream(10));
  // Var per coordinate s^2/n, summed over d = 2.
  const double expected = 2.0 * 1.5 * 1.5 / 4.0;
  CHECK(std::fabs(cert.second_moment.estimate - expected) <=
        3.0 * (cert.second_moment.ci_hi - cert.second_moment.ci_lo));
  CHECK(cert.bias_norm.estimate <= 3.0 * cert.bias_norm.std_error + 0.05);
}

TEST_CASE("certificate: median over cauchy is unbiased") {
  const auto cert = assumption5_certificate(AggregatorSpec::median_of(4),
                                            NoiseSpec::cauchy(1), 50000, RngStream(11));
  CHECK(cert.coordinate_bias[0].ci_contains(0.0));
  CHECK(cert.warnings.empty());  // m = 4 > 3/beta = 3
}

TEST_CASE("certificate warns outside guaranteed parameter ranges") {
  const auto warn_med = assumption5_certificate(AggregatorSpec::median_of(2),
                                                NoiseSpec::cauchy(1), 1000, RngStream(12));
  CHECK(!warn_med.warnings.empty());
  const auto warn_smom = assumption5_certificate(AggregatorSpec::smom_of(2, 2, 0.1),
                                                 NoiseSpec::cauchy_exp_mix(1), 1000,
                                                 RngStream(13));
  CHECK(warn_smom.warnings.size() >= 2);  // m too small and theta^2 n too small
  CHECK_THROWS_AS(assumption5_certificate(AggregatorSpec::mean_of(2), NoiseSpec::cauchy(1),
                                          10, RngStream(14)),
                  std::invalid_argument);
}

TEST_SUITE_END();
