#include "smom/noise.hpp"

#include <algorithm>
#include <cmath>

#include "smom/quadrature.hpp"

namespace smom {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

double cauchy_density(double u, double scale) {
  return scale / (kPi * (scale * scale + u * u));
}

// Shifted exponential component: e^{-(x+1)} on x >= -1, zero mean.
double exp_component_density(double u) {
  return u >= -1.0 ? std::exp(-(u + 1.0)) : 0.0;
}

// Shifted Pareto component: 3/(x+1.5)^4 on x >= -0.5, zero mean.
double pareto_component_density(double u) {
  if (u < -0.5) {
    return 0.0;
  }
  const double s = u + 1.5;
  return 3.0 / (s * s * s * s);
}

// Symmetric alpha-stable via Chambers-Mallows-Stuck; standard scale.
double stable_standard(double alpha, RngStream& rng) {
  const double v = kPi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  if (alpha == 1.0) {
    return std::tan(v);
  }
  const double s = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
  const double t = std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
  return s * t;
}

}  // namespace

NoiseSpec NoiseSpec::cauchy(int d, double scale) {
  NoiseSpec s;
  s.kind = Kind::cauchy;
  s.dimension = d;
  s.scale = scale;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::stable_sym(int d, double alpha, double scale) {
  NoiseSpec s;
  s.kind = Kind::stable_sym;
  s.dimension = d;
  s.alpha = alpha;
  s.scale = scale;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::cauchy_exp_mix(int d, double weight) {
  NoiseSpec s;
  s.kind = Kind::cauchy_exp_mix;
  s.dimension = d;
  s.weight = weight;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::cauchy_pareto_mix(int d, double weight) {
  NoiseSpec s;
  s.kind = Kind::cauchy_pareto_mix;
  s.dimension = d;
  s.weight = weight;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::gaussian(int d, double std_dev) {
  NoiseSpec s;
  s.kind = Kind::gaussian;
  s.dimension = d;
  s.std_dev = std_dev;
  s.validate();
  return s;
}

void NoiseSpec::validate() const {
  if (dimension < 1) {
    throw std::invalid_argument("NoiseSpec: dimension must be >= 1");
  }
  switch (kind) {
    case Kind::cauchy:
      if (!(scale > 0.0)) {
        throw std::invalid_argument("NoiseSpec: cauchy scale must be positive");
      }
      break;
    case Kind::stable_sym:
      if (!(alpha > 0.0) || alpha > 2.0) {
        throw std::invalid_argument("NoiseSpec: stable index must lie in (0, 2]");
      }
      if (!(scale > 0.0)) {
        throw std::invalid_argument("NoiseSpec: stable scale must be positive");
      }
      break;
    case Kind::cauchy_exp_mix:
    case Kind::cauchy_pareto_mix:
      if (weight < 0.0 || weight > 1.0) {
        throw std::invalid_argument("NoiseSpec: mixture weight must lie in [0, 1]");
      }
      break;
    case Kind::gaussian:
      if (std_dev < 0.0) {
        throw std::invalid_argument("NoiseSpec: gaussian std must be >= 0");
      }
      break;
  }
}

bool NoiseSpec::has_finite_variance() const {
  switch (kind) {
    case Kind::gaussian:
      return true;
    case Kind::stable_sym:
      return alpha == 2.0;
    default:
      return false;
  }
}

std::string to_string(NoiseSpec::Kind kind) {
  switch (kind) {
    case NoiseSpec::Kind::cauchy: return "cauchy";
    case NoiseSpec::Kind::stable_sym: return "stable_sym";
    case NoiseSpec::Kind::cauchy_exp_mix: return "cauchy_exp_mix";
    case NoiseSpec::Kind::cauchy_pareto_mix: return "cauchy_pareto_mix";
    case NoiseSpec::Kind::gaussian: return "gaussian";
  }
  throw std::invalid_argument("unknown noise kind");
}

NoiseSpec::Kind noise_kind_from_string(const std::string& name) {
  if (name == "cauchy") return NoiseSpec::Kind::cauchy;
  if (name == "stable_sym") return NoiseSpec::Kind::stable_sym;
  if (name == "cauchy_exp_mix") return NoiseSpec::Kind::cauchy_exp_mix;
  if (name == "cauchy_pareto_mix") return NoiseSpec::Kind::cauchy_pareto_mix;
  if (name == "gaussian") return NoiseSpec::Kind::gaussian;
  throw std::invalid_argument("unknown noise kind: " + name);
}

Vector sample_noise(const NoiseSpec& spec, RngStream& rng) {
  spec.validate();
  Vector out(spec.dimension);
  for (int j = 0; j < spec.dimension; ++j) {
    switch (spec.kind) {
      case NoiseSpec::Kind::cauchy:
        out[j] = spec.scale * rng.cauchy();
        break;
      case NoiseSpec::Kind::stable_sym:
        out[j] = spec.scale * stable_standard(spec.alpha, rng);
        break;
      case NoiseSpec::Kind::cauchy_exp_mix:
        out[j] = rng.uniform() < spec.weight ? rng.cauchy() : -1.0 + rng.exponential();
        break;
      case NoiseSpec::Kind::cauchy_pareto_mix:
        if (rng.uniform() < spec.weight) {
          out[j] = rng.cauchy();
        } else {
          out[j] = std::pow(rng.uniform_open(), -1.0 / 3.0) - 1.5;
        }
        break;
      case NoiseSpec::Kind::gaussian:
        out[j] = spec.std_dev * rng.gaussian();
        break;
    }
  }
  return out;
}

double density(const NoiseSpec& spec, double u) {
  spec.validate();
  switch (spec.kind) {
    case NoiseSpec::Kind::cauchy:
      return cauchy_density(u, spec.scale);
    case NoiseSpec::Kind::stable_sym:
      if (spec.alpha == 1.0) {
        return cauchy_density(u, spec.scale);
      }
      if (spec.alpha == 2.0) {
        // characteristic fn e^{-(scale y)^2} is N(0, 2 scale^2)
        const double var = 2.0 * spec.scale * spec.scale;
        return std::exp(-0.5 * u * u / var) / std::sqrt(2.0 * kPi * var);
      }
      throw UnsupportedNoiseError("density: stable_sym has closed form only for alpha in {1, 2}");
    case NoiseSpec::Kind::cauchy_exp_mix:
      return spec.weight * cauchy_density(u, 1.0) + (1.0 - spec.weight) * exp_component_density(u);
    case NoiseSpec::Kind::cauchy_pareto_mix:
      return spec.weight * cauchy_density(u, 1.0) +
             (1.0 - spec.weight) * pareto_component_density(u);
    case NoiseSpec::Kind::gaussian: {
      if (spec.std_dev == 0.0) {
        throw std::invalid_argument("density: gaussian std = 0 is degenerate");
      }
      const double z = u / spec.std_dev;
      return std::exp(-0.5 * z * z) / (spec.std_dev * std::sqrt(2.0 * kPi));
    }
  }
  throw std::invalid_argument("density: unknown noise kind");
}

double symmetric_part(const NoiseSpec& spec, double u) {
  return 0.5 * (density(spec, u) + density(spec, -u));
}

double antisymmetric_part(const NoiseSpec& spec, double u) {
  return 0.5 * (density(spec, u) - density(spec, -u));
}

double cauchy_convolution_density(int k, double u) {
  if (k < 1) {
    throw std::invalid_argument("cauchy_convolution_density: k must be >= 1");
  }
  const double kk = static_cast<double>(k);
  return kk / (kPi * (kk * kk + u * u));
}

double density_tail_mass(const NoiseSpec& spec, double T) {
  spec.validate();
  if (!(T > 0.0)) {
    throw std::invalid_argument("density_tail_mass: T must be positive");
  }
  const auto cauchy_tail = [](double t, double scale) {
    // two-sided: 2 (1/2 - arctan(t/scale)/pi)
    return 1.0 - 2.0 * std::atan(t / scale) / kPi;
  };
  switch (spec.kind) {
    case NoiseSpec::Kind::cauchy:
      return cauchy_tail(T, spec.scale);
    case NoiseSpec::Kind::stable_sym:
      if (spec.alpha == 1.0) {
        return cauchy_tail(T, spec.scale);
      }
      if (spec.alpha == 2.0) {
        const double sd = spec.scale * std::sqrt(2.0);
        return std::erfc(T / (sd * std::sqrt(2.0)));
      }
      throw UnsupportedNoiseError("density_tail_mass: stable_sym needs alpha in {1, 2}");
    case NoiseSpec::Kind::cauchy_exp_mix: {
      const double expo = T >= -1.0 ? std::exp(-(T + 1.0)) : 1.0;
      return spec.weight * cauchy_tail(T, 1.0) + (1.0 - spec.weight) * expo;
    }
    case NoiseSpec::Kind::cauchy_pareto_mix: {
      const double s = T + 1.5;
      const double pareto = T >= -0.5 ? 1.0 / (s * s * s) : 1.0;
      return spec.weight * cauchy_tail(T, 1.0) + (1.0 - spec.weight) * pareto;
    }
    case NoiseSpec::Kind::gaussian: {
      if (spec.std_dev == 0.0) {
        return 0.0;
      }
      return std::erfc(T / (spec.std_dev * std::sqrt(2.0)));
    }
  }
  throw std::invalid_argument("density_tail_mass: unknown noise kind");
}

namespace {

// integral_T^inf u^2 q(u) du of the non-Cauchy mixture component, closed form.
double component_second_moment_tail(NoiseSpec::Kind kind, double T) {
  if (kind == NoiseSpec::Kind::cauchy_exp_mix) {
    // integral_T^inf u^2 e^{-(u+1)} du = e^{-(T+1)} (T^2 + 2T + 2)
    return std::exp(-(T + 1.0)) * (T * T + 2.0 * T + 2.0);
  }
  // integral_T^inf u^2 3/(u+1.5)^4 du with antiderivative of (s-a)^2/s^4
  const double a = 1.5;
  const double s = T + a;
  const double antider = -1.0 / s + a / (s * s) - a * a / (3.0 * s * s * s);
  return 3.0 * (0.0 - antider);
}

double fit_envelope_B(const NoiseSpec& spec, double beta) {
  // smallest B with s(u) <= B / (1 v |u|^{beta+1}) on a dense grid over
  // [0, 1e4]; s is even so positive u suffice.
  double best = 0.0;
  const auto probe = [&](double u) {
    const double env = std::max(1.0, std::pow(std::fabs(u), beta + 1.0));
    best = std::max(best, symmetric_part(spec, u) * env);
  };
  for (int i = 0; i <= 5120; ++i) {
    probe(static_cast<double>(i) / 512.0);  // [0, 10] step 1/512
  }
  double u = 10.0;
  while (u < 1e4) {
    u *= 1.01;
    probe(std::min(u, 1e4));
  }
  return best;
}

}  // namespace

TailConstants tail_constants(const NoiseSpec& spec) {
  spec.validate();
  TailConstants tc;
  switch (spec.kind) {
    case NoiseSpec::Kind::cauchy:
      tc.beta = 1.0;
      tc.B = std::max(spec.scale, 1.0 / spec.scale) / kPi;
      tc.M = 0.0;
      tc.known = true;
      return tc;
    case NoiseSpec::Kind::stable_sym:
      tc.beta = spec.alpha;
      tc.B = 0.0;  // placeholder, no closed-form envelope fitted
      tc.M = 0.0;  // symmetric law
      tc.known = false;
      return tc;
    case NoiseSpec::Kind::gaussian:
      tc.beta = 2.0;  // placeholder, tails are lighter than any power law
      tc.B = 0.0;
      tc.M = 0.0;
      tc.known = false;
      return tc;
    case NoiseSpec::Kind::cauchy_exp_mix:
    case NoiseSpec::Kind::cauchy_pareto_mix: {
      tc.beta = 1.0;
      tc.B = fit_envelope_B(spec, tc.beta);
      // M = integral u^2 |r(u)| du; the Cauchy part cancels in r, so only the
      // asymmetric component contributes. |r| is even: integrate 2x over u >= 0,
      // with the exact component tail beyond T.
      const double T = 50.0;
      const double body = adaptive_simpson(
          [&](double u) { return u * u * std::fabs(antisymmetric_part(spec, u)); }, 0.0, T,
          1e-11);
      const double tail =
          0.5 * (1.0 - spec.weight) * component_second_moment_tail(spec.kind, T);
      tc.M = 2.0 * (body + tail);
      tc.known = true;
      return tc;
    }
  }
  throw std::invalid_argument("tail_constants: unknown noise kind");
}

}  // namespace smom
