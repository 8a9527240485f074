#pragma once

#include <stdexcept>
#include <string>

#include "smom/rng.hpp"
#include "smom/vector_ops.hpp"

namespace smom {

/// Requested density has no closed form (general symmetric stable laws).
struct UnsupportedNoiseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Declarative description of an i.i.d. per-coordinate noise distribution.
///
/// Supported families:
///  - cauchy            standard Cauchy scaled by `scale`
///  - stable_sym        symmetric alpha-stable, characteristic fn e^{-|scale y|^alpha}
///  - cauchy_exp_mix    w * Cauchy(1) + (1-w) * shifted Exp: e^{-(x+1)} on x >= -1
///  - cauchy_pareto_mix w * Cauchy(1) + (1-w) * shifted Pareto: 3/(x+1.5)^4 on x >= -0.5
///  - gaussian          N(0, std^2)
///
/// The Pareto component uses support x >= -0.5 (Pareto shape 3, scale 1,
/// shifted by -1.5), which normalizes to 1 and has zero mean; the naive
/// support x >= -1.5 is not integrable.
struct NoiseSpec {
  enum class Kind { cauchy, stable_sym, cauchy_exp_mix, cauchy_pareto_mix, gaussian };

  Kind kind = Kind::cauchy;
  int dimension = 1;
  double scale = 1.0;    // cauchy / stable_sym
  double alpha = 1.0;    // stable_sym index in (0, 2]
  double weight = 0.7;   // mixture weight of the Cauchy component
  double std_dev = 1.0;  // gaussian

  static NoiseSpec cauchy(int d, double scale = 1.0);
  static NoiseSpec stable_sym(int d, double alpha, double scale = 1.0);
  static NoiseSpec cauchy_exp_mix(int d, double weight = 0.7);
  static NoiseSpec cauchy_pareto_mix(int d, double weight = 0.7);
  static NoiseSpec gaussian(int d, double std_dev);

  void validate() const;
  bool has_finite_variance() const;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

std::string to_string(NoiseSpec::Kind kind);
NoiseSpec::Kind noise_kind_from_string(const std::string& name);

/// Per-coordinate tail metadata: s^{*k}(u) <= B k / (k^{(beta+1)/beta} + |u|^{1+beta})
/// for the symmetric part s, and M bounds the second moment of |r| for the
/// antisymmetric part r. `known` is false when the constants are not
/// established for the family (gaussian, general stable), in which case the
/// numeric fields are placeholders.
struct TailConstants {
  double beta = 1.0;
  double B = 0.0;
  double M = 0.0;
  bool known = false;
};

/// One noise realization: d i.i.d. draws, one per coordinate. Deterministic
/// given the stream. Mixtures select the component with a Bernoulli(weight)
/// draw; stable laws use the Chambers-Mallows-Stuck transform.
Vector sample_noise(const NoiseSpec& spec, RngStream& rng);

/// Pointwise marginal density. Rejects stable_sym unless alpha is 1 or 2 and
/// rejects the degenerate gaussian std = 0.
double density(const NoiseSpec& spec, double u);

/// Symmetric part s(u) = (p(u) + p(-u)) / 2 of the marginal density.
double symmetric_part(const NoiseSpec& spec, double u);

/// Antisymmetric part r(u) = (p(u) - p(-u)) / 2 of the marginal density.
double antisymmetric_part(const NoiseSpec& spec, double u);

/// Density at u of the sum of k independent standard Cauchy draws:
/// (1/pi) k / (k^2 + u^2).
double cauchy_convolution_density(int k, double u);

/// Mass of the marginal density outside [-T, T], computed in closed form.
double density_tail_mass(const NoiseSpec& spec, double T);

/// Tail metadata for the noise family. Exact for Cauchy; for mixtures, M comes from
/// adaptive quadrature of integral u^2 |r(u)| du (with exact power/exponential
/// tails) and B from a dense-grid fit of the envelope s(u) <= B / (1 v |u|^{1+beta}).
TailConstants tail_constants(const NoiseSpec& spec);

}  // namespace smom
