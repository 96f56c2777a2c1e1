#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mccr/rng.hpp"

namespace mccr {

/// One symmetric alpha-stable law with characteristic function
///
///     phi(t) = exp(i mu t - gamma |t|^alpha),   0 < alpha <= 2, gamma > 0.
///
/// This is the only scale convention used anywhere in the library: at
/// alpha = 2 the law is normal with variance 2 * gamma (not gamma), and at
/// alpha = 1 it is Cauchy with scale gamma.
class StableComponent {
 public:
  /// Throws ValidationError with "alpha must be in (0,2]", "gamma must be > 0"
  /// or "mu must be finite".
  StableComponent(double alpha, double gamma, double mu = 0.0);

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  double mu() const { return mu_; }

  bool operator==(const StableComponent&) const = default;

 private:
  double alpha_;
  double gamma_;
  double mu_;
};

/// Convex mixture sum_i lambda_i P_i of symmetric stable laws. Weights must be
/// nonnegative with a positive sum and are normalized at construction so that
/// |sum lambda_i - 1| <= 1e-12.
class NoiseModel {
 public:
  NoiseModel(std::vector<StableComponent> components, std::vector<double> weights);

  /// Single-component model.
  explicit NoiseModel(StableComponent component);

  /// Regression-noise constructor: additionally requires every mu_i == 0.
  static NoiseModel centered(std::vector<StableComponent> components, std::vector<double> weights);

  std::span<const StableComponent> components() const { return components_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return components_.size(); }

  /// True when all locations are zero (the regression-noise form).
  bool is_centered() const;

 private:
  std::vector<StableComponent> components_;
  std::vector<double> weights_;
};

/// Selects the noise law for a given input point. Only the constant selector
/// is provided; the interface leaves room for heteroscedastic noise.
class NoiseSelector {
 public:
  virtual ~NoiseSelector() = default;
  virtual const NoiseModel& at(std::span<const double> x) const = 0;
};

class ConstantNoise final : public NoiseSelector {
 public:
  explicit ConstantNoise(NoiseModel model) : model_(std::move(model)) {}
  const NoiseModel& at(std::span<const double>) const override { return model_; }
  const NoiseModel& model() const { return model_; }

 private:
  NoiseModel model_;
};

/// Chambers-Mallows-Stuck map from an angle in (-pi/2, pi/2) and a standard
/// exponential variate to a draw of `c`. Exposed so the construction can be
/// driven with fixed inputs.
double cms_transform(const StableComponent& c, double angle, double exponential);

double draw_stable(const StableComponent& c, Rng& rng);

/// Mixture draw: one uniform picks the component (skipped when K == 1, so a
/// one-component mixture reproduces the component stream exactly), then one
/// stable draw.
double draw_mixture(const NoiseModel& m, Rng& rng);

std::vector<double> sample_stable(const StableComponent& c, const RngState& state, std::size_t n);
std::vector<double> sample_mixture(const NoiseModel& m, const RngState& state, std::size_t n);

/// Density of one component. Closed forms at alpha = 2 and alpha = 1;
/// otherwise Fourier inversion by panel Gauss-Legendre quadrature, switching
/// to the convergent/asymptotic power series in the far tail.
/// Throws NumericalError if the inversion does not settle to 1e-9.
double stable_density(const StableComponent& c, double t);

double mixture_density(const NoiseModel& m, double t);

std::complex<double> characteristic_fn(const NoiseModel& m, double t);

/// C_alpha = Gamma(alpha) sin(pi alpha / 2) / pi, so that for alpha < 2
/// P(X - mu > x) ~ C_alpha * gamma * x^(-alpha) as x -> infinity.
double stable_tail_constant(double alpha);

/// Two-sided tail mass estimate P(|X - mu| > r): 2 C_alpha gamma r^-alpha
/// for alpha < 2, the exact normal tail at alpha = 2.
double stable_tail_mass(const StableComponent& c, double radius);

/// Smallest radius (to 0.1% by bisection) with mixture tail mass <= eps,
/// measured from the origin after absorbing max |mu_i| into the radius.
double truncation_radius(const NoiseModel& m, double eps);

}  // namespace mccr
