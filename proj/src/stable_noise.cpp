#include "mccr/stable_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mccr/errors.hpp"
#include "mccr/quadrature.hpp"

namespace mccr {

namespace {

constexpr double kPi = std::numbers::pi;

// Beyond this standardized distance the power series is used for the density.
constexpr double kSeriesSwitch = 30.0;
// exp(-40) cut-off for the characteristic function in the inversion integral.
constexpr double kInversionExponent = 40.0;
constexpr double kInversionTol = 1e-9;
constexpr int kGradedLevels = 12;
constexpr std::size_t kMaxInversionPanels = std::size_t{1} << 22;

// Density of the standardized law (gamma = 1, mu = 0) at z >= 0 by the series
//   p(z) = 1/pi sum_k (-1)^(k+1) Gamma(k alpha + 1)/k! sin(k pi alpha/2) z^-(k alpha + 1).
// Convergent for alpha < 1, asymptotic for 1 < alpha < 2; summation stops at
// the smallest term.
double series_density(double alpha, double z) {
  const double log_z = std::log(z);
  double sum = 0.0;
  double previous_magnitude = INFINITY;
  for (int k = 1; k <= 400; ++k) {
    const double kd = k;
    const double log_mag = std::lgamma(kd * alpha + 1.0) - std::lgamma(kd + 1.0) -
                           (kd * alpha + 1.0) * log_z;
    const double magnitude = std::exp(log_mag);
    if (magnitude > previous_magnitude && k > 2) break;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum += sign * magnitude * std::sin(kd * kPi * alpha / 2.0);
    if (magnitude < 1e-18 * std::abs(sum)) break;
    previous_magnitude = magnitude;
  }
  return sum / kPi;
}

// (1/pi) int_0^umax exp(-u^alpha) cos(u z) du. The first panel is graded
// geometrically toward u = 0 where u^alpha is not smooth; the rest uses
// uniform panels no wider than 1 (and narrower when cos(uz) oscillates fast),
// doubled until successive estimates agree to 1e-9.
double inversion_density(double alpha, double z) {
  const double u_max = std::pow(kInversionExponent, 1.0 / alpha);
  auto integrand = [alpha, z](double u) { return std::exp(-std::pow(u, alpha)) * std::cos(u * z); };

  double h = std::min(1.0, 20.0 / std::max(z, 1e-300));
  h = std::min(h, u_max);

  double graded = 0.0;
  double right = h;
  for (int level = 0; level < kGradedLevels; ++level) {
    const double left = 0.5 * right;
    graded += quad::integrate_panels(integrand, left, right, 1);
    right = left;
  }
  graded += quad::integrate_panels(integrand, 0.0, right, 1);

  if (u_max <= h) return graded / kPi;

  auto panels = static_cast<std::size_t>(std::ceil((u_max - h) / h));
  double previous = quad::integrate_panels(integrand, h, u_max, panels);
  while (true) {
    panels *= 2;
    if (panels > kMaxInversionPanels) {
      throw NumericalError("stable density inversion did not converge", previous);
    }
    const double current = quad::integrate_panels(integrand, h, u_max, panels);
    const double change = std::abs(current - previous) / kPi;
    if (change < kInversionTol) return (graded + current) / kPi;
    previous = current;
  }
}

double normal_tail(double radius, double gamma) {
  // Two-sided: P(|X| > r) for X ~ N(0, 2 gamma).
  return std::erfc(radius / (2.0 * std::sqrt(gamma)));
}

}  // namespace

StableComponent::StableComponent(double alpha, double gamma, double mu)
    : alpha_(alpha), gamma_(gamma), mu_(mu) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ValidationError("alpha must be in (0,2]");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be > 0");
  if (!std::isfinite(mu)) throw ValidationError("mu must be finite");
}

NoiseModel::NoiseModel(std::vector<StableComponent> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw ValidationError("noise model needs at least one component");
  if (weights_.size() != components_.size()) {
    throw ValidationError("weights must have one entry per component");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("weights must be nonnegative");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw ValidationError("weights must have a positive sum");
  for (double& w : weights_) w /= total;
}

NoiseModel::NoiseModel(StableComponent component) : NoiseModel({component}, {1.0}) {}

NoiseModel NoiseModel::centered(std::vector<StableComponent> components, std::vector<double> weights) {
  NoiseModel model(std::move(components), std::move(weights));
  if (!model.is_centered()) throw ValidationError("regression noise components must have mu = 0");
  return model;
}

bool NoiseModel::is_centered() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const StableComponent& c) { return c.mu() == 0.0; });
}

double cms_transform(const StableComponent& c, double angle, double exponential) {
  const double alpha = c.alpha();
  if (alpha == 1.0) return c.mu() + c.gamma() * std::tan(angle);
  const double scale = std::pow(c.gamma(), 1.0 / alpha);
  const double head = std::sin(alpha * angle) / std::pow(std::cos(angle), 1.0 / alpha);
  const double tail = std::pow(std::cos((1.0 - alpha) * angle) / exponential, (1.0 - alpha) / alpha);
  return c.mu() + scale * head * tail;
}

double draw_stable(const StableComponent& c, Rng& rng) {
  const double angle = kPi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  return cms_transform(c, angle, w);
}

double draw_mixture(const NoiseModel& m, Rng& rng) {
  const auto components = m.components();
  if (components.size() == 1) return draw_stable(components[0], rng);
  const auto weights = m.weights();
  const double pick = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (weights[i] == 0.0) continue;
    chosen = i;
    cumulative += weights[i];
    if (pick < cumulative) break;
  }
  return draw_stable(components[chosen], rng);
}

std::vector<double> sample_stable(const StableComponent& c, const RngState& state, std::size_t n) {
  Rng rng(state);
  std::vector<double> out(n);
  for (auto& v : out) v = draw_stable(c, rng);
  return out;
}

std::vector<double> sample_mixture(const NoiseModel& m, const RngState& state, std::size_t n) {
  Rng rng(state);
  std::vector<double> out(n);
  for (auto& v : out) v = draw_mixture(m, rng);
  return out;
}

double stable_density(const StableComponent& c, double t) {
  const double s = t - c.mu();
  const double gamma = c.gamma();
  if (c.alpha() == 2.0) {
    const double variance = 2.0 * gamma;
    return std::exp(-s * s / (2.0 * variance)) / std::sqrt(2.0 * kPi * variance);
  }
  if (c.alpha() == 1.0) return gamma / (kPi * (s * s + gamma * gamma));

  const double scale = std::pow(gamma, 1.0 / c.alpha());
  const double z = std::abs(s) / scale;
  const double standard =
      z >= kSeriesSwitch ? series_density(c.alpha(), z) : inversion_density(c.alpha(), z);
  return standard / scale;
}

double mixture_density(const NoiseModel& m, double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) total += m.weights()[i] * stable_density(m.components()[i], t);
  return total;
}

std::complex<double> characteristic_fn(const NoiseModel& m, double t) {
  std::complex<double> total{0.0, 0.0};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& c = m.components()[i];
    const double modulus = std::exp(-c.gamma() * std::pow(std::abs(t), c.alpha()));
    if (c.mu() == 0.0) {
      total += m.weights()[i] * modulus;
    } else {
      total += m.weights()[i] * std::polar(modulus, c.mu() * t);
    }
  }
  return total;
}

double stable_tail_constant(double alpha) {
  return std::tgamma(alpha) * std::sin(kPi * alpha / 2.0) / kPi;
}

double stable_tail_mass(const StableComponent& c, double radius) {
  if (c.alpha() == 2.0) return normal_tail(radius, c.gamma());
  return std::min(1.0, 2.0 * stable_tail_constant(c.alpha()) * c.gamma() * std::pow(radius, -c.alpha()));
}

double truncation_radius(const NoiseModel& m, double eps) {
  if (!(eps > 0.0)) throw ValidationError("tail mass target must be positive");
  double shift = 0.0;
  for (const auto& c : m.components()) shift = std::max(shift, std::abs(c.mu()));
  auto mass = [&](double r) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) total += m.weights()[i] * stable_tail_mass(m.components()[i], r);
    return total;
  };
  double hi = 1.0;
  while (mass(hi) > eps) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("no finite truncation radius for requested tail mass");
  }
  double lo = hi / 2.0;
  while ((hi - lo) > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > eps ? lo : hi) = mid;
  }
  return hi + shift;
}

}  // namespace mccr
