#include "mccr/risk_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mccr/errors.hpp"
#include "mccr/quadrature.hpp"

namespace mccr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDecayExponent = 40.0;
constexpr double kSandwichSlack = 1e-9;
constexpr double kRefineTol = 1e-10;
constexpr int kMaxDoublings = 8;
constexpr std::size_t kMaxDirectPanels = 4096;

struct OuterRule {
  std::vector<double> u;  // f(x) - f*(x) at the nodes
  std::vector<double> w;  // probability weights
};

OuterRule outer_rule(const RiskProblem& p) {
  OuterRule out;
  if (p.outer.kind == L2Method::Kind::grid) {
    const ProductRule rule = tensor_gauss_legendre(p.domain);
    out.u.reserve(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      out.u.push_back(p.candidate(rule.point(i)) - p.target(rule.point(i)));
    }
    out.w = rule.weights;
    return out;
  }
  if (p.outer.samples == 0) throw ValidationError("monte-carlo outer rule needs samples > 0");
  Rng rng(p.outer.rng);
  std::vector<double> x(p.domain.dim());
  const double w = 1.0 / static_cast<double>(p.outer.samples);
  for (std::size_t i = 0; i < p.outer.samples; ++i) {
    p.domain.sample(rng, x);
    out.u.push_back(p.candidate(x) - p.target(x));
    out.w.push_back(w);
  }
  return out;
}

// Per component, the first xi at which either factor of the integrand has
// decayed below exp(-40); the overall cut-off also keeps the Gaussian factor
// below exp(-16).
double spectral_cutoff(const NoiseModel& noise, double sigma) {
  const double gaussian = std::sqrt(4.0 * kDecayExponent) / sigma;
  double cutoff = 8.0 / sigma;
  for (const auto& c : noise.components()) {
    const double stable = std::pow(kDecayExponent / c.gamma(), 1.0 / c.alpha());
    cutoff = std::max(cutoff, std::min(stable, gaussian));
  }
  return cutoff;
}

double spectral_kernel(const NoiseModel& noise, double sigma, double xi) {
  double k = 0.0;
  const double gauss = sigma * sigma * xi * xi / 4.0;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const auto& c = noise.components()[i];
    k += noise.weights()[i] * std::exp(-gauss - c.gamma() * std::pow(std::abs(xi), c.alpha()));
  }
  return k;
}

double spectral_pass(const RiskProblem& p, const OuterRule& outer, double cutoff, std::size_t panels) {
  const quad::PanelGrid grid = quad::make_panel_grid(0.0, cutoff, panels);
  std::vector<double> kw(grid.x.size());
  for (std::size_t j = 0; j < grid.x.size(); ++j) kw[j] = grid.w[j] * spectral_kernel(p.noise, p.sigma, grid.x[j]);
  double total = 0.0;
  for (std::size_t k = 0; k < outer.u.size(); ++k) {
    const double half_u = 0.5 * outer.u[k];
    if (half_u == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
      const double s = std::sin(grid.x[j] * half_u);
      inner += kw[j] * s * s;
    }
    total += outer.w[k] * 2.0 * inner;  // even integrand: [-Xi, Xi] = 2 [0, Xi]
  }
  return std::pow(p.sigma, 3) / std::sqrt(kPi) * total;
}

// g(t) - g(t - u) with g(t) = exp(-t^2/sigma^2), cancellation-free for small u.
double kernel_difference(double t, double u, double inv_s2) {
  const double e = (u * u - 2.0 * t * u) * inv_s2;
  if (std::abs(e) < 1.0) return -std::exp(-t * t * inv_s2) * std::expm1(-e);
  return std::exp(-t * t * inv_s2) - std::exp(-(t - u) * (t - u) * inv_s2);
}

double direct_pass(const RiskProblem& p, const OuterRule& outer, double lo, double hi, std::size_t panels) {
  const quad::PanelGrid grid = quad::make_panel_grid(lo, hi, panels);
  std::vector<double> dens(grid.x.size());
  for (std::size_t j = 0; j < grid.x.size(); ++j) dens[j] = grid.w[j] * mixture_density(p.noise, grid.x[j]);
  const double inv_s2 = 1.0 / (p.sigma * p.sigma);
  double total = 0.0;
  for (std::size_t k = 0; k < outer.u.size(); ++k) {
    const double u = outer.u[k];
    if (u == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j < grid.x.size(); ++j) inner += dens[j] * kernel_difference(grid.x[j], u, inv_s2);
    total += outer.w[k] * inner;
  }
  return p.sigma * p.sigma * total;
}

template <class Pass>
double refine(Pass pass, std::size_t panels, const char* what) {
  double previous = pass(panels);
  for (int k = 0; k < kMaxDoublings; ++k) {
    panels *= 2;
    const double current = pass(panels);
    if (std::abs(current - previous) <= kRefineTol * std::abs(current)) return current;
    previous = current;
  }
  throw NumericalError(std::string(what) + " quadrature did not reach 1e-10 relative stability", previous);
}

}  // namespace

void RiskProblem::validate() const {
  if (!noise.is_centered()) throw ValidationError("regression noise components must have mu = 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be > 0");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ValidationError("M must be > 0");
  if (target.feature_map().input_dim() != domain.dim() || candidate.feature_map().input_dim() != domain.dim()) {
    throw ValidationError("hypotheses and domain must share the input dimension");
  }
  if (sup_norm_on_grid(target, domain) > bound) throw ValidationError("target violates sup-norm budget M");
  if (sup_norm_on_grid(candidate, domain) > bound) throw ValidationError("candidate violates sup-norm budget M");
}

double excess_risk_spectral(const RiskProblem& p) {
  p.validate();
  const OuterRule outer = outer_rule(p);
  const double cutoff = spectral_cutoff(p.noise, p.sigma);
  return refine([&](std::size_t panels) { return spectral_pass(p, outer, cutoff, panels); }, 32, "spectral");
}

double excess_risk_direct(const RiskProblem& p) {
  p.validate();
  const OuterRule outer = outer_rule(p);
  const auto [u_min, u_max] = std::minmax_element(outer.u.begin(), outer.u.end());
  // Beyond this distance from both 0 and u the kernel difference is below exp(-45).
  const double reach = p.sigma * std::sqrt(45.0);
  const double lo = std::min(0.0, *u_min) - reach;
  const double hi = std::max(0.0, *u_max) + reach;
  double width = p.sigma;
  for (const auto& c : p.noise.components()) width = std::min(width, std::pow(c.gamma(), 1.0 / c.alpha()));
  const double wanted = std::ceil((hi - lo) / (0.5 * width));
  const auto panels = static_cast<std::size_t>(std::clamp(wanted, 4.0, static_cast<double>(kMaxDirectPanels)));
  return refine([&](std::size_t n) { return direct_pass(p, outer, lo, hi, n); }, panels, "direct");
}

double constant_c(const NoiseModel& noise, double sigma, double bound) {
  if (!noise.is_centered()) throw ValidationError("regression noise components must have mu = 0");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
  if (!(bound > 0.0)) throw ValidationError("M must be > 0");
  const double window = kPi / (2.0 * bound);
  const double half = quad::integrate_panels(
      [&](double xi) { return xi * xi * spectral_kernel(noise, sigma, xi); }, 0.0, window, 32, 64);
  return 2.0 * std::pow(sigma, 3) / std::pow(kPi, 2.5) * 2.0 * half;
}

SandwichReport verify_sandwich(const RiskProblem& p) {
  p.validate();
  SandwichReport r;
  r.excess_risk = excess_risk_spectral(p);
  r.l2_distance = l2_rho_distance(p.candidate, p.target, p.domain, p.outer);
  r.constant = constant_c(p.noise, p.sigma, p.bound);
  r.lower = r.constant * r.l2_distance;
  r.slack = kSandwichSlack;
  r.lower_ok = r.lower <= r.excess_risk + kSandwichSlack;
  r.upper_ok = r.excess_risk <= r.l2_distance + kSandwichSlack;
  if (r.lower > 0.0) r.lower_margin = r.excess_risk / r.lower;
  if (r.excess_risk > 0.0) r.upper_margin = r.l2_distance / r.excess_risk;
  return r;
}

}  // namespace mccr
