#pragma once

#include <optional>

#include "mccr/hypothesis.hpp"
#include "mccr/stable_noise.hpp"

namespace mccr {

/// Population comparison of a candidate f against the truth f* under
/// centered mixture-stable noise, with loss scale sigma and sup-norm budget M.
struct RiskProblem {
  NoiseModel noise;
  Hypothesis target;
  Hypothesis candidate;
  double sigma = 1.0;
  double bound = 10.0;  // M
  Domain domain = Domain::unit(1);
  /// Rule for the outer integral over rho_X.
  L2Method outer = L2Method::grid();

  /// Throws ValidationError unless the noise is centered, dimensions agree,
  /// sigma and M are positive and both functions satisfy sup |.| <= M on the
  /// check grid.
  void validate() const;
};

/// E(f) - E(f*) through the Fourier identity
///   sigma^3 / sqrt(pi) * sum_i lambda_i int_X int_R exp(-sigma^2 xi^2 / 4 - gamma_i |xi|^alpha_i)
///                         sin^2(xi (f - f*)(x) / 2) dxi drho_X(x).
/// The xi-integral starts at 2048 Gauss-Legendre nodes on [0, Xi] and doubles
/// until the total moves by less than 1e-10 relative. Throws NumericalError
/// carrying the last estimate if it never settles.
double excess_risk_spectral(const RiskProblem& p);

/// E(f) - E(f*) by direct quadrature of the loss difference against the noise
/// density, sigma^2 int_X int_R [g(t) - g(t - u_x)] p(t) dt drho_X with
/// g(t) = exp(-t^2/sigma^2) and u_x = f(x) - f*(x). Independent of the Fourier
/// route; only the outer rule is shared.
double excess_risk_direct(const RiskProblem& p);

/// Lower-bound constant
///   c = 2 sigma^3 / pi^(5/2) * sum_i lambda_i int_{-pi/2M}^{pi/2M} xi^2 exp(-sigma^2 xi^2/4 - gamma_i |xi|^alpha_i) dxi
/// by 2048-node composite Gauss-Legendre.
double constant_c(const NoiseModel& noise, double sigma, double bound);

struct SandwichReport {
  double excess_risk = 0.0;   // spectral
  double l2_distance = 0.0;   // ||f - f*||^2_rho
  double constant = 0.0;      // c
  double lower = 0.0;         // c * ||f - f*||^2_rho
  bool lower_ok = false;
  bool upper_ok = false;
  /// excess / lower and l2 / excess; empty when the denominator is zero.
  std::optional<double> lower_margin;
  std::optional<double> upper_margin;
  double slack = 1e-9;

  bool holds() const { return lower_ok && upper_ok; }
};

SandwichReport verify_sandwich(const RiskProblem& p);

}  // namespace mccr
