#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mccr/quadrature.hpp"

using namespace mccr;

TEST_CASE("gauss-legendre rule integrates polynomials of degree 2n-1 exactly") {
  for (std::size_t n : {1, 2, 5, 16, 64}) {
    const auto& rule = quad::gauss_legendre(n);
    double weight_sum = 0.0;
    for (double w : rule.weights) weight_sum += w;
    CHECK(weight_sum == doctest::Approx(2.0).epsilon(1e-14));
    const int degree = static_cast<int>(2 * n - 2);  // even, so the integral is nonzero
    double integral = 0.0;
    for (std::size_t k = 0; k < n; ++k) integral += rule.weights[k] * std::pow(rule.nodes[k], degree);
    CHECK(integral == doctest::Approx(2.0 / (degree + 1)).epsilon(1e-13));
  }
}

TEST_CASE("nodes are ascending and symmetric") {
  const auto& rule = quad::gauss_legendre(64);
  for (std::size_t k = 1; k < 64; ++k) CHECK(rule.nodes[k] > rule.nodes[k - 1]);
  for (std::size_t k = 0; k < 64; ++k) CHECK(rule.nodes[k] == doctest::Approx(-rule.nodes[63 - k]).epsilon(1e-15));
}

TEST_CASE("refined integration converges on smooth and oscillatory integrands") {
  auto r = quad::integrate_refined([](double x) { return std::exp(-x * x); }, -8.0, 8.0);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  auto osc = quad::integrate_refined([](double x) { return std::cos(50.0 * x); }, 0.0, 1.0);
  CHECK(osc.value == doctest::Approx(std::sin(50.0) / 50.0).epsilon(1e-12));
}

TEST_CASE("refinement gives up with the last estimate attached") {
  quad::RefineOptions opt;
  opt.max_doublings = 1;
  opt.rel_tol = 1e-300;
  CHECK_THROWS_AS(quad::integrate_refined([](double x) { return std::sqrt(x); }, 0.0, 1.0, opt), NumericalError);
}
