#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mccr/errors.hpp"
#include "mccr/quadrature.hpp"
#include "mccr/stable_noise.hpp"

using namespace mccr;

namespace {

constexpr double kPi = std::numbers::pi;

double cauchy_cdf(double x, double gamma) { return 0.5 + std::atan(x / gamma) / kPi; }
double normal_cdf_var(double x, double variance) { return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance)); }

template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double sup_ecf_gap(const NoiseModel& m, const std::vector<double>& xs) {
  double worst = 0.0;
  for (int k = -10; k <= 10; ++k) {
    const double t = 0.5 * k;
    double ecf = 0.0;
    for (double x : xs) ecf += std::cos(t * x);
    ecf /= static_cast<double>(xs.size());
    worst = std::max(worst, std::abs(ecf - characteristic_fn(m, t).real()));
  }
  return worst;
}

// 2 * int_0^T p(t) dt on octave panels [0,1], [1,2], [2,4], ... (p symmetric).
double symmetric_mass(const NoiseModel& m, double radius) {
  double total = quad::integrate_panels([&](double t) { return mixture_density(m, t); }, 0.0, 1.0, 4);
  for (double lo = 1.0; lo < radius; lo *= 2.0) {
    const double hi = std::min(2.0 * lo, radius);
    total += quad::integrate_panels([&](double t) { return mixture_density(m, t); }, lo, hi, 2);
  }
  return 2.0 * total;
}

}  // namespace

TEST_CASE("component validation names the bad parameter") {
  CHECK_THROWS_WITH_AS(StableComponent(2.5, 1.0), "alpha must be in (0,2]", ValidationError);
  CHECK_THROWS_WITH_AS(StableComponent(0.0, 1.0), "alpha must be in (0,2]", ValidationError);
  CHECK_THROWS_WITH_AS(StableComponent(1.0, 0.0), "gamma must be > 0", ValidationError);
  CHECK_THROWS_WITH_AS(StableComponent(1.0, 1.0, INFINITY), "mu must be finite", ValidationError);
  CHECK_NOTHROW(StableComponent(2.0, 1e-30));
}

TEST_CASE("noise model normalizes weights") {
  NoiseModel m({StableComponent(2.0, 0.5), StableComponent(1.0, 1.0)}, {2.0, 2.0});
  CHECK(m.weights()[0] == 0.5);
  CHECK(m.weights()[1] == 0.5);

  Rng rng({11, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    std::vector<StableComponent> comps(k, StableComponent(1.0, 1.0));
    std::vector<double> w(k);
    for (auto& v : w) v = std::exp(rng.uniform(-20.0, 20.0));
    NoiseModel model(comps, w);
    double sum = 0.0;
    for (double v : model.weights()) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }

  CHECK_THROWS_AS(NoiseModel({StableComponent(1.0, 1.0)}, {-1.0}), ValidationError);
  CHECK_THROWS_AS(NoiseModel({StableComponent(1.0, 1.0)}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(NoiseModel({}, {}), ValidationError);
  CHECK_THROWS_AS(NoiseModel::centered({StableComponent(1.0, 1.0, 0.3)}, {1.0}), ValidationError);
  CHECK_NOTHROW(NoiseModel({StableComponent(1.0, 1.0, 0.3)}, {1.0}));
}

TEST_CASE("CMS transform at zero angle returns the location") {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    StableComponent c(alpha, 3.0, 5.0);
    for (double w : {0.1, 1.0, 7.0}) CHECK(cms_transform(c, 0.0, w) == 5.0);
  }
}

TEST_CASE("alpha = 2 samples have variance 2 gamma") {
  const auto xs = sample_stable(StableComponent(2.0, 1.0), {1, 0}, 1'000'000);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (xs.size() - 1);
  CHECK(var == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("alpha = 1 samples follow the Cauchy law") {
  auto xs = sample_stable(StableComponent(1.0, 1.0), {2, 0}, 1'000'000);
  std::size_t below_one = 0;
  for (double x : xs) below_one += x <= 1.0;
  const double ecdf = static_cast<double>(below_one) / xs.size();
  CHECK(std::abs(ecdf - cauchy_cdf(1.0, 1.0)) <= 0.005);
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  CHECK(std::abs(xs[xs.size() / 2]) <= 0.01);
}

TEST_CASE("one-component mixture reproduces the component stream") {
  StableComponent c(1.0, 1.0);
  const RngState state{99, 4};
  CHECK(sample_mixture(NoiseModel(c), state, 1000) == sample_stable(c, state, 1000));
}

TEST_CASE("mixture tail frequency matches the Cauchy component tail") {
  NoiseModel m({StableComponent(2.0, 0.5), StableComponent(1.0, 10.0)}, {0.9, 0.1});
  const auto xs = sample_mixture(m, {3, 0}, 1'000'000);
  std::size_t far = 0;
  for (double x : xs) far += std::abs(x) > 20.0;
  // 0.1 (1 - (2/pi) atan(2)) + 0.9 P(|N(0,1)| > 20), evaluated with mpmath
  CHECK(std::abs(static_cast<double>(far) / xs.size() - 0.0295167235300866) <= 0.002);
}

TEST_CASE("zero-weight components are never drawn") {
  NoiseModel m({StableComponent(1.0, 1.0), StableComponent(2.0, 1e-30), StableComponent(1.0, 1e6)}, {0.0, 1.0, 0.0});
  for (double x : sample_mixture(m, {8, 0}, 100'000)) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("samples are reproducible per stream and differ across streams") {
  NoiseModel m({StableComponent(1.5, 1.0), StableComponent(2.0, 0.5)}, {0.3, 0.7});
  CHECK(sample_mixture(m, {5, 1}, 64) == sample_mixture(m, {5, 1}, 64));
  CHECK(sample_mixture(m, {5, 1}, 64) != sample_mixture(m, {5, 2}, 64));
  CHECK(sample_mixture(m, {5, 1}, 64) != sample_mixture(m, {6, 1}, 64));
}

TEST_CASE("empirical characteristic function stays within 5/sqrt(n)") {
  const std::size_t n = 200'000;
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));
  const std::vector<NoiseModel> models = {
      NoiseModel(StableComponent(2.0, 0.5)),
      NoiseModel(StableComponent(1.0, 1.0)),
      NoiseModel(StableComponent(1.5, 1.0)),
      NoiseModel(StableComponent(0.7, 0.5)),
      NoiseModel({StableComponent(2.0, 0.5), StableComponent(1.0, 10.0)}, {0.9, 0.1}),
  };
  std::uint64_t stream = 0;
  for (const auto& m : models) {
    const auto xs = sample_mixture(m, {2024, stream++}, n);
    CHECK(sup_ecf_gap(m, xs) <= bound);
  }
}

TEST_CASE("Kolmogorov-Smirnov against closed-form CDFs at the 0.001 level") {
  const std::size_t n = 100'000;
  const double critical = 1.94947 / std::sqrt(static_cast<double>(n));
  const auto normal = sample_stable(StableComponent(2.0, 0.8), {17, 0}, n);
  CHECK(ks_statistic(normal, [](double x) { return normal_cdf_var(x, 1.6); }) < critical);
  const auto cauchy = sample_stable(StableComponent(1.0, 2.0), {17, 1}, n);
  CHECK(ks_statistic(cauchy, [](double x) { return cauchy_cdf(x, 2.0); }) < critical);
}

TEST_CASE("closed-form densities") {
  CHECK(mixture_density(NoiseModel(StableComponent(1.0, 1.0)), 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(mixture_density(NoiseModel(StableComponent(2.0, 0.5)), 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-15));
  // gamma^2 sits in the denominator: p(t) = gamma / (pi (t^2 + gamma^2)).
  CHECK(stable_density(StableComponent(1.0, 3.0), 4.0) == doctest::Approx(3.0 / (kPi * 25.0)).epsilon(1e-15));
}

TEST_CASE("general-alpha density matches high-precision inversion") {
  // (1/pi) int_0^inf exp(-u^alpha) cos(u t) du from mpmath (quadosc, 30 digits).
  struct Ref {
    double alpha, t, p;
  };
  const Ref refs[] = {
      {1.5, 0.0, 0.287352751452164445}, {1.5, 0.7, 0.240784198496686831}, {1.5, 1.0, 0.202038159609575118},
      {1.5, 3.0, 0.0315094236164362348}, {1.5, 10.0, 0.00104777602493492697},
      {1.5, 29.0, 6.74336530374178724e-05}, {1.5, 31.0, 5.69663134884580491e-05},
      {1.5, 50.0, 1.70793647535327699e-05}, {1.5, 200.0, 5.29524999500986784e-07},
      {0.8, 0.0, 0.360646086635293555}, {0.8, 1.0, 0.131846236928510945}, {0.8, 5.0, 0.0132442618821019164},
      {0.8, 40.0, 3.59080637026793808e-04},
  };
  for (const auto& r : refs) {
    CAPTURE(r.alpha);
    CAPTURE(r.t);
    const double p = stable_density(StableComponent(r.alpha, 1.0), r.t);
    CHECK(std::abs(p - r.p) <= 1e-9 + 1e-7 * r.p);
  }
  // Scale and location: p(t; gamma, mu) = gamma^(-1/alpha) p1((t - mu) gamma^(-1/alpha)).
  const double scale = std::pow(2.0, 1.0 / 1.5);
  CHECK(stable_density(StableComponent(1.5, 2.0, 1.0), 1.0 + 3.0 * scale) ==
        doctest::Approx(0.0315094236164362348 / scale).epsilon(1e-7));
}

TEST_CASE("densities are symmetric about zero for centered models") {
  NoiseModel m({StableComponent(2.0, 0.5), StableComponent(1.0, 1.0), StableComponent(1.5, 2.0)}, {0.5, 0.3, 0.2});
  CHECK(mixture_density(m, 0.7) == doctest::Approx(mixture_density(m, -0.7)).epsilon(1e-14));
}

TEST_CASE("mixture density integrates to one over the tail-bounded window") {
  const std::vector<NoiseModel> models = {
      NoiseModel(StableComponent(2.0, 0.5)),
      NoiseModel(StableComponent(1.0, 1.0)),
      NoiseModel(StableComponent(1.5, 1.0)),
      NoiseModel({StableComponent(2.0, 0.5), StableComponent(1.5, 1.0)}, {0.7, 0.3}),
  };
  for (const auto& m : models) {
    const double radius = truncation_radius(m, 1e-7);
    CHECK(std::abs(symmetric_mass(m, radius) - 1.0) <= 1e-6);
  }
}

TEST_CASE("tail constant and truncation radius") {
  CHECK(stable_tail_constant(1.0) == doctest::Approx(1.0 / kPi));
  CHECK(stable_tail_constant(2.0) == doctest::Approx(0.0).epsilon(1e-15));
  const NoiseModel cauchy(StableComponent(1.0, 1.0));
  const double r = truncation_radius(cauchy, 1e-7);
  // Two-sided Cauchy tail 2/(pi r) ~ 1e-7.
  CHECK(r == doctest::Approx(2.0 / (kPi * 1e-7)).epsilon(2e-3));
}

TEST_CASE("characteristic function") {
  NoiseModel m({StableComponent(2.0, 0.5), StableComponent(1.0, 10.0)}, {0.9, 0.1});
  CHECK(characteristic_fn(m, 0.0) == std::complex<double>(1.0, 0.0));
  CHECK(characteristic_fn(NoiseModel(StableComponent(1.0, 2.0)), 1.0).real() ==
        doctest::Approx(0.1353352832366127).epsilon(1e-15));
  for (double t : {0.3, 1.0, 4.0}) {
    const auto plus = characteristic_fn(m, t);
    const auto minus = characteristic_fn(m, -t);
    CHECK(plus.real() == minus.real());
    CHECK(plus.imag() == 0.0);
    CHECK(minus.imag() == 0.0);
  }
  const auto shifted = characteristic_fn(NoiseModel(StableComponent(1.0, 1.0, 2.0)), 1.0);
  CHECK(shifted.real() == doctest::Approx(std::exp(-1.0) * std::cos(2.0)));
  CHECK(shifted.imag() == doctest::Approx(std::exp(-1.0) * std::sin(2.0)));
}

TEST_CASE("noise selector hook returns the constant model everywhere") {
  ConstantNoise sel(NoiseModel(StableComponent(1.0, 1.0)));
  const double a[] = {0.1};
  const double b[] = {0.9};
  CHECK(&sel.at(a) == &sel.at(b));
}
