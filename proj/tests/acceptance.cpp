// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mccr/experiments.hpp"
#include "mccr/io.hpp"
#include "mccr/risk_oracle.hpp"
#include "mccr/solver.hpp"
#include "mccr/stable_noise.hpp"

using namespace mccr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // <= 0: no runtime limit
  std::function<Outcome()> body;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Sampler fidelity

Outcome sampler_fidelity() {
  const std::size_t n = 200'000;
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));
  const std::vector<std::pair<std::string, NoiseModel>> models = {
      {"alpha=2 gamma=0.5", NoiseModel(StableComponent(2.0, 0.5))},
      {"alpha=1 gamma=1", NoiseModel(StableComponent(1.0, 1.0))},
      {"alpha=1.5 gamma=1", NoiseModel(StableComponent(1.5, 1.0))},
      {"0.9 N + 0.1 Cauchy(10)", NoiseModel({StableComponent(2.0, 0.5), StableComponent(1.0, 10.0)}, {0.9, 0.1})},
  };
  bool ok = true;
  std::string detail;
  std::uint64_t stream = 0;
  for (const auto& [name, m] : models) {
    const auto xs = sample_mixture(m, {1001, stream++}, n);
    double worst = 0.0;
    for (int k = -10; k <= 10; ++k) {
      const double t = 0.5 * k;
      double re = 0.0, im = 0.0;
      for (double x : xs) {
        re += std::cos(t * x);
        im += std::sin(t * x);
      }
      const auto phi = characteristic_fn(m, t);
      worst = std::max(worst, std::abs(std::complex<double>(re / n, im / n) - phi));
    }
    ok = ok && worst <= bound;
    detail += name + ": " + fmt(worst) + "; ";
  }
  return {ok, detail + "bound 5/sqrt(n) = " + fmt(bound)};
}

// ---------------------------------------------------------------------------
// 2. Sandwich bound

Hypothesis random_hypothesis(Rng& rng, int family) {
  if (family == 0) return Hypothesis(FeatureMap::affine(1), {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)});
  std::vector<double> c(5);
  for (auto& v : c) v = rng.uniform(-1.5, 1.5);
  return Hypothesis(FeatureMap::trigonometric(1, 2), c);
}

Outcome sandwich() {
  const std::vector<std::pair<std::string, NoiseModel>> families = {
      {"gaussian", NoiseModel::centered({StableComponent(2.0, 0.5)}, {1.0})},
      {"cauchy", NoiseModel::centered({StableComponent(1.0, 1.0)}, {1.0})},
      {"mixture", NoiseModel::centered({StableComponent(2.0, 0.5), StableComponent(1.0, 10.0)}, {0.9, 0.1})},
  };
  const double sigmas[] = {0.5, 1.0, 2.0};
  Rng rng({2002, 0});
  int violations = 0, disagreements = 0, problems = 0;
  double worst_gap = 0.0, min_lower_margin = INFINITY, min_upper_margin = INFINITY;
  for (const auto& [name, noise] : families) {
    for (int k = 0; k < 50; ++k) {
      const int family = k % 2;
      const RiskProblem p{noise, random_hypothesis(rng, family), random_hypothesis(rng, family), sigmas[k % 3], 10.0,
                          Domain::unit(1)};
      const auto r = verify_sandwich(p);
      const double direct = excess_risk_direct(p);
      const double gap = std::abs(r.excess_risk - direct) / std::max(direct, 1e-12);
      ++problems;
      if (!r.holds()) ++violations;
      if (gap > 1e-6) ++disagreements;
      worst_gap = std::max(worst_gap, gap);
      if (r.lower_margin) min_lower_margin = std::min(min_lower_margin, *r.lower_margin);
      if (r.upper_margin) min_upper_margin = std::min(min_upper_margin, *r.upper_margin);
    }
  }
  return {violations == 0 && disagreements == 0,
          std::to_string(problems) + " problems, " + std::to_string(violations) + " violations (slack 1e-9), " +
              std::to_string(disagreements) + " spectral/direct gaps > 1e-6 (worst " + fmt(worst_gap) +
              "), min margins lower " + fmt(min_lower_margin) + " upper " + fmt(min_upper_margin)};
}

// ---------------------------------------------------------------------------
// 3. MM descent

Dataset synthetic(const Hypothesis& target, const NoiseModel& noise, std::size_t n, const RngState& s) {
  return generate_dataset(Domain::unit(target.feature_map().input_dim()), target, ConstantNoise(noise), n, s);
}

Outcome mm_descent() {
  const std::vector<NoiseModel> noises = {
      NoiseModel(StableComponent(2.0, 0.5)), NoiseModel(StableComponent(1.0, 1.0)),
      NoiseModel(StableComponent(1.5, 1.0)),
      NoiseModel({StableComponent(2.0, 0.5), StableComponent(2.0, 5000.0)}, {0.95, 0.05})};
  const std::vector<FeatureMap> maps = {FeatureMap::affine(1), FeatureMap::trigonometric(1, 2),
                                        FeatureMap::polynomial(2, 2)};
  const double sigmas[] = {0.5, 1.0, 2.0, 4.0};
  Rng rng({3003, 0});
  int bad_traces = 0, converged = 0, bad_stationarity = 0, traces = 0;
  double worst_rise = 0.0, worst_stationarity = 0.0;
  for (int k = 0; k < 100; ++k) {
    const FeatureMap& map = maps[k % maps.size()];
    std::vector<double> c(map.size());
    for (auto& v : c) v = rng.uniform(-2.0, 2.0);
    const std::size_t n = 100 + static_cast<std::size_t>(rng.uniform() * 900);
    const auto data = synthetic(Hypothesis(map, c), noises[k % noises.size()], n, {3003, static_cast<std::uint64_t>(k)});
    const auto fit = fit_mccr(map, data, sigmas[(k / 3) % 4], {}, {3004, static_cast<std::uint64_t>(k)});
    for (const auto& t : fit.restart_traces) {
      ++traces;
      bool ok = true;
      for (std::size_t i = 1; i < t.size(); ++i) {
        worst_rise = std::max(worst_rise, t[i] - t[i - 1]);
        if (t[i] > t[i - 1] + 1e-12) ok = false;
      }
      if (!ok) ++bad_traces;
    }
    if (fit.converged) {
      ++converged;
      worst_stationarity = std::max(worst_stationarity, fit.stationarity);
      if (fit.stationarity > 1e-6) ++bad_stationarity;
    }
  }
  return {bad_traces == 0 && bad_stationarity == 0 && converged == 100,
          std::to_string(traces) + " restart traces, " + std::to_string(bad_traces) +
              " with a rise > 1e-12 (largest increase " + fmt(worst_rise) + "); " + std::to_string(converged) +
              "/100 converged, worst stationarity " + fmt(worst_stationarity) + " (limit 1e-6)"};
}

// ---------------------------------------------------------------------------
// 4, 5, 7. Rate studies

struct Study {
  std::string name;
  ExperimentSpec spec;
  RateStudyResult result;
};

std::vector<Study> rate_studies() {
  const std::vector<double> grid = {0.5, 1.0, 2.0, 4.0};
  const std::vector<std::pair<std::string, Hypothesis>> targets = {
      {"affine", Hypothesis(FeatureMap::affine(1), {0.5, -1.0})},
      {"trig", Hypothesis(FeatureMap::trigonometric(1, 2), {0.2, 1.0, -0.5, 0.3, 0.25})},
  };
  const std::vector<std::tuple<std::string, NoiseModel, std::vector<double>>> noises = {
      {"gaussian", NoiseModel(StableComponent(2.0, 0.5)), {2.0}},
      {"cauchy", NoiseModel(StableComponent(1.0, 1.0)), grid},
      {"contaminated", NoiseModel({StableComponent(2.0, 0.5), StableComponent(2.0, 5000.0)}, {0.95, 0.05}), grid},
  };
  std::vector<Study> out;
  for (const auto& [tname, target] : targets) {
    for (const auto& [nname, noise, sigmas] : noises) {
      ExperimentSpec spec{
          .target = target,
          .noise = noise,
          .estimators = {EstimatorSpec::mccr(sigmas), EstimatorSpec::ols()},
          .sizes = {128, 256, 512, 1024, 2048, 4096, 8192},
          .trials = 20,
          .seed = 20240501,
      };
      out.push_back({nname + "/" + tname, spec, RateStudyResult{}});
    }
  }
  return out;
}

std::vector<Study>& studies() {
  static std::vector<Study> s = rate_studies();
  return s;
}

Outcome rate_reproduction() {
  bool ok = true;
  std::string detail;
  for (auto& s : studies()) {
    s.result = run_rate_study(s.spec);
    const auto& m = s.result.summary("mccr");
    ok = ok && m.slope <= -0.85 && !s.result.degraded();
    detail += s.name + " " + fmt(m.slope) + " +/- " + fmt(2.0 * m.slope_stderr) + "; ";
  }
  return {ok, "mccr slopes (limit -0.85): " + detail};
}

Outcome least_squares_contrast() {
  bool ok = true;
  std::string detail;
  for (const auto& s : studies()) {
    if (s.name.rfind("cauchy", 0) != 0) continue;
    if (s.result.records.empty()) return {false, "criterion 4 did not run"};
    const auto& ols = s.result.summary("ols");
    const auto& mccr = s.result.summary("mccr");
    const double ratio = mccr.median_error.back() / ols.median_error.back();
    const bool fails = ols.slope >= -0.3 || !ols.monotone;
    ok = ok && fails && ratio < 0.2;
    detail += s.name + ": ols slope " + fmt(ols.slope) + (ols.monotone ? " monotone" : " non-monotone") +
              ", mccr/ols at 8192 = " + fmt(ratio) + "; ";
  }
  return {ok, detail};
}

Outcome determinism() {
  bool ok = true;
  std::string detail;
  for (const auto& s : studies()) {
    if (s.result.records.empty()) return {false, "criterion 4 did not run"};
    const std::string first = io::sha256_hex(io::results_csv(s.result));
    const std::string second = io::sha256_hex(io::results_csv(run_rate_study(s.spec)));
    ok = ok && first == second;
    detail += s.name + " " + first.substr(0, 12) + (first == second ? " ==" : " !=") + "; ";
  }
  return {ok, "results.csv sha256 on rerun: " + detail};
}

// ---------------------------------------------------------------------------
// 6. Large-sigma equivalence

Outcome sigma_limit() {
  Rng rng({6006, 0});
  const std::vector<FeatureMap> maps = {FeatureMap::affine(1), FeatureMap::trigonometric(1, 2),
                                        FeatureMap::polynomial(2, 2), FeatureMap::affine(3)};
  int bad = 0;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const FeatureMap& map = maps[k % maps.size()];
    std::vector<double> c(map.size());
    for (auto& v : c) v = rng.uniform(-2.0, 2.0);
    const auto data = synthetic(Hypothesis(map, c), NoiseModel(StableComponent(2.0, 0.5)), 200 + 50 * k,
                                {6006, static_cast<std::uint64_t>(k)});
    const FitReport mccr_fit = fit_mccr(map, data, 1e6, {}, {6007, static_cast<std::uint64_t>(k)});
    const FitReport ols_fit = fit_ols(map, data);
    const auto a = mccr_fit.hypothesis.coefficients();
    const auto b = ols_fit.hypothesis.coefficients();
    const Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
    const Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
    const double rel = (va - vb).norm() / vb.norm();
    worst = std::max(worst, rel);
    if (rel > 1e-6) ++bad;
  }
  return {bad == 0, "20 problems, worst relative coefficient gap " + fmt(worst) + " (limit 1e-6)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "sampler fidelity", 10.0, sampler_fidelity},
      {2, "excess-risk sandwich", 60.0, sandwich},
      {3, "MM descent", 30.0, mm_descent},
      {4, "rate reproduction", 300.0, rate_reproduction},
      {5, "least-squares contrast", 0.0, least_squares_contrast},
      {6, "large-sigma equivalence", 5.0, sigma_limit},
      {7, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s <= 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::string timing = fmt(secs) + " s";
    if (c.budget_s > 0.0) timing += " of " + fmt(c.budget_s) + " s" + (in_time ? "" : " EXCEEDED");
    std::printf("[%s] %d %s (%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), timing.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
