#include "mccr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "mccr/errors.hpp"

namespace mccr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFailureBudget = 0.05;

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double validation_score(const Hypothesis& h, const Dataset& validation) {
  std::vector<double> abs_res(validation.size());
  for (std::size_t i = 0; i < validation.size(); ++i) {
    abs_res[i] = std::abs(validation.y()[i] - h(validation.x(i)));
  }
  return median(std::move(abs_res));
}

double l2_error(const ExperimentSpec& spec, const Hypothesis& fitted, const RngState& stream) {
  const L2Method method = spec.metric == L2Method::Kind::grid
                              ? L2Method::grid()
                              : L2Method::monte_carlo(spec.metric_samples, stream.child(7));
  return l2_rho_distance(fitted, spec.target, spec.domain, method);
}

TrialRecord fit_one(const ExperimentSpec& spec, const EstimatorSpec& est, std::size_t est_index,
                    const Dataset& data, std::size_t n, int trial, const RngState& stream) {
  TrialRecord rec{.method = est.label, .n = n, .trial = trial, .sigma = kNaN, .seed = spec.seed};
  const FeatureMap& space = spec.target.feature_map();
  const RngState solver_stream = stream.child(100 + est_index);
  try {
    FitReport report = [&] {
      switch (est.kind) {
        case EstimatorSpec::Kind::ols:
          return fit_ols(space, data, spec.solver.jitter);
        case EstimatorSpec::Kind::huber:
          rec.sigma = est.huber_delta;
          return fit_huber(space, data, est.huber_delta, spec.solver);
        case EstimatorSpec::Kind::mccr:
          break;
      }
      rec.sigma = est.sigma_grid.size() == 1
                      ? est.sigma_grid.front()
                      : select_sigma(space, data, est.sigma_grid, spec.solver, solver_stream.child(1)).sigma;
      return fit_mccr(space, data, rec.sigma, spec.solver, solver_stream);
    }();
    rec.l2_error = l2_error(spec, report.hypothesis, stream);
    rec.emp_risk = report.empirical_risk;
    rec.converged = report.converged;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.l2_error = kNaN;
    rec.emp_risk = kNaN;
    rec.converged = false;
    rec.error = e.what();
  }
  return rec;
}

std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, std::size_t n, int trial) {
  const RngState stream = trial_stream(spec.seed, n, trial);
  const Dataset data = generate_dataset(spec, n, stream);
  std::vector<TrialRecord> out;
  out.reserve(spec.estimators.size());
  for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
    out.push_back(fit_one(spec, spec.estimators[e], e, data, n, trial, stream));
  }
  return out;
}

MethodSummary summarize(const ExperimentSpec& spec, const std::string& method,
                        const std::vector<TrialRecord>& records) {
  MethodSummary s{.method = method, .sizes = spec.sizes};
  for (std::size_t n : spec.sizes) {
    std::vector<double> errors;
    for (const auto& r : records) {
      if (r.method != method || r.n != n) continue;
      ++s.records;
      if (r.failed) {
        ++s.failures;
      } else {
        errors.push_back(r.l2_error);
      }
    }
    s.median_error.push_back(median(std::move(errors)));
  }
  for (std::size_t k = 1; k < s.median_error.size(); ++k) {
    if (!(s.median_error[k] <= s.median_error[k - 1])) s.monotone = false;
  }
  const SlopeFit fit = fit_log_log_slope(s.sizes, s.median_error);
  s.slope = fit.slope;
  s.slope_stderr = fit.stderr_;
  return s;
}

}  // namespace

EstimatorSpec EstimatorSpec::mccr(std::vector<double> sigma_grid, std::string label) {
  return {Kind::mccr, std::move(label), std::move(sigma_grid), 1.345};
}

EstimatorSpec EstimatorSpec::ols(std::string label) { return {Kind::ols, std::move(label), {}, 1.345}; }

EstimatorSpec EstimatorSpec::huber(double delta, std::string label) {
  return {Kind::huber, std::move(label), {}, delta};
}

const char* to_string(EstimatorSpec::Kind kind) {
  switch (kind) {
    case EstimatorSpec::Kind::mccr:
      return "mccr";
    case EstimatorSpec::Kind::ols:
      return "ols";
    case EstimatorSpec::Kind::huber:
      return "huber";
  }
  return "?";
}

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw ValidationError("sizes must be non-empty");
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] <= sizes[k - 1]) throw ValidationError("sizes must be strictly increasing");
  }
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (estimators.empty()) throw ValidationError("estimators must be non-empty");
  if (!noise.is_centered()) throw ValidationError("regression noise components must have mu = 0");
  if (target.feature_map().input_dim() != domain.dim()) {
    throw ValidationError("target and domain must share the input dimension");
  }
  if (metric == L2Method::Kind::monte_carlo && metric_samples < 2) {
    throw ValidationError("monte-carlo metric needs at least 2 samples");
  }
  solver.validate();
  std::vector<std::string> labels;
  for (const auto& e : estimators) {
    if (e.label.empty()) throw ValidationError("estimator labels must be non-empty");
    if (std::find(labels.begin(), labels.end(), e.label) != labels.end()) {
      throw ValidationError("duplicate estimator label '" + e.label + "'");
    }
    labels.push_back(e.label);
    if (e.kind == EstimatorSpec::Kind::mccr) {
      if (e.sigma_grid.empty()) throw ValidationError("mccr estimator needs a sigma grid");
      for (double s : e.sigma_grid) {
        if (!(s > 0.0)) throw ValidationError("sigma must be > 0");
      }
    }
    if (e.kind == EstimatorSpec::Kind::huber && !(e.huber_delta > 0.0)) {
      throw ValidationError("huber delta must be > 0");
    }
  }
}

Dataset generate_dataset(const Domain& domain, const Hypothesis& target, const NoiseSelector& noise,
                         std::size_t n, const RngState& rng) {
  if (n == 0) throw ValidationError("dataset size must be >= 1");
  const std::size_t d = domain.dim();
  Rng x_rng(rng.child(0));
  Rng eps_rng(rng.child(1));
  std::vector<double> xs(n * d);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> x(xs.data() + i * d, d);
    domain.sample(x_rng, x);
    ys[i] = target(x) + draw_mixture(noise.at(x), eps_rng);
  }
  return Dataset(d, std::move(xs), std::move(ys));
}

Dataset generate_dataset(const ExperimentSpec& spec, std::size_t n, const RngState& rng) {
  return generate_dataset(spec.domain, spec.target, ConstantNoise(spec.noise), n, rng);
}

RngState trial_stream(std::uint64_t seed, std::size_t n, int trial) {
  return RngState{seed, 0}.child(n).child(static_cast<std::uint64_t>(trial));
}

SigmaSelection select_sigma(const FeatureMap& space, const Dataset& data, const std::vector<double>& grid,
                            const SolverConfig& cfg, const RngState& rng) {
  if (grid.empty()) throw ValidationError("sigma grid must be non-empty");
  const std::size_t train_n = (data.size() * 4) / 5;
  if (train_n < space.size() || train_n == data.size()) {
    throw ValidationError("sample too small for an 80/20 sigma-selection split");
  }
  const Dataset train = data.slice(0, train_n);
  const Dataset validation = data.slice(train_n, data.size() - train_n);
  SigmaSelection out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double score = kNaN;
    try {
      const FitReport fit = fit_mccr(space, train, grid[k], cfg, rng.child(k));
      score = validation_score(fit.hypothesis, validation);
    } catch (const NumericalError&) {
    }
    out.validation_scores.push_back(score);
    if (score < best) {
      best = score;
      out.sigma = grid[k];
    }
  }
  if (!(out.sigma > 0.0)) throw NumericalError("no sigma in the grid produced a fit");
  return out;
}

SlopeFit fit_log_log_slope(const std::vector<std::size_t>& sizes, const std::vector<double>& errors) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < sizes.size() && k < errors.size(); ++k) {
    if (errors[k] > 0.0 && std::isfinite(errors[k])) {
      xs.push_back(std::log2(static_cast<double>(sizes[k])));
      ys.push_back(std::log2(errors[k]));
    }
  }
  if (xs.size() < 2) return {kNaN, kNaN};
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  if (xs.size() < 3) return {slope, kNaN};
  double ssr = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (my + slope * (xs[k] - mx));
    ssr += e * e;
  }
  return {slope, std::sqrt(ssr / (m - 2.0) / sxx)};
}

bool RateStudyResult::degraded() const {
  return std::any_of(summaries.begin(), summaries.end(),
                     [](const MethodSummary& s) { return s.failure_rate() > kFailureBudget; });
}

const MethodSummary& RateStudyResult::summary(const std::string& method) const {
  for (const auto& s : summaries) {
    if (s.method == method) return s;
  }
  throw ValidationError("no summary for method '" + method + "'");
}

RateStudyResult run_rate_study(const ExperimentSpec& spec, unsigned jobs) {
  spec.validate();
  struct Task {
    std::size_t n;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t n : spec.sizes) {
    for (int t = 0; t < spec.trials; ++t) tasks.push_back({n, t});
  }
  std::vector<std::vector<TrialRecord>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      slots[k] = run_trial(spec, tasks[k].n, tasks[k].trial);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  RateStudyResult result;
  for (auto& slot : slots) {
    for (auto& r : slot) result.records.push_back(std::move(r));
  }
  for (const auto& e : spec.estimators) {
    result.summaries.push_back(summarize(spec, e.label, result.records));
    const auto& s = result.summaries.back();
    if (s.failure_rate() > kFailureBudget) {
      result.warnings.push_back(e.label + ": " + std::to_string(s.failures) + " of " +
                                std::to_string(s.records) + " fits failed (> 5%); excluded from the slope");
    }
  }
  return result;
}

OutlierStudyResult run_outlier_study(const ExperimentSpec& spec, unsigned jobs) {
  if (spec.noise.size() != 2) throw ValidationError("outlier study needs a two-component contamination mixture");
  auto find_kind = [&](EstimatorSpec::Kind kind) -> std::ptrdiff_t {
    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      if (spec.estimators[e].kind == kind) return static_cast<std::ptrdiff_t>(e);
    }
    throw ValidationError(std::string("outlier study needs a ") + to_string(kind) + " estimator");
  };
  const auto mccr_index = find_kind(EstimatorSpec::Kind::mccr);
  const auto ols_index = find_kind(EstimatorSpec::Kind::ols);

  OutlierStudyResult out{.study = run_rate_study(spec, jobs)};
  // The contaminating component is the one with the heavier spread.
  const auto comps = spec.noise.components();
  auto spread = [](const StableComponent& c) { return std::pow(c.gamma(), 1.0 / c.alpha()) / c.alpha(); };
  out.contamination = spread(comps[1]) >= spread(comps[0]) ? spec.noise.weights()[1] : spec.noise.weights()[0];
  for (const auto& e : spec.estimators) out.methods.push_back(e.label);
  for (std::size_t k = 0; k < spec.sizes.size(); ++k) {
    OutlierRow row{.n = spec.sizes[k]};
    for (const auto& s : out.study.summaries) row.median_error.push_back(s.median_error[k]);
    row.mccr_over_ols = row.median_error[static_cast<std::size_t>(mccr_index)] /
                        row.median_error[static_cast<std::size_t>(ols_index)];
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace mccr
