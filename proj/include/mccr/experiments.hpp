#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mccr/hypothesis.hpp"
#include "mccr/mcc_core.hpp"
#include "mccr/solver.hpp"
#include "mccr/stable_noise.hpp"

namespace mccr {

struct EstimatorSpec {
  enum class Kind { mccr, ols, huber };
  Kind kind = Kind::mccr;
  std::string label;               // defaults to the kind name
  std::vector<double> sigma_grid;  // mccr: one value fits directly, several trigger selection
  double huber_delta = 1.345;

  static EstimatorSpec mccr(std::vector<double> sigma_grid, std::string label = "mccr");
  static EstimatorSpec ols(std::string label = "ols");
  static EstimatorSpec huber(double delta = 1.345, std::string label = "huber");
};

const char* to_string(EstimatorSpec::Kind kind);

struct ExperimentSpec {
  enum class Study { rate, outlier };

  Study study = Study::rate;
  Domain domain = Domain::unit(1);
  Hypothesis target;
  NoiseModel noise;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::size_t> sizes{128, 256, 512, 1024, 2048, 4096, 8192};
  int trials = 20;
  std::uint64_t seed = 0;
  /// Error metric ||f_z - f*||^2_rho: grid quadrature or Monte Carlo.
  L2Method::Kind metric = L2Method::Kind::grid;
  std::size_t metric_samples = 100000;
  SolverConfig solver{};

  void validate() const;
};

/// Y = f*(X) + eps with X uniform on the domain (stream rng.child(0)) and eps
/// drawn per point from the selector (stream rng.child(1)).
Dataset generate_dataset(const Domain& domain, const Hypothesis& target, const NoiseSelector& noise,
                         std::size_t n, const RngState& rng);
Dataset generate_dataset(const ExperimentSpec& spec, std::size_t n, const RngState& rng);

/// Stream of the dataset for (n, trial): derived only from the base seed.
RngState trial_stream(std::uint64_t seed, std::size_t n, int trial);

struct SigmaSelection {
  double sigma = 0.0;
  std::vector<double> validation_scores;  // NaN where the fit failed
};

/// First 80% of the rows train, the rest validate; the sigma with the
/// smallest validation median absolute residual wins (first on ties).
SigmaSelection select_sigma(const FeatureMap& space, const Dataset& data, const std::vector<double>& grid,
                            const SolverConfig& cfg, const RngState& rng);

struct TrialRecord {
  std::string method;
  std::size_t n = 0;
  int trial = 0;
  double sigma = 0.0;  // sigma for mccr, delta for huber, NaN for ols
  double l2_error = 0.0;
  double emp_risk = 0.0;
  bool converged = false;
  bool failed = false;
  std::uint64_t seed = 0;
  std::string error;
};

struct MethodSummary {
  std::string method;
  std::vector<std::size_t> sizes;
  std::vector<double> median_error;  // per size, failed records excluded
  double slope = 0.0;                // of log2 median error on log2 n
  double slope_stderr = 0.0;
  bool monotone = true;              // median error non-increasing in n
  std::size_t records = 0;
  std::size_t failures = 0;

  double failure_rate() const { return records ? static_cast<double>(failures) / records : 0.0; }
};

struct RateStudyResult {
  std::vector<TrialRecord> records;  // ordered by (n, trial, estimator)
  std::vector<MethodSummary> summaries;
  std::vector<std::string> warnings;

  /// Some method lost more than 5% of its records to solver failures.
  bool degraded() const;
  const MethodSummary& summary(const std::string& method) const;
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};

/// Least-squares slope of log2(err) on log2(n) with its standard error.
SlopeFit fit_log_log_slope(const std::vector<std::size_t>& sizes, const std::vector<double>& errors);

/// Runs every (n, trial) on up to `jobs` threads; output does not depend on jobs.
RateStudyResult run_rate_study(const ExperimentSpec& spec, unsigned jobs = 1);

struct OutlierRow {
  std::size_t n = 0;
  std::vector<double> median_error;  // per estimator, spec order
  double mccr_over_ols = 0.0;
};

struct OutlierStudyResult {
  RateStudyResult study;
  double contamination = 0.0;  // weight of the widest component
  std::vector<std::string> methods;
  std::vector<OutlierRow> rows;
};

/// Rate study on a two-component contamination mixture plus the per-n table of
/// median errors and the MCCR/OLS ratio (first estimator of each kind).
OutlierStudyResult run_outlier_study(const ExperimentSpec& spec, unsigned jobs = 1);

}  // namespace mccr
