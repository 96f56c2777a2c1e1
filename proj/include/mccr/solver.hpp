#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mccr/hypothesis.hpp"
#include "mccr/mcc_core.hpp"
#include "mccr/rng.hpp"

namespace mccr {

struct SolverConfig {
  int max_iterations = 500;
  /// Stop once the objective changes by less than this fraction...
  double rel_tol = 1e-10;
  /// ...and the weighted normal-equation residual is below this fraction of
  /// ||Phi^T W y||_inf. A run whose objective stalls at roundoff counts as
  /// converged once that ratio is below 1e-6.
  double stationarity_tol = 1e-9;
  int restarts = 5;
  /// Perturbed starts draw beta_ols + perturbation * |beta_ols|_inf * U(-1, 1)^p.
  double perturbation = 0.5;
  /// Ridge added on detected singularity, relative to trace(G) / p.
  double jitter = 1e-10;

  void validate() const;
};

struct FitReport {
  Hypothesis hypothesis;
  LossSpec loss;
  double empirical_risk = 0.0;
  /// Objective per iteration of the winning restart (entry 0 is the start).
  std::vector<double> trace;
  /// Traces of every restart, in restart order; empty entries mark restarts
  /// abandoned for degenerate weights.
  std::vector<std::vector<double>> restart_traces;
  int iterations = 0;
  bool converged = false;
  int winning_restart = 0;
  bool jitter_used = false;
  /// ||Phi^T W r||_inf / ||Phi^T W y||_inf at the returned coefficients
  /// (W = I for least squares).
  double stationarity = 0.0;
};

Eigen::MatrixXd design_matrix(const FeatureMap& space, const Dataset& data);

/// Relative stationarity residual of the correntropy objective at beta.
double mcc_stationarity(const FeatureMap& space, const Dataset& data, std::span<const double> beta,
                        double sigma);

/// Correntropy ERM by half-quadratic IRLS. Restart 0 starts from least
/// squares, the others from perturbations drawn on rng.child(r). Lowest final
/// risk wins; ties within 1e-14 go to the lower restart index.
///
/// Throws ValidationError when n < p or sigma <= 0, and NumericalError when
/// every restart ends with all weights below 1e-300 (sigma too small for the data).
FitReport fit_mccr(const FeatureMap& space, const Dataset& data, double sigma,
                   const SolverConfig& cfg, const RngState& rng);

/// Least squares via the normal equations; the trace holds a single entry.
FitReport fit_ols(const FeatureMap& space, const Dataset& data, double jitter = 1e-10);

/// Huber M-estimator by IRLS from the least-squares start (convex, no restarts).
FitReport fit_huber(const FeatureMap& space, const Dataset& data, double delta,
                    const SolverConfig& cfg = {});

}  // namespace mccr
