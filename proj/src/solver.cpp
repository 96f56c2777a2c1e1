#include "mccr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mccr/errors.hpp"

namespace mccr {

namespace {

// log(1e-300): below this every half-quadratic weight underflows.
const double kLogWeightFloor = std::log(1e-300);
// Fixed-point tolerance accepted when the objective can no longer decrease.
constexpr double kStallStationarity = 1e-6;
// Below this reciprocal condition the Gram route loses too many digits.
constexpr double kCholeskyRcond = 1e-8;

void require_enough_rows(const FeatureMap& space, const Dataset& data) {
  if (data.dim() != space.input_dim()) {
    throw ValidationError("dataset dimension does not match feature map input dimension");
  }
  if (data.size() < space.size()) {
    throw ValidationError("n < p: " + std::to_string(data.size()) + " observations for " +
                          std::to_string(space.size()) + " coefficients");
  }
}

Eigen::VectorXd response(const Dataset& data) {
  return Eigen::Map<const Eigen::VectorXd>(data.y().data(), static_cast<Eigen::Index>(data.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct Solve {
  Eigen::VectorXd beta;
  bool jitter_used = false;
};

// Ridge fallback on G = A^T A.
Solve solve_jittered(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double jitter) {
  const auto p = gram.rows();
  const double tau = jitter * gram.trace() / static_cast<double>(p);
  Eigen::MatrixXd ridged = gram;
  ridged.diagonal().array() += tau;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ridged);
  if (!(tau > 0.0) || ldlt.info() != Eigen::Success || !(ldlt.rcond() > 0.0)) {
    throw NumericalError("normal equations are singular even after ridge jitter");
  }
  Eigen::VectorXd beta = ldlt.solve(rhs);
  if (!beta.allFinite()) throw NumericalError("normal equations are singular even after ridge jitter");
  return {std::move(beta), true};
}

// Weighted least squares through a pivoted QR of sqrt(W) Phi.
// Cholesky on the weighted Gram matrix when it is well conditioned, otherwise
// column-pivoted QR on sqrt(W) Phi, then ridge jitter if that is rank deficient.
Solve weighted_solve(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                     double jitter) {
  const Eigen::MatrixXd gram = phi.transpose() * w.asDiagonal() * phi;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > kCholeskyRcond) {
    Eigen::VectorXd beta = llt.solve(phi.transpose() * w.cwiseProduct(y));
    if (beta.allFinite()) return {std::move(beta), false};
  }
  const Eigen::VectorXd root = w.array().sqrt();
  const Eigen::MatrixXd a = root.asDiagonal() * phi;
  const Eigen::VectorXd b = root.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() == phi.cols()) return {qr.solve(b), false};
  return solve_jittered(a.transpose() * a, a.transpose() * b, jitter);
}

// exp(-r^2/sigma^2) divided by its maximum. The weighted solve is invariant to
// a common factor, so this stays usable after every raw weight underflows;
// nullopt only when even the largest log-weight is infinite.
std::optional<Eigen::VectorXd> scaled_hq_weights(const Eigen::VectorXd& r, double sigma) {
  const Eigen::ArrayXd log_w = -(r.array() / sigma).square();
  const double top = log_w.maxCoeff();
  if (!std::isfinite(top)) return std::nullopt;
  return Eigen::VectorXd((log_w - top).exp().matrix());
}

// True when every raw weight exp(-r^2/sigma^2) at the end point is below 1e-300.
bool weights_underflow(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       double sigma) {
  const Eigen::VectorXd r = y - phi * beta;
  return -(r.cwiseAbs().minCoeff() / sigma) * (r.cwiseAbs().minCoeff() / sigma) < kLogWeightFloor;
}

double mean_loss(const LossSpec& spec, const Eigen::VectorXd& r) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) total += loss(spec, r[i]);
  return total / static_cast<double>(r.size());
}

double relative_stationarity(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& r) {
  const double num = (phi.transpose() * w.cwiseProduct(r)).cwiseAbs().maxCoeff();
  const double den = (phi.transpose() * w.cwiseProduct(y)).cwiseAbs().maxCoeff();
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

struct RestartOutcome {
  Eigen::VectorXd beta;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  bool jitter_used = false;
  double stationarity = 0.0;
};

// One IRLS run. `weights_of` maps residuals to (scaled) weights or nullopt on
// degeneracy; `spec` defines the monitored objective.
template <class WeightFn>
std::optional<RestartOutcome> irls(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                                   Eigen::VectorXd beta, const LossSpec& spec,
                                   const SolverConfig& cfg, WeightFn weights_of) {
  RestartOutcome out;
  // Objective changes below this are roundoff in the residuals.
  const double y_scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  const double floor = (1e-14 * y_scale) * (1e-14 * y_scale);

  Eigen::VectorXd r = y - phi * beta;
  double objective = mean_loss(spec, r);
  out.trace.push_back(objective);
  auto w = weights_of(r);
  if (!w) return std::nullopt;
  bool stalled = false;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Solve step = weighted_solve(phi, y, *w, cfg.jitter);
    out.jitter_used = out.jitter_used || step.jitter_used;
    const Eigen::VectorXd r_new = y - phi * step.beta;
    const double candidate = mean_loss(spec, r_new);
    if (!std::isfinite(candidate)) throw NumericalError("IRLS produced a non-finite objective");
    if (candidate > objective) {
      // Majorization guarantees descent; an increase is roundoff at the optimum.
      stalled = true;
      break;
    }
    const double change = objective - candidate;
    beta = std::move(step.beta);
    r = r_new;
    objective = candidate;
    out.trace.push_back(objective);
    out.iterations = it;
    w = weights_of(r);
    if (!w) return std::nullopt;
    if (change <= cfg.rel_tol * objective || change <= floor) {
      if (relative_stationarity(phi, y, *w, r) <= cfg.stationarity_tol || change == 0.0) {
        out.converged = true;
        break;
      }
    }
  }
  out.stationarity = relative_stationarity(phi, y, *w, r);
  if (!out.converged && (out.stationarity <= cfg.stationarity_tol ||
                         (stalled && out.stationarity <= kStallStationarity))) {
    out.converged = true;
  }
  out.beta = std::move(beta);
  return out;
}

Solve ols_solve(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double jitter) {
  const Eigen::MatrixXd gram = phi.transpose() * phi;
  const Eigen::VectorXd rhs = phi.transpose() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) {
    Eigen::VectorXd beta = llt.solve(rhs);
    if (beta.allFinite()) return {std::move(beta), false};
  }
  return solve_jittered(gram, rhs, jitter);
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations <= 0) throw ValidationError("max_iterations must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ValidationError("rel_tol must be in (0,1)");
  if (!(stationarity_tol > 0.0)) throw ValidationError("stationarity_tol must be positive");
  if (restarts <= 0) throw ValidationError("restarts must be positive");
  if (!(perturbation > 0.0)) throw ValidationError("perturbation must be positive");
  if (!(jitter > 0.0)) throw ValidationError("jitter must be positive");
}

Eigen::MatrixXd design_matrix(const FeatureMap& space, const Dataset& data) {
  if (data.dim() != space.input_dim()) {
    throw ValidationError("dataset dimension does not match feature map input dimension");
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi(
      static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    space.evaluate(data.x(i), std::span<double>(phi.row(static_cast<Eigen::Index>(i)).data(), space.size()));
  }
  return phi;
}

double mcc_stationarity(const FeatureMap& space, const Dataset& data, std::span<const double> beta,
                        double sigma) {
  const Eigen::MatrixXd phi = design_matrix(space, data);
  const Eigen::VectorXd y = response(data);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const Eigen::VectorXd r = y - phi * b;
  auto w = scaled_hq_weights(r, sigma);
  if (!w) return std::numeric_limits<double>::infinity();
  return relative_stationarity(phi, y, *w, r);
}

FitReport fit_ols(const FeatureMap& space, const Dataset& data, double jitter) {
  require_enough_rows(space, data);
  const Eigen::MatrixXd phi = design_matrix(space, data);
  const Eigen::VectorXd y = response(data);
  Solve s = ols_solve(phi, y, jitter);
  const Eigen::VectorXd r = y - phi * s.beta;
  const LossSpec spec = LossSpec::squared();
  const double risk = mean_loss(spec, r);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(r.size());
  return FitReport{
      .hypothesis = Hypothesis(space, to_std(s.beta)),
      .loss = spec,
      .empirical_risk = risk,
      .trace = {risk},
      .restart_traces = {{risk}},
      .iterations = 1,
      .converged = true,
      .winning_restart = 0,
      .jitter_used = s.jitter_used,
      .stationarity = relative_stationarity(phi, y, ones, r),
  };
}

FitReport fit_mccr(const FeatureMap& space, const Dataset& data, double sigma,
                   const SolverConfig& cfg, const RngState& rng) {
  const LossSpec spec = LossSpec::correntropy(sigma);
  cfg.validate();
  require_enough_rows(space, data);

  const Eigen::MatrixXd phi = design_matrix(space, data);
  const Eigen::VectorXd y = response(data);
  const Solve ols = ols_solve(phi, y, cfg.jitter);
  const double magnitude = ols.beta.cwiseAbs().maxCoeff() > 0.0 ? ols.beta.cwiseAbs().maxCoeff() : 1.0;
  auto weights_of = [sigma](const Eigen::VectorXd& r) { return scaled_hq_weights(r, sigma); };

  std::vector<std::vector<double>> traces;
  std::optional<RestartOutcome> best;
  int best_index = -1;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Eigen::VectorXd start = ols.beta;
    if (restart > 0) {
      Rng gen(rng.child(static_cast<std::uint64_t>(restart)));
      for (Eigen::Index j = 0; j < start.size(); ++j) {
        start[j] += cfg.perturbation * magnitude * gen.uniform(-1.0, 1.0);
      }
    }
    auto outcome = irls(phi, y, std::move(start), spec, cfg, weights_of);
    if (outcome && weights_underflow(phi, y, outcome->beta, sigma)) outcome.reset();
    if (!outcome) {
      traces.emplace_back();
      continue;
    }
    traces.push_back(outcome->trace);
    if (!best || outcome->trace.back() < best->trace.back() - 1e-14) {
      best = std::move(outcome);
      best_index = restart;
    }
  }
  if (!best) {
    throw NumericalError("all correntropy weights fell below 1e-300 at sigma = " + std::to_string(sigma) +
                         "; residuals are far larger than sigma, use a larger sigma");
  }
  const double risk = best->trace.back();
  return FitReport{
      .hypothesis = Hypothesis(space, to_std(best->beta)),
      .loss = spec,
      .empirical_risk = risk,
      .trace = best->trace,
      .restart_traces = std::move(traces),
      .iterations = best->iterations,
      .converged = best->converged,
      .winning_restart = best_index,
      .jitter_used = ols.jitter_used || best->jitter_used,
      .stationarity = best->stationarity,
  };
}

FitReport fit_huber(const FeatureMap& space, const Dataset& data, double delta, const SolverConfig& cfg) {
  const LossSpec spec = LossSpec::huber(delta);
  cfg.validate();
  require_enough_rows(space, data);
  const Eigen::MatrixXd phi = design_matrix(space, data);
  const Eigen::VectorXd y = response(data);
  const Solve ols = ols_solve(phi, y, cfg.jitter);
  auto weights_of = [delta](const Eigen::VectorXd& r) -> std::optional<Eigen::VectorXd> {
    return Eigen::VectorXd(r.unaryExpr([delta](double t) {
      const double a = std::abs(t);
      return a <= delta ? 1.0 : delta / a;
    }));
  };
  auto outcome = irls(phi, y, ols.beta, spec, cfg, weights_of);
  return FitReport{
      .hypothesis = Hypothesis(space, to_std(outcome->beta)),
      .loss = spec,
      .empirical_risk = outcome->trace.back(),
      .trace = outcome->trace,
      .restart_traces = {outcome->trace},
      .iterations = outcome->iterations,
      .converged = outcome->converged,
      .winning_restart = 0,
      .jitter_used = ols.jitter_used || outcome->jitter_used,
      .stationarity = outcome->stationarity,
  };
}

}  // namespace mccr
