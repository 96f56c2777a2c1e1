#include "mccr/mcc_core.hpp"

#include <cmath>
#include <string>

#include "mccr/errors.hpp"

namespace mccr {

LossSpec LossSpec::correntropy(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be > 0");
  return LossSpec(Kind::correntropy, sigma);
}

LossSpec LossSpec::huber(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("huber delta must be > 0");
  return LossSpec(Kind::huber, delta);
}

double loss(const LossSpec& spec, double t) {
  const double s = spec.scale();
  switch (spec.kind()) {
    case LossSpec::Kind::correntropy:
      return -s * s * std::expm1(-(t * t) / (s * s));
    case LossSpec::Kind::squared:
      return t * t;
    case LossSpec::Kind::huber: {
      const double a = std::abs(t);
      return a <= s ? t * t : 2.0 * s * a - s * s;
    }
  }
  return 0.0;
}

double loss_derivative(const LossSpec& spec, double t) {
  const double s = spec.scale();
  switch (spec.kind()) {
    case LossSpec::Kind::correntropy:
      return 2.0 * t * std::exp(-(t * t) / (s * s));
    case LossSpec::Kind::squared:
      return 2.0 * t;
    case LossSpec::Kind::huber:
      return std::abs(t) <= s ? 2.0 * t : 2.0 * s * (t > 0.0 ? 1.0 : -1.0);
  }
  return 0.0;
}

double hq_weight(const LossSpec& spec, double t) {
  if (spec.kind() != LossSpec::Kind::correntropy) {
    throw ValidationError("half-quadratic weight is defined for the correntropy loss only");
  }
  const double s = spec.scale();
  return std::exp(-(t * t) / (s * s));
}

Dataset::Dataset(std::size_t dim, std::vector<double> x, std::vector<double> y)
    : dim_(dim), x_(std::move(x)), y_(std::move(y)) {
  if (dim_ == 0) throw ValidationError("dataset input dimension must be >= 1");
  if (x_.size() != y_.size() * dim_) {
    throw ValidationError("dataset has " + std::to_string(y_.size()) + " responses but " +
                          std::to_string(x_.size()) + " input values for d = " + std::to_string(dim_));
  }
  for (double v : x_) {
    if (!std::isfinite(v)) throw ValidationError("dataset inputs must be finite");
  }
  for (double v : y_) {
    if (!std::isfinite(v)) throw ValidationError("dataset responses must be finite");
  }
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw ValidationError("dataset slice out of range");
  std::vector<double> xs(x_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                         x_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_));
  std::vector<double> ys(y_.begin() + static_cast<std::ptrdiff_t>(first),
                         y_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return Dataset(dim_, std::move(xs), std::move(ys));
}

double empirical_risk(const LossSpec& spec, const Hypothesis& h, const Dataset& data) {
  if (data.size() == 0) throw ValidationError("empirical risk of an empty dataset");
  if (data.dim() != h.feature_map().input_dim()) {
    throw ValidationError("dataset dimension does not match hypothesis input dimension");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += loss(spec, data.y()[i] - h(data.x(i)));
  return total / static_cast<double>(data.size());
}

}  // namespace mccr
