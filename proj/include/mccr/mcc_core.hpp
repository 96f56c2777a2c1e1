#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mccr/hypothesis.hpp"

namespace mccr {

/// Regression loss on residuals t = y - f(x).
///   correntropy(sigma): sigma^2 (1 - exp(-t^2 / sigma^2))
///   squared:            t^2
///   huber(delta):       t^2 for |t| <= delta, 2 delta |t| - delta^2 beyond
/// Huber is scaled to agree with the squared loss near zero.
class LossSpec {
 public:
  enum class Kind { correntropy, squared, huber };

  static LossSpec correntropy(double sigma);
  static LossSpec squared() { return LossSpec(Kind::squared, 0.0); }
  static LossSpec huber(double delta = 1.345);

  Kind kind() const { return kind_; }
  /// sigma for correntropy, delta for huber, 0 for squared.
  double scale() const { return scale_; }

 private:
  LossSpec(Kind kind, double scale) : kind_(kind), scale_(scale) {}

  Kind kind_;
  double scale_;
};

double loss(const LossSpec& spec, double t);
double loss_derivative(const LossSpec& spec, double t);

/// Half-quadratic weight exp(-t^2 / sigma^2) of the correntropy loss.
/// Throws ValidationError for any other loss kind.
double hq_weight(const LossSpec& spec, double t);

/// Observations z = {(x_i, y_i)}, inputs stored row-major.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<double> x, std::vector<double> y);

  std::size_t size() const { return y_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> x(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }
  std::span<const double> xs() const { return x_; }
  std::span<const double> y() const { return y_; }

  /// Rows [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;

 private:
  std::size_t dim_;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// (1/n) sum_i loss(y_i - h(x_i)). Throws ValidationError on an empty dataset.
double empirical_risk(const LossSpec& spec, const Hypothesis& h, const Dataset& data);

}  // namespace mccr
