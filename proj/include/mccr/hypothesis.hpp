#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mccr/rng.hpp"

namespace mccr {

/// Axis-aligned box carrying the uniform input law rho_X.
class Domain {
 public:
  Domain(std::vector<double> lower, std::vector<double> upper);
  static Domain unit(std::size_t dim);

  std::size_t dim() const { return lower_.size(); }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }
  double volume() const;
  bool contains(std::span<const double> x) const;

  /// One uniform draw, coordinates filled in order.
  void sample(Rng& rng, std::span<double> out) const;

  bool operator==(const Domain&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

enum class FeatureKind { affine, polynomial, trigonometric, gaussian_centers };

/// Fixed finite basis phi: R^d -> R^p. Layouts:
///   affine          [1, x_1, ..., x_d]
///   polynomial      all monomials of total degree <= D, graded (1, x, x^2, ... for d = 1)
///   trigonometric   [1, then per coordinate j and k = 1..K: cos(2 pi k x_j), sin(2 pi k x_j)]
///   gaussian_centers [1, exp(-|x - c_m|^2 / (2 h^2)) for each center c_m]
class FeatureMap {
 public:
  static FeatureMap affine(std::size_t dim);
  static FeatureMap polynomial(std::size_t dim, int degree);
  static FeatureMap trigonometric(std::size_t dim, int max_frequency);
  static FeatureMap gaussian_centers(std::vector<std::vector<double>> centers, double bandwidth);

  FeatureKind kind() const { return kind_; }
  std::size_t input_dim() const { return dim_; }
  std::size_t size() const { return size_; }
  int degree() const { return order_; }
  int max_frequency() const { return order_; }
  const std::vector<std::vector<double>>& centers() const { return centers_; }
  double bandwidth() const { return bandwidth_; }

  /// Writes size() features of x into out. Throws ValidationError on a
  /// dimension mismatch.
  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> x) const;

  bool operator==(const FeatureMap&) const = default;

 private:
  FeatureMap(FeatureKind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  FeatureKind kind_;
  std::size_t dim_;
  std::size_t size_ = 0;
  int order_ = 0;
  std::vector<std::vector<int>> exponents_;
  std::vector<std::vector<double>> centers_;
  double bandwidth_ = 0.0;
};

/// Element f = <coefficients, phi(.)> of a finite-dimensional class.
class Hypothesis {
 public:
  Hypothesis(FeatureMap map, std::vector<double> coefficients);

  /// The zero function of the given class.
  static Hypothesis zero(FeatureMap map);

  const FeatureMap& feature_map() const { return map_; }
  std::span<const double> coefficients() const { return coefficients_; }

  double operator()(std::span<const double> x) const;

 private:
  FeatureMap map_;
  std::vector<double> coefficients_;
};

double evaluate(const Hypothesis& h, std::span<const double> x);

/// Tensor Gauss-Legendre rule on a box with weights normalized to the uniform
/// probability law (they sum to 1). Points are stored row-major. d <= 3.
struct ProductRule {
  std::size_t dim = 0;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
};

ProductRule tensor_gauss_legendre(const Domain& domain, std::size_t nodes_per_axis = 64);

struct L2Method {
  enum class Kind { grid, monte_carlo };
  Kind kind = Kind::grid;
  std::size_t samples = 0;
  RngState rng{};

  static L2Method grid() { return {}; }
  static L2Method monte_carlo(std::size_t n, RngState rng) { return {Kind::monte_carlo, n, rng}; }
};

struct McEstimate {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation of the summands
  std::size_t n = 0;
};

/// ||h1 - h2||^2 in L2(rho_X), rho_X uniform on the domain. The grid method
/// uses 64 Gauss-Legendre nodes per axis and rejects d > 3.
double l2_rho_distance(const Hypothesis& h1, const Hypothesis& h2, const Domain& domain,
                       const L2Method& method = L2Method::grid());

McEstimate l2_rho_monte_carlo(const Hypothesis& h1, const Hypothesis& h2, const Domain& domain,
                              std::size_t n, const RngState& rng);

/// Points per axis of the sup-norm check grid: 1024 up to d = 2, then reduced
/// so the grid stays near 2^20 points.
std::size_t sup_grid_points_per_axis(std::size_t dim);

/// max |h(x)| over a uniform grid (endpoints included) on the domain.
double sup_norm_on_grid(const Hypothesis& h, const Domain& domain);

}  // namespace mccr
