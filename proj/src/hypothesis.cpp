#include "mccr/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "mccr/errors.hpp"
#include "mccr/quadrature.hpp"

namespace mccr {

namespace {

void require_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw ValidationError("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                          std::to_string(got));
  }
}

// All exponent vectors of total degree <= max_degree, grouped by degree.
std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(dim, 0);
  for (int total = 0; total <= max_degree; ++total) {
    std::function<void(std::size_t, int)> fill = [&](std::size_t axis, int remaining) {
      if (axis + 1 == dim) {
        current[axis] = remaining;
        out.push_back(current);
        return;
      }
      for (int e = remaining; e >= 0; --e) {
        current[axis] = e;
        fill(axis + 1, remaining - e);
      }
    };
    fill(0, total);
  }
  return out;
}

}  // namespace

Domain::Domain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw ValidationError("domain dimension must be >= 1");
  require_dim(lower_.size(), upper_.size());
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || !(lower_[j] < upper_[j])) {
      throw ValidationError("domain bounds must be finite with lower < upper");
    }
  }
}

Domain Domain::unit(std::size_t dim) {
  return Domain(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

double Domain::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < dim(); ++j) v *= upper_[j] - lower_[j];
  return v;
}

bool Domain::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    if (x[j] < lower_[j] || x[j] > upper_[j]) return false;
  }
  return true;
}

void Domain::sample(Rng& rng, std::span<double> out) const {
  require_dim(dim(), out.size());
  for (std::size_t j = 0; j < dim(); ++j) out[j] = rng.uniform(lower_[j], upper_[j]);
}

FeatureMap FeatureMap::affine(std::size_t dim) {
  if (dim == 0) throw ValidationError("feature map input dimension must be >= 1");
  FeatureMap m(FeatureKind::affine, dim);
  m.size_ = dim + 1;
  return m;
}

FeatureMap FeatureMap::polynomial(std::size_t dim, int degree) {
  if (dim == 0) throw ValidationError("feature map input dimension must be >= 1");
  if (degree < 0) throw ValidationError("polynomial degree must be >= 0");
  FeatureMap m(FeatureKind::polynomial, dim);
  m.order_ = degree;
  m.exponents_ = monomial_exponents(dim, degree);
  m.size_ = m.exponents_.size();
  return m;
}

FeatureMap FeatureMap::trigonometric(std::size_t dim, int max_frequency) {
  if (dim == 0) throw ValidationError("feature map input dimension must be >= 1");
  if (max_frequency < 0) throw ValidationError("max frequency must be >= 0");
  FeatureMap m(FeatureKind::trigonometric, dim);
  m.order_ = max_frequency;
  m.size_ = 1 + 2 * static_cast<std::size_t>(max_frequency) * dim;
  return m;
}

FeatureMap FeatureMap::gaussian_centers(std::vector<std::vector<double>> centers, double bandwidth) {
  if (centers.empty()) throw ValidationError("gaussian feature map needs at least one center");
  if (!(bandwidth > 0.0)) throw ValidationError("bandwidth must be > 0");
  const std::size_t dim = centers.front().size();
  if (dim == 0) throw ValidationError("feature map input dimension must be >= 1");
  for (const auto& c : centers) require_dim(dim, c.size());
  FeatureMap m(FeatureKind::gaussian_centers, dim);
  m.size_ = centers.size() + 1;
  m.centers_ = std::move(centers);
  m.bandwidth_ = bandwidth;
  return m;
}

void FeatureMap::evaluate(std::span<const double> x, std::span<double> out) const {
  require_dim(dim_, x.size());
  require_dim(size_, out.size());
  out[0] = 1.0;
  switch (kind_) {
    case FeatureKind::affine:
      std::copy(x.begin(), x.end(), out.begin() + 1);
      break;
    case FeatureKind::polynomial:
      for (std::size_t k = 0; k < exponents_.size(); ++k) {
        double v = 1.0;
        for (std::size_t j = 0; j < dim_; ++j) {
          for (int e = 0; e < exponents_[k][j]; ++e) v *= x[j];
        }
        out[k] = v;
      }
      break;
    case FeatureKind::trigonometric: {
      std::size_t k = 1;
      for (std::size_t j = 0; j < dim_; ++j) {
        for (int f = 1; f <= order_; ++f) {
          const double arg = 2.0 * std::numbers::pi * f * x[j];
          out[k++] = std::cos(arg);
          out[k++] = std::sin(arg);
        }
      }
      break;
    }
    case FeatureKind::gaussian_centers: {
      const double denom = 2.0 * bandwidth_ * bandwidth_;
      for (std::size_t m = 0; m < centers_.size(); ++m) {
        double sq = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
          const double diff = x[j] - centers_[m][j];
          sq += diff * diff;
        }
        out[m + 1] = std::exp(-sq / denom);
      }
      break;
    }
  }
}

std::vector<double> FeatureMap::evaluate(std::span<const double> x) const {
  std::vector<double> out(size_);
  evaluate(x, out);
  return out;
}

Hypothesis::Hypothesis(FeatureMap map, std::vector<double> coefficients)
    : map_(std::move(map)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != map_.size()) {
    throw ValidationError("coefficient count " + std::to_string(coefficients_.size()) +
                          " does not match feature count " + std::to_string(map_.size()));
  }
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw ValidationError("coefficients must be finite");
  }
}

Hypothesis Hypothesis::zero(FeatureMap map) {
  const std::size_t p = map.size();
  return Hypothesis(std::move(map), std::vector<double>(p, 0.0));
}

double Hypothesis::operator()(std::span<const double> x) const {
  thread_local std::vector<double> phi;
  phi.resize(map_.size());
  map_.evaluate(x, phi);
  double v = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) v += coefficients_[k] * phi[k];
  return v;
}

double evaluate(const Hypothesis& h, std::span<const double> x) { return h(x); }

ProductRule tensor_gauss_legendre(const Domain& domain, std::size_t nodes_per_axis) {
  const std::size_t d = domain.dim();
  if (d > 3) {
    throw ValidationError("grid quadrature supports d <= 3; use the monte-carlo method for d = " +
                          std::to_string(d));
  }
  const auto& rule = quad::gauss_legendre(nodes_per_axis);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= nodes_per_axis;

  ProductRule out;
  out.dim = d;
  out.points.resize(total * d);
  out.weights.resize(total);
  std::vector<std::size_t> index(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double lo = domain.lower()[j];
      const double hi = domain.upper()[j];
      out.points[i * d + j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[index[j]];
      w *= 0.5 * rule.weights[index[j]];
    }
    out.weights[i] = w;
    for (std::size_t j = d; j-- > 0;) {
      if (++index[j] < nodes_per_axis) break;
      index[j] = 0;
    }
  }
  return out;
}

McEstimate l2_rho_monte_carlo(const Hypothesis& h1, const Hypothesis& h2, const Domain& domain,
                              std::size_t n, const RngState& state) {
  if (n < 2) throw ValidationError("monte-carlo L2 estimate needs at least 2 samples");
  require_dim(domain.dim(), h1.feature_map().input_dim());
  require_dim(domain.dim(), h2.feature_map().input_dim());
  Rng rng(state);
  std::vector<double> x(domain.dim());
  // Welford accumulation of the squared differences.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    domain.sample(rng, x);
    const double diff = h1(x) - h2(x);
    const double v = diff * diff;
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(n - 1)), n};
}

double l2_rho_distance(const Hypothesis& h1, const Hypothesis& h2, const Domain& domain,
                       const L2Method& method) {
  if (method.kind == L2Method::Kind::monte_carlo) {
    return l2_rho_monte_carlo(h1, h2, domain, method.samples, method.rng).mean;
  }
  require_dim(domain.dim(), h1.feature_map().input_dim());
  require_dim(domain.dim(), h2.feature_map().input_dim());
  const ProductRule rule = tensor_gauss_legendre(domain);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double diff = h1(rule.point(i)) - h2(rule.point(i));
    total += rule.weights[i] * diff * diff;
  }
  return total;
}

std::size_t sup_grid_points_per_axis(std::size_t dim) {
  if (dim <= 2) return 1024;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::pow(1048576.0, 1.0 / dim))));
}

double sup_norm_on_grid(const Hypothesis& h, const Domain& domain) {
  const std::size_t d = domain.dim();
  require_dim(d, h.feature_map().input_dim());
  const std::size_t per_axis = sup_grid_points_per_axis(d);
  std::vector<std::size_t> index(d, 0);
  std::vector<double> x(d);
  double best = 0.0;
  while (true) {
    for (std::size_t j = 0; j < d; ++j) {
      const double frac = static_cast<double>(index[j]) / static_cast<double>(per_axis - 1);
      x[j] = domain.lower()[j] + frac * (domain.upper()[j] - domain.lower()[j]);
    }
    best = std::max(best, std::abs(h(x)));
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++index[j] < per_axis) break;
      index[j] = 0;
      if (j == 0) return best;
    }
    if (d == 0) return best;
  }
}

}  // namespace mccr
