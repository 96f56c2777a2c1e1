#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mccr/errors.hpp"

namespace mccr::quad {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rules are computed once per size and cached; safe to call concurrently.
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Composite rule: `panels` equal panels on [a, b], each carrying an n-point
/// Gauss-Legendre rule.
struct PanelGrid {
  std::vector<double> x;
  std::vector<double> w;
};

PanelGrid make_panel_grid(double a, double b, std::size_t panels, std::size_t nodes_per_panel = 64);

template <class F>
double integrate_panels(F&& f, double a, double b, std::size_t panels,
                        std::size_t nodes_per_panel = 64) {
  const auto& rule = gauss_legendre(nodes_per_panel);
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    double panel = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      panel += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    }
    total += 0.5 * h * panel;
  }
  return total;
}

struct RefineOptions {
  std::size_t initial_panels = 1;
  std::size_t nodes_per_panel = 64;
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  int max_doublings = 12;
};

struct RefinedIntegral {
  double value = 0.0;
  double change = 0.0;  // |last - previous|
  std::size_t panels = 0;
};

/// Doubles the panel count until two successive composite estimates differ by
/// at most max(abs_tol, rel_tol * |estimate|). Throws NumericalError carrying
/// the last change when the doubling budget runs out.
template <class F>
RefinedIntegral integrate_refined(F&& f, double a, double b, const RefineOptions& opt = {}) {
  std::size_t panels = opt.initial_panels;
  double previous = integrate_panels(f, a, b, panels, opt.nodes_per_panel);
  for (int k = 0; k < opt.max_doublings; ++k) {
    panels *= 2;
    const double current = integrate_panels(f, a, b, panels, opt.nodes_per_panel);
    const double change = std::abs(current - previous);
    if (change <= std::max(opt.abs_tol, opt.rel_tol * std::abs(current))) {
      return {current, change, panels};
    }
    previous = current;
  }
  throw NumericalError("quadrature did not converge after panel doubling", previous);
}

}  // namespace mccr::quad
