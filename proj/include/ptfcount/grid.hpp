#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/normal.hpp"

namespace ptf {

enum class GridKind {
  interval,       ///< points i*delta carrying the normal mass of [s_i, s_{i+1})
  gauss_hermite,  ///< m-point Gauss-Hermite rule per axis (budget fallback)
};

inline const char* to_string(GridKind k) { return k == GridKind::interval ? "interval" : "gauss_hermite"; }

/// Product distribution D^t with identical axes.
struct DiscreteGrid {
  GridKind kind = GridKind::interval;
  std::size_t axes = 0;
  std::vector<double> points;  ///< sorted
  std::vector<double> masses;  ///< sum to 1
  double spacing = 0.0;        ///< delta (interval grids)
  double radius = 0.0;         ///< M (interval grids)
  double axis_eps = 0.0;       ///< per-axis closeness target eps'
  double close_error = 0.0;    ///< sum_i |Phi(I_i) - mass_i| (interval grids)
  std::size_t interval_axis_points = 0;  ///< axis size the interval construction asked for

  /// Total number of grid points, saturating at SIZE_MAX.
  std::size_t total_points() const {
    std::size_t total = 1;
    for (std::size_t a = 0; a < axes; ++a) {
      if (points.size() != 0 && total > SIZE_MAX / points.size()) return SIZE_MAX;
      total *= points.size();
    }
    return total;
  }
};

/// One axis: points i*delta for |i| <= s, mass Phi([s_i, s_{i+1})) with the two
/// tails folded into the extreme points, renormalized.
inline DiscreteGrid build_interval_grid(std::size_t t, double delta, std::size_t s) {
  detail::require(delta > 0.0, "build_interval_grid: spacing must be positive");
  DiscreteGrid g;
  g.kind = GridKind::interval;
  g.axes = t;
  g.spacing = delta;
  g.radius = static_cast<double>(s) * delta;
  const std::size_t m = 2 * s + 1;
  g.points.resize(m);
  g.masses.resize(m);
  for (std::size_t idx = 0; idx < m; ++idx) {
    const double i = static_cast<double>(idx) - static_cast<double>(s);
    g.points[idx] = i * delta;
  }
  for (std::size_t idx = 0; idx < m; ++idx) {
    const double lo = g.points[idx];
    double mass = idx + 1 < m ? normal_cdf(g.points[idx + 1]) - normal_cdf(lo) : normal_cdf(-lo);
    if (idx == 0) mass += normal_cdf(lo);
    g.masses[idx] = mass;
  }
  double total = 0.0;
  for (double w : g.masses) total += w;
  for (double& w : g.masses) w /= total;
  // Discrepancy against the true interval masses Phi(I_i), I_i = [s_i, s_i + delta).
  double err = 0.0;
  for (std::size_t idx = 0; idx < m; ++idx) {
    const double lo = g.points[idx];
    const double exact = normal_cdf(lo + delta) - normal_cdf(lo);
    err += std::abs(exact - g.masses[idx]);
  }
  g.close_error = err;
  g.interval_axis_points = m;
  return g;
}

struct GridOptions {
  std::size_t grid_cap = 1'000'000;  ///< maximum total number of points
  bool allow_fallback = false;       ///< switch to a Gauss-Hermite rule instead of failing
  std::size_t max_hermite_points = 64;
};

/// Per-axis parameters of the interval construction for (t, k, eps).
struct IntervalGridParams {
  double axis_eps = 0.0;  ///< eps / (k t)
  double radius = 0.0;    ///< sqrt(2 ln(1/axis_eps))
  double spacing = 0.0;   ///< eps^2 / (k^2 log2(k/eps))
  std::size_t half_width = 0;
};

inline IntervalGridParams interval_grid_params(std::size_t t, std::size_t k, double eps) {
  detail::require(t >= 1, "build_discrete_gaussian: t must be at least 1");
  detail::require(k >= 1, "build_discrete_gaussian: k must be at least 1");
  detail::require(eps > 0.0 && eps < 0.5, "build_discrete_gaussian: eps must lie in (0, 1/2)");
  const double kk = static_cast<double>(k);
  IntervalGridParams p;
  p.axis_eps = eps / (kk * static_cast<double>(t));
  p.radius = std::sqrt(2.0 * std::log(1.0 / p.axis_eps));
  p.spacing = eps * eps / (kk * kk * std::log2(kk / eps));
  const double hw = std::floor(p.radius / p.spacing);
  p.half_width = hw > 1e15 ? static_cast<std::size_t>(1e15) : static_cast<std::size_t>(hw);
  return p;
}

inline DiscreteGrid build_discrete_gaussian(std::size_t t, std::size_t k, double eps, const GridOptions& opt = {}) {
  const auto prm = interval_grid_params(t, k, eps);
  const double axis = 2.0 * static_cast<double>(prm.half_width) + 1.0;
  const double total = std::pow(axis, static_cast<double>(t));
  if (total <= static_cast<double>(opt.grid_cap)) {
    auto g = build_interval_grid(t, prm.spacing, prm.half_width);
    // Floor rounding of M / delta can leave slightly too much tail mass.
    for (std::size_t s = prm.half_width + 1; g.close_error > prm.axis_eps; ++s)
      g = build_interval_grid(t, prm.spacing, s);
    g.axis_eps = prm.axis_eps;
    return g;
  }
  if (!opt.allow_fallback)
    throw BudgetError("discrete grid needs " + std::to_string(static_cast<unsigned long long>(axis)) + "^" + std::to_string(t) +
                      " points, above the cap of " + std::to_string(opt.grid_cap) +
                      "; raise eps, lower the number of collected forms (milder eta/eps' schedule), "
                      "raise the grid cap, or enable the Gauss-Hermite fallback");
  std::size_t m = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(opt.grid_cap), 1.0 / static_cast<double>(t))));
  while (m > 1 && std::pow(static_cast<double>(m), static_cast<double>(t)) > static_cast<double>(opt.grid_cap)) --m;
  while (std::pow(static_cast<double>(m + 1), static_cast<double>(t)) <= static_cast<double>(opt.grid_cap)) ++m;
  m = std::min(m, opt.max_hermite_points);
  if (m == 0) m = 1;
  auto rule = gauss_hermite_normal(m);
  DiscreteGrid g;
  g.kind = GridKind::gauss_hermite;
  g.axes = t;
  g.points = std::move(rule.nodes);
  g.masses = std::move(rule.weights);
  g.axis_eps = prm.axis_eps;
  g.spacing = prm.spacing;
  g.radius = prm.radius;
  g.interval_axis_points = static_cast<std::size_t>(axis);
  return g;
}

}  // namespace ptf
