#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/grid.hpp"
#include "ptfcount/junta.hpp"
#include "ptfcount/orthant.hpp"
#include "ptfcount/poly.hpp"
#include "ptfcount/transform.hpp"

namespace ptf {

struct GaussCountOptions {
  std::optional<TransformSchedule> schedule;  ///< defaults to default_schedule for (eps, k)
  GridOptions grid;
  double orthant_tol = 0.0;  ///< 0 picks min(1e-3, eps / 2^(k+2))
  OrthantOptions orthant;
  unsigned threads = 1;
};

struct GaussCountReport {
  double estimate = 0.0;
  std::size_t k_input = 0;
  std::size_t k_active = 0;       ///< members left after near-constant ones were resolved
  std::vector<int> fixed_signs;   ///< per input member: +1/-1 if near-constant, else 0
  BoolJunta junta;                ///< junta on the active members
  std::size_t t = 0;
  std::size_t k_prime = 0;
  TransformSchedule schedule;
  DiscreteGrid grid;
  std::size_t grid_points = 1;
  double orthant_tol = 0.0;
  double pattern_mass_error = 0.0;  ///< max over grid points of |sum of all pattern masses - 1|
  std::vector<MemberDiagnostics> diagnostics;
  std::vector<CollectionStep> steps;
  std::size_t visits = 0;
  double iteration_bound = 0.0;
};

namespace detail {

/// Per-member data for evaluating the restricted mean and covariance at a head point.
struct RestrictedForm {
  double c = 0.0;            // constant + trace of the tail block
  Vector head_lin;           // b_h
  Matrix head_quad;          // A_hh (t x t)
  Vector tail_lin;           // b_tail
  Matrix cross;              // A_th ((n-t) x t)
};

inline RestrictedForm restricted_form(const QuadPoly& p, std::size_t t) {
  const std::size_t n = p.dim(), m = n - t;
  const Matrix& a = p.quadratic();
  RestrictedForm f;
  f.c = p.constant();
  for (std::size_t j = t; j < n; ++j) f.c += a(j, j);
  f.head_lin.assign(p.linear().begin(), p.linear().begin() + static_cast<std::ptrdiff_t>(t));
  f.tail_lin.assign(p.linear().begin() + static_cast<std::ptrdiff_t>(t), p.linear().end());
  f.head_quad = Matrix(t, t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < t; ++j) f.head_quad(i, j) = a(i, j);
  f.cross = Matrix(m, t);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < t; ++j) f.cross(i, j) = a(t + i, j);
  return f;
}

}  // namespace detail

/// Deterministic estimate of Pr_{x ~ N(0,I)}[g(sign q_1(x), ..., sign q_k(x)) = 1].
inline GaussCountReport count_gauss(const PolyTuple& q, const BoolJunta& g, double eps, const GaussCountOptions& opt = {}) {
  detail::require(eps > 0.0 && eps < 0.5, "count_gauss: eps must lie in (0, 1/2)");
  detail::require(q.empty() || q.domain() == Domain::gaussian, "count_gauss: tuple is not gaussian-domain");
  detail::require(g.arity() == q.size(), "count_gauss: junta arity differs from the number of polynomials");

  GaussCountReport rep;
  rep.k_input = q.size();
  rep.fixed_signs.assign(q.size(), 0);
  std::vector<std::pair<std::size_t, int>> fixed;
  std::vector<QuadPoly> active;
  for (std::size_t l = 0; l < q.size(); ++l) {
    auto nz = normalize_unit_variance(q[l]);
    if (nz.near_constant) {
      rep.fixed_signs[l] = nz.constant_sign;
      fixed.emplace_back(l, nz.constant_sign);
    } else {
      active.push_back(std::move(nz.poly));
    }
  }
  rep.junta = restrict_junta(g, fixed);
  rep.k_active = active.size();
  if (rep.junta.is_constant()) {
    rep.estimate = rep.junta(0) ? 1.0 : 0.0;
    return rep;
  }

  const std::size_t k = active.size();
  const PolyTuple sub(std::move(active));
  rep.schedule = opt.schedule ? *opt.schedule : default_schedule(eps, k);
  const auto tr = transform(sub, rep.schedule);
  rep.t = tr.t;
  rep.k_prime = tr.k_prime;
  rep.diagnostics = tr.diagnostics;
  rep.steps = tr.steps;
  rep.visits = tr.visits;
  rep.iteration_bound = tr.iteration_bound;

  const std::size_t t = tr.t, n = sub.dim();
  if (t > 0) {
    rep.grid = build_discrete_gaussian(t, k, eps, opt.grid);
  } else {
    rep.grid.axes = 0;
    rep.grid.points = {0.0};
    rep.grid.masses = {1.0};
  }
  rep.grid_points = rep.grid.total_points();
  rep.orthant_tol = opt.orthant_tol > 0.0 ? opt.orthant_tol
                                          : std::min(1e-3, eps / std::pow(2.0, static_cast<double>(k) + 2.0));

  std::vector<detail::RestrictedForm> forms;
  for (const auto& p : tr.polys.polys()) forms.push_back(detail::restricted_form(p, t));
  // Tail-quadratic part of the covariance does not depend on the grid point.
  Matrix quad_cov(k, k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      const Matrix& x = tr.polys[a].quadratic();
      const Matrix& y = tr.polys[b].quadratic();
      double s = 0.0;
      for (std::size_t i = t; i < n; ++i)
        for (std::size_t j = t; j < n; ++j) s += x(i, j) * y(i, j);
      quad_cov(a, b) = 2.0 * s;
    }

  const std::size_t axis = rep.grid.points.size();
  const std::size_t total = rep.grid_points;
  const std::size_t chunk = 2048;
  const std::size_t chunks = (total + chunk - 1) / chunk;
  std::vector<double> chunk_sum(chunks, 0.0);
  std::vector<double> chunk_err(chunks, 0.0);
  const std::size_t patterns = std::size_t{1} << k;

  auto work = [&](std::atomic<std::size_t>& next) {
    OrthantSolver solver(rep.orthant_tol, opt.orthant);
    std::vector<std::size_t> digit(t);
    Vector tau(t), lin_buf;
    std::vector<Vector> lin(k, Vector(n - t));
    GaussianVector gv{Vector(k), Matrix(k, k)};
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      double sum = 0.0, err = 0.0;
      const std::size_t end = std::min(total, (c + 1) * chunk);
      for (std::size_t idx = c * chunk; idx < end; ++idx) {
        std::size_t rem = idx;
        double mass = 1.0;
        for (std::size_t h = 0; h < t; ++h) {
          const std::size_t d = rem % axis;
          rem /= axis;
          tau[h] = rep.grid.points[d];
          mass *= rep.grid.masses[d];
        }
        for (std::size_t l = 0; l < k; ++l) {
          const auto& f = forms[l];
          double mean = f.c + dot(f.head_lin, tau);
          for (std::size_t i = 0; i < t; ++i) mean += tau[i] * dot(f.head_quad.row(i), tau);
          gv.mean[l] = mean;
          for (std::size_t j = 0; j < n - t; ++j) lin[l][j] = f.tail_lin[j] + 2.0 * dot(f.cross.row(j), tau);
        }
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = a; b < k; ++b) {
            const double v = quad_cov(a, b) + dot(lin[a], lin[b]);
            gv.cov(a, b) = v;
            gv.cov(b, a) = v;
          }
        solver.set(gv);
        double hit = 0.0, all = 0.0;
        for (std::size_t m = 0; m < patterns; ++m) {
          const double pm = solver.pattern(m);
          all += pm;
          if (rep.junta(m)) hit += pm;
        }
        sum += mass * std::clamp(hit, 0.0, 1.0);
        err = std::max(err, std::abs(all - 1.0));
      }
      chunk_sum[c] = sum;
      chunk_err[c] = err;
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(chunks)));
  std::atomic<std::size_t> next{0};
  if (threads == 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back([&] { work(next); });
    for (auto& th : pool) th.join();
  }
  double total_sum = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total_sum += chunk_sum[c];
    rep.pattern_mass_error = std::max(rep.pattern_mass_error, chunk_err[c]);
  }
  rep.estimate = std::clamp(total_sum, 0.0, 1.0);
  return rep;
}

}  // namespace ptf
