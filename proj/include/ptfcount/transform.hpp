#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/linalg.hpp"
#include "ptfcount/poly.hpp"

namespace ptf {

/// Tail eigenvalues at or below this magnitude are treated as exactly zero,
/// so rounding noise never triggers a collection.
inline constexpr double kLambdaFloor = 1e-10;

struct TransformSchedule {
  double eta = 0.0;
  double eps_prime = 0.0;
  std::string source = "paper";  ///< "paper", "practical" or "override"
};

/// eta = (eps/k)^4 / ln(k/eps)^2 and eps' = eps^12 eta^2 / k^8.
inline TransformSchedule default_schedule(double eps, std::size_t k) {
  detail::require(eps > 0.0 && eps < 0.5, "default_schedule: eps must lie in (0, 1/2)");
  detail::require(k >= 1, "default_schedule: k must be positive");
  const double kk = static_cast<double>(k);
  const double lg = std::log(kk / eps);
  const double eta = std::pow(eps / kk, 4.0) / (lg * lg);
  const double eps_prime = std::pow(eps, 12.0) * eta * eta / std::pow(kk, 8.0);
  return {eta, eps_prime, "paper"};
}

/// Milder schedule for desk experiments: eta = eps^2/k^2, eps' = eps^3/k^2.
inline TransformSchedule practical_schedule(double eps, std::size_t k) {
  detail::require(eps > 0.0 && eps < 0.5, "practical_schedule: eps must lie in (0, 1/2)");
  detail::require(k >= 1, "practical_schedule: k must be positive");
  const double kk = static_cast<double>(k);
  return {eps * eps / (kk * kk), eps * eps * eps / (kk * kk), "practical"};
}

/// ceil(k ln(1/eta) / eps'^2), kept in floating point since it can be astronomically large.
inline double change_basis_iteration_bound(std::size_t k, double eta, double eps_prime) {
  return std::ceil(static_cast<double>(k) * std::log(1.0 / eta) / (eps_prime * eps_prime));
}

/// Tail statistics of one member at split index t.
struct TailStats {
  double tail_variance = 0.0;
  double quad_tail_variance = 0.0;
  double tail_lambda = 0.0;  ///< signed eigenvalue of largest magnitude of the tail matrix
  bool low_variance = false;  ///< condition (a): Var[tail] <= eta
  bool flat = false;          ///< condition (b): lambda^2 / Var[tail] <= eps'
};

inline TailStats tail_stats(const QuadPoly& p, std::size_t t, double eta, double eps_prime) {
  const auto split = split_head_tail(p, t);
  TailStats s;
  s.tail_variance = gaussian_moments(split.tail).variance;
  s.quad_tail_variance = gaussian_moments(split.quad_tail).variance;
  s.tail_lambda = max_eigenpair(split.tail.quadratic()).value;
  s.low_variance = s.tail_variance <= eta || s.tail_variance <= kSigmaMin * kSigmaMin;
  s.flat = std::abs(s.tail_lambda) <= kLambdaFloor || s.tail_lambda * s.tail_lambda <= eps_prime * s.tail_variance;
  return s;
}

struct CollectionStep {
  std::size_t member = 0;   ///< which polynomial forced the collection
  double lambda = 0.0;      ///< its tail eigenvalue of largest magnitude
  double var_before = 0.0;  ///< its tail variance before the collection
  double var_after = 0.0;   ///< and after

  double decay_factor() const { return var_before > 0.0 ? var_after / var_before : 0.0; }
};

struct ChangeBasisResult {
  PolyTuple polys;  ///< input rewritten in basis coordinates
  OrthonormalBasis basis;
  std::size_t t = 0;  ///< number of collected forms
  std::vector<CollectionStep> steps;
  std::size_t visits = 0;  ///< number of times the stopping test ran
  double iteration_bound = 0.0;
  double max_collected_residual = 0.0;  ///< worst orthonormality residual of the collected set over all steps
};

namespace detail {
inline void require_unit_variance(const PolyTuple& q, const char* op) {
  require(q.domain() == Domain::gaussian, std::string(op) + ": tuple is not gaussian-domain");
  for (std::size_t l = 0; l < q.size(); ++l) {
    const double v = gaussian_moments(q[l]).variance;
    require(std::abs(v - 1.0) <= 1e-6,
            std::string(op) + ": member " + std::to_string(l) + " is not normalized (variance " + std::to_string(v) + ")");
  }
}
}  // namespace detail

/// Repeatedly collects the top eigenvector of the lowest-index member whose
/// tail is neither low-variance nor spectrally flat.
inline ChangeBasisResult change_basis(const PolyTuple& q, double eps_prime, double eta) {
  detail::require(eps_prime > 0.0 && eps_prime < 0.5, "change_basis: eps' must lie in (0, 1/2)");
  detail::require(eta > 0.0 && eta < 0.5, "change_basis: eta must lie in (0, 1/2)");
  detail::require_unit_variance(q, "change_basis");
  const std::size_t n = q.dim();

  ChangeBasisResult out;
  out.iteration_bound = change_basis_iteration_bound(std::max<std::size_t>(q.size(), 1), eta, eps_prime);
  std::vector<Vector> collected;
  out.basis = complete_basis({n, {}, 0});
  out.polys = rewrite_in_basis(q, out.basis);

  for (;;) {
    ++out.visits;
    const std::size_t r = collected.size();
    std::size_t failing = q.size();
    for (std::size_t l = 0; l < q.size(); ++l) {
      const auto s = tail_stats(out.polys[l], r, eta, eps_prime);
      if (!s.low_variance && !s.flat) {
        failing = l;
        break;
      }
    }
    if (failing == q.size() || r == n) break;

    const auto split = split_head_tail(out.polys[failing], r);
    const double var_before = gaussian_moments(split.tail).variance;
    const auto top = max_eigenpair(split.tail.quadratic());
    // Map the eigenvector from basis coordinates back to x coordinates.
    Vector v(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      if (top.vector[c] == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) v[i] += top.vector[c] * out.basis.vectors[c][i];
    }
    detail::orthogonalize_against(v, collected);
    detail::normalize(v);
    collected.push_back(std::move(v));

    out.basis = complete_basis({n, collected, collected.size()});
    OrthonormalBasis just_collected{n, collected, collected.size()};
    out.max_collected_residual = std::max(out.max_collected_residual, orthonormality_residual(just_collected));
    out.polys = rewrite_in_basis(q, out.basis);

    const double var_after = gaussian_moments(split_head_tail(out.polys[failing], r + 1).tail).variance;
    out.steps.push_back({failing, top.value, var_before, var_after});
  }
  out.t = collected.size();
  out.basis.split = out.t;
  return out;
}

enum class TailGroup {
  low_variance,    ///< tail replaced by its expectation
  small_quad_tail, ///< quadratic tail replaced by its expectation
  unchanged,
};

inline const char* to_string(TailGroup g) {
  switch (g) {
    case TailGroup::low_variance: return "low_variance";
    case TailGroup::small_quad_tail: return "small_quad_tail";
    default: return "unchanged";
  }
}

struct MemberDiagnostics {
  TailStats stats;  ///< measured on the input to the processing step
  TailGroup group = TailGroup::unchanged;
};

struct ProcessResult {
  PolyTuple polys;
  std::size_t k_prime = 0;  ///< number of members in the first two groups
  std::vector<MemberDiagnostics> members;
};

/// Replaces negligible tails by their expectations. Members keep their order;
/// the group label plays the role of the reordering.
inline ProcessResult process_polys(const PolyTuple& p, std::size_t t, double eta, double eps_prime = 0.0) {
  detail::require(t <= p.dim(), "process_polys: t out of range");
  ProcessResult out;
  std::vector<QuadPoly> polys;
  for (std::size_t l = 0; l < p.size(); ++l) {
    MemberDiagnostics d;
    d.stats = tail_stats(p[l], t, eta, eps_prime > 0.0 ? eps_prime : 0.0);
    const auto split = split_head_tail(p[l], t);
    if (d.stats.low_variance) {
      d.group = TailGroup::low_variance;
      QuadPoly r = split.head;
      r.set_constant(gaussian_moments(split.tail).mean);
      polys.push_back(std::move(r));
    } else if (d.stats.quad_tail_variance <= eta / 2.0) {
      d.group = TailGroup::small_quad_tail;
      QuadPoly r = p[l] - split.quad_tail;
      r.set_constant(r.constant() + gaussian_moments(split.quad_tail).mean);
      polys.push_back(std::move(r));
    } else {
      polys.push_back(p[l]);
    }
    if (d.group != TailGroup::unchanged) ++out.k_prime;
    out.members.push_back(d);
  }
  out.polys = p.empty() ? p : PolyTuple(std::move(polys), p.index_map());
  return out;
}

struct TransformResult {
  PolyTuple polys;    ///< processed members r_l in basis coordinates
  PolyTuple rotated;  ///< members after the basis change, before processing
  std::size_t t = 0;
  std::size_t k_prime = 0;
  OrthonormalBasis basis;
  std::vector<MemberDiagnostics> diagnostics;
  std::vector<CollectionStep> steps;
  std::size_t visits = 0;
  double iteration_bound = 0.0;
  TransformSchedule schedule;
};

inline TransformResult transform(const PolyTuple& q, const TransformSchedule& schedule) {
  auto cb = change_basis(q, schedule.eps_prime, schedule.eta);
  auto pp = process_polys(cb.polys, cb.t, schedule.eta, schedule.eps_prime);
  TransformResult out;
  out.polys = std::move(pp.polys);
  out.rotated = std::move(cb.polys);
  out.t = cb.t;
  out.k_prime = pp.k_prime;
  out.basis = std::move(cb.basis);
  out.diagnostics = std::move(pp.members);
  out.steps = std::move(cb.steps);
  out.visits = cb.visits;
  out.iteration_bound = cb.iteration_bound;
  out.schedule = schedule;
  return out;
}

inline TransformResult transform(const PolyTuple& q, double eps) {
  return transform(q, default_schedule(eps, std::max<std::size_t>(q.size(), 1)));
}

/// Inputs to the small-eigenvalue CLT bound k^{2/3} eps^{1/6} / lambda^{1/6}.
struct CltReport {
  std::vector<double> lambda_max;  ///< per member, signed
  std::vector<double> variances;
  double lambda = 0.0;   ///< max variance
  double epsilon = 0.0;  ///< max |lambda_max|
  double bound = 0.0;    ///< without the hidden constant
  bool variances_at_most_one = true;
};

inline CltReport clt_bound_diag(const PolyTuple& q) {
  detail::require(q.empty() || q.domain() == Domain::gaussian, "clt_bound_diag: tuple is not gaussian-domain");
  CltReport r;
  for (const auto& p : q.polys()) {
    const double lam = max_eigenpair(p.quadratic()).value;
    const double var = gaussian_moments(p).variance;
    r.lambda_max.push_back(lam);
    r.variances.push_back(var);
    r.lambda = std::max(r.lambda, var);
    r.epsilon = std::max(r.epsilon, std::abs(lam));
    if (var > 1.0 + 1e-12) r.variances_at_most_one = false;
  }
  const double k = static_cast<double>(q.size());
  if (r.epsilon == 0.0)
    r.bound = 0.0;
  else if (r.lambda == 0.0)
    r.bound = std::numeric_limits<double>::infinity();
  else
    r.bound = std::pow(k, 2.0 / 3.0) * std::pow(r.epsilon, 1.0 / 6.0) / std::pow(r.lambda, 1.0 / 6.0);
  return r;
}

}  // namespace ptf
