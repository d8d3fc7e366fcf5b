#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/junta.hpp"
#include "ptfcount/linalg.hpp"
#include "ptfcount/normal.hpp"

namespace ptf {

struct GaussianVector {
  Vector mean;
  Matrix cov;
};

struct OrthantOptions {
  std::size_t k_cap = 8;
  std::size_t max_evaluations = 2'000'000;  ///< cap on the quadrature tensor size
};

/// Gauss-Legendre nodes per integrated level for a requested tolerance.
inline std::size_t orthant_nodes_for(double tol) {
  if (tol >= 1e-2) return 8;
  if (tol >= 1e-3) return 16;
  if (tol >= 1e-4) return 24;
  if (tol >= 1e-5) return 32;
  return 64;
}

/// Deterministic probabilities of sign patterns of a multivariate normal vector.
///
/// The covariance is factored once (eigendecomposition, small eigenvalues
/// dropped, then pivoted Gram-Schmidt on the rows) so that y = mean + R z with
/// R lower-trapezoidal and z standard normal. Each constraint lands on the last
/// column it touches; levels are integrated by sequential conditioning with
/// Gauss-Legendre nodes and the last level is exact.
class OrthantSolver {
 public:
  explicit OrthantSolver(double tol, OrthantOptions opt = {}) : tol_(tol), opt_(opt) {
    detail::require(tol > 0.0, "orthant: tolerance must be positive");
  }

  /// Factors `gv`; subsequent pattern queries reuse the factorization.
  void set(const GaussianVector& gv) {
    const std::size_t k = gv.mean.size();
    if (k > opt_.k_cap)
      throw InputError("orthant: dimension " + std::to_string(k) + " above cap " + std::to_string(opt_.k_cap));
    detail::require(gv.cov.rows() == k && gv.cov.cols() == k, "orthant: covariance shape does not match mean");
    for (double m : gv.mean) detail::require(std::isfinite(m), "orthant: mean has non-finite entries");
    detail::require(all_finite(gv.cov), "orthant: covariance has non-finite entries");
    k_ = k;
    mean_ = gv.mean;
    Matrix cov(k, k);
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        detail::require(std::abs(gv.cov(i, j) - gv.cov(j, i)) <= 1e-12 * std::max(1.0, std::abs(gv.cov(i, j))),
                        "orthant: covariance is not symmetric");
        cov(i, j) = i <= j ? 0.5 * (gv.cov(i, j) + gv.cov(j, i)) : cov(j, i);
      }
      scale = std::max(scale, std::abs(gv.cov(i, i)));
    }
    deterministic_.assign(k, 0);
    levels_.clear();
    pivot_.assign(k, 0);
    rank_ = 0;
    if (k == 0) return;

    // Quick path: no randomness at all.
    bool all_zero = true;
    for (double v : cov.data()) all_zero = all_zero && v == 0.0;
    if (all_zero) {
      deterministic_.assign(k, 1);
      return;
    }

    const auto eig = symmetric_eigen(cov);
    const double lmax = std::max(0.0, eig.values.empty() ? 0.0 : *std::max_element(eig.values.begin(), eig.values.end()));
    for (double l : eig.values)
      detail::require(l >= -1e-9 * std::max(1.0, scale), "orthant: covariance is indefinite beyond tolerance");
    const double floor = 1e-10 * lmax;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < k; ++c)
      if (eig.values[c] > floor && eig.values[c] > 0.0) kept.push_back(c);
    const std::size_t r = kept.size();
    // L = V_r sqrt(Lambda_r)
    std::vector<Vector> rows(k, Vector(r, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t c = 0; c < r; ++c) rows[i][c] = eig.vectors(i, kept[c]) * std::sqrt(eig.values[kept[c]]);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < k; ++i) {
      if (dot(rows[i], rows[i]) <= floor)
        deterministic_[i] = 1;
      else
        active.push_back(i);
    }

    // Pivoted Gram-Schmidt over the active rows: largest residual first.
    std::vector<Vector> dirs;
    std::vector<char> used(k, 0);
    for (;;) {
      double best = 0.0;
      std::size_t pick = k;
      for (std::size_t i : active) {
        if (used[i]) continue;
        Vector w = rows[i];
        detail::orthogonalize_against(w, dirs);
        const double res = dot(w, w);
        if (res > 1e-12 * dot(rows[i], rows[i]) && res > best) {
          best = res;
          pick = i;
        }
      }
      if (pick == k) break;
      Vector w = rows[pick];
      detail::orthogonalize_against(w, dirs);
      detail::normalize(w);
      dirs.push_back(std::move(w));
      used[pick] = 1;
    }
    rank_ = dirs.size();
    coeff_ = Matrix(k, rank_);
    levels_.assign(rank_, {});
    for (std::size_t i : active) {
      const double nrm = norm2(rows[i]);
      std::size_t piv = 0;
      for (std::size_t j = 0; j < rank_; ++j) {
        coeff_(i, j) = dot(rows[i], dirs[j]);
        if (std::abs(coeff_(i, j)) > 1e-9 * nrm) piv = j;
      }
      for (std::size_t j = piv + 1; j < rank_; ++j) coeff_(i, j) = 0.0;
      pivot_[i] = piv;
      levels_[piv].push_back(i);
    }
    nodes_ = orthant_nodes_for(tol_);
    if (rank_ > 1) {
      const double cap = std::pow(static_cast<double>(opt_.max_evaluations), 1.0 / static_cast<double>(rank_ - 1));
      nodes_ = std::max<std::size_t>(2, std::min(nodes_, static_cast<std::size_t>(cap)));
    }
    rule_ = &rule_for(nodes_);
  }

  /// Pr[y_l >= 0 for bits set in `pattern`, y_l < 0 for bits clear], l < k.
  double pattern(std::uint64_t pattern) {
    sign_.assign(k_, 1.0);
    for (std::size_t i = 0; i < k_; ++i) {
      const bool positive = (pattern >> i) & 1;
      sign_[i] = positive ? 1.0 : -1.0;
      if (deterministic_[i] && (mean_[i] >= 0.0) != positive) return 0.0;
    }
    if (rank_ == 0) return 1.0;
    z_.assign(rank_, 0.0);
    return integrate(0);
  }

  double orthant() { return pattern(k_ == 0 ? 0 : (std::uint64_t{1} << k_) - 1); }

  /// Sum of pattern probabilities over patterns with g = 1.
  double junta(const BoolJunta& g) {
    detail::require(g.arity() == k_, "junta_probability: junta arity differs from vector dimension");
    std::size_t ones = 0;
    for (auto v : g.table()) ones += v;
    const bool use_complement = ones * 2 > g.size();
    double total = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m)
      if (g(m) != use_complement) total += pattern(m);
    const double p = use_complement ? 1.0 - total : total;
    return std::clamp(p, 0.0, 1.0);
  }

  std::size_t rank() const { return rank_; }
  std::size_t nodes() const { return nodes_; }

 private:
  const QuadratureRule& rule_for(std::size_t m) {
    auto it = rules_.find(m);
    if (it == rules_.end()) it = rules_.emplace(m, gauss_legendre_unit(m)).first;
    return it->second;
  }

  // Feasible interval for z_j given z_0..z_{j-1}; returns false when empty.
  bool bounds(std::size_t j, double& lo, double& hi) const {
    lo = -std::numeric_limits<double>::infinity();
    hi = std::numeric_limits<double>::infinity();
    for (std::size_t i : levels_[j]) {
      double rest = mean_[i];
      for (std::size_t l = 0; l < j; ++l) rest += coeff_(i, l) * z_[l];
      const double a = sign_[i] * coeff_(i, j);
      const double bound = -sign_[i] * rest / a;
      if (a > 0.0)
        lo = std::max(lo, bound);
      else
        hi = std::min(hi, bound);
    }
    return lo < hi;
  }

  double integrate(std::size_t j) {
    double lo, hi;
    if (!bounds(j, lo, hi)) return 0.0;
    // Work in the upper tail when the interval sits right of 0 to keep precision.
    const bool upper = lo > 0.0;
    const double plo = upper ? normal_cdf(-hi) : normal_cdf(lo);
    const double phi = upper ? normal_cdf(-lo) : normal_cdf(hi);
    const double e = phi - plo;
    if (e <= 0.0) return 0.0;
    if (j + 1 == rank_) return e;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule_->nodes.size(); ++q) {
      const double u = plo + rule_->nodes[q] * e;
      z_[j] = upper ? -normal_quantile(u) : normal_quantile(u);
      acc += rule_->weights[q] * integrate(j + 1);
    }
    return e * acc;
  }

  double tol_;
  OrthantOptions opt_;
  std::size_t k_ = 0;
  std::size_t rank_ = 0;
  std::size_t nodes_ = 0;
  Vector mean_;
  Matrix coeff_;
  std::vector<char> deterministic_;
  std::vector<std::size_t> pivot_;
  std::vector<std::vector<std::size_t>> levels_;
  std::map<std::size_t, QuadratureRule> rules_;
  const QuadratureRule* rule_ = nullptr;
  Vector sign_;
  Vector z_;
};

/// Pr[y_i >= 0 for all i], y ~ N(mean, cov).
inline double orthant_probability(const GaussianVector& gv, double tol, OrthantOptions opt = {}) {
  OrthantSolver s(tol, opt);
  s.set(gv);
  return s.orthant();
}

/// Pr[g(sign y) = 1] with sign(y_l) = +1 iff y_l >= 0.
inline double junta_probability(const GaussianVector& gv, const BoolJunta& g, double tol, OrthantOptions opt = {}) {
  OrthantSolver s(tol, opt);
  s.set(gv);
  return s.junta(g);
}

}  // namespace ptf
