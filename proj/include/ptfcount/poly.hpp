#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/matrix.hpp"

namespace ptf {

enum class Domain { gaussian, boolean };

inline const char* to_string(Domain d) { return d == Domain::gaussian ? "gaussian" : "boolean"; }

/// Variances at or below kSigmaMin^2 mark a polynomial as near-constant.
inline constexpr double kSigmaMin = 1e-12;

/// Degree-2 polynomial c + b.x + x^T A x.
///
/// Coefficients are addressed in monomial form a_ij (i <= j) so that
/// x^T A x = sum_{i<=j} a_ij x_i x_j; the stored matrix holds a_ii on the
/// diagonal and a_ij / 2 off it.
class QuadPoly {
 public:
  QuadPoly() = default;
  explicit QuadPoly(std::size_t n, Domain domain = Domain::gaussian)
      : n_(n), domain_(domain), b_(n, 0.0), a_(n, n) {}

  /// Builds from the symmetric matrix form. `a` must be exactly symmetric.
  static QuadPoly from_parts(double c, Vector b, Matrix a, Domain domain = Domain::gaussian) {
    const std::size_t n = b.size();
    detail::require(a.rows() == n && a.cols() == n, "QuadPoly: matrix shape does not match linear part");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j)
        detail::require(a(i, j) == a(j, i), "QuadPoly: quadratic matrix is not symmetric");
    QuadPoly p(n, domain);
    p.c_ = c;
    p.b_ = std::move(b);
    p.a_ = std::move(a);
    if (domain == Domain::boolean)
      detail::require(p.is_multilinear(), "QuadPoly: boolean domain requires a zero diagonal");
    return p;
  }

  std::size_t dim() const { return n_; }
  Domain domain() const { return domain_; }
  double constant() const { return c_; }
  const Vector& linear() const { return b_; }
  const Matrix& quadratic() const { return a_; }

  /// Monomial coefficient a_ij of x_i x_j; order of i, j does not matter.
  double coefficient(std::size_t i, std::size_t j) const {
    check_index(i);
    check_index(j);
    return i == j ? a_(i, i) : 2.0 * a_(i, j);
  }

  void set_constant(double c) { c_ = c; }
  void set_linear(std::size_t i, double v) {
    check_index(i);
    b_[i] = v;
  }
  void set_coefficient(std::size_t i, std::size_t j, double v) {
    check_index(i);
    check_index(j);
    if (i == j) {
      detail::require(domain_ == Domain::gaussian || v == 0.0,
                      "QuadPoly: boolean domain forbids squared terms");
      a_(i, i) = v;
    } else {
      a_(i, j) = v / 2.0;
      a_(j, i) = a_(i, j);
    }
  }
  void add_coefficient(std::size_t i, std::size_t j, double v) {
    set_coefficient(i, j, coefficient(i, j) + v);
  }

  bool is_multilinear() const {
    for (std::size_t i = 0; i < n_; ++i)
      if (a_(i, i) != 0.0) return false;
    return true;
  }

  /// Same coefficients, different target domain.
  QuadPoly with_domain(Domain d) const {
    if (d == Domain::boolean)
      detail::require(is_multilinear(), "QuadPoly: boolean domain requires a zero diagonal");
    QuadPoly p = *this;
    p.domain_ = d;
    return p;
  }

  QuadPoly scaled(double s) const {
    QuadPoly p = *this;
    p.c_ *= s;
    for (double& v : p.b_) v *= s;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        p.a_(i, j) *= s;
        p.a_(j, i) = p.a_(i, j);
      }
    return p;
  }

  QuadPoly& operator+=(const QuadPoly& o) { return combine(o, 1.0); }
  QuadPoly& operator-=(const QuadPoly& o) { return combine(o, -1.0); }
  friend QuadPoly operator+(QuadPoly a, const QuadPoly& b) { return a += b; }
  friend QuadPoly operator-(QuadPoly a, const QuadPoly& b) { return a -= b; }

  bool operator==(const QuadPoly&) const = default;

 private:
  void check_index(std::size_t i) const {
    if (i >= n_) throw InputError("QuadPoly: variable index " + std::to_string(i) + " out of range");
  }

  QuadPoly& combine(const QuadPoly& o, double sign) {
    detail::require(o.n_ == n_, "QuadPoly: dimension mismatch");
    c_ += sign * o.c_;
    for (std::size_t i = 0; i < n_; ++i) b_[i] += sign * o.b_[i];
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        a_(i, j) += sign * o.a_(i, j);
        a_(j, i) = a_(i, j);
      }
    return *this;
  }

  std::size_t n_ = 0;
  Domain domain_ = Domain::gaussian;
  double c_ = 0.0;
  Vector b_;
  Matrix a_;
};

inline double eval(const QuadPoly& p, std::span<const double> x) {
  detail::require(x.size() == p.dim(), "eval: point dimension does not match polynomial");
  const std::size_t n = p.dim();
  const Matrix& a = p.quadratic();
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += x[i] * dot(a.row(i), x);
  return p.constant() + dot(p.linear(), x) + quad;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline Moments gaussian_moments(const QuadPoly& p) {
  detail::require(p.domain() == Domain::gaussian, "gaussian_moments: polynomial is not gaussian-domain");
  const double fro = frobenius_dot(p.quadratic(), p.quadratic());
  return {p.constant() + trace(p.quadratic()), 2.0 * fro + dot(p.linear(), p.linear())};
}

inline double gaussian_covariance(const QuadPoly& p, const QuadPoly& q) {
  detail::require(p.dim() == q.dim(), "gaussian_covariance: dimension mismatch");
  detail::require(p.domain() == Domain::gaussian && q.domain() == Domain::gaussian,
                  "gaussian_covariance: polynomials are not gaussian-domain");
  // trace(A_p A_q) = <A_p, A_q>_F for symmetric matrices.
  return 2.0 * frobenius_dot(p.quadratic(), q.quadratic()) + dot(p.linear(), q.linear());
}

/// Sum of squared non-constant monomial coefficients.
inline double ss_norm(const QuadPoly& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i)
    for (std::size_t j = i; j < p.dim(); ++j) {
      const double a = p.coefficient(i, j);
      s += a * a;
    }
  return s + dot(p.linear(), p.linear());
}

struct HeadTail {
  QuadPoly head;       ///< monomials touching a variable with index < t, no constant
  QuadPoly tail;       ///< monomials on variables >= t, plus the constant
  QuadPoly quad_tail;  ///< quadratic part of the tail
};

/// Splits by the first `t` variables (0-based: indices 0..t-1 form the head).
inline HeadTail split_head_tail(const QuadPoly& z, std::size_t t) {
  const std::size_t n = z.dim();
  detail::require(t <= n, "split_head_tail: t out of range");
  const Matrix& a = z.quadratic();
  Matrix ah(n, n), at(n, n);
  Vector bh(n, 0.0), bt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    (i < t ? bh : bt)[i] = z.linear()[i];
    for (std::size_t j = 0; j < n; ++j) (i < t || j < t ? ah : at)(i, j) = a(i, j);
  }
  HeadTail out;
  out.head = QuadPoly::from_parts(0.0, std::move(bh), std::move(ah), z.domain());
  out.quad_tail = QuadPoly::from_parts(0.0, Vector(n, 0.0), at, z.domain());
  out.tail = QuadPoly::from_parts(z.constant(), std::move(bt), std::move(at), z.domain());
  return out;
}

/// Partial assignment of variables, kept sorted by index.
class Restriction {
 public:
  Restriction() = default;
  explicit Restriction(Domain domain) : domain_(domain) {}
  Restriction(Domain domain, std::vector<std::pair<std::size_t, double>> values) : domain_(domain) {
    for (const auto& [i, v] : values) assign(i, v);
  }

  void assign(std::size_t index, double value) {
    if (domain_ == Domain::boolean)
      detail::require(value == 1.0 || value == -1.0, "Restriction: boolean values must be +1 or -1");
    detail::require(std::isfinite(value), "Restriction: value must be finite");
    auto it = std::lower_bound(values_.begin(), values_.end(), index,
                               [](const auto& e, std::size_t i) { return e.first < i; });
    detail::require(it == values_.end() || it->first != index,
                    "Restriction: variable " + std::to_string(index) + " assigned twice");
    values_.insert(it, {index, value});
  }

  bool contains(std::size_t index) const {
    return std::binary_search(values_.begin(), values_.end(), std::pair<std::size_t, double>{index, 0.0},
                              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  Domain domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<std::pair<std::size_t, double>>& values() const { return values_; }

  bool operator==(const Restriction&) const = default;

 private:
  Domain domain_ = Domain::gaussian;
  std::vector<std::pair<std::size_t, double>> values_;
};

/// Substitutes the restricted variables. The result keeps dimension n; the
/// restricted coordinates get zero coefficients.
inline QuadPoly restrict(const QuadPoly& p, const Restriction& rho) {
  const std::size_t n = p.dim();
  Vector fixed(n, 0.0);
  std::vector<char> is_fixed(n, 0);
  for (const auto& [i, v] : rho.values()) {
    if (i >= n) throw InputError("restrict: variable index " + std::to_string(i) + " out of range");
    if (p.domain() == Domain::boolean)
      detail::require(v == 1.0 || v == -1.0, "restrict: boolean values must be +1 or -1");
    fixed[i] = v;
    is_fixed[i] = 1;
  }
  const Matrix& a = p.quadratic();
  double c = p.constant();
  Vector b(n, 0.0);
  Matrix na(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_fixed[i]) {
      c += p.linear()[i] * fixed[i];
      continue;
    }
    double lin = p.linear()[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (is_fixed[j])
        lin += 2.0 * a(i, j) * fixed[j];
      else
        na(i, j) = a(i, j);
    }
    b[i] = lin;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_fixed[i]) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (is_fixed[j]) c += a(i, j) * fixed[i] * fixed[j];
  }
  return QuadPoly::from_parts(c, std::move(b), std::move(na), p.domain());
}

namespace detail {
inline void require_multilinear(const QuadPoly& p, const char* op) {
  if (!p.is_multilinear()) throw InputError(std::string(op) + ": polynomial is not multilinear");
}
}  // namespace detail

/// Variance under the uniform measure on {-1,1}^n (sum of squared non-constant
/// Fourier coefficients).
inline double boolean_variance(const QuadPoly& p) {
  detail::require_multilinear(p, "boolean_variance");
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i)
    for (std::size_t j = i + 1; j < p.dim(); ++j) {
      const double a = p.coefficient(i, j);
      s += a * a;
    }
  return s + dot(p.linear(), p.linear());
}

inline double boolean_influence(const QuadPoly& p, std::size_t i) {
  detail::require_multilinear(p, "boolean_influence");
  detail::require(i < p.dim(), "boolean_influence: variable index out of range");
  double s = p.linear()[i] * p.linear()[i];
  for (std::size_t j = 0; j < p.dim(); ++j) {
    if (j == i) continue;
    const double a = p.coefficient(i, j);
    s += a * a;
  }
  return s;
}

inline Vector boolean_influences(const QuadPoly& p) {
  detail::require_multilinear(p, "boolean_influences");
  const std::size_t n = p.dim();
  const Matrix& a = p.quadratic();
  Vector inf(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = p.linear()[i] * p.linear()[i];
    for (std::size_t j = 0; j < n; ++j) s += 4.0 * a(i, j) * a(i, j);
    inf[i] = s;
  }
  return inf;
}

/// Mean under the domain's measure.
inline double domain_mean(const QuadPoly& p) {
  return p.domain() == Domain::gaussian ? gaussian_moments(p).mean : p.constant();
}

inline double domain_variance(const QuadPoly& p) {
  return p.domain() == Domain::gaussian ? gaussian_moments(p).variance : boolean_variance(p);
}

struct Normalized {
  QuadPoly poly;  ///< p / scale, or p itself when near-constant
  double scale = 1.0;
  bool near_constant = false;
  int constant_sign = 0;  ///< sign taken by a near-constant polynomial (+1 when mean >= 0)
};

inline Normalized normalize_unit_variance(const QuadPoly& p) {
  const double var = domain_variance(p);
  Normalized out;
  if (!(var > kSigmaMin * kSigmaMin)) {
    out.poly = p;
    out.near_constant = true;
    out.constant_sign = domain_mean(p) >= 0.0 ? 1 : -1;
    return out;
  }
  out.scale = std::sqrt(var);
  out.poly = p.scaled(1.0 / out.scale);
  return out;
}

/// Ordered k-tuple of polynomials over shared variables, with a map from
/// current positions to original input positions.
class PolyTuple {
 public:
  PolyTuple() = default;
  PolyTuple(std::size_t n, Domain domain) : n_(n), domain_(domain) {}
  explicit PolyTuple(std::vector<QuadPoly> polys) : polys_(std::move(polys)), index_map_(identity_map(polys_.size())) {
    validate();
  }
  PolyTuple(std::vector<QuadPoly> polys, std::vector<std::size_t> index_map)
      : polys_(std::move(polys)), index_map_(std::move(index_map)) {
    validate();
  }

  std::size_t size() const { return polys_.size(); }
  bool empty() const { return polys_.empty(); }
  std::size_t dim() const { return n_; }
  Domain domain() const { return domain_; }
  const QuadPoly& operator[](std::size_t i) const { return polys_.at(i); }
  const std::vector<QuadPoly>& polys() const { return polys_; }
  const std::vector<std::size_t>& index_map() const { return index_map_; }

  bool operator==(const PolyTuple&) const = default;

 private:
  static std::vector<std::size_t> identity_map(std::size_t k) {
    std::vector<std::size_t> m(k);
    for (std::size_t i = 0; i < k; ++i) m[i] = i;
    return m;
  }

  void validate() {
    detail::require(index_map_.size() == polys_.size(), "PolyTuple: index map length differs from tuple size");
    if (!polys_.empty()) {
      n_ = polys_.front().dim();
      domain_ = polys_.front().domain();
    }
    for (const auto& p : polys_) {
      detail::require(p.dim() == n_, "PolyTuple: members have different dimensions");
      detail::require(p.domain() == domain_, "PolyTuple: members have different domains");
    }
    std::vector<char> seen(polys_.size(), 0);
    for (std::size_t m : index_map_) {
      detail::require(m < polys_.size() && !seen[m], "PolyTuple: index map is not a permutation");
      seen[m] = 1;
    }
  }

  std::vector<QuadPoly> polys_;
  std::vector<std::size_t> index_map_;
  std::size_t n_ = 0;
  Domain domain_ = Domain::gaussian;
};

/// Applies `f` to every member, keeping the index map.
template <class F>
PolyTuple map_tuple(const PolyTuple& q, F&& f) {
  if (q.empty()) return q;
  std::vector<QuadPoly> out;
  out.reserve(q.size());
  for (const auto& p : q.polys()) out.push_back(f(p));
  return PolyTuple(std::move(out), q.index_map());
}

inline PolyTuple restrict(const PolyTuple& q, const Restriction& rho) {
  return map_tuple(q, [&](const QuadPoly& p) { return restrict(p, rho); });
}

inline PolyTuple with_domain(const PolyTuple& q, Domain d) {
  if (q.empty()) return PolyTuple(q.dim(), d);
  return map_tuple(q, [&](const QuadPoly& p) { return p.with_domain(d); });
}

}  // namespace ptf
