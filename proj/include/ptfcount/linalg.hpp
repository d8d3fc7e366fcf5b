#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/matrix.hpp"
#include "ptfcount/poly.hpp"

namespace ptf {

/// Eigenvalues sorted by decreasing magnitude (positive first on ties);
/// column j of `vectors` is the unit eigenvector for values[j], with its first
/// nonzero component positive.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

namespace detail {

inline void require_symmetric_finite(const Matrix& a, const char* op) {
  require(a.rows() == a.cols(), std::string(op) + ": matrix is not square");
  if (!all_finite(a)) throw InputError(std::string(op) + ": matrix has non-finite entries");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      require(a(i, j) == a(j, i), std::string(op) + ": matrix is not symmetric");
}

inline void canonical_sign(Matrix& v, std::size_t col) {
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double x = v(i, col);
    if (std::abs(x) > 1e-12) {
      if (x < 0)
        for (std::size_t r = 0; r < v.rows(); ++r) v(r, col) = -v(r, col);
      return;
    }
  }
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for a symmetric matrix.
inline EigenDecomposition symmetric_eigen(const Matrix& input) {
  detail::require_symmetric_finite(input, "symmetric_eigen");
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        // Once an off-diagonal entry is negligible against both diagonal entries
        // it is dropped outright.
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const double ai = std::abs(a(i, i)), aj = std::abs(a(j, j));
    if (ai != aj) return ai > aj;
    return a(i, i) > a(j, j);
  });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    detail::canonical_sign(out.vectors, c);
  }
  return out;
}

/// Eigenpair of maximum eigenvalue magnitude. The zero matrix yields (0, e_1).
inline EigenPair max_eigenpair(const Matrix& a) {
  const auto eig = symmetric_eigen(a);
  if (a.rows() == 0) return {};
  return {eig.values[0], eig.vectors.column(0)};
}

inline double max_abs_eigenvalue(const Matrix& a) {
  return a.rows() == 0 ? 0.0 : std::abs(max_eigenpair(a).value);
}

/// Orthonormal vectors in R^dim. The first `split` are the collected forms,
/// the rest (if any) their completion.
struct OrthonormalBasis {
  std::size_t dim = 0;
  std::vector<Vector> vectors;
  std::size_t split = 0;

  bool complete() const { return vectors.size() == dim; }
};

/// max_{i,j} |<v_i, v_j> - delta_ij|.
inline double orthonormality_residual(const OrthonormalBasis& basis) {
  double worst = 0.0;
  for (std::size_t i = 0; i < basis.vectors.size(); ++i)
    for (std::size_t j = i; j < basis.vectors.size(); ++j) {
      const double d = dot(basis.vectors[i], basis.vectors[j]) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(d));
    }
  return worst;
}

namespace detail {

/// Removes the components of w along `vs` (modified Gram-Schmidt, two passes).
inline void orthogonalize_against(Vector& w, const std::vector<Vector>& vs) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& v : vs) {
      const double proj = dot(v, w);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= proj * v[i];
    }
}

inline void normalize(Vector& w) {
  const double nrm = norm2(w);
  for (double& x : w) x /= nrm;
}

}  // namespace detail

/// Extends the first `partial.vectors.size()` orthonormal vectors to a full
/// orthonormal basis by Gram-Schmidt over the standard basis.
inline OrthonormalBasis complete_basis(const OrthonormalBasis& partial) {
  const std::size_t n = partial.dim;
  const std::size_t r = partial.vectors.size();
  detail::require(r <= n, "complete_basis: more vectors than the dimension");
  for (const auto& v : partial.vectors) detail::require(v.size() == n, "complete_basis: vector length differs");
  detail::require(orthonormality_residual(partial) <= 1e-8,
                  "complete_basis: input vectors are not orthonormal (linearly dependent beyond tolerance)");

  OrthonormalBasis out{n, {}, r};
  out.vectors.reserve(n);
  for (const auto& v : partial.vectors) {
    Vector w = v;
    detail::orthogonalize_against(w, out.vectors);
    detail::normalize(w);
    out.vectors.push_back(std::move(w));
  }
  for (std::size_t j = 0; j < n && out.vectors.size() < n; ++j) {
    Vector w(n, 0.0);
    w[j] = 1.0;
    detail::orthogonalize_against(w, out.vectors);
    if (norm2(w) < 1e-8) continue;
    detail::normalize(w);
    out.vectors.push_back(std::move(w));
  }
  if (out.vectors.size() != n) throw NumericalError("complete_basis: could not complete the basis");
  // Final re-orthogonalization pass over the completion.
  for (std::size_t i = r; i < n; ++i) {
    Vector w = out.vectors[i];
    std::vector<Vector> before(out.vectors.begin(), out.vectors.begin() + static_cast<std::ptrdiff_t>(i));
    detail::orthogonalize_against(w, before);
    detail::normalize(w);
    out.vectors[i] = std::move(w);
  }
  return out;
}

/// Matrix whose columns are the basis vectors.
inline Matrix basis_matrix(const OrthonormalBasis& basis) {
  Matrix v(basis.dim, basis.vectors.size());
  for (std::size_t c = 0; c < basis.vectors.size(); ++c)
    for (std::size_t r = 0; r < basis.dim; ++r) v(r, c) = basis.vectors[c][r];
  return v;
}

/// Expresses q in the coordinates y = V^T x: A' = V^T A V, b' = V^T b.
inline QuadPoly rewrite_in_basis(const QuadPoly& q, const OrthonormalBasis& basis) {
  detail::require(basis.complete(), "rewrite_in_basis: basis is incomplete");
  detail::require(basis.dim == q.dim(), "rewrite_in_basis: basis dimension differs from polynomial");
  const Matrix v = basis_matrix(basis);
  const Matrix vt = transpose(v);
  Matrix a = multiply(vt, multiply(q.quadratic(), v));
  symmetrize_from_upper(a);
  return QuadPoly::from_parts(q.constant(), multiply(vt, q.linear()), std::move(a), q.domain());
}

inline PolyTuple rewrite_in_basis(const PolyTuple& q, const OrthonormalBasis& basis) {
  return map_tuple(q, [&](const QuadPoly& p) { return rewrite_in_basis(p, basis); });
}

struct ResidueProjection {
  QuadPoly residue;     ///< terms on coordinates >= r, plus the constant
  QuadPoly projection;  ///< everything else
};

/// For q already in basis coordinates: residue is the tail past the first r
/// coordinates and projection the head.
inline ResidueProjection residue_projection(const QuadPoly& q, std::size_t r) {
  auto split = split_head_tail(q, r);
  return {std::move(split.tail), std::move(split.head)};
}

}  // namespace ptf
