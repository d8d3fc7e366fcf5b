#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ptfcount/linalg.hpp"
#include "ptfcount/poly.hpp"

namespace ptf::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Dense random polynomial; Boolean domain gets no squared terms.
inline QuadPoly random_poly(Rng& rng, std::size_t n, Domain domain = Domain::gaussian, double scale = 1.0) {
  QuadPoly p(n, domain);
  p.set_constant(uniform(rng, -scale, scale));
  for (std::size_t i = 0; i < n; ++i) p.set_linear(i, uniform(rng, -scale, scale));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i == j && domain == Domain::boolean) continue;
      p.set_coefficient(i, j, uniform(rng, -scale, scale));
    }
  return p;
}

/// Random polynomial with integer coefficients in [-bound, bound].
inline QuadPoly random_int_poly(Rng& rng, std::size_t n, int bound, Domain domain = Domain::boolean) {
  QuadPoly p(n, domain);
  p.set_constant(uniform_int(rng, -bound, bound));
  for (std::size_t i = 0; i < n; ++i) p.set_linear(i, uniform_int(rng, -bound, bound));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i == j && domain == Domain::boolean) continue;
      p.set_coefficient(i, j, uniform_int(rng, -bound, bound));
    }
  return p;
}

inline PolyTuple random_tuple(Rng& rng, std::size_t k, std::size_t n, Domain domain = Domain::gaussian) {
  std::vector<QuadPoly> ps;
  for (std::size_t l = 0; l < k; ++l) ps.push_back(random_poly(rng, n, domain));
  return PolyTuple(std::move(ps));
}

inline PolyTuple normalized(const PolyTuple& q) {
  return map_tuple(q, [](const QuadPoly& p) { return normalize_unit_variance(p).poly; });
}

inline Matrix random_symmetric(Rng& rng, std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = uniform(rng, -1.0, 1.0);
  return a;
}

/// Random orthonormal set of r vectors in R^n (Gram-Schmidt of Gaussian vectors).
inline OrthonormalBasis random_orthonormal(Rng& rng, std::size_t n, std::size_t r) {
  std::normal_distribution<double> nd;
  OrthonormalBasis out{n, {}, r};
  while (out.vectors.size() < r) {
    Vector w(n);
    for (double& x : w) x = nd(rng);
    ptf::detail::orthogonalize_against(w, out.vectors);
    if (norm2(w) < 1e-6) continue;
    ptf::detail::normalize(w);
    out.vectors.push_back(std::move(w));
  }
  return out;
}

inline Vector random_point(Rng& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  Vector x(n);
  for (double& v : x) v = nd(rng);
  return x;
}

}  // namespace ptf::testing
