#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/junta.hpp"
#include "ptfcount/poly.hpp"

// Ground-truth engines for validation: exhaustive Boolean enumeration, seeded
// Monte Carlo under the Gaussian measure, and empirical Kolmogorov distance.

namespace ptf {

/// SplitMix64 output for a given position in the stream started at `seed`.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: every draw is a pure function of (seed, counter).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const { return splitmix64_at(seed_, counter); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const { return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53; }

  /// Two independent standard normals from counters 2c and 2c+1 (Box-Muller).
  std::pair<double, double> normal_pair(std::uint64_t c) const {
    const double u1 = 1.0 - uniform(2 * c);  // (0, 1]
    const double u2 = uniform(2 * c + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  /// Standard normal vector number `index` of dimension n.
  void normal_vector(std::uint64_t index, std::size_t n, std::vector<double>& out) const {
    out.resize(n);
    const std::uint64_t pairs = (n + 1) / 2;
    for (std::uint64_t j = 0; j < pairs; ++j) {
      const auto [a, b] = normal_pair(index * pairs + j);
      out[2 * j] = a;
      if (2 * j + 1 < n) out[2 * j + 1] = b;
    }
  }

 private:
  std::uint64_t seed_;
};

struct McConfig {
  std::uint64_t seed = 1;
  std::size_t samples = 1'000'000;
  unsigned threads = 1;
};

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
};

inline std::size_t sign_pattern(const PolyTuple& q, std::span<const double> x) {
  std::size_t m = 0;
  for (std::size_t l = 0; l < q.size(); ++l)
    if (eval(q[l], x) >= 0.0) m |= std::size_t{1} << l;
  return m;
}

/// Monte Carlo estimate of Pr_{x ~ N(0,I)}[g(sign q(x)) = 1]. The hit count is
/// an integer, so the result does not depend on the thread count.
inline McEstimate mc_gaussian_count(const PolyTuple& q, const BoolJunta& g, const McConfig& cfg) {
  detail::require(cfg.samples >= 1, "mc_gaussian_count: samples must be at least 1");
  detail::require(g.arity() == q.size(), "mc_gaussian_count: junta arity differs from the number of polynomials");
  const CounterRng rng(cfg.seed);
  const std::size_t n = q.dim();
  const unsigned threads = std::max(1u, cfg.threads);
  std::vector<std::size_t> hits(threads, 0);
  auto work = [&](unsigned id) {
    std::vector<double> x;
    const std::size_t lo = cfg.samples * id / threads, hi = cfg.samples * (id + 1) / threads;
    std::size_t h = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      rng.normal_vector(i, n, x);
      h += g(sign_pattern(q, x));
    }
    hits[id] = h;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work, i);
    for (auto& t : pool) t.join();
  }
  McEstimate out;
  out.samples = cfg.samples;
  out.hits = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  const double p = static_cast<double>(out.hits) / static_cast<double>(out.samples);
  out.estimate = p;
  out.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(out.samples));
  return out;
}

/// Exact rational number num/den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Multilinear polynomial with integer coefficients; sign-equivalent to the
/// polynomial it was built from (all coefficients scaled by one positive factor).
struct ExactPoly {
  std::size_t n = 0;
  __int128 c = 0;
  std::vector<__int128> b;
  std::vector<__int128> a;  ///< n x n, symmetric, zero diagonal: a[i*n+j] is the x_i x_j coefficient
};

namespace detail {

inline constexpr __int128 kExactLimit = static_cast<__int128>(1) << 96;

inline bool checked_abs_ok(__int128 v) { return v < kExactLimit && v > -kExactLimit; }

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b != 0) {
    const std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace detail

/// Scales a double-coefficient multilinear polynomial to exact integers. Every
/// double is a dyadic rational, so this is exact unless the exponent range is
/// too wide for 128-bit arithmetic, in which case nothing is returned.
inline std::optional<ExactPoly> exact_from_poly(const QuadPoly& p) {
  if (!p.is_multilinear()) return std::nullopt;
  const std::size_t n = p.dim();
  std::vector<double> coeffs{p.constant()};
  for (double v : p.linear()) coeffs.push_back(v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) coeffs.push_back(p.coefficient(i, j));
  int emin = 0, emax = 0;
  bool any = false;
  for (double v : coeffs) {
    if (v == 0.0) continue;
    if (!std::isfinite(v)) return std::nullopt;
    int e;
    std::frexp(v, &e);  // v = f 2^e, 0.5 <= |f| < 1; mantissa integer is f 2^53
    const int low = e - 53;
    emin = any ? std::min(emin, low) : low;
    emax = any ? std::max(emax, e) : e;
    any = true;
  }
  ExactPoly out;
  out.n = n;
  out.b.assign(n, 0);
  out.a.assign(n * n, 0);
  if (!any) return out;
  const std::size_t terms = coeffs.size();
  int headroom = 0;
  while ((std::size_t{1} << headroom) < terms) ++headroom;
  if (emax - emin + headroom > 100) return std::nullopt;
  auto scaled = [&](double v) -> __int128 {
    if (v == 0.0) return 0;
    int e;
    const double f = std::frexp(v, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));  // exact
    return static_cast<__int128>(mant) << (e - 53 - emin);
  };
  out.c = scaled(p.constant());
  for (std::size_t i = 0; i < n; ++i) out.b[i] = scaled(p.linear()[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.a[i * n + j] = out.a[j * n + i] = scaled(p.coefficient(i, j));
  return out;
}

/// Builds an exact polynomial from rational coefficients by clearing denominators.
/// `terms` holds (i, j, a_ij) with i < j, 0-based.
inline ExactPoly exact_from_rationals(std::size_t n, const Rational& c, const std::vector<Rational>& b,
                                      const std::vector<std::tuple<std::size_t, std::size_t, Rational>>& terms) {
  detail::require(b.size() == n, "exact_from_rationals: linear part has wrong length");
  std::int64_t lcm = 1;
  auto absorb = [&](const Rational& r) {
    detail::require(r.den > 0, "exact_from_rationals: denominators must be positive");
    const std::int64_t g = detail::gcd64(lcm, r.den);
    const __int128 next = static_cast<__int128>(lcm / g) * r.den;
    detail::require(next < (static_cast<__int128>(1) << 62), "exact_from_rationals: denominators too large");
    lcm = static_cast<std::int64_t>(next);
  };
  absorb(c);
  for (const auto& r : b) absorb(r);
  for (const auto& [i, j, r] : terms) absorb(r);
  auto scaled = [&](const Rational& r) {
    const __int128 v = static_cast<__int128>(r.num) * (lcm / r.den);
    detail::require(detail::checked_abs_ok(v), "exact_from_rationals: coefficient too large for exact arithmetic");
    return v;
  };
  ExactPoly out;
  out.n = n;
  out.c = scaled(c);
  out.b.resize(n);
  out.a.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) out.b[i] = scaled(b[i]);
  for (const auto& [i, j, r] : terms) {
    detail::require(i < j && j < n, "exact_from_rationals: term indices must satisfy i < j < n");
    out.a[i * n + j] += scaled(r);
    out.a[j * n + i] = out.a[i * n + j];
  }
  return out;
}

/// Exact probability count / 2^n.
struct ExactProbability {
  std::uint64_t count = 0;
  unsigned n = 0;
  double value() const { return std::ldexp(static_cast<double>(count), -static_cast<int>(n)); }
  std::string to_string() const { return std::to_string(count) + "/2^" + std::to_string(n); }
  bool operator==(const ExactProbability&) const = default;
};

inline constexpr std::size_t kBruteForceMaxVars = 24;

/// Exhaustive count over {-1,1}^n in Gray-code order with exact integer updates.
inline ExactProbability brute_force_boolean(const std::vector<ExactPoly>& q, std::size_t n, const BoolJunta& g) {
  detail::require(g.arity() == q.size(), "brute_force_boolean: junta arity differs from the number of polynomials");
  if (n > kBruteForceMaxVars)
    throw BudgetError("brute_force_boolean: n = " + std::to_string(n) + " exceeds the enumeration budget of " +
                      std::to_string(kBruteForceMaxVars) + " variables");
  const std::size_t k = q.size();
  for (const auto& p : q) detail::require(p.n == n, "brute_force_boolean: dimension mismatch");
  // Start at x = (1, ..., 1). field[l][i] = b_i + sum_j a_ij x_j.
  std::vector<int> x(n, 1);
  std::vector<__int128> value(k);
  std::vector<std::vector<__int128>> field(k, std::vector<__int128>(n));
  for (std::size_t l = 0; l < k; ++l) {
    __int128 v = q[l].c;
    for (std::size_t i = 0; i < n; ++i) {
      __int128 f = q[l].b[i];
      for (std::size_t j = 0; j < n; ++j) f += q[l].a[i * n + j];
      field[l][i] = f;
      v += q[l].b[i];
      for (std::size_t j = i + 1; j < n; ++j) v += q[l].a[i * n + j];
    }
    value[l] = v;
  }
  auto pattern = [&] {
    std::size_t m = 0;
    for (std::size_t l = 0; l < k; ++l)
      if (value[l] >= 0) m |= std::size_t{1} << l;
    return m;
  };
  std::uint64_t count = g(pattern());
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto i = static_cast<std::size_t>(__builtin_ctzll(step));
    const int old = x[i];
    x[i] = -old;
    for (std::size_t l = 0; l < k; ++l) {
      value[l] -= 2 * old * field[l][i];
      for (std::size_t j = 0; j < n; ++j) field[l][j] -= 2 * old * q[l].a[j * n + i];
    }
    count += g(pattern());
  }
  return {count, static_cast<unsigned>(n)};
}

/// Exact when every coefficient fits the 128-bit dyadic scaling (always the
/// case for moderate magnitudes); otherwise evaluates in double precision.
inline ExactProbability brute_force_boolean(const PolyTuple& q, const BoolJunta& g) {
  detail::require(q.empty() || q.domain() == Domain::boolean, "brute_force_boolean: tuple is not boolean-domain");
  std::vector<ExactPoly> exact;
  bool ok = true;
  for (const auto& p : q.polys()) {
    auto e = exact_from_poly(p);
    if (!e) {
      ok = false;
      break;
    }
    exact.push_back(std::move(*e));
  }
  if (ok) return brute_force_boolean(exact, q.dim(), g);
  const std::size_t n = q.dim();
  if (n > kBruteForceMaxVars) throw BudgetError("brute_force_boolean: n exceeds the enumeration budget");
  std::vector<double> x(n);
  std::uint64_t count = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (m >> i & 1) ? -1.0 : 1.0;
    count += g(sign_pattern(q, x));
  }
  return {count, static_cast<unsigned>(n)};
}

namespace detail {

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : t_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < t_.size(); i += i & (~i + 1)) ++t_[i];
  }
  std::size_t prefix(std::size_t i) const {  // count of positions <= i
    std::size_t s = 0;
    for (++i; i > 0; i -= i & (~i + 1)) s += t_[i];
    return s;
  }

 private:
  std::vector<std::size_t> t_;
};

}  // namespace detail

/// max over pooled sample points t of |F_a(t) - F_b(t)| where F is the
/// empirical corner CDF Pr[X <= t componentwise]. A lower bound on the true
/// Kolmogorov distance of the underlying laws.
inline double empirical_dk(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  detail::require(!a.empty() && !b.empty(), "empirical_dk: sample sets must be nonempty");
  const std::size_t k = a.front().size();
  for (const auto& v : a) detail::require(v.size() == k, "empirical_dk: dimension mismatch");
  for (const auto& v : b) detail::require(v.size() == k, "empirical_dk: dimension mismatch");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::vector<const std::vector<double>*> pool;
  for (const auto& v : a) pool.push_back(&v);
  for (const auto& v : b) pool.push_back(&v);
  double best = 0.0;

  if (k == 2) {
    // Sweep thresholds by first coordinate, counting second-coordinate ranks.
    std::vector<double> ys;
    for (auto* p : pool) ys.push_back((*p)[1]);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    auto rank = [&](double y) {
      return static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
    };
    auto by_x = [](const std::vector<double>* u, const std::vector<double>* v) { return (*u)[0] < (*v)[0]; };
    std::vector<const std::vector<double>*> sa, sb;
    for (const auto& v : a) sa.push_back(&v);
    for (const auto& v : b) sb.push_back(&v);
    std::sort(sa.begin(), sa.end(), by_x);
    std::sort(sb.begin(), sb.end(), by_x);
    std::sort(pool.begin(), pool.end(), by_x);
    detail::Fenwick fa(ys.size()), fb(ys.size());
    std::size_t ia = 0, ib = 0;
    for (auto* t : pool) {
      while (ia < sa.size() && (*sa[ia])[0] <= (*t)[0]) fa.add(rank((*sa[ia++])[1]));
      while (ib < sb.size() && (*sb[ib])[0] <= (*t)[0]) fb.add(rank((*sb[ib++])[1]));
      const std::size_t r = rank((*t)[1]);
      const double d = static_cast<double>(fa.prefix(r)) / na - static_cast<double>(fb.prefix(r)) / nb;
      best = std::max(best, std::abs(d));
    }
    return best;
  }

  auto below = [k](const std::vector<double>& x, const std::vector<double>& t) {
    for (std::size_t i = 0; i < k; ++i)
      if (x[i] > t[i]) return false;
    return true;
  };
  for (auto* t : pool) {
    std::size_t ca = 0, cb = 0;
    for (const auto& v : a) ca += below(v, *t);
    for (const auto& v : b) cb += below(v, *t);
    best = std::max(best, std::abs(static_cast<double>(ca) / na - static_cast<double>(cb) / nb));
  }
  return best;
}

}  // namespace ptf
