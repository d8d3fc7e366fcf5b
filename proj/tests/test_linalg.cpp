#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ptfcount/linalg.hpp"
#include "ptfcount/normal.hpp"
#include "support.hpp"

using namespace ptf;
using ptf::testing::Rng;

namespace {

// Independent reference: Eigen's self-adjoint solver.
Eigen::VectorXd eigen_values(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
}

double eigen_max_abs(const Matrix& a) { return eigen_values(a).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(MaxEigenpair, Examples) {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  auto e = max_eigenpair(a);
  EXPECT_DOUBLE_EQ(e.value, 1.0);
  EXPECT_EQ(e.vector, (Vector{1, 0, 0}));

  Matrix b(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = -3.0;
  e = max_eigenpair(b);
  EXPECT_DOUBLE_EQ(e.value, -3.0);
  EXPECT_EQ(e.vector, (Vector{0, 1}));

  Matrix bad(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(max_eigenpair(bad), InputError);
}

TEST(MaxEigenpair, ResidualAndAgreementWithReference) {
  Rng rng(21);
  for (int it = 0; it < 60; ++it) {
    const std::size_t n = 2 + it % 15;
    const auto a = ptf::testing::random_symmetric(rng, n);
    const auto e = max_eigenpair(a);
    const double fro = frobenius_norm(a);
    EXPECT_NEAR(std::abs(e.value), eigen_max_abs(a), 1e-9);
    EXPECT_NEAR(norm2(e.vector), 1.0, 1e-12);
    const auto av = multiply(a, e.vector);
    double res = 0;
    for (std::size_t i = 0; i < n; ++i) res += (av[i] - e.value * e.vector[i]) * (av[i] - e.value * e.vector[i]);
    EXPECT_LE(std::sqrt(res), 1e-8 * fro);
  }
}

TEST(SymmetricEigen, FullSpectrumMatchesReference) {
  Rng rng(22);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = 1 + it % 16;
    const auto a = ptf::testing::random_symmetric(rng, n);
    const auto mine = symmetric_eigen(a);
    auto ref = eigen_values(a);
    std::vector<double> r(ref.data(), ref.data() + ref.size()), m = mine.values;
    std::sort(r.begin(), r.end());
    std::sort(m.begin(), m.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(m[i], r[i], 1e-10);
    // Sorted by decreasing magnitude; eigenvectors canonical and orthonormal.
    for (std::size_t i = 1; i < n; ++i) EXPECT_GE(std::abs(mine.values[i - 1]), std::abs(mine.values[i]));
    OrthonormalBasis cols{n, {}, n};
    for (std::size_t c = 0; c < n; ++c) cols.vectors.push_back(mine.vectors.column(c));
    EXPECT_LE(orthonormality_residual(cols), 1e-12);
  }
}

TEST(CompleteBasis, Examples) {
  auto b = complete_basis({3, {}, 0});
  EXPECT_EQ(b.vectors.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(b.vectors[i][j], i == j ? 1.0 : 0.0);

  const double h = 1.0 / std::sqrt(2.0);
  b = complete_basis({2, {{h, h}}, 1});
  EXPECT_NEAR(std::abs(b.vectors[1][0]), h, 1e-15);
  EXPECT_NEAR(b.vectors[1][0], -b.vectors[1][1], 1e-15);

  Rng rng(23);
  const auto full = ptf::testing::random_orthonormal(rng, 4, 4);
  b = complete_basis(full);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(b.vectors[i][j], full.vectors[i][j], 1e-15);

  EXPECT_THROW(complete_basis({2, {{1, 0}, {1, 0}}, 2}), InputError);
  EXPECT_THROW(complete_basis({1, {{1}, {1}}, 2}), InputError);
}

TEST(CompleteBasis, OrthonormalityResidual) {
  Rng rng(24);
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 1 + it % 20;
    const std::size_t r = static_cast<std::size_t>(it) % (n + 1);
    const auto partial = ptf::testing::random_orthonormal(rng, n, r);
    const auto b = complete_basis(partial);
    EXPECT_LE(orthonormality_residual(b), 1e-10);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(b.vectors[i][j], partial.vectors[i][j], 1e-14);
  }
}

TEST(RewriteInBasis, Examples) {
  Rng rng(25);
  const auto q = ptf::testing::random_poly(rng, 4);
  EXPECT_EQ(rewrite_in_basis(q, complete_basis({4, {}, 0})), q);

  // x1 x2 under a 45 degree rotation becomes (y1^2 - y2^2) / 2.
  QuadPoly p(2);
  p.set_coefficient(0, 1, 1.0);
  const double h = 1.0 / std::sqrt(2.0);
  const auto r = rewrite_in_basis(p, OrthonormalBasis{2, {{h, h}, {h, -h}}, 2});
  EXPECT_NEAR(r.coefficient(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(r.coefficient(1, 1), -0.5, 1e-15);
  EXPECT_NEAR(r.coefficient(0, 1), 0.0, 1e-15);

  EXPECT_THROW(rewrite_in_basis(q, OrthonormalBasis{4, {{1, 0, 0, 0}}, 1}), InputError);
}

TEST(RewriteInBasis, PreservesEvaluationAndMoments) {
  Rng rng(26);
  for (int it = 0; it < 50; ++it) {
    const std::size_t n = 1 + it % 10;
    const auto q = ptf::testing::random_poly(rng, n);
    const auto q2 = ptf::testing::random_poly(rng, n);
    const auto basis = complete_basis(ptf::testing::random_orthonormal(rng, n, n / 2));
    const auto r = rewrite_in_basis(q, basis);
    const auto r2 = rewrite_in_basis(q2, basis);
    const auto x = ptf::testing::random_point(rng, n);
    const auto y = multiply(transpose(basis_matrix(basis)), x);
    EXPECT_NEAR(eval(r, y), eval(q, x), 1e-9 * std::max(1.0, std::abs(eval(q, x))));
    EXPECT_NEAR(gaussian_moments(r).mean, gaussian_moments(q).mean, 1e-9);
    EXPECT_NEAR(gaussian_moments(r).variance, gaussian_moments(q).variance, 1e-9);
    EXPECT_NEAR(gaussian_covariance(r, r2), gaussian_covariance(q, q2), 1e-9);
  }
}

TEST(ResidueProjection, Examples) {
  Rng rng(27);
  const auto q = ptf::testing::random_poly(rng, 4);
  auto rp = residue_projection(q, 0);
  EXPECT_EQ(rp.residue, q);
  EXPECT_EQ(rp.projection, QuadPoly(4));
  rp = residue_projection(q, 4);
  QuadPoly c(4);
  c.set_constant(q.constant());
  EXPECT_EQ(rp.residue, c);
  EXPECT_THROW(residue_projection(q, 5), InputError);
}

TEST(ResidueProjection, LambdaMaxNeverIncreases) {
  Rng rng(28);
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 2 + it % 10;
    const auto q = ptf::testing::random_poly(rng, n);
    const std::size_t r = static_cast<std::size_t>(it) % (n + 1);
    const auto basis = complete_basis(ptf::testing::random_orthonormal(rng, n, r));
    const auto res = residue_projection(rewrite_in_basis(q, basis), r).residue;
    EXPECT_LE(max_abs_eigenvalue(res.quadratic()), max_abs_eigenvalue(q.quadratic()) + 1e-9);
    EXPECT_LE(std::abs(max_abs_eigenvalue(res.quadratic()) - eigen_max_abs(res.quadratic())), 1e-9);
  }
}

TEST(NormalFunctions, QuantileInvertsCdf) {
  for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.02425, 0.3, 0.5, 0.77, 0.975, 1 - 1e-9}) {
    const double z = normal_quantile(p);
    EXPECT_NEAR(normal_cdf(z) / p, 1.0, 1e-12) << p;
  }
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
}

TEST(NormalFunctions, QuadratureRules) {
  for (std::size_t m : {1u, 2u, 5u, 16u, 64u}) {
    const auto gl = gauss_legendre_unit(m);
    double s = 0, s3 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      s += gl.weights[i];
      s3 += gl.weights[i] * std::pow(gl.nodes[i], 3);
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    if (m >= 2) {
      EXPECT_NEAR(s3, 0.25, 1e-14);
    }
    const auto gh = gauss_hermite_normal(m);
    double h0 = 0, h2 = 0, h4 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      h0 += gh.weights[i];
      h2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
      h4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
    }
    EXPECT_NEAR(h0, 1.0, 1e-13);
    if (m >= 2) {
      EXPECT_NEAR(h2, 1.0, 1e-11);
    }
    if (m >= 3) {
      EXPECT_NEAR(h4, 3.0, 1e-10);
    }
  }
}
