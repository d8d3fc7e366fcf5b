#include <gtest/gtest.h>

#include <cmath>

#include "ptfcount/bool_count.hpp"
#include "ptfcount/oracles.hpp"
#include "support.hpp"

using namespace ptf;
using ptf::testing::Rng;

namespace {

PolyTuple random_int_tuple(Rng& rng, std::size_t k, std::size_t n) {
  std::vector<QuadPoly> ps;
  for (std::size_t l = 0; l < k; ++l) ps.push_back(ptf::testing::random_int_poly(rng, n, 4));
  return PolyTuple(std::move(ps));
}

BoolJunta random_junta(Rng& rng, std::size_t k) {
  std::vector<std::uint8_t> t(std::size_t{1} << k);
  for (auto& v : t) v = ptf::testing::uniform_int(rng, 0, 1);
  return BoolJunta(k, std::move(t));
}

}  // namespace

TEST(ParameterSchedule, Examples) {
  auto s = parameter_schedule(0.2, 1);
  EXPECT_NEAR(s.tau0 / std::pow(0.2 / 32, 16), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.eps0, 0.05);
  EXPECT_DOUBLE_EQ(s.delta0, 0.05);
  EXPECT_FALSE(s.underflow);
  s = parameter_schedule(0.12, 3);
  EXPECT_DOUBLE_EQ(s.eps0, 0.01);
  EXPECT_DOUBLE_EQ(s.delta0, 0.03);
  s = parameter_schedule(0.01, 60);
  EXPECT_TRUE(s.underflow);
  EXPECT_GT(s.tau0, 0.0);
  EXPECT_THROW(parameter_schedule(0.3, 1), InputError);
}

TEST(RestrictJunta, Examples) {
  const auto and2 = BoolJunta::all_positive(2);
  EXPECT_EQ(restrict_junta(and2, {{1, 1}}), BoolJunta::identity());
  EXPECT_EQ(restrict_junta(and2, {{1, -1}}), BoolJunta::constant(1, false));
  EXPECT_THROW(restrict_junta(and2, {{2, 1}}), InputError);
}

TEST(RestrictJunta, MatchesMergedPattern) {
  Rng rng(61);
  for (int it = 0; it < 100; ++it) {
    const std::size_t k = 1 + it % 5;
    const auto g = random_junta(rng, k);
    std::vector<std::pair<std::size_t, int>> fixed;
    std::vector<std::size_t> free;
    std::size_t base = 0;
    for (std::size_t l = 0; l < k; ++l) {
      const int r = ptf::testing::uniform_int(rng, 0, 2);
      if (r == 0) {
        free.push_back(l);
      } else {
        fixed.emplace_back(l, r == 1 ? 1 : -1);
        if (r == 1) base |= std::size_t{1} << l;
      }
    }
    const auto h = restrict_junta(g, fixed);
    ASSERT_EQ(h.arity(), free.size());
    for (std::size_t m = 0; m < h.size(); ++m) {
      std::size_t full = base;
      for (std::size_t s = 0; s < free.size(); ++s)
        if (m >> s & 1) full |= std::size_t{1} << free[s];
      EXPECT_EQ(h(m), g(full));
    }
  }
}

TEST(CountBoolean, Examples) {
  QuadPoly x1(4, Domain::boolean);
  x1.set_linear(0, 1.0);
  auto rep = count_boolean(PolyTuple({x1}), BoolJunta::identity(), 0.1);
  EXPECT_EQ(rep.estimate, 0.5);
  EXPECT_EQ(rep.leaf_count, 2u);

  Rng rng(62);
  const auto q = random_int_tuple(rng, 2, 9);
  rep = count_boolean(q, BoolJunta::constant(2, true), 0.1);
  EXPECT_GE(rep.estimate, 1 - rep.schedule.delta0 - 0.1 / 4);

  EXPECT_THROW(count_boolean(PolyTuple({x1}), BoolJunta::all_positive(2), 0.1), InputError);
  EXPECT_THROW(count_boolean(PolyTuple({x1.with_domain(Domain::gaussian)}), BoolJunta::identity(), 0.1), InputError);
}

TEST(CountBoolean, RegularLeavesUseTheGaussianCounter) {
  // Sum of 16 variables is 1/16-regular; the Gaussian stand-in has Pr = 1/2.
  QuadPoly s(16, Domain::boolean);
  for (std::size_t i = 0; i < 16; ++i) s.set_linear(i, 1.0);
  BoolCountOptions opt;
  opt.reg = RegParams{0.1, 0.1, 0.1};
  const auto rep = count_boolean(PolyTuple({s}), BoolJunta::identity(), 0.1, opt);
  EXPECT_EQ(rep.schedule.source, "override");
  ASSERT_EQ(rep.leaf_count, 1u);
  EXPECT_EQ(rep.contributions[0].regular_members, 1u);
  EXPECT_NEAR(rep.estimate, 0.5, 1e-3);
}

TEST(CountBoolean, AgreesWithBruteForce) {
  Rng rng(63);
  for (int it = 0; it < 16; ++it) {
    const std::size_t n = 8 + it % 7;
    const std::size_t k = 1 + it % 2;
    const auto q = random_int_tuple(rng, k, n);
    const auto g = random_junta(rng, k);
    const double eps = 0.15;
    const auto rep = count_boolean(q, g, eps);
    const double exact = brute_force_boolean(q, g).value();
    EXPECT_LE(std::abs(rep.estimate - exact), eps) << it;
    EXPECT_TRUE(rep.tree.masses_sum_to_one());

    // Complement consistency.
    const auto neg = count_boolean(q, g.negated(), eps);
    const double slack = 2 * (eps + rep.schedule.delta0);
    EXPECT_GE(rep.estimate + neg.estimate, 1 - slack);
    EXPECT_LE(rep.estimate + neg.estimate, 1 + slack);
  }
}

TEST(CountBoolean, ThreadCountDoesNotChangeTheResult) {
  Rng rng(64);
  const auto q = random_int_tuple(rng, 2, 11);
  const auto g = BoolJunta::parity(2);
  BoolCountOptions opt;
  const auto a = count_boolean(q, g, 0.1, opt);
  opt.threads = 4;
  const auto b = count_boolean(q, g, 0.1, opt);
  EXPECT_EQ(a.estimate, b.estimate);
  ASSERT_EQ(a.contributions.size(), b.contributions.size());
  for (std::size_t i = 0; i < a.contributions.size(); ++i)
    EXPECT_EQ(a.contributions[i].contribution, b.contributions[i].contribution);
}
