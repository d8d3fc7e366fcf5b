#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/gauss_count.hpp"
#include "ptfcount/junta.hpp"
#include "ptfcount/poly.hpp"
#include "ptfcount/regularity.hpp"

namespace ptf {

struct BoolSchedule {
  double tau0 = 0.0;
  double eps0 = 0.0;
  double delta0 = 0.0;
  bool underflow = false;  ///< tau0 fell below the normal double range and was clamped
  std::string source = "paper";
};

/// tau0 = (eps / (4 2^(k+d)))^(8d), eps0 = eps / (4k), delta0 = eps / 4.
inline BoolSchedule parameter_schedule(double eps, std::size_t k, int degree = 2) {
  detail::require(eps > 0.0 && eps < 0.25, "parameter_schedule: eps must lie in (0, 1/4)");
  detail::require(k >= 1, "parameter_schedule: k must be at least 1");
  detail::require(degree >= 1, "parameter_schedule: degree must be positive");
  BoolSchedule s;
  const double d = degree;
  const double log_tau = 8.0 * d * (std::log(eps / 4.0) - (static_cast<double>(k) + d) * std::log(2.0));
  s.tau0 = std::exp(log_tau);
  if (!(s.tau0 >= std::numeric_limits<double>::min())) {
    s.underflow = true;
    s.tau0 = std::numeric_limits<double>::min();
  }
  s.eps0 = eps / (4.0 * static_cast<double>(k));
  s.delta0 = eps / 4.0;
  return s;
}

enum class LeafStatus { ok, fail, budget };

inline const char* to_string(LeafStatus s) {
  switch (s) {
    case LeafStatus::ok: return "ok";
    case LeafStatus::fail: return "fail";
    default: return "budget";
  }
}

struct LeafContribution {
  std::size_t leaf = 0;
  std::size_t depth = 0;
  double mass = 0.0;
  LeafStatus status = LeafStatus::ok;
  std::size_t regular_members = 0;
  double value = 0.0;         ///< estimated Pr[g = 1] on the leaf's subcube
  double contribution = 0.0;  ///< mass * value
  std::string message;
};

struct BoolCountOptions {
  std::optional<RegParams> reg;  ///< replaces the (tau0, eps0, delta0) schedule
  Strategy strategy = Strategy::greedy;
  std::size_t depth_cap = 20;
  GaussCountOptions gauss;
  unsigned threads = 1;
};

struct BooleanCountReport {
  double estimate = 0.0;
  BoolSchedule schedule;
  RegParams reg;
  double gauss_eps = 0.0;
  std::size_t leaf_count = 0;
  std::size_t max_depth = 0;
  double fail_mass = 0.0;
  double budget_mass = 0.0;  ///< mass of leaves whose Gaussian count hit the grid budget
  std::size_t budget_leaves = 0;
  std::vector<LeafContribution> contributions;
  RegTree tree;
};

namespace detail {

inline LeafContribution evaluate_leaf(const RegTree& tree, std::size_t li, const BoolJunta& g, double gauss_eps,
                                      const GaussCountOptions& gopt) {
  const auto& leaf = tree.leaves()[li];
  LeafContribution c;
  c.leaf = li;
  c.depth = leaf.depth;
  c.mass = RegTree::leaf_mass(leaf);
  std::vector<std::pair<std::size_t, int>> fixed;
  std::vector<std::size_t> regular;
  for (std::size_t l = 0; l < leaf.labels.size(); ++l) {
    switch (leaf.labels[l]) {
      case Label::fail: c.status = LeafStatus::fail; return c;
      case Label::plus: fixed.emplace_back(l, 1); break;
      case Label::minus: fixed.emplace_back(l, -1); break;
      case Label::regular: regular.push_back(l); break;
    }
  }
  c.regular_members = regular.size();
  const BoolJunta h = restrict_junta(g, fixed);
  if (h.is_constant()) {
    c.value = h(0) ? 1.0 : 0.0;
  } else {
    const auto restricted = tree.restricted(li);
    std::vector<QuadPoly> ps;
    for (std::size_t l : regular) ps.push_back(restricted[l].with_domain(Domain::gaussian));
    try {
      c.value = count_gauss(PolyTuple(std::move(ps)), h, gauss_eps, gopt).estimate;
    } catch (const BudgetError& e) {
      c.status = LeafStatus::budget;
      c.message = e.what();
      return c;
    }
  }
  c.contribution = c.mass * c.value;
  return c;
}

}  // namespace detail

/// Builds a regularity tree, resolves skew-labeled members through g, and
/// counts the regular ones on each leaf with the Gaussian counter.
inline BooleanCountReport count_boolean(const PolyTuple& q, const BoolJunta& g, double eps,
                                        const BoolCountOptions& opt = {}) {
  detail::require(!q.empty(), "count_boolean: no polynomials");
  detail::require(q.domain() == Domain::boolean, "count_boolean: tuple is not boolean-domain");
  detail::require(g.arity() == q.size(), "count_boolean: junta arity differs from the number of polynomials");
  detail::require(eps > 0.0 && eps < 0.25, "count_boolean: eps must lie in (0, 1/4)");

  BooleanCountReport rep;
  if (opt.reg) {
    rep.reg = *opt.reg;
    rep.schedule = {rep.reg.tau, rep.reg.eps, rep.reg.delta, false, "override"};
  } else {
    rep.schedule = parameter_schedule(eps, q.size());
    rep.reg.tau = rep.schedule.tau0;
    rep.reg.eps = rep.schedule.eps0;
    rep.reg.delta = rep.schedule.delta0;
    rep.reg.strategy = opt.strategy;
    rep.reg.depth_cap = opt.depth_cap;
  }
  rep.gauss_eps = eps / 4.0;
  rep.tree = construct_tree(q, rep.reg);
  rep.leaf_count = rep.tree.leaves().size();
  rep.max_depth = rep.tree.max_depth();

  GaussCountOptions gopt = opt.gauss;
  gopt.threads = 1;
  rep.contributions.resize(rep.leaf_count);
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(rep.leaf_count)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(rep.leaf_count);
  auto work = [&] {
    for (std::size_t li; (li = next.fetch_add(1)) < rep.leaf_count;) {
      try {
        rep.contributions[li] = detail::evaluate_leaf(rep.tree, li, g, rep.gauss_eps, gopt);
      } catch (...) {
        errors[li] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  // Errors other than budget saturation surface on the calling thread, lowest leaf first.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  double sum = 0.0;
  for (const auto& c : rep.contributions) {
    sum += c.contribution;
    if (c.status == LeafStatus::fail) rep.fail_mass += c.mass;
    if (c.status == LeafStatus::budget) {
      rep.budget_mass += c.mass;
      ++rep.budget_leaves;
    }
  }
  rep.estimate = std::clamp(sum, 0.0, 1.0);
  return rep;
}

}  // namespace ptf
