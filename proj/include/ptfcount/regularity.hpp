#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ptfcount/errors.hpp"
#include "ptfcount/poly.hpp"

namespace ptf {

enum class Strategy { paper, greedy };
enum class Label { plus, minus, regular, fail };

inline const char* to_string(Strategy s) { return s == Strategy::paper ? "paper" : "greedy"; }
inline const char* to_string(Label l) {
  switch (l) {
    case Label::plus: return "+1";
    case Label::minus: return "-1";
    case Label::regular: return "regular";
    default: return "fail";
  }
}

inline constexpr std::size_t kMaxTreeDepth = 62;

struct RegParams {
  double tau = 0.1;
  double eps = 0.1;
  double delta = 0.1;
  int degree = 2;
  double c_skew = 4.0;
  double depth_constant = 1.0;  ///< exponent constant A in the single-polynomial depth budget
  std::size_t depth_cap = 20;
  Strategy strategy = Strategy::greedy;

  void validate() const {
    detail::require(tau > 0.0 && tau < 0.25, "RegParams: tau must lie in (0, 1/4)");
    detail::require(eps > 0.0 && eps < 0.25, "RegParams: eps must lie in (0, 1/4)");
    detail::require(delta > 0.0 && delta < 0.25, "RegParams: delta must lie in (0, 1/4)");
    detail::require(degree >= 2, "RegParams: degree must be at least 2");
    detail::require(c_skew > 0.0, "RegParams: c_skew must be positive");
    detail::require(depth_cap <= kMaxTreeDepth, "RegParams: depth_cap above " + std::to_string(kMaxTreeDepth));
  }
};

/// max_i Inf_i(p) <= tau Var(p); a constant polynomial is regular.
inline bool is_tau_regular(const QuadPoly& p, double tau) {
  const double var = boolean_variance(p);
  if (var == 0.0) return true;
  const auto inf = boolean_influences(p);
  return *std::max_element(inf.begin(), inf.end()) <= tau * var;
}

/// Skew test with eps given as ln(1/eps), so vanishing eps stays representable:
/// |E p| >= (C ln(d/eps))^{d/2} sqrt(Var p).
inline bool is_eps_skewed_log(const QuadPoly& p, double log_inv_eps, double c_skew, int degree = 2) {
  const double mean = p.constant();
  const double var = boolean_variance(p);
  if (var == 0.0) return mean != 0.0;
  if (mean == 0.0) return false;
  const double d = static_cast<double>(degree);
  const double log_threshold = 0.5 * d * std::log(c_skew * (std::log(d) + log_inv_eps));
  return std::log(std::abs(mean)) - 0.5 * std::log(var) >= log_threshold;
}

inline bool is_eps_skewed(const QuadPoly& p, double eps, double c_skew, int degree = 2) {
  detail::require_multilinear(p, "is_eps_skewed");
  detail::require(eps > 0.0 && eps < 1.0, "is_eps_skewed: eps must lie in (0, 1)");
  return is_eps_skewed_log(p, std::log(1.0 / eps), c_skew, degree);
}

/// Regularity parameters in log form: ln(1/tau), ln(1/eps), ln(1/delta).
struct RegLevel {
  double log_inv_tau = 0.0;
  double log_inv_eps = 0.0;
  double log_inv_delta = 0.0;

  static RegLevel from(double tau, double eps, double delta) {
    return {std::log(1.0 / tau), std::log(1.0 / eps), std::log(1.0 / delta)};
  }
  RegLevel half_delta() const { return {log_inv_tau, log_inv_eps, log_inv_delta + std::numbers::ln2}; }
};

/// ln D_{d,1} = ln(1/tau) + A d ln(d ln(1/tau) ln(1/eps)) + ln ln(1/delta).
inline double log_single_depth(const RegLevel& lv, int degree, double a = 1.0) {
  const double d = static_cast<double>(degree);
  return lv.log_inv_tau + a * d * std::log(d * lv.log_inv_tau * lv.log_inv_eps) + std::log(lv.log_inv_delta);
}

/// Parameters for the first k-1 members given the level used for the k-th:
/// D = D_{d,1}(tau, eps, delta/2), tau' = (1/2) ((d-1)/(e D))^{d-1} / (16 D^2), and
/// eps' solving (C ln(d/eps'))^{d/2} = (e D/d)^{d/2} + (e D/(d-1))^{(d-1)/2} (C ln(d/eps))^{d/2}.
inline RegLevel next_level(const RegLevel& lv, int degree, double c_skew, double a = 1.0) {
  const double d = static_cast<double>(degree);
  const double log_d = log_single_depth(lv.half_delta(), degree, a);
  RegLevel out;
  out.log_inv_tau = std::numbers::ln2 - (d - 1.0) * (std::log(d - 1.0) - 1.0 - log_d) + std::log(16.0) + 2.0 * log_d;
  const double t1 = 0.5 * d * (1.0 + log_d - std::log(d));
  const double t2 = 0.5 * (d - 1.0) * (1.0 + log_d - std::log(d - 1.0)) +
                    0.5 * d * std::log(c_skew * (std::log(d) + lv.log_inv_eps));
  const double hi = std::max(t1, t2);
  const double log_rhs = hi + std::log(std::exp(t1 - hi) + std::exp(t2 - hi));
  const double ln_d_over_eps = std::exp(2.0 / d * log_rhs) / c_skew;
  out.log_inv_eps = ln_d_over_eps - std::log(d);
  out.log_inv_delta = lv.log_inv_delta + std::numbers::ln2;
  return out;
}

struct DepthBudget {
  double value = 0.0;
  bool saturated = false;  ///< overflowed double range; treat as unbounded
};

namespace detail {
inline double depth_budget_value(const RegLevel& lv, std::size_t k, int degree, double c_skew, double a) {
  if (k == 1) return std::exp(log_single_depth(lv, degree, a));
  return depth_budget_value(next_level(lv, degree, c_skew, a), k - 1, degree, c_skew, a) +
         std::exp(log_single_depth(lv.half_delta(), degree, a));
}
}  // namespace detail

/// D_{d,k}: D_{d,1} for k = 1, else D_{d,k-1}(tau', eps', delta/2) + D_{d,1}(tau, eps, delta/2).
inline DepthBudget depth_budget(const RegParams& prm, std::size_t k) {
  prm.validate();
  detail::require(k >= 1, "depth_budget: k must be at least 1");
  const double v = detail::depth_budget_value(RegLevel::from(prm.tau, prm.eps, prm.delta), k, prm.degree,
                                              prm.c_skew, prm.depth_constant);
  DepthBudget b;
  b.value = v;
  b.saturated = !std::isfinite(v) || v > 1e300;
  if (b.saturated) b.value = std::numeric_limits<double>::infinity();
  return b;
}

struct RegNode {
  long parent = -1;
  int value = 0;                      ///< value of the parent's split variable on the edge into this node
  std::size_t var = SIZE_MAX;         ///< split variable (internal nodes)
  long child[2] = {-1, -1};           ///< child[0]: var = -1, child[1]: var = +1
  long leaf = -1;                     ///< leaf index (leaves)
  std::size_t depth = 0;
};

struct RegLeaf {
  std::size_t node = 0;
  Restriction rho{Domain::boolean};
  std::vector<Label> labels;
  std::size_t depth = 0;
  bool truncated = false;  ///< stopped by a depth budget or cap rather than goodness
};

class RegTree {
 public:
  RegTree() = default;
  RegTree(PolyTuple root, RegParams params) : root_(std::move(root)), params_(params) {}

  const PolyTuple& root() const { return root_; }
  const RegParams& params() const { return params_; }
  const std::vector<RegNode>& nodes() const { return nodes_; }
  const std::vector<RegLeaf>& leaves() const { return leaves_; }

  /// Members restricted by the leaf's root-to-leaf assignment (dimension kept).
  PolyTuple restricted(std::size_t leaf) const { return restrict(root_, leaves_.at(leaf).rho); }

  static double leaf_mass(const RegLeaf& l) { return std::ldexp(1.0, -static_cast<int>(l.depth)); }

  /// Sum of 2^-depth over leaves containing a fail label.
  double fail_mass() const {
    double m = 0.0;
    for (const auto& l : leaves_)
      if (std::find(l.labels.begin(), l.labels.end(), Label::fail) != l.labels.end()) m += leaf_mass(l);
    return m;
  }

  /// Checks sum 2^-depth == 1 in exact integer arithmetic.
  bool masses_sum_to_one() const {
    std::uint64_t total = 0;
    for (const auto& l : leaves_) {
      if (l.depth > kMaxTreeDepth) return false;
      total += std::uint64_t{1} << (kMaxTreeDepth - l.depth);
    }
    return total == std::uint64_t{1} << kMaxTreeDepth;
  }

  std::size_t max_depth() const {
    std::size_t d = 0;
    for (const auto& l : leaves_) d = std::max(d, l.depth);
    return d;
  }

 private:
  friend class RegTreeBuilder;
  PolyTuple root_;
  RegParams params_;
  std::vector<RegNode> nodes_;
  std::vector<RegLeaf> leaves_;
};

/// Builds regularity trees. The k = 1 procedure splits on the largest-influence
/// variable until the polynomial is good; the recursive strategy nests it as
/// described for k > 1, the greedy one applies it to the lowest failing member.
class RegTreeBuilder {
 public:
  RegTreeBuilder(const PolyTuple& q, const RegParams& prm) : tree_(q, prm), prm_(prm) {
    prm.validate();
    detail::require(q.empty() || q.domain() == Domain::boolean, "construct_tree: tuple is not boolean-domain");
    for (const auto& p : q.polys()) detail::require_multilinear(p, "construct_tree");
    top_ = RegLevel::from(prm.tau, prm.eps, prm.delta);
  }

  RegTree build() {
    tree_.nodes_.push_back(RegNode{});
    rho_.emplace_back(Domain::boolean);
    const std::size_t k = tree_.root_.size();
    if (k == 0) {
      finish_leaves({0});
    } else if (prm_.strategy == Strategy::greedy) {
      finish_leaves(grow(0, [&](const PolyTuple& r) { return first_bad(r, k, top_); }, prm_.depth_cap));
    } else {
      finish_leaves(grow_recursive(0, k, top_));
    }
    return std::move(tree_);
  }

 private:
  // Index of the lowest member among the first m that is not good at `lv`, or m.
  std::size_t first_bad(const PolyTuple& r, std::size_t m, const RegLevel& lv) const {
    for (std::size_t l = 0; l < m; ++l)
      if (!good(r[l], lv)) return l;
    return m;
  }

  bool good(const QuadPoly& p, const RegLevel& lv) const {
    return is_eps_skewed_log(p, lv.log_inv_eps, prm_.c_skew, prm_.degree) || regular_log(p, lv.log_inv_tau);
  }

  static bool regular_log(const QuadPoly& p, double log_inv_tau) {
    const double var = boolean_variance(p);
    if (var == 0.0) return true;
    const auto inf = boolean_influences(p);
    const double mx = *std::max_element(inf.begin(), inf.end());
    if (mx == 0.0) return true;
    return std::log(mx) <= std::log(var) - log_inv_tau;
  }

  static std::size_t argmax_influence(const QuadPoly& p) {
    const auto inf = boolean_influences(p);
    std::size_t best = 0;
    for (std::size_t i = 1; i < inf.size(); ++i)
      if (inf[i] > inf[best]) best = i;
    return best;
  }

  void split(std::size_t node, std::size_t var) {
    tree_.nodes_[node].var = var;
    for (int side = 0; side < 2; ++side) {
      RegNode c;
      c.parent = static_cast<long>(node);
      c.value = side == 0 ? -1 : 1;
      c.depth = tree_.nodes_[node].depth + 1;
      Restriction r = rho_[node];
      r.assign(var, c.value);
      tree_.nodes_.push_back(c);
      rho_.push_back(std::move(r));
      tree_.nodes_[node].child[side] = static_cast<long>(tree_.nodes_.size() - 1);
    }
  }

  // Depth-first growth below `start`. `pick` returns the index of the member
  // to split on (or tuple size when done). Leaves at `depth_limit` are marked
  // truncated. Returns the leaf nodes in -1-first order.
  template <class Pick>
  std::vector<std::size_t> grow(std::size_t start, Pick&& pick, std::size_t depth_limit) {
    std::vector<std::size_t> leaves, stack{start};
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      const auto r = restrict(tree_.root_, rho_[node]);
      const std::size_t bad = pick(r);
      if (bad >= r.size()) {
        leaves.push_back(node);
        continue;
      }
      if (tree_.nodes_[node].depth >= depth_limit) {
        truncated_.push_back(node);
        leaves.push_back(node);
        continue;
      }
      split(node, argmax_influence(r[bad]));
      stack.push_back(static_cast<std::size_t>(tree_.nodes_[node].child[1]));
      stack.push_back(static_cast<std::size_t>(tree_.nodes_[node].child[0]));
    }
    return leaves;
  }

  std::size_t absolute_limit(std::size_t node, double budget) const {
    const std::size_t here = tree_.nodes_[node].depth;
    const double room = std::floor(budget);
    const std::size_t extra = !(room < static_cast<double>(kMaxTreeDepth)) ? kMaxTreeDepth : static_cast<std::size_t>(room);
    return std::min(prm_.depth_cap, here + extra);
  }

  std::vector<std::size_t> grow_recursive(std::size_t node, std::size_t m, const RegLevel& lv) {
    const double a = prm_.depth_constant;
    if (m == 1) {
      const double budget = std::exp(log_single_depth(lv, prm_.degree, a));
      return grow(node, [&](const PolyTuple& r) { return good(r[0], lv) ? r.size() : 0; }, absolute_limit(node, budget));
    }
    const RegLevel prev = next_level(lv, prm_.degree, prm_.c_skew, a);
    const RegLevel last = lv.half_delta();
    std::vector<std::size_t> out;
    for (std::size_t leaf : grow_recursive(node, m - 1, prev)) {
      const auto r = restrict(tree_.root_, rho_[leaf]);
      if (first_bad(r, m - 1, prev) < m - 1) {
        out.push_back(leaf);
        continue;
      }
      const double budget = std::exp(log_single_depth(last, prm_.degree, a));
      const std::size_t member = m - 1;
      auto more = grow(leaf, [&](const PolyTuple& rr) { return good(rr[member], last) ? rr.size() : member; },
                       absolute_limit(leaf, budget));
      out.insert(out.end(), more.begin(), more.end());
    }
    return out;
  }

  void finish_leaves(const std::vector<std::size_t>& leaf_nodes) {
    for (std::size_t node : leaf_nodes) {
      RegLeaf leaf;
      leaf.node = node;
      leaf.rho = rho_[node];
      leaf.depth = tree_.nodes_[node].depth;
      leaf.truncated = std::find(truncated_.begin(), truncated_.end(), node) != truncated_.end();
      const auto r = restrict(tree_.root_, rho_[node]);
      for (const auto& p : r.polys()) {
        if (is_eps_skewed_log(p, top_.log_inv_eps, prm_.c_skew, prm_.degree))
          leaf.labels.push_back(p.constant() > 0.0 ? Label::plus : Label::minus);
        else if (is_tau_regular(p, prm_.tau))
          leaf.labels.push_back(Label::regular);
        else
          leaf.labels.push_back(Label::fail);
      }
      tree_.nodes_[node].leaf = static_cast<long>(tree_.leaves_.size());
      tree_.leaves_.push_back(std::move(leaf));
    }
  }

  RegTree tree_;
  RegParams prm_;
  RegLevel top_;
  std::vector<Restriction> rho_;
  std::vector<std::size_t> truncated_;
};

inline RegTree construct_tree(const PolyTuple& q, const RegParams& prm) { return RegTreeBuilder(q, prm).build(); }

}  // namespace ptf
