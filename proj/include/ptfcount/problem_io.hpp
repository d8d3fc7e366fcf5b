#pragma once

// JSON problem files and run reports. Needs nlohmann/json (json.hpp) on the
// include path; the numeric headers do not.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "ptfcount/bool_count.hpp"
#include "ptfcount/errors.hpp"
#include "ptfcount/gauss_count.hpp"
#include "ptfcount/junta.hpp"
#include "ptfcount/oracles.hpp"
#include "ptfcount/poly.hpp"
#include "ptfcount/regularity.hpp"
#include "ptfcount/transform.hpp"

namespace ptf::io {

using nlohmann::json;

/// A coefficient as written: a decimal number, or an exact ["num", "den"] pair.
struct Coef {
  double value = 0.0;
  std::optional<Rational> exact;
  bool operator==(const Coef&) const = default;
};

struct Term {
  std::size_t i = 0;  ///< 0-based, i <= j
  std::size_t j = 0;
  Coef value;
  bool operator==(const Term&) const = default;
};

struct PolySpec {
  Coef c;
  std::vector<Coef> b;
  std::vector<Term> a;
  bool operator==(const PolySpec&) const = default;
};

struct Problem {
  std::size_t n = 0;
  Domain domain = Domain::gaussian;
  std::vector<PolySpec> polys;
  BoolJunta junta;
  bool operator==(const Problem&) const = default;

  PolyTuple tuple() const {
    std::vector<QuadPoly> out;
    for (const auto& s : polys) {
      QuadPoly p(n, domain);
      p.set_constant(s.c.value);
      for (std::size_t i = 0; i < n; ++i) p.set_linear(i, s.b[i].value);
      for (const auto& t : s.a) p.set_coefficient(t.i, t.j, t.value.value);
      out.push_back(std::move(p));
    }
    if (out.empty()) return PolyTuple(n, domain);
    return PolyTuple(std::move(out));
  }

  bool has_exact_coefficients() const {
    for (const auto& s : polys) {
      if (s.c.exact) return true;
      for (const auto& v : s.b)
        if (v.exact) return true;
      for (const auto& t : s.a)
        if (t.value.exact) return true;
    }
    return false;
  }
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw InputError(path.empty() ? what : path + ": " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing required key \"") + key + "\"");
  return *it;
}

inline std::int64_t parse_integer_text(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t used = 0;
    std::int64_t out = 0;
    try {
      out = std::stoll(s, &used);
    } catch (const std::exception&) {
      fail(path, "\"" + s + "\" is not an integer");
    }
    if (used != s.size()) fail(path, "\"" + s + "\" is not an integer");
    return out;
  }
  fail(path, "expected an integer or an integer string");
}

inline Coef parse_coef(const json& v, const std::string& path) {
  Coef c;
  if (v.is_number()) {
    c.value = v.get<double>();
    if (!std::isfinite(c.value)) fail(path, "number is not finite");
    return c;
  }
  if (v.is_array()) {
    if (v.size() != 2) fail(path, "exact coefficients are [\"num\", \"den\"]");
    Rational r{parse_integer_text(v[0], path + "[0]"), parse_integer_text(v[1], path + "[1]")};
    if (r.den <= 0) fail(path + "[1]", "denominator must be positive");
    c.exact = r;
    c.value = r.value();
    return c;
  }
  fail(path, "expected a number or [\"num\", \"den\"]");
}

inline std::size_t parse_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline json coef_json(const Coef& c) {
  if (c.exact) return json::array({std::to_string(c.exact->num), std::to_string(c.exact->den)});
  return c.value;
}

/// A double as an exact rational when its dyadic form fits in 64 bits.
inline std::optional<Rational> dyadic(double v) {
  if (v == 0.0) return Rational{0, 1};
  int e = 0;
  const double f = std::frexp(v, &e);
  auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
  int shift = e - 53;
  while (shift < 0 && mant % 2 == 0) {
    mant /= 2;
    ++shift;
  }
  if (shift >= 0) {
    if (shift > 9 || std::abs(mant) > (std::int64_t{1} << 53)) return std::nullopt;
    return Rational{mant * (std::int64_t{1} << shift), 1};
  }
  if (-shift > 62) return std::nullopt;
  return Rational{mant, std::int64_t{1} << -shift};
}

}  // namespace detail

/// Parses and validates a problem document. Errors carry the line/column for
/// syntax problems and the field path for schema problems.
inline Problem parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    throw InputError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                     e.what());
  }
  if (!doc.is_object()) detail::fail("", "top level must be an object");

  Problem p;
  p.n = detail::parse_count(detail::field(doc, "n", ""), "n");
  const auto& dom = detail::field(doc, "domain", "");
  if (dom == "gaussian")
    p.domain = Domain::gaussian;
  else if (dom == "boolean")
    p.domain = Domain::boolean;
  else
    detail::fail("domain", "expected \"gaussian\" or \"boolean\"");

  const auto& polys = detail::field(doc, "polys", "");
  if (!polys.is_array()) detail::fail("polys", "expected an array");
  for (std::size_t l = 0; l < polys.size(); ++l) {
    const std::string at = "polys[" + std::to_string(l) + "]";
    const auto& e = polys[l];
    PolySpec s;
    s.c = detail::parse_coef(detail::field(e, "c", at), at + ".c");
    const auto& b = detail::field(e, "b", at);
    if (!b.is_array() || b.size() != p.n)
      detail::fail(at + ".b", "expected an array of " + std::to_string(p.n) + " numbers");
    for (std::size_t i = 0; i < p.n; ++i) s.b.push_back(detail::parse_coef(b[i], at + ".b[" + std::to_string(i) + "]"));
    const auto& a = detail::field(e, "a", at);
    if (!a.is_array()) detail::fail(at + ".a", "expected an array of [i, j, value] entries");
    for (std::size_t r = 0; r < a.size(); ++r) {
      const std::string ap = at + ".a[" + std::to_string(r) + "]";
      if (!a[r].is_array() || a[r].size() != 3) detail::fail(ap, "expected [i, j, value]");
      const std::size_t i = detail::parse_count(a[r][0], ap + "[0]");
      const std::size_t j = detail::parse_count(a[r][1], ap + "[1]");
      if (i < 1 || j > p.n || i > j) detail::fail(ap, "indices must satisfy 1 <= i <= j <= n");
      if (i == j && p.domain == Domain::boolean) detail::fail(ap, "boolean polynomials cannot have squared terms");
      for (const auto& t : s.a)
        if (t.i == i - 1 && t.j == j - 1) detail::fail(ap, "duplicate entry for this index pair");
      s.a.push_back({i - 1, j - 1, detail::parse_coef(a[r][2], ap + "[2]")});
    }
    p.polys.push_back(std::move(s));
  }

  const auto& junta = detail::field(doc, "junta", "");
  const std::size_t k = detail::parse_count(detail::field(junta, "k", "junta"), "junta.k");
  const auto& table = detail::field(junta, "table", "junta");
  if (!table.is_string()) detail::fail("junta.table", "expected a string of '0'/'1' characters");
  if (k != p.polys.size())
    detail::fail("junta.k", "is " + std::to_string(k) + " but there are " + std::to_string(p.polys.size()) + " polynomials");
  try {
    p.junta = BoolJunta::parse(k, table.get<std::string>());
  } catch (const InputError& e) {
    detail::fail("junta.table", e.what());
  }
  return p;
}

inline json problem_json(const Problem& p) {
  json polys = json::array();
  for (const auto& s : p.polys) {
    json b = json::array();
    for (const auto& v : s.b) b.push_back(detail::coef_json(v));
    json a = json::array();
    for (const auto& t : s.a) a.push_back(json::array({t.i + 1, t.j + 1, detail::coef_json(t.value)}));
    polys.push_back({{"c", detail::coef_json(s.c)}, {"b", b}, {"a", a}});
  }
  return {{"n", p.n},
          {"domain", to_string(p.domain)},
          {"polys", polys},
          {"junta", {{"k", p.junta.arity()}, {"table", p.junta.to_string()}}}};
}

inline std::string serialize_problem(const Problem& p) { return problem_json(p).dump(2) + "\n"; }

/// Integer polynomials for the brute-force oracle. Exact coefficients are used
/// as written; decimal ones must be dyadic with small enough exponents.
inline std::vector<ExactPoly> exact_polys(const Problem& p) {
  ptf::detail::require(p.domain == Domain::boolean, "exact_polys: problem is not boolean-domain");
  auto rat = [](const Coef& c, const std::string& path) {
    if (c.exact) return *c.exact;
    const auto d = detail::dyadic(c.value);
    if (!d) detail::fail(path, "value has no exact 64-bit rational form");
    return *d;
  };
  std::vector<ExactPoly> out;
  for (std::size_t l = 0; l < p.polys.size(); ++l) {
    const auto& s = p.polys[l];
    const std::string at = "polys[" + std::to_string(l) + "]";
    std::vector<Rational> b;
    for (std::size_t i = 0; i < s.b.size(); ++i) b.push_back(rat(s.b[i], at + ".b[" + std::to_string(i) + "]"));
    std::vector<std::tuple<std::size_t, std::size_t, Rational>> terms;
    for (const auto& t : s.a) terms.emplace_back(t.i, t.j, rat(t.value, at + ".a"));
    out.push_back(exact_from_rationals(p.n, rat(s.c, at + ".c"), b, terms));
  }
  return out;
}

// ---- reports ----

inline json schedule_json(const TransformSchedule& s) {
  return {{"eta", s.eta}, {"eps_prime", s.eps_prime}, {"schedule", s.source}};
}

inline json grid_json(const DiscreteGrid& g) {
  return {{"kind", to_string(g.kind)},
          {"axes", g.axes},
          {"axis_points", g.points.size()},
          {"total_points", g.total_points()},
          {"spacing", g.spacing},
          {"radius", g.radius},
          {"axis_eps", g.axis_eps},
          {"close_error", g.close_error},
          {"interval_axis_points", g.interval_axis_points}};
}

inline json diagnostics_json(const std::vector<MemberDiagnostics>& ds) {
  json out = json::array();
  for (const auto& d : ds)
    out.push_back({{"group", to_string(d.group)},
                   {"tail_variance", d.stats.tail_variance},
                   {"quad_tail_variance", d.stats.quad_tail_variance},
                   {"tail_lambda", d.stats.tail_lambda}});
  return out;
}

inline json steps_json(const std::vector<CollectionStep>& steps) {
  json out = json::array();
  for (const auto& s : steps)
    out.push_back({{"member", s.member}, {"lambda", s.lambda}, {"var_before", s.var_before}, {"var_after", s.var_after}});
  return out;
}

inline json transform_json(const TransformResult& tr) {
  json basis = json::array();
  for (const auto& v : tr.basis.vectors) basis.push_back(v);
  return {{"t", tr.t},
          {"k_prime", tr.k_prime},
          {"index_map", tr.polys.index_map()},
          {"schedule", schedule_json(tr.schedule)},
          {"visits", tr.visits},
          {"iteration_bound", tr.iteration_bound},
          {"steps", steps_json(tr.steps)},
          {"members", diagnostics_json(tr.diagnostics)},
          {"collected_basis", basis}};
}

inline json gauss_report_json(const GaussCountReport& r, double eps) {
  return {{"mode", "gauss"},
          {"estimate", r.estimate},
          {"eps", eps},
          {"k_input", r.k_input},
          {"k_active", r.k_active},
          {"fixed_signs", r.fixed_signs},
          {"active_junta", r.junta.to_string()},
          {"t", r.t},
          {"k_prime", r.k_prime},
          {"schedule", schedule_json(r.schedule)},
          {"grid", grid_json(r.grid)},
          {"grid_points", r.grid_points},
          {"orthant_tol", r.orthant_tol},
          {"pattern_mass_error", r.pattern_mass_error},
          {"visits", r.visits},
          {"iteration_bound", r.iteration_bound},
          {"steps", steps_json(r.steps)},
          {"members", diagnostics_json(r.diagnostics)}};
}

inline json labels_json(const std::vector<Label>& labels) {
  json out = json::array();
  for (auto l : labels) out.push_back(to_string(l));
  return out;
}

/// Node list with parent pointers; leaves carry their assignment and labels.
inline json tree_json(const RegTree& t) {
  json nodes = json::array();
  for (const auto& nd : t.nodes()) {
    json j = {{"parent", nd.parent}, {"value", nd.value}, {"depth", nd.depth}};
    if (nd.leaf >= 0) {
      const auto& leaf = t.leaves()[static_cast<std::size_t>(nd.leaf)];
      j["leaf"] = nd.leaf;
      j["labels"] = labels_json(leaf.labels);
      if (leaf.truncated) j["truncated"] = true;
    } else {
      j["var"] = nd.var + 1;
      j["children"] = {nd.child[0], nd.child[1]};
    }
    nodes.push_back(std::move(j));
  }
  return nodes;
}

inline json reg_params_json(const RegParams& p) {
  return {{"tau", p.tau},   {"eps", p.eps},           {"delta", p.delta},
          {"degree", p.degree}, {"c_skew", p.c_skew}, {"depth_cap", p.depth_cap},
          {"strategy", to_string(p.strategy)}};
}

inline json tree_stats_json(const RegTree& t) {
  std::size_t regular = 0, plus = 0, minus = 0, fail = 0, truncated = 0;
  for (const auto& l : t.leaves()) {
    truncated += l.truncated;
    for (auto lab : l.labels) {
      regular += lab == Label::regular;
      plus += lab == Label::plus;
      minus += lab == Label::minus;
      fail += lab == Label::fail;
    }
  }
  return {{"params", reg_params_json(t.params())},
          {"nodes", t.nodes().size()},
          {"leaves", t.leaves().size()},
          {"max_depth", t.max_depth()},
          {"fail_mass", t.fail_mass()},
          {"masses_sum_to_one", t.masses_sum_to_one()},
          {"truncated_leaves", truncated},
          {"labels", {{"+1", plus}, {"-1", minus}, {"regular", regular}, {"fail", fail}}}};
}

inline json bool_report_json(const BooleanCountReport& r, double eps, bool include_tree) {
  json leaves = json::array();
  for (const auto& c : r.contributions) {
    json j = {{"leaf", c.leaf},
              {"depth", c.depth},
              {"status", to_string(c.status)},
              {"regular_members", c.regular_members},
              {"value", c.value},
              {"contribution", c.contribution}};
    if (!c.message.empty()) j["message"] = c.message;
    leaves.push_back(std::move(j));
  }
  json out = {{"mode", "bool"},
              {"estimate", r.estimate},
              {"eps", eps},
              {"schedule", r.schedule.source},
              {"tau0", r.schedule.tau0},
              {"eps0", r.schedule.eps0},
              {"delta0", r.schedule.delta0},
              {"tau0_underflow", r.schedule.underflow},
              {"gauss_eps", r.gauss_eps},
              {"tree", tree_stats_json(r.tree)},
              {"fail_mass", r.fail_mass},
              {"budget_mass", r.budget_mass},
              {"budget_leaves", r.budget_leaves},
              {"leaves", leaves}};
  if (include_tree) out["tree_nodes"] = tree_json(r.tree);
  return out;
}

}  // namespace ptf::io
