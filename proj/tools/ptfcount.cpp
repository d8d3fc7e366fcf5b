// Command-line front end: count, transform, regtree, oracle.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ptfcount/bool_count.hpp"
#include "ptfcount/gauss_count.hpp"
#include "ptfcount/oracles.hpp"
#include "ptfcount/problem_io.hpp"
#include "ptfcount/regularity.hpp"
#include "ptfcount/transform.hpp"

namespace {

using ptf::io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

ptf::io::Problem load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ptf::InputError("cannot open input file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ptf::io::parse_problem(ss.str());
  } catch (const ptf::InputError& e) {
    throw ptf::InputError(path + ": " + e.what());
  }
}

void write_report(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ptf::InputError("cannot write report file " + path);
  out << j.dump(2) << "\n";
}

void print_estimate(double v) { std::printf("%.6f\n", v); }

struct ScheduleArgs {
  double eta = 0.0;
  double eps_prime = 0.0;
  bool practical = false;

  void add(CLI::App* app) {
    app->add_option("--eta", eta, "Tail-variance threshold (with --eps-prime, replaces the default schedule)");
    app->add_option("--eps-prime", eps_prime, "Eigenvalue-ratio threshold (with --eta)");
    app->add_flag("--practical", practical, "Use the larger practical schedule eta = eps^2/k^2, eps' = eps^3/k^2");
  }

  std::optional<ptf::TransformSchedule> resolve(double eps, std::size_t k) const {
    if ((eta > 0.0) != (eps_prime > 0.0)) throw ptf::InputError("--eta and --eps-prime must be given together");
    if (eta > 0.0) return ptf::TransformSchedule{eta, eps_prime, "override"};
    if (practical) return ptf::practical_schedule(eps, std::max<std::size_t>(k, 1));
    return std::nullopt;
  }
};

struct CountArgs {
  std::string input, report, mode = "auto", strategy = "greedy";
  double eps = 0.0, orthant_tol = 0.0, tau = 0.0, eps0 = 0.0, delta0 = 0.0;
  double grid_cap = 1e6;
  bool grid_fallback = false, tree = false;
  std::size_t max_depth = 20;
  ScheduleArgs schedule;
};

ptf::Strategy parse_strategy(const std::string& s) { return s == "paper" ? ptf::Strategy::paper : ptf::Strategy::greedy; }

int run_count(const CountArgs& a, unsigned threads) {
  const auto prob = load(a.input);
  bool boolean = prob.domain == ptf::Domain::boolean;
  if (a.mode == "gauss") boolean = false;
  if (a.mode == "bool") boolean = true;

  ptf::GaussCountOptions gopt;
  gopt.grid.grid_cap = a.grid_cap;
  gopt.grid.allow_fallback = a.grid_fallback;
  gopt.orthant_tol = a.orthant_tol;
  gopt.threads = threads;

  auto q = prob.tuple();
  if (!boolean) {
    q = ptf::with_domain(q, ptf::Domain::gaussian);
    gopt.schedule = a.schedule.resolve(a.eps, q.size());
    try {
      const auto rep = ptf::count_gauss(q, prob.junta, a.eps, gopt);
      print_estimate(rep.estimate);
      write_report(a.report, ptf::io::gauss_report_json(rep, a.eps));
      return kExitOk;
    } catch (const ptf::BudgetError& e) {
      const auto sched = gopt.schedule ? *gopt.schedule : ptf::default_schedule(a.eps, std::max<std::size_t>(q.size(), 1));
      write_report(a.report, {{"mode", "gauss"},
                              {"status", "budget"},
                              {"error", e.what()},
                              {"eps", a.eps},
                              {"schedule", ptf::io::schedule_json(sched)}});
      throw;
    }
  }

  if (q.domain() != ptf::Domain::boolean) q = ptf::with_domain(q, ptf::Domain::boolean);
  ptf::BoolCountOptions bopt;
  bopt.gauss = gopt;
  bopt.gauss.schedule = a.schedule.resolve(a.eps / 4, q.size());
  bopt.threads = threads;
  bopt.strategy = parse_strategy(a.strategy);
  bopt.depth_cap = a.max_depth;
  const int given = (a.tau > 0) + (a.eps0 > 0) + (a.delta0 > 0);
  if (given != 0 && given != 3) throw ptf::InputError("--tau, --eps0 and --delta0 must be given together");
  if (given == 3) {
    ptf::RegParams r{a.tau, a.eps0, a.delta0};
    r.strategy = bopt.strategy;
    r.depth_cap = a.max_depth;
    bopt.reg = r;
  }
  const auto rep = ptf::count_boolean(q, prob.junta, a.eps, bopt);
  print_estimate(rep.estimate);
  write_report(a.report, ptf::io::bool_report_json(rep, a.eps, a.tree));
  if (rep.budget_leaves > 0) {
    std::cerr << "error: " << rep.budget_leaves << " leaves exceeded the grid budget (mass " << rep.budget_mass
              << "); estimate omits them\n";
    return kExitBudget;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic approximate counting for Boolean functions of degree-2 threshold functions"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  CountArgs ca;
  auto* count = app.add_subcommand("count", "Estimate Pr[g(sign q_1, ..., sign q_k) = 1]");
  count->add_option("--input", ca.input, "Problem file")->required();
  count->add_option("--eps", ca.eps, "Target accuracy")->required();
  count->add_option("--mode", ca.mode, "auto, gauss or bool")->check(CLI::IsMember({"auto", "gauss", "bool"}));
  count->add_option("--report", ca.report, "Write a JSON report here");
  count->add_option("--grid-cap", ca.grid_cap, "Maximum number of grid points");
  count->add_flag("--grid-fallback", ca.grid_fallback, "Use a Gauss-Hermite grid when the interval grid is over the cap");
  count->add_option("--orthant-tol", ca.orthant_tol, "Per-point orthant integration tolerance");
  count->add_option("--tau", ca.tau, "Regularity threshold override (bool mode)");
  count->add_option("--eps0", ca.eps0, "Skew parameter override (bool mode)");
  count->add_option("--delta0", ca.delta0, "Failure-mass parameter override (bool mode)");
  count->add_option("--strategy", ca.strategy, "paper or greedy")->check(CLI::IsMember({"paper", "greedy"}));
  count->add_option("--max-depth", ca.max_depth, "Tree depth cap")->check(CLI::Range(0, 62));
  count->add_flag("--tree", ca.tree, "Include the full tree in the report");
  ca.schedule.add(count);

  std::string tr_input;
  double tr_eps = 0.0;
  ScheduleArgs tr_sched;
  auto* tr = app.add_subcommand("transform", "Run the basis change and report its diagnostics");
  tr->add_option("--input", tr_input, "Problem file")->required();
  tr->add_option("--eps", tr_eps, "Target accuracy")->required();
  tr_sched.add(tr);

  std::string rt_input, rt_strategy = "greedy", rt_report;
  double rt_tau = 0.0, rt_eps = 0.0, rt_delta = 0.0, rt_cskew = 4.0;
  std::size_t rt_depth = 20;
  auto* rt = app.add_subcommand("regtree", "Build a regularity tree and report its statistics");
  rt->add_option("--input", rt_input, "Problem file")->required();
  rt->add_option("--tau", rt_tau, "Regularity threshold")->required();
  rt->add_option("--eps", rt_eps, "Skew parameter")->required();
  rt->add_option("--delta", rt_delta, "Failure-mass parameter")->required();
  rt->add_option("--strategy", rt_strategy, "paper or greedy")->check(CLI::IsMember({"paper", "greedy"}));
  rt->add_option("--max-depth", rt_depth, "Tree depth cap")->check(CLI::Range(0, 62));
  rt->add_option("--c-skew", rt_cskew, "Skew-test constant");
  rt->add_option("--report", rt_report, "Write the full tree here");

  std::string or_input, or_kind;
  std::uint64_t or_seed = 1;
  std::size_t or_samples = 1'000'000;
  auto* orc = app.add_subcommand("oracle", "Reference answers: exhaustive enumeration or Monte Carlo");
  orc->add_option("kind", or_kind, "brute or mc")->required()->check(CLI::IsMember({"brute", "mc"}));
  orc->add_option("--input", or_input, "Problem file")->required();
  orc->add_option("--seed", or_seed, "Monte Carlo seed");
  orc->add_option("--samples", or_samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*count) return run_count(ca, threads);

    if (*tr) {
      const auto prob = load(tr_input);
      auto q = ptf::with_domain(prob.tuple(), ptf::Domain::gaussian);
      q = ptf::map_tuple(q, [](const ptf::QuadPoly& p) { return ptf::normalize_unit_variance(p).poly; });
      const auto sched = tr_sched.resolve(tr_eps, q.size());
      const auto res = sched ? ptf::transform(q, *sched) : ptf::transform(q, tr_eps);
      std::cout << ptf::io::transform_json(res).dump(2) << "\n";
      return kExitOk;
    }

    if (*rt) {
      const auto prob = load(rt_input);
      ptf::RegParams prm{rt_tau, rt_eps, rt_delta};
      prm.c_skew = rt_cskew;
      prm.depth_cap = rt_depth;
      prm.strategy = parse_strategy(rt_strategy);
      const auto tree = ptf::construct_tree(ptf::with_domain(prob.tuple(), ptf::Domain::boolean), prm);
      std::cout << ptf::io::tree_stats_json(tree).dump(2) << "\n";
      if (!rt_report.empty()) {
        auto full = ptf::io::tree_stats_json(tree);
        full["tree_nodes"] = ptf::io::tree_json(tree);
        write_report(rt_report, full);
      }
      return kExitOk;
    }

    if (*orc) {
      const auto prob = load(or_input);
      if (or_kind == "brute") {
        ptf::detail::require(prob.domain == ptf::Domain::boolean, "oracle brute: problem is not boolean-domain");
        const auto r = prob.has_exact_coefficients()
                           ? ptf::brute_force_boolean(ptf::io::exact_polys(prob), prob.n, prob.junta)
                           : ptf::brute_force_boolean(prob.tuple(), prob.junta);
        print_estimate(r.value());
        std::cout << "exact " << r.to_string() << "\n";
      } else {
        const auto q = ptf::with_domain(prob.tuple(), ptf::Domain::gaussian);
        const auto r = ptf::mc_gaussian_count(q, prob.junta, {or_seed, or_samples, threads});
        print_estimate(r.estimate);
        std::cout << "stderr " << r.standard_error << " samples " << r.samples << "\n";
      }
      return kExitOk;
    }
  } catch (const ptf::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ptf::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
