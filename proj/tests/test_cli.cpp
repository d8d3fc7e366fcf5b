#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ptfcount/problem_io.hpp"
#include "support.hpp"

using namespace ptf;
using ptf::testing::Rng;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the built binary with the shell; stderr is folded into the output.
Run run(const std::string& args) {
  const std::string cmd = std::string(PTFCOUNT_BIN) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(SAMPLES_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

io::Problem random_problem(Rng& rng, bool exact) {
  io::Problem p;
  p.n = 1 + ptf::testing::uniform_int(rng, 0, 5);
  p.domain = ptf::testing::uniform_int(rng, 0, 1) ? Domain::boolean : Domain::gaussian;
  const std::size_t k = 1 + ptf::testing::uniform_int(rng, 0, 2);
  auto coef = [&] {
    io::Coef c;
    if (exact && ptf::testing::uniform_int(rng, 0, 1)) {
      c.exact = Rational{ptf::testing::uniform_int(rng, -9, 9), ptf::testing::uniform_int(rng, 1, 7)};
      c.value = c.exact->value();
    } else {
      c.value = ptf::testing::uniform(rng, -3, 3);
    }
    return c;
  };
  for (std::size_t l = 0; l < k; ++l) {
    io::PolySpec s;
    s.c = coef();
    for (std::size_t i = 0; i < p.n; ++i) s.b.push_back(coef());
    for (std::size_t i = 0; i < p.n; ++i)
      for (std::size_t j = i; j < p.n; ++j) {
        if (i == j && p.domain == Domain::boolean) continue;
        if (ptf::testing::uniform_int(rng, 0, 1)) s.a.push_back({i, j, coef()});
      }
    p.polys.push_back(std::move(s));
  }
  std::vector<std::uint8_t> t(std::size_t{1} << k);
  for (auto& v : t) v = ptf::testing::uniform_int(rng, 0, 1);
  p.junta = BoolJunta(k, t);
  return p;
}

}  // namespace

TEST(ProblemIo, RoundTripIsIdentity) {
  Rng rng(81);
  for (int it = 0; it < 100; ++it) {
    const auto p = random_problem(rng, it % 2 == 0);
    const auto text = io::serialize_problem(p);
    const auto back = io::parse_problem(text);
    EXPECT_EQ(back, p) << text;
    EXPECT_EQ(io::serialize_problem(back), text);
  }
  for (const char* name : {"single_linear.json", "chi_square.json", "correlated_pair.json", "majority3.json",
                           "boolean_pair.json"}) {
    const auto p = io::parse_problem(slurp(sample(name)));
    EXPECT_EQ(io::parse_problem(io::serialize_problem(p)), p) << name;
  }
}

TEST(ProblemIo, DiagnosticsNameTheProblem) {
  auto message = [](const std::string& text) {
    try {
      io::parse_problem(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{\n  \"n\": 1,\n  \"domain\": oops\n}").find("line 3"), std::string::npos);
  EXPECT_NE(message(R"({"n": 1, "domain": "gaussian", "polys": []})").find("\"junta\""), std::string::npos);
  const std::string bad_b =
      R"({"n": 2, "domain": "gaussian", "polys": [{"c": 0, "b": [1], "a": []}], "junta": {"k": 1, "table": "01"}})";
  EXPECT_NE(message(bad_b).find("polys[0].b"), std::string::npos);
  const std::string square =
      R"({"n": 2, "domain": "boolean", "polys": [{"c": 0, "b": [1, 0], "a": [[2, 2, 1]]}], "junta": {"k": 1, "table": "01"}})";
  EXPECT_NE(message(square).find("polys[0].a[0]"), std::string::npos);
  const std::string range =
      R"({"n": 2, "domain": "gaussian", "polys": [{"c": 0, "b": [1, 0], "a": [[1, 3, 1]]}], "junta": {"k": 1, "table": "01"}})";
  EXPECT_NE(message(range).find("1 <= i <= j <= n"), std::string::npos);
  const std::string arity =
      R"({"n": 1, "domain": "gaussian", "polys": [{"c": 0, "b": [1], "a": []}], "junta": {"k": 2, "table": "0001"}})";
  EXPECT_NE(message(arity).find("junta.k"), std::string::npos);
  const std::string den =
      R"({"n": 1, "domain": "boolean", "polys": [{"c": ["1", "0"], "b": [1], "a": []}], "junta": {"k": 1, "table": "01"}})";
  EXPECT_NE(message(den).find("polys[0].c[1]"), std::string::npos);
}

TEST(ProblemIo, ExactPolysUseRationalsAsWritten) {
  const auto p = io::parse_problem(slurp(sample("majority3.json")));
  ASSERT_TRUE(p.has_exact_coefficients());
  const auto e = io::exact_polys(p);
  // 1/3 + x1 + x2 + x3 - x1 x2 / 4, scaled by 12.
  EXPECT_EQ(static_cast<long long>(e[0].c), 4);
  EXPECT_EQ(static_cast<long long>(e[0].b[0]), 12);
  EXPECT_EQ(static_cast<long long>(e[0].a[1]), -3);
}

TEST(Cli, CountSingleLinear) {
  const auto r = run("count --input " + sample("single_linear.json") + " --eps 0.1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.500000\n");
}

TEST(Cli, OracleBrutePrintsDecimalAndExact) {
  const auto r = run("oracle brute --input " + sample("majority3.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.500000\nexact 4/2^3\n");
}

TEST(Cli, MissingJuntaExitsWithInputError) {
  const auto path = temp_file("nojunta.json", R"({"n": 1, "domain": "gaussian", "polys": [{"c": 0, "b": [1], "a": []}]})");
  const auto r = run("count --input " + path + " --eps 0.1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("\"junta\""), std::string::npos) << r.out;
  EXPECT_EQ(run("count --input /nonexistent.json --eps 0.1").code, 2);
  EXPECT_EQ(run("count --eps 0.1").code, 2);
  EXPECT_EQ(run("count --input " + sample("single_linear.json") + " --eps 0.9").code, 2);
}

TEST(Cli, BudgetSaturationExitsWithPartialReport) {
  const auto report = ::testing::TempDir() + "budget.json";
  const auto r = run("count --input " + sample("chi_square.json") + " --eps 0.1 --grid-cap 10 --report " + report);
  EXPECT_EQ(r.code, 3);
  const auto j = io::json::parse(slurp(report));
  EXPECT_EQ(j["status"], "budget");
  EXPECT_EQ(j["schedule"]["schedule"], "paper");
}

TEST(Cli, ReportsEchoTheSchedule) {
  const auto report = ::testing::TempDir() + "bool.json";
  auto r = run("count --input " + sample("boolean_pair.json") + " --eps 0.1 --report " + report);
  EXPECT_EQ(r.code, 0);
  auto j = io::json::parse(slurp(report));
  EXPECT_EQ(j["schedule"], "paper");
  EXPECT_EQ(j["mode"], "bool");
  EXPECT_TRUE(j["tree"]["masses_sum_to_one"].get<bool>());

  r = run("count --input " + sample("boolean_pair.json") + " --eps 0.1 --tau 0.2 --eps0 0.1 --delta0 0.1 --report " +
          report);
  EXPECT_EQ(r.code, 0);
  j = io::json::parse(slurp(report));
  EXPECT_EQ(j["schedule"], "override");

  r = run("count --input " + sample("correlated_pair.json") + " --eps 0.1 --eta 0.01 --eps-prime 0.01 --report " +
          report);
  EXPECT_EQ(r.code, 0);
  j = io::json::parse(slurp(report));
  EXPECT_EQ(j["schedule"]["schedule"], "override");
}

TEST(Cli, OtherSubcommands) {
  auto r = run("regtree --input " + sample("boolean_pair.json") + " --tau 0.2 --eps 0.1 --delta 0.1");
  EXPECT_EQ(r.code, 0);
  auto j = io::json::parse(r.out);
  EXPECT_TRUE(j["masses_sum_to_one"].get<bool>());

  r = run("transform --input " + sample("chi_square.json") + " --eps 0.2");
  EXPECT_EQ(r.code, 0);
  j = io::json::parse(r.out);
  EXPECT_EQ(j["t"], 1);

  r = run("oracle mc --input " + sample("correlated_pair.json") + " --seed 3 --samples 20000");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, run("oracle mc --input " + sample("correlated_pair.json") + " --seed 3 --samples 20000").out);
}
