#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "harness.hpp"
#include "oracles.hpp"

using namespace stabreg;
using namespace stabreg::cli;

namespace {

namespace fs = std::filesystem;

std::vector<Element> els(const GroupSubset& s) { return s.elements(); }

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("stabreg_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "stabreg");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace

TEST(SubsetSpec, Explicit) {
  auto z12 = build_group("Z/12");
  EXPECT_EQ(els(parse_subset(z12, "0,4,8")), (std::vector<Element>{0, 4, 8}));
  EXPECT_EQ(els(parse_subset(z12, "{ 8, 0 ,4}")), (std::vector<Element>{0, 4, 8}));
  EXPECT_EQ(els(parse_subset(z12, "[1]")), (std::vector<Element>{1}));
  EXPECT_TRUE(parse_subset(z12, "{}").empty());
  EXPECT_TRUE(parse_subset(z12, "").empty());
  EXPECT_THROW(parse_subset(z12, "12"), ParseError);
  EXPECT_THROW(parse_subset(z12, "{1,2"), ParseError);
  EXPECT_THROW(parse_subset(z12, "blob:1"), ParseError);
}

TEST(SubsetSpec, Cosets) {
  auto z12 = build_group("Z/12");
  EXPECT_EQ(els(parse_subset(z12, "coset:1,4")), (std::vector<Element>{1, 5, 9}));
  EXPECT_EQ(els(parse_subset(z12, "coset:3,")), (std::vector<Element>{3}));
  EXPECT_EQ(els(parse_subset(z12, "union-cosets:6|0;1")), (std::vector<Element>{0, 1, 6, 7}));
  auto s3 = build_group("S/3");
  auto c = parse_subset(s3, "coset:2,1");
  EXPECT_EQ(c.size(), 2u);
  EXPECT_TRUE(is_coset(c));
}

TEST(SubsetSpec, RandomAndPerturbAreDeterministic) {
  auto g = build_group("Z/2xZ/8");
  auto r1 = parse_subset(g, "random:1/3,7");
  EXPECT_EQ(r1, parse_subset(g, "random:1/3,7"));
  EXPECT_EQ(parse_subset(g, "random:0,7").size(), 0u);
  EXPECT_EQ(parse_subset(g, "random:1,7").size(), 16u);
  EXPECT_EQ(parse_subset(g, "random:0.5,3"), parse_subset(g, "random:1/2,3"));
  auto base = parse_subset(g, "coset:0,2");
  for (std::uint64_t t = 0; t <= 5; ++t) {
    auto p = parse_subset(g, "perturb:coset:0,2," + std::to_string(t) + ",11");
    EXPECT_EQ(symdiff_count(p, base), t);
    EXPECT_EQ(p, parse_subset(g, "perturb:coset:0,2," + std::to_string(t) + ",11"));
  }
  EXPECT_EQ(symdiff_count(parse_subset(g, "perturb:{0,1,2},3,5"), parse_subset(g, "0,1,2")), 3u);
  EXPECT_THROW(parse_subset(g, "perturb:0,1"), ParseError);
  EXPECT_THROW(parse_subset(g, "random:3/2,1"), ParseError);
}

TEST(Caps, AssignmentsAndEnvironment) {
  Caps c;
  apply_caps(c, "k_cap=9, node_cap=1000,order_cap=64,product_evaluations=5");
  EXPECT_EQ(c.stability.k_cap, 9u);
  EXPECT_EQ(c.stability.search.node_cap, 1000u);
  EXPECT_EQ(c.group.order_cap, 64u);
  EXPECT_EQ(c.tripling.product_evaluations, 5u);
  EXPECT_THROW(apply_caps(c, "k_cap"), ParseError);
  EXPECT_THROW(apply_caps(c, "nonsense=1"), ParseError);
  ::setenv("STABREG_CAPS", "k_cap=5", 1);
  EXPECT_EQ(caps_from_env().stability.k_cap, 5u);
  ::unsetenv("STABREG_CAPS");
  EXPECT_EQ(caps_from_env().stability.k_cap, StabilityOptions{}.k_cap);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(TheoremViolation("x")), kExitTheoremViolation);
  EXPECT_EQ(exit_code_for(DecomposeFailure("x", std::nullopt)), kExitTheoremViolation);
  EXPECT_EQ(exit_code_for(PreconditionError("x")), kExitPrecondition);
  EXPECT_EQ(exit_code_for(ParseError("x")), kExitPrecondition);
  EXPECT_EQ(exit_code_for(CapExceeded("x")), kExitCap);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitFailure);
}

TEST(Commands, AnalyzeExamples) {
  Caps caps;
  auto z7 = build_group("Z/7");
  auto j = analyze_json(parse_subset(z7, "0,1,2,3"), caps);
  EXPECT_EQ(j["vc_left"]["dimension"], 2);
  auto z12 = build_group("Z/12");
  auto k = analyze_json(parse_subset(z12, "0,4,8"), caps);
  EXPECT_EQ(k["stability"]["index"], 2);
  // |Ax xor A| is 0 on the three elements of A and 6 on the other nine.
  EXPECT_EQ(k["profile"]["counts"], (nlohmann::json{{"0", 3}, {"6", 9}}));
  for (const auto& spec : dsl_groups_up_to(6))
    EXPECT_EQ(analyze_json(GroupSubset(build_group(spec)), caps)["stability"]["index"], 1) << spec;
}

TEST(Commands, TaskExitCodes) {
  Caps caps;
  TaskSpec t;
  t.group = "Z/12";
  t.subset = "0,4,8";
  auto ok = run_task(t, Rational(1, 4), caps, true);
  EXPECT_EQ(ok.exit_code, kExitOk);
  EXPECT_EQ(ok.report["error_count"], 0);
  EXPECT_FALSE(ok.checks.empty());

  t.subset = "0,1,2,3";
  t.k = 2;
  EXPECT_EQ(run_task(t, Rational(1, 4), caps, false).exit_code, kExitPrecondition);
  t.k.reset();
  EXPECT_EQ(run_task(t, Rational(3, 4), caps, false).exit_code, kExitPrecondition);

  t.mode = "dnf";
  for (const char* s : {"0,4,8", "0,1,2,3", "random:1/2,4"}) {
    t.subset = s;
    auto r = run_task(t, Rational(1, 4), caps, true);
    if (r.exit_code == kExitOk) EXPECT_TRUE(r.report["round_trip"].get<bool>()) << s;
  }
  t.mode = "bogus";
  EXPECT_EQ(run_task(t, Rational(1, 4), caps, false).exit_code, kExitPrecondition);
}

TEST(Cli, ExitCodesAndFiles) {
  auto dir = temp_dir("cli");
  EXPECT_EQ(run({"decompose", "-g", "Z/12", "-A", "0,4,8", "--verify", "-o", (dir / "d.json").string()}), 0);
  auto j = nlohmann::json::parse(slurp(dir / "d.json"));
  EXPECT_EQ(j["error_count"], 0);
  EXPECT_EQ(j["epsilon"], "1/4");
  EXPECT_EQ(run({"decompose", "-g", "Z/12", "-A", "0,1,2,3", "--k", "2", "-o", (dir / "e.json").string()}), 3);
  EXPECT_EQ(run({"decompose", "-g", "Z/12", "-A", "0,1,2,3", "--k", "2", "--override-k", "-o",
                 (dir / "f.json").string()}),
            0);
  EXPECT_EQ(run({"decompose", "-g", "Q/9", "-A", "0", "-o", (dir / "g.json").string()}), 3);
  EXPECT_EQ(run({"decompose"}), 3);
  EXPECT_EQ(run({"tripling", "-g", "Z", "-A", "interval:0,9", "--verify", "-o", (dir / "t.json").string()}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "t.json"))["X_size"], 28);
}

TEST(Cli, ConfigFileMirrorsFlags) {
  auto dir = temp_dir("config");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"command": "decompose", "group": "Z/12", "set": "0,4,8", "epsilon": "1/8", "verify": true,
               "out": ")" << (dir / "r.json").string() << "\"}";
  }
  EXPECT_EQ(run({"--config", (dir / "cfg.json").string()}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "r.json"))["epsilon"], "1/8");
  // Flags on the command line win over the file.
  EXPECT_EQ(run({"--config", (dir / "cfg.json").string(), "decompose", "--epsilon", "1/2"}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "r.json"))["epsilon"], "1/2");
}

TEST(Sweep, CanonicalOrderIndependentOfJobs) {
  std::vector<TaskSpec> tasks;
  for (const char* s : {"coset:1,4", "0,1,2", "random:1/2,9", "perturb:coset:0,3,1,2"}) {
    TaskSpec t;
    t.group = "Z/12";
    t.subset = s;
    t.eps = {Rational(1, 2), Rational(1, 8)};
    tasks.push_back(t);
  }
  tasks[1].mode = "dnf";
  tasks[2].mode = "decompose-normal";
  Caps caps;
  auto one = run_sweep(tasks, caps, 1, true);
  auto three = run_sweep(tasks, caps, 3, true);
  EXPECT_TRUE(one.ok());
  EXPECT_EQ(one.rows.size(), 8u);
  EXPECT_EQ(sweep_csv(one, false), sweep_csv(three, false));
  EXPECT_EQ(sweep_json(one, false), sweep_json(three, false));
  for (std::size_t i = 1; i < one.rows.size(); ++i) EXPECT_LE(one.rows[i - 1].key, one.rows[i].key);
}

TEST(OracleSuite, EmptyScope) {
  SuiteScope s;
  s.max_order = 0;
  auto r = run_oracle_suite(s);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.rows.empty());
  EXPECT_EQ(run({"oracle-suite", "--max-order", "0"}), 0);
}

TEST(OracleSuite, SmallScopePassesAndIsDeterministic) {
  SuiteScope s;
  s.max_order = 6;
  auto a = run_oracle_suite(s);
  EXPECT_TRUE(a.ok()) << suite_json(a).dump();
  for (const auto& [name, t] : a.tallies) EXPECT_GT(t.checked, 0u) << name;
  s.jobs = 2;
  auto b = run_oracle_suite(s);
  EXPECT_EQ(suite_csv(a), suite_csv(b));
  EXPECT_EQ(suite_json(a).dump(), suite_json(b).dump());
  // Rows enumerate every subset of every group.
  std::size_t expect = 0;
  for (const auto& g : dsl_groups_up_to(6)) expect += std::size_t(1) << build_group(g)->order();
  EXPECT_EQ(a.rows.size(), expect);
}

TEST(OracleSuite, InjectedClauseIsReportedAndMinimized) {
  SuiteScope s;
  s.max_order = 6;
  s.invariants = {"decompose-contract"};
  s.inject = "H is a subgroup";
  auto r = run_oracle_suite(s);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].invariant, "decompose-contract");
  EXPECT_EQ(r.failures[0].clause, "H is a subgroup");
  EXPECT_TRUE(r.failures[0].minimized.empty());
  EXPECT_EQ(r.tallies["decompose-contract"].failed, r.tallies["decompose-contract"].checked);

  s.invariants = {"coset-iff-index-2"};
  s.inject = "coset-iff-index-2";
  s.groups = {"Z/6"};
  auto w = run_oracle_suite(s);
  ASSERT_EQ(w.failures.size(), 1u);
  EXPECT_EQ(w.failures[0].group, "Z/6");
  // The empty set is not applicable, so minimization stops at one element.
  EXPECT_EQ(w.failures[0].minimized.size(), 1u);

  auto dir = temp_dir("inject");
  EXPECT_EQ(run({"oracle-suite", "--max-order", "4", "--inject", "eta >= delta", "--out", dir.string()}), 2);
  auto cx = nlohmann::json::parse(slurp(dir / "counterexample.json"));
  ASSERT_EQ(cx.size(), 1u);
  EXPECT_EQ(cx[0]["clause"], "eta >= delta");
  EXPECT_EQ(cx[0]["invariant"], "eta-search");
}

TEST(OracleSuite, SampledAboveExhaustiveOrder) {
  SuiteScope s;
  s.max_order = 12;
  s.exhaustive_order = 4;
  s.samples = 5;
  s.groups = {"Z/12", "Z/4"};
  s.invariants = {"empty-iff-index-1", "coset-iff-index-2", "decompose-contract"};
  auto r = run_oracle_suite(s);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.rows.size(), 5u + 16u);
  EXPECT_EQ(suite_csv(r), suite_csv(run_oracle_suite(s)));
}
