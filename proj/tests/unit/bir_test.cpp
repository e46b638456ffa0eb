#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mlc/bir.hpp"
#include "random_program.hpp"
#include "test_support.hpp"

namespace mlc {
namespace {

using testing::parse_m_text;
using testing::parse_mpp_text;

CheckedProgram program(const std::string& m, const std::string& mpp) {
  return check(parse_m_text(m), parse_mpp_text(mpp));
}

BirInstr leaf() { return bir_assign("A", make_literal(Value(1.0)), BirInstr::Origin::Rule); }

TEST(CountInstructions, StraightLine) {
  std::vector<BirInstr> is = {leaf(), leaf()};
  EXPECT_EQ(count_instructions(is), 2u);
}

TEST(CountInstructions, Conditional) {
  std::vector<BirInstr> is = {bir_cond(make_var("G"), {leaf()}, {leaf(), leaf()})};
  EXPECT_EQ(count_instructions(is), 4u);
}

TEST(Inline, CallMBecomesOneFrame) {
  CheckedProgram p = program("A = 1 ; B = A + 1 ;", "main():\n  A <- call_m()\n");
  BirProgram b = inline_program(p, all_assumptions(p.source));
  EXPECT_EQ(print_bir(b),
            "# inputs:\n"
            "# outputs:\n"
            "# vars: 3\n"
            "# instructions: 7\n"
            "A = undef\n"
            "B = undef\n"
            "__t_1_B = undef\n"
            "__t_1_B = B\n"
            "A = 1\n"
            "B = A + 1\n"
            "B = __t_1_B\n");
}

TEST(Inline, EmptyPartitionFrameElides) {
  CheckedProgram p = program("K : input kind k : \"\" ; Y = 2 ;",
                             "main():\n  partition with k:\n    Y <- call_m()\n");
  p.kinds["empty"] = {};
  p.mpp->functions[0].body[0].name = "empty";
  BirProgram b = inline_program(p, all_assumptions(p.source));
  // Only the seeds and the rule itself; `Y` is the sole write and a target.
  std::vector<std::string> targets;
  for (const auto& i : b.instrs) {
    if (i.origin != BirInstr::Origin::Seed) targets.push_back(i.target);
  }
  EXPECT_EQ(targets, (std::vector<std::string>{"Y"}));
}

TEST(Inline, PartitionSavesAndRestoresMembers) {
  CheckedProgram p = program("B : input kind k : \"\" ; T : input kind k array 2 : \"\" ; Y = B + T[1] ;",
                             "main():\n  partition with k:\n    Y <- call_m()\n");
  BirProgram b = inline_program(p, all_assumptions(p.source));
  std::size_t frame = 0;
  for (const auto& i : b.instrs) frame += i.origin == BirInstr::Origin::Frame;
  // Save, blank and restore for B and both elements of T.
  EXPECT_EQ(frame, 9u);
  Store in;
  in.set("B", Value(5.0));
  in.set_array("T", {Value(1.0), Value(2.0)});
  RunOutcome r = run_bir(b, in);
  EXPECT_TRUE(r.store().get("B") == Value(5.0));
  EXPECT_TRUE(r.store().get("Y").is_undef());
  EXPECT_TRUE(lookup_output(r.store(), "T[1]") == Value(2.0));
}

TEST(Inline, SeedsFollowTheAssumptions) {
  CheckedProgram p = check(parse_m_text("A : input : \"\" ; B : input : \"\" ; O = A + B ;"));
  AssumptionSpec spec{{"A"}, {"O"}};
  BirProgram b = inline_program(p, spec);
  Store in;
  in.set("A", Value(1.0));
  in.set("B", Value(10.0));
  // B is not an input under this spec, so it stays undef.
  EXPECT_TRUE(run_bir(b, in).store().get("O") == Value(1.0));
  EXPECT_EQ(b.inputs, (std::vector<std::string>{"A"}));
  EXPECT_EQ(b.outputs, (std::vector<std::string>{"O"}));
}

TEST(Inline, UnknownEntry) {
  CheckedProgram p = program("", "main():\n  a = 1\n");
  EXPECT_THROW(inline_program(p, all_assumptions(p.source), "nope"), Error);
}

TEST(Inline, IndependentCopiesPerCallSite) {
  CheckedProgram p = program("Y = IN * 2 ;", "main():\n  Y <- call_m()\n  IN = Y\n  Y <- call_m()\n");
  BirProgram b = inline_program(p, AssumptionSpec{{"IN"}, {"Y"}});
  std::size_t rules = 0;
  for (const auto& i : b.instrs) rules += i.origin == BirInstr::Origin::Rule;
  EXPECT_EQ(rules, 2u);
  Store in;
  in.set("IN", Value(3.0));
  EXPECT_TRUE(run_bir(b, in).store().get("Y") == Value(12.0));
}

bool same_outputs(const RunOutcome& a, const RunOutcome& b, const std::vector<std::string>& outs,
                  std::string* why) {
  if (a.raised() != b.raised()) {
    *why = "raise mismatch";
    return false;
  }
  if (a.raised()) {
    if (a.error().code != b.error().code) *why = a.error().code + " vs " + b.error().code;
    return a.error().code == b.error().code;
  }
  for (const auto& o : outs) {
    const auto* x = a.store().array(o);
    const auto* y = b.store().array(o);
    if (x || y) {
      std::vector<Value> ex = x ? *x : std::vector<Value>();
      std::vector<Value> ey = y ? *y : std::vector<Value>();
      ex.resize(std::max(ex.size(), ey.size()));
      ey.resize(ex.size());
      for (std::size_t i = 0; i < ex.size(); ++i) {
        if (!(ex[i] == ey[i])) {
          *why = o + "[" + std::to_string(i) + "]";
          return false;
        }
      }
    } else if (!(a.store().get(o) == b.store().get(o))) {
      *why = o + ": " + format_value(a.store().get(o)) + " vs " + format_value(b.store().get(o));
      return false;
    }
  }
  return true;
}

std::vector<std::string> every_variable(const BirProgram& b) {
  std::vector<std::string> out;
  for (const auto& v : b.vars) {
    if (!is_generated_name(v.name)) out.push_back(v.name);
  }
  return out;
}

TEST(InlineSoundness, RandomRulePrograms) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 500; ++i) {
    testing::RandomProgram rp = testing::random_program(rng, 1 + static_cast<int>(rng() % 15));
    CheckedProgram p = check(rp.program);
    BirProgram b = inline_program(p, all_assumptions(p.source));
    BirRunner runner(b);
    for (int k = 0; k < 5; ++k) {
      Store s = testing::random_store(rp, rng);
      std::string why;
      ASSERT_TRUE(same_outputs(run_mpp(p, "main", s), runner.run(s), every_variable(b), &why))
          << why << "\n" << print_m(rp.program);
    }
  }
}

const char* kDriverRules = R"(
TB1 : input kind taxbenefit : "" ;
TB2 : input kind taxbenefit array 2 : "" ;
DEP : input kind deposit : "" ;
INC : input : "" ;
R1 : output : "" ;
R2 : output : "" ;
R3 : output : "" ;
LIMIT : error : "" ;
R1 = INC * 2 + TB1 ;
R2 = TB2[0] + TB2[1] + DEP ;
R3 = if MODE then R1 - R2 else max(R1, R2) endif ;
if R3 > 100000 then error LIMIT ;
)";

const char* kDriver = R"(main():
  if exists(taxbenefit):
    MODE = 1
    partition with taxbenefit:
      R1, R3 <- call_m()
    r1 = cast(R1)
    del MODE
    R2 <- helper()
    SAVED = r1
  else:
    <- helper()
    R1, R2, R3 <- call_m()

helper():
  x = cast(DEP) + 1
  DEP = x
  R2, R3 <- call_m()
  del DEP
)";

TEST(InlineSoundness, DriverWithEveryConstruct) {
  CheckedProgram p = program(kDriverRules, kDriver);
  BirProgram b = inline_program(p, all_assumptions(p.source));
  BirRunner runner(b);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> mag(-1000.0, 80000.0);
  const std::vector<std::string> names = {"TB1", "DEP", "INC"};
  for (int k = 0; k < 2000; ++k) {
    Store s;
    for (const auto& n : names) {
      if (rng() % 3) s.set(n, Value(std::round(mag(rng))));
    }
    if (rng() % 2) {
      s.set_array("TB2", {rng() % 2 ? Value(mag(rng)) : Value::undef(),
                          rng() % 2 ? Value(mag(rng)) : Value::undef()});
    }
    std::string why;
    ASSERT_TRUE(same_outputs(run_mpp(p, "main", s), runner.run(s), every_variable(b), &why)) << why;
  }
}

TEST(BirDump, MatchesGolden) {
  CheckedProgram p = program(kDriverRules, kDriver);
  const std::string text = print_bir(inline_program(p, all_assumptions(p.source)));
  const auto path = testing::source_dir() / "tests" / "golden" / "driver.bir";
  if (std::getenv("MLC_UPDATE_GOLDEN")) {
    std::ofstream(path) << text;
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << path;
  std::stringstream golden;
  golden << in.rdbuf();
  EXPECT_EQ(text, golden.str());
  EXPECT_EQ(text, print_bir(inline_program(p, all_assumptions(p.source))));
}

TEST(BirRun, HookSeesEveryAssignment) {
  CheckedProgram p = check(parse_m_text("A = 1 ; T[X, 2] = X + A ;"));
  BirProgram b = inline_program(p, all_assumptions(p.source));
  std::vector<std::size_t> ordinals;
  BirAssignHook hook = [&](std::size_t o, const BirInstr&, const Value&) { ordinals.push_back(o); };
  run_bir(b, Store{}, &hook);
  EXPECT_EQ(ordinals.size(), count_instructions(b));
  for (std::size_t i = 0; i < ordinals.size(); ++i) EXPECT_EQ(ordinals[i], i);
}

}  // namespace
}  // namespace mlc
