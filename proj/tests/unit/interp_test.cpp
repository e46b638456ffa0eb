#include <gtest/gtest.h>

#include <random>

#include "mlc/interp.hpp"
#include "random_program.hpp"
#include "test_support.hpp"

namespace mlc {
namespace {

using testing::parse_m_text;
using testing::parse_mpp_text;

const Value U = Value::undef();

Store table_store() {
  Store s;
  s.set_array("T", {Value(10.0), Value(20.0), Value(30.0)});
  s.set("A", Value(2.0));
  s.set("Z", Value(0.0));
  return s;
}

Value eval(const std::string& text, const Store& store = table_store()) {
  return eval_expr(store, *parse_m_expr(text));
}

void expect_same(const Value& got, const Value& want) {
  EXPECT_TRUE(got == want) << "got " << format_value(got) << " want " << format_value(want);
}

// Expression rules.

TEST(ExprRules, DValue) {
  expect_same(eval("2.5"), Value(2.5));
  expect_same(eval("undef"), U);
}
TEST(ExprRules, DVar) { expect_same(eval("A"), Value(2.0)); }
TEST(ExprRules, DVarUndef) { expect_same(eval("NOT_THERE"), U); }
TEST(ExprRules, DX) {
  Store s;
  expect_same(eval_expr(s, *parse_m_expr("X * 10"), 3u), Value(30.0));
  expect_same(eval_expr(s, *parse_m_expr("X")), U);
}
TEST(ExprRules, DCondTrue) { expect_same(eval("if A then 1 else 2 endif"), Value(1.0)); }
TEST(ExprRules, DCondFalse) { expect_same(eval("if Z then 1 else 2 endif"), Value(2.0)); }
TEST(ExprRules, DCondUndef) { expect_same(eval("if undef then 1 else 2 endif", Store{}), U); }
TEST(ExprRules, DIndexNeg) {
  expect_same(eval("T[-1]"), Value(0.0));
  expect_same(eval("T[-0.5]"), Value(0.0));
}
TEST(ExprRules, DIndexUndef) { expect_same(eval("T[undef]"), U); }
TEST(ExprRules, DIndexOutside) {
  expect_same(eval("T[5]"), U);
  expect_same(eval("T[3]"), U);
  // Truncation lifts 2.9999999 to 3, which is past the end.
  expect_same(eval("T[2.9999999]"), U);
}
TEST(ExprRules, DTabUndef) {
  expect_same(eval("NOPE[1]"), U);
  expect_same(eval("NOPE[0]"), U);
}
TEST(ExprRules, DIndex) {
  expect_same(eval("T[1.7]"), Value(20.0));
  expect_same(eval("T[0]"), Value(10.0));
  expect_same(eval("T[A]"), Value(30.0));
  expect_same(eval("T[0.9999995]"), Value(20.0));
}
TEST(ExprRules, DFunc) {
  expect_same(eval("max(A, T[2])"), Value(30.0));
  expect_same(eval("round(A / 4)"), Value(1.0));
  expect_same(eval("present(NOT_THERE) + present(A)"), Value(1.0));
}

// Command rules.

OrderedProgram ordered(const std::string& text) { return order_rules(parse_m_text(text)); }

const char* kAssertion = R"(
V_0AC : input : "" ;
V_0AM : input : "" ;
A031 : error : "" ;
if V_0AC + V_0AM + 0 > 1 then error A031 ;
)";

TEST(CommandRules, DAssign) {
  RunOutcome r = run_commands(Store{}, ordered("A = 1 + undef ; B = A * 3 ;"));
  ASSERT_FALSE(r.raised());
  expect_same(r.store().get("A"), Value(1.0));
  expect_same(r.store().get("B"), Value(3.0));
}

TEST(CommandRules, DAssignTable) {
  RunOutcome r = run_commands(Store{}, ordered("T[X, 3] = X * 2 ;"));
  ASSERT_FALSE(r.raised());
  ASSERT_NE(r.store().array("T"), nullptr);
  const auto& t = *r.store().array("T");
  ASSERT_EQ(t.size(), 3u);
  expect_same(t[0], Value(0.0));
  expect_same(t[1], Value(2.0));
  expect_same(t[2], Value(4.0));
}

TEST(CommandRules, DAssertTrue) {
  Store s;
  s.set("V_0AC", Value(1.0));
  s.set("V_0AM", Value(1.0));
  RunOutcome r = run_commands(s, ordered(kAssertion));
  ASSERT_TRUE(r.raised());
  EXPECT_EQ(r.error().code, "A031");
}

TEST(CommandRules, DAssertOther) {
  Store s;
  s.set("V_0AC", Value(1.0));  // 1 + undef + 0 > 1 is 0
  EXPECT_FALSE(run_commands(s, ordered(kAssertion)).raised());
  // Undef guard does not raise either.
  EXPECT_FALSE(run_commands(Store{}, ordered("E : error : \"\" ; if undef then error E ;")).raised());
}

TEST(CommandRules, DSeq) {
  RunOutcome r = run_commands(Store{}, ordered("A = 1 ; B = A + 1 ; C = B + 1 ;"));
  expect_same(r.store().get("C"), Value(3.0));
}

TEST(CommandRules, DErrorIsSticky) {
  const std::string base = "E1 : error : \"\" ; E2 : error : \"\" ; if 1 then error E1 ;";
  RunOutcome a = run_commands(Store{}, ordered(base));
  RunOutcome b = run_commands(Store{}, ordered(base + " if 1 then error E2 ; Q = 5 ;"));
  ASSERT_TRUE(a.raised());
  ASSERT_TRUE(b.raised());
  EXPECT_EQ(a.error(), b.error());
}

TEST(CommandRules, TraceReportsEachCommand) {
  std::vector<TraceEvent> events;
  TraceHook hook = [&](const TraceEvent& e) { events.push_back(e); };
  run_commands(Store{}, ordered("B = A + 1 ; A = 2 ; T[X, 2] = X ;"), &hook);
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0].location, "0");
  EXPECT_EQ(events[0].target, "A");
  EXPECT_EQ(events[1].value, "3");
  EXPECT_EQ(events[2].value, "[0, 1]");
}

// Driver semantics.

CheckedProgram program(const std::string& m, const std::string& mpp) {
  return check(parse_m_text(m), parse_mpp_text(mpp));
}

TEST(MppRules, PartitionComposesWithCall) {
  CheckedProgram p = program("B : input kind taxbenefit : \"\" ; Y = B + 0 ;",
                             "main():\n  partition with taxbenefit:\n    Y <- call_m()\n");
  Store in;
  in.set("B", Value(5.0));
  RunOutcome r = run_mpp(p, "main", in);
  ASSERT_FALSE(r.raised());
  expect_same(r.store().get("B"), Value(5.0));
  expect_same(r.store().get("Y"), Value(0.0));
}

TEST(MppRules, CallPropagatesOnlyTargets) {
  CheckedProgram p = program("Y = 1 ; Z = 2 ;", "main():\n  Y <- call_m()\n");
  Store in;
  in.set("Z", Value(9.0));
  RunOutcome r = run_mpp(p, "main", in);
  expect_same(r.store().get("Y"), Value(1.0));
  expect_same(r.store().get("Z"), Value(9.0));
}

TEST(MppRules, CallSeesCallerScope) {
  CheckedProgram p = program("Y = FLAG * 10 ;", "main():\n  FLAG = 3\n  Y <- call_m()\n");
  expect_same(run_mpp(p, "main", Store{}).store().get("Y"), Value(30.0));
}

TEST(MppRules, UserFunctionCallFiltersTargets) {
  CheckedProgram p = program("", R"(main():
  A, B <- helper()

helper():
  A = 1
  B = 2
  C = 3
  a = 4
)");
  RunOutcome r = run_mpp(p, "main", Store{});
  expect_same(r.store().get("A"), Value(1.0));
  expect_same(r.store().get("B"), Value(2.0));
  expect_same(r.store().get("C"), U);
}

TEST(MppRules, ExistsBothBranches) {
  const char* m = "D1 : input kind deposit : \"\" ; D2 : input kind deposit : \"\" ;";
  CheckedProgram p = program(m, "main():\n  e = exists(deposit)\n  OUT = e\n");
  expect_same(run_mpp(p, "main", Store{}).store().get("OUT"), Value(0.0));
  Store in;
  in.set("D2", Value(0.0));
  expect_same(run_mpp(p, "main", in).store().get("OUT"), Value(1.0));
}

TEST(MppRules, ExistsSeesArrayElements) {
  const char* m = "D : input kind deposit array 3 : \"\" ;";
  CheckedProgram p = program(m, "main():\n  OUT = exists(deposit)\n");
  Store in;
  in.set_array("D", {U, U, U});
  expect_same(run_mpp(p, "main", in).store().get("OUT"), Value(0.0));
  in.set_array("D", {U, Value(1.0), U});
  expect_same(run_mpp(p, "main", in).store().get("OUT"), Value(1.0));
}

TEST(MppRules, CastBothBranches) {
  CheckedProgram p = program("", "main():\n  a = cast(IN)\n  OUT = a\n");
  expect_same(run_mpp(p, "main", Store{}).store().get("OUT"), Value(0.0));
  Store in;
  in.set("IN", Value(-4.5));
  expect_same(run_mpp(p, "main", in).store().get("OUT"), Value(-4.5));
}

TEST(MppRules, DeleteLocalAndShared) {
  CheckedProgram p = program("", R"(main():
  x = 5
  del x
  OUT = present(x)
  del IN
)");
  Store in;
  in.set("IN", Value(1.0));
  RunOutcome r = run_mpp(p, "main", in);
  expect_same(r.store().get("OUT"), Value(0.0));
  EXPECT_FALSE(r.store().contains("IN"));
}

TEST(MppRules, PartitionFrameLaw) {
  const char* m = R"(
K1 : input kind k : "" ;
K2 : input kind k : "" ;
O : output : "" ;
O = K1 + K2 + N ;
)";
  CheckedProgram p = program(m, R"(main():
  partition with k:
    K1 = 100
    O <- call_m()
    N = 7
)");
  Store in;
  in.set("K1", Value(1.0));
  in.set("N", Value(2.0));
  RunOutcome r = run_mpp(p, "main", in);
  expect_same(r.store().get("K1"), Value(1.0));
  expect_same(r.store().get("K2"), U);
  EXPECT_FALSE(r.store().contains("K2"));
  expect_same(r.store().get("O"), Value(102.0));
  expect_same(r.store().get("N"), Value(7.0));
}

TEST(MppRules, UndefGuardTakesElse) {
  CheckedProgram p = program("", "main():\n  if IN:\n    OUT = 1\n  else:\n    OUT = 2\n");
  expect_same(run_mpp(p, "main", Store{}).store().get("OUT"), Value(2.0));
}

TEST(MppRules, ErrorsPropagateFromCallM) {
  CheckedProgram p = program("E : error : \"\" ; if IN > 0 then error E ;",
                             "main():\n  <- call_m()\n  OUT = 1\n");
  Store in;
  in.set("IN", Value(1.0));
  RunOutcome r = run_mpp(p, "main", in);
  ASSERT_TRUE(r.raised());
  EXPECT_EQ(r.error().code, "E");
}

TEST(MppRules, CallMIsPure) {
  CheckedProgram p = program("Y = IN * 2 + W ; W = 1 ;",
                             "main():\n  Y <- call_m()\n  a = Y\n  Y <- call_m()\n  OUT = Y - a\n");
  Store in;
  in.set("IN", Value(3.0));
  expect_same(run_mpp(p, "main", in).store().get("OUT"), Value(0.0));
}

TEST(MppRules, UnknownEntry) {
  CheckedProgram p = program("", "main():\n  a = 1\n");
  EXPECT_THROW(run_mpp(p, "other", Store{}), Error);
}

TEST(MppRules, NoDriverRunsRules) {
  CheckedProgram p = check(parse_m_text("Y = 2 ;"));
  expect_same(run_mpp(p, "main", Store{}).store().get("Y"), Value(2.0));
}

// The driver shape with a partition around a five-target call, followed by
// local casts and stores back into the M scope. Expected values computed by
// hand below.
TEST(MppRules, DriverScenarioAgainstHandOracle) {
  const char* m = R"(
TB1 : input kind taxbenefit : "" ;
TB2 : input kind taxbenefit : "" ;
DEP : input kind deposit : "" ;
INC : input : "" ;
FLAG_A : intermediate : "" ;
FLAG_B : intermediate : "" ;
R1 : output : "" ;
R2 : output : "" ;
R3 : output : "" ;
R4 : output : "" ;
R5 : output : "" ;
R1 = INC * FLAG_A + TB1 ;
R2 = TB2 * 2 ;
R3 = if FLAG_B then INC / 4 else 0 endif ;
R4 = DEP + 1 ;
R5 = R1 + R3 ;
SIDE = 99 ;
)";
  const char* mpp = R"(compute():
  if exists(taxbenefit) or exists(deposit):
    FLAG_A = 1
    FLAG_B = 1
    partition with taxbenefit:
      R1, R2, R3, R4, R5 <- call_m()
    r1 = cast(R1)
    r2 = cast(R2)
    r3 = cast(R3)
    r5 = cast(R5)
    FLAG_B = 0
    SAVED_1 = r1
    SAVED_2 = r2
    SAVED_3 = r3
    R5 = r5
)";
  CheckedProgram p = program(m, mpp);
  Store in;
  in.set("TB1", Value(5.0));
  in.set("INC", Value(1000.0));
  RunOutcome r = run_mpp(p, "compute", in);
  ASSERT_FALSE(r.raised());
  const Store& s = r.store();
  // Inside the partition TB1 and TB2 are undef:
  // R1 = 1000*1 + undef = 1000; R2 = undef*2 = undef; R3 = 1000/4 = 250;
  // R4 = undef + 1 = 1; R5 = 1000 + 250 = 1250.
  expect_same(s.get("R1"), Value(1000.0));
  expect_same(s.get("R2"), U);
  expect_same(s.get("R3"), Value(250.0));
  expect_same(s.get("R4"), Value(1.0));
  expect_same(s.get("R5"), Value(1250.0));
  expect_same(s.get("SAVED_1"), Value(1000.0));
  expect_same(s.get("SAVED_2"), Value(0.0));
  expect_same(s.get("SAVED_3"), Value(250.0));
  expect_same(s.get("FLAG_B"), Value(0.0));
  expect_same(s.get("TB1"), Value(5.0));
  expect_same(s.get("SIDE"), U);

  // With no benefit or deposit entered, nothing runs.
  Store none;
  none.set("INC", Value(1000.0));
  RunOutcome q = run_mpp(p, "compute", none);
  expect_same(q.store().get("R1"), U);
  expect_same(q.store().get("FLAG_A"), U);
}

TEST(Reports, PassAndFailReasons) {
  CheckedProgram p = check(parse_m_text(R"(
V_A : input : "" ;
OUT : output : "" ;
A031 : error : "" ;
OUT = V_A * 42 ;
if V_A > 5 then error A031 ;
)"));
  TestCase ok{"ok", {{"V_A", std::nullopt, 1.0}}, {{"OUT", Value(42.0)}}, std::nullopt};
  EXPECT_TRUE(run_test(ok, p).passed);

  TestCase missing_error{"e", {{"V_A", std::nullopt, 1.0}}, {}, "A031"};
  TestReport r = run_test(missing_error, p);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.reason, "no error raised");

  TestCase got_undef{"u", {}, {{"OUT", Value(42.0)}}, std::nullopt};
  TestReport u = run_test(got_undef, p);
  EXPECT_FALSE(u.passed);
  ASSERT_EQ(u.diffs.size(), 1u);
  EXPECT_TRUE(u.diffs[0].actual.is_undef());
  EXPECT_NE(u.reason.find("undef"), std::string::npos);
}

TEST(Reports, RationalModeMatchesOnExactPrograms) {
  CheckedProgram p = check(parse_m_text("OUT : output : \"\" ; OUT = round(IN * 3 / 7) ;"));
  TestCase t{"r", {{"IN", std::nullopt, 14.0}}, {{"OUT", Value(6.0)}}, std::nullopt};
  EXPECT_TRUE(run_test(t, p, "main", NumericMode::ExactRational).passed);
  EXPECT_TRUE(run_test(t, p, "main", NumericMode::Binary64).passed);
}

TEST(Reports, RationalModeDiffersWhereRoundingDoes) {
  CheckedProgram p = check(parse_m_text("OUT = A + B - A ;"));
  Store in;
  in.set("A", Value(1e17));
  in.set("B", Value(1.0));
  expect_same(run_program(p, "main", in, NumericMode::Binary64).store().get("OUT"), Value(0.0));
  expect_same(run_program(p, "main", in, NumericMode::ExactRational).store().get("OUT"),
              Value(1.0));
}

// Type-safety mirror: random well-typed programs never fault.
TEST(TypeSafety, RandomProgramsEvaluate) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    testing::RandomProgram rp = testing::random_program(rng, 1 + static_cast<int>(rng() % 12));
    CheckedProgram p = check(rp.program);
    Store s = testing::random_store(rp, rng);
    RunOutcome r = run_mpp(p, "main", s);
    if (!r.raised()) {
      for (const auto& c : p.ordered.commands) {
        if (c.kind == Command::Kind::AssignArray) {
          ASSERT_NE(r.store().array(c.target), nullptr);
          ASSERT_EQ(r.store().array(c.target)->size(), c.length);
        }
      }
    }
  }
}

}  // namespace
}  // namespace mlc
