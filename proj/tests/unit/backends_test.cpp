#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mlc/backends.hpp"
#include "mlc/harness.hpp"
#include "mlc/optimizer.hpp"
#include "random_program.hpp"
#include "test_support.hpp"

namespace mlc {
namespace {

using testing::host_toolchain;
using testing::parse_m_text;
using testing::parse_mpp_text;
using testing::scratch_dir;

BirProgram bir_of(const std::string& m, const std::string& mpp = "") {
  CheckedProgram p = mpp.empty() ? check(parse_m_text(m)) : check(parse_m_text(m), parse_mpp_text(mpp));
  return inline_program(p, all_assumptions(p.source));
}

EmittedUnit emit(const BirProgram& b, Language lang, const EmitOptions& o = {}) {
  const StorageLayout layout = make_layout(b.vars);
  return lang == Language::C ? emit_c(b, layout, o) : emit_python(b, layout, o);
}

Toolchain quick_toolchain() {
  Toolchain t = host_toolchain();
  std::replace(t.cflags.begin(), t.cflags.end(), std::string("-O2"), std::string("-O0"));
  return t;
}

bool have(Language lang) {
  const Toolchain t = host_toolchain();
  return lang == Language::C ? !t.cc.empty() : !t.python.empty();
}

std::vector<RunOutcome> run_unit(const EmittedUnit& unit, const std::vector<Store>& inputs,
                                 const Toolchain& tools = host_toolchain()) {
  BuiltUnit built = build_unit(unit, tools, scratch_dir(std::string(to_string(unit.language))));
  return run_built(built, inputs);
}

const char* kRules = R"(
TB1 : input kind taxbenefit : "" ;
TB2 : input kind taxbenefit array 2 : "" ;
DEP : input kind deposit : "" ;
INC : input : "" ;
R1 : output : "" ;
R2 : output : "" ;
R3 : output : "" ;
T : output array 3 : "" ;
LIMIT : error : "" ;
R1 = INC * 2 + TB1 ;
R2 = TB2[0] + TB2[1] + DEP ;
R3 = if MODE then R1 - R2 else max(R1, R2) endif ;
T[X, 3] = round(R1 / (X + 1)) + TB2[X - 1] ;
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
    R1, R2, R3, T <- call_m()

helper():
  x = cast(DEP) + 1
  DEP = x
  R2, R3, T <- call_m()
  del DEP
)";

std::vector<Store> driver_inputs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-1000.0, 80000.0);
  std::vector<Store> out;
  for (std::size_t k = 0; k < n; ++k) {
    Store s;
    for (const char* name : {"TB1", "DEP", "INC"}) {
      if (rng() % 3) s.set(name, Value(rng() % 2 ? std::round(mag(rng)) : mag(rng)));
    }
    if (rng() % 2) {
      s.set_array("TB2", {rng() % 2 ? Value(mag(rng)) : Value::undef(), rng() % 2 ? Value(mag(rng)) : Value::undef()});
    }
    out.push_back(std::move(s));
  }
  return out;
}

void expect_agree(const BirProgram& b, Language lang, const std::vector<Store>& inputs) {
  const std::vector<RunOutcome> got = run_unit(emit(b, lang), inputs);
  BirRunner runner(b);
  ASSERT_EQ(got.size(), inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto diff = first_difference(runner.run(inputs[i]), got[i], b.outputs);
    ASSERT_FALSE(diff) << to_string(lang) << " input " << i << " differs at " << *diff;
  }
}

TEST(EmitC, Deterministic) {
  const BirProgram b = bir_of(kRules, kDriver);
  EXPECT_EQ(emit(b, Language::C).source, emit(b, Language::C).source);
  EXPECT_EQ(emit(b, Language::Python).source, emit(b, Language::Python).source);
}

TEST(EmitC, EntryAndLayoutComments) {
  const BirProgram b = bir_of("A : input : \"\" ; B : output : \"\" ; T : output array 2 : \"\" ; B = A ; T[X, 2] = X ;");
  const EmittedUnit u = emit(b, Language::C);
  EXPECT_EQ(u.entry, "mlc_compute");
  EXPECT_NE(u.source.find("#include \"m_runtime.h\""), std::string::npos);
  EXPECT_NE(u.source.find("int mlc_compute(const m_value *inputs, m_value *outputs, m_value *state, "
                          "const char **error_code)"),
            std::string::npos);
  EXPECT_NE(u.source.find("/* slot 0: A */"), std::string::npos);
  EXPECT_NE(u.source.find("/* slot 2..3: T[2] */"), std::string::npos);
  EXPECT_NE(u.source.find("fast-math"), std::string::npos);
  EXPECT_EQ(u.total_slots, 4u);
}

TEST(EmitC, HexFloatLiterals) {
  const BirProgram b = bir_of("B : output : \"\" ; B = 0.1 + 2.5 ;");
  const std::string src = emit(b, Language::C).source;
  EXPECT_NE(src.find("m_num(0x1.999999999999ap-4)"), std::string::npos) << src;
  EXPECT_NE(src.find("m_num(0x1.4p+1)"), std::string::npos) << src;
}

TEST(EmitC, IdentifierCap) {
  const BirProgram b = bir_of("B : output : \"\" ; B = 1 ;");
  EmitOptions o;
  o.prefix = std::string(23, 'p');  // "<prefix>_compute" is 31 characters
  EXPECT_NO_THROW(emit(b, Language::C, o));
  o.prefix = std::string(25, 'p');
  try {
    emit(b, Language::C, o);
    FAIL() << "expected IdentifierOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IdentifierOverflow);
  }
}

TEST(Manifest, JsonLines) {
  const BirProgram b = bir_of("A : input : \"\" ; V : input array 3 : \"\" ; B : output : \"\" ; B = A + V[1] ;");
  const EmittedUnit u = emit(b, Language::C);
  std::istringstream lines(manifest_jsonl(u));
  std::vector<nlohmann::json> rows;
  std::string line;
  while (std::getline(lines, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], nlohmann::json::parse(R"({"name":"A","slot":0,"role":"input","index":0,"length":0})"));
  EXPECT_EQ(rows[1], nlohmann::json::parse(R"({"name":"V","slot":2,"role":"input","index":1,"length":3})"));
  EXPECT_EQ(rows[2], nlohmann::json::parse(R"({"name":"B","slot":1,"role":"output","index":0,"length":0})"));
  EXPECT_EQ(u.input_width(), 4u);
  EXPECT_EQ(u.output_width(), 1u);
}

TEST(Chunking, LongProgramsSplit) {
  std::string m = "A : input : \"\" ; OUT : output : \"\" ;\n";
  for (int i = 0; i < 2500; ++i) {
    m += "V" + std::to_string(i) + " = " + (i == 0 ? std::string("A") : "V" + std::to_string(i - 1)) + " + 1 ;\n";
  }
  m += "OUT = V2499 ;\n";
  const BirProgram b = bir_of(m);
  for (Language lang : {Language::C, Language::Python}) {
    const EmittedUnit u = emit(b, lang);
    // Count statements between function headers.
    std::istringstream in(u.source);
    std::string line;
    std::size_t per_function = 0;
    std::size_t max_per_function = 0;
    std::size_t functions = 0;
    const std::string header = lang == Language::C ? "static int mlc_c" : "def _c";
    while (std::getline(in, line)) {
      if (line.rfind(header, 0) == 0 && line.back() != ';') {
        ++functions;
        per_function = 0;
      }
      if (line.find("s[") != std::string::npos && line.find(" = ") != std::string::npos) {
        max_per_function = std::max(max_per_function, ++per_function);
      }
    }
    EXPECT_GE(functions, 5u) << to_string(lang);
    EXPECT_LE(max_per_function, 1000u) << to_string(lang);
  }
  Store in;
  in.set("A", Value(0.5));
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) continue;
    auto got = run_unit(emit(b, lang), {in}, quick_toolchain());
    EXPECT_TRUE(got[0].store().get("OUT") == Value(2500.5)) << to_string(lang);
  }
}

TEST(Chunking, OversizedConditionalBranchesBecomeCalls) {
  std::string m = "A : input : \"\" ; OUT : output : \"\" ;\n";
  std::string mpp = "main():\n  if A > 0:\n    OUT <- call_m()\n  else:\n    OUT = 7\n";
  for (int i = 0; i < 1500; ++i) {
    m += "V" + std::to_string(i) + " = " + (i == 0 ? std::string("A") : "V" + std::to_string(i - 1)) + " * 1 ;\n";
  }
  m += "OUT = V1499 ;\n";
  const BirProgram b = bir_of(m, mpp);
  Store pos;
  pos.set("A", Value(3.0));
  Store neg;
  neg.set("A", Value(-3.0));
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) continue;
    auto got = run_unit(emit(b, lang), {pos, neg, Store{}}, quick_toolchain());
    EXPECT_TRUE(got[0].store().get("OUT") == Value(3.0)) << to_string(lang);
    EXPECT_TRUE(got[1].store().get("OUT") == Value(7.0)) << to_string(lang);
    EXPECT_TRUE(got[2].store().get("OUT") == Value(7.0)) << to_string(lang);
  }
}

TEST(Backends, AddUndefIsOne) {
  const BirProgram b = bir_of("OUT : output : \"\" ; OUT = 1 + undef ;");
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) GTEST_SKIP() << "toolchain missing";
    auto got = run_unit(emit(b, lang), {Store{}});
    EXPECT_TRUE(got[0].store().get("OUT") == Value(1.0)) << to_string(lang);
  }
}

TEST(Backends, RaiseReturnsErrorCode) {
  const BirProgram b =
      bir_of("A : input : \"\" ; OUT : output : \"\" ; A031 : error : \"\" ; OUT = A ; if A > 10 then error A031 ;");
  Store hi;
  hi.set("A", Value(11.0));
  Store lo;
  lo.set("A", Value(4.0));
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) GTEST_SKIP() << "toolchain missing";
    auto got = run_unit(emit(b, lang), {hi, lo});
    ASSERT_TRUE(got[0].raised()) << to_string(lang);
    EXPECT_EQ(got[0].error().code, "A031");
    ASSERT_FALSE(got[1].raised());
    EXPECT_TRUE(got[1].store().get("OUT") == Value(4.0));
  }
}

TEST(Backends, RoundMinusTwoAndAHalf) {
  const BirProgram b = bir_of("A : input : \"\" ; OUT : output : \"\" ; OUT = round(A) ;");
  std::vector<Store> in(4);
  const double args[] = {-2.5, 2.5, 0.49994, 2.9999999};
  const double want[] = {-3.0, 3.0, 0.0, 3.0};
  for (int i = 0; i < 4; ++i) in[static_cast<std::size_t>(i)].set("A", Value(args[i]));
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) GTEST_SKIP() << "toolchain missing";
    auto got = run_unit(emit(b, lang), in);
    for (int i = 0; i < 4; ++i) {
      EXPECT_TRUE(got[static_cast<std::size_t>(i)].store().get("OUT") == Value(want[i]))
          << to_string(lang) << " round(" << args[i] << ")";
    }
  }
}

TEST(EmitPython, EmptyProgramReturnsNoneForOutput) {
  if (!have(Language::Python)) GTEST_SKIP() << "python missing";
  const BirProgram b = bir_of("OUT : output : \"\" ;");
  const EmittedUnit u = emit(b, Language::Python);
  const auto dir = scratch_dir("pyempty");
  std::ofstream(dir / "unit.py") << u.source;
  std::string out;
  ASSERT_EQ(testing::run_command("cd '" + dir.string() + "' && '" + host_toolchain().python +
                                     "' -c 'import unit; print(unit.compute({}))'",
                                 &out),
            0);
  EXPECT_EQ(out, "{'OUT': None}\n");
}

TEST(EmitPython, OnlyImportsFloor) {
  const std::string src = emit(bir_of(kRules, kDriver), Language::Python).source;
  std::istringstream in(src);
  std::string line;
  std::vector<std::string> imports;
  while (std::getline(in, line)) {
    if (line.rfind("import", 0) == 0 || line.rfind("from", 0) == 0) imports.push_back(line);
  }
  EXPECT_EQ(imports, std::vector<std::string>{"from math import floor"});
}

TEST(EmitPython, AbsentAndNoneInputsAreUndef) {
  if (!have(Language::Python)) GTEST_SKIP() << "python missing";
  const BirProgram b = bir_of("A : input : \"\" ; OUT : output : \"\" ; OUT = present(A) ;");
  const auto dir = scratch_dir("pyundef");
  std::ofstream(dir / "unit.py") << emit(b, Language::Python).source;
  std::string out;
  ASSERT_EQ(testing::run_command("cd '" + dir.string() + "' && '" + host_toolchain().python +
                                     "' -c 'import unit; print(unit.compute({}), unit.compute({\"A\": None}), "
                                     "unit.compute({\"A\": 0}))'",
                                 &out),
            0);
  EXPECT_EQ(out, "{'OUT': 0.0} {'OUT': 0.0} {'OUT': 1.0}\n");
}

TEST(Differential, DriverFixtureBothBackends) {
  const BirProgram b = bir_of(kRules, kDriver);
  const BirProgram opt = optimize(b, false);
  const auto inputs = driver_inputs(800, 41);
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) GTEST_SKIP() << "toolchain missing";
    expect_agree(b, lang, inputs);
    expect_agree(opt, lang, inputs);
  }
}

TEST(Differential, CAtOptimizationLevelZero) {
  if (!have(Language::C)) GTEST_SKIP() << "cc missing";
  const BirProgram b = bir_of(kRules, kDriver);
  const Toolchain t = quick_toolchain();
  const auto inputs = driver_inputs(300, 43);
  const auto got = run_unit(emit(b, Language::C), inputs, t);
  BirRunner runner(b);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ASSERT_FALSE(first_difference(runner.run(inputs[i]), got[i], b.outputs)) << i;
  }
}

TEST(Differential, RandomProgramsBothBackends) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 12; ++k) {
    testing::RandomProgram rp = testing::random_program(rng, 5 + static_cast<int>(rng() % 25));
    CheckedProgram p = check(rp.program);
    AssumptionSpec spec = all_assumptions(p.source);
    for (const auto& v : p.ordered.vars) spec.outputs.insert(v.name);
    BirProgram b = inline_program(p, spec);
    std::vector<Store> inputs;
    for (int i = 0; i < 40; ++i) inputs.push_back(testing::random_store(rp, rng));
    for (Language lang : {Language::C, Language::Python}) {
      if (!have(lang)) continue;
      expect_agree(b, lang, inputs);
      expect_agree(optimize(b, false), lang, inputs);
    }
  }
}

TEST(Differential, DeepExpressionsUseTemporaries) {
  std::string e = "A";
  for (int i = 0; i < 150; ++i) e = "(" + e + " + " + std::to_string(i % 7) + ") * 1";
  const BirProgram b = bir_of("A : input : \"\" ; OUT : output : \"\" ; OUT = " + e + " ;");
  const std::string src = emit(b, Language::Python).source;
  EXPECT_NE(src.find("t0 = "), std::string::npos);
  Store in;
  in.set("A", Value(1.25));
  for (Language lang : {Language::C, Language::Python}) {
    if (!have(lang)) continue;
    expect_agree(b, lang, {in, Store{}});
  }
}

TEST(KernelVectors, CoverEdgeCases) {
  const auto vs = kernel_vectors();
  EXPECT_GE(vs.size(), 500u);
  auto has = [&](const std::string& op, double a, double out) {
    return std::any_of(vs.begin(), vs.end(), [&](const KernelVector& k) {
      return k.op == op && k.a == Value(a) && k.out == Value(out);
    });
  };
  EXPECT_TRUE(has("round", 2.5, 3.0));
  EXPECT_TRUE(has("round", -2.5, -3.0));
  EXPECT_TRUE(has("round", 0.49994, 0.0));
  EXPECT_TRUE(has("truncate", 2.9999999, 3.0));
  EXPECT_TRUE(std::any_of(vs.begin(), vs.end(), [](const KernelVector& k) {
    return k.op == "div" && k.b == Value(0.0) && k.out == Value(0.0) && k.a == Value(3.0);
  }));
  std::set<std::string> ops;
  for (const auto& k : vs) ops.insert(k.op);
  EXPECT_EQ(ops.size(), 23u);
}

TEST(KernelVectors, TsvColumns) {
  std::istringstream in(kernel_vectors_tsv());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# op\ta-def\ta-val-hex\tb-def\tb-val-hex\tout-def\tout-val-hex");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, '\t')) cols.push_back(c);
    ASSERT_EQ(cols.size(), 7u) << line;
    for (int k : {1, 3, 5}) EXPECT_TRUE(cols[static_cast<std::size_t>(k)] == "0" || cols[static_cast<std::size_t>(k)] == "1");
    for (int k : {2, 4, 6}) EXPECT_EQ(cols[static_cast<std::size_t>(k)].size(), 16u);
  }
  EXPECT_EQ(rows, kernel_vectors().size());
}

TEST(KernelVectors, ReferenceHeaderReplaysThem) {
  const Toolchain t = host_toolchain();
  if (t.cc.empty()) GTEST_SKIP() << "cc missing";
  const auto dir = scratch_dir("vectors");
  std::ofstream(dir / "kernel_vectors.tsv") << kernel_vectors_tsv();
  const auto support = testing::source_dir() / "tests" / "support";
  std::string cmd = "'" + t.cc + "'";
  for (const auto& f : t.cflags) cmd += " " + f;
  cmd += " -I'" + support.string() + "' '" + (support / "replay_vectors.c").string() + "' -o '" +
         (dir / "replay").string() + "' -lm 2>&1";
  std::string log;
  ASSERT_EQ(testing::run_command(cmd, &log), 0) << log;
  std::string out;
  EXPECT_EQ(testing::run_command("'" + (dir / "replay").string() + "' '" + (dir / "kernel_vectors.tsv").string() + "'",
                                 &out),
            0)
      << out;
  EXPECT_NE(out.find(" 0 mismatches"), std::string::npos) << out;
}

TEST(KernelVectors, PythonHelpersReplayThem) {
  const Toolchain t = host_toolchain();
  if (t.python.empty()) GTEST_SKIP() << "python missing";
  const auto dir = scratch_dir("pyvectors");
  std::ofstream(dir / "unit.py") << emit(bir_of("OUT : output : \"\" ;"), Language::Python).source;
  std::ofstream(dir / "kernel_vectors.tsv") << kernel_vectors_tsv();
  std::ofstream(dir / "replay.py") << R"(import struct
import unit

def val(d, h):
    return None if d == '0' else struct.unpack('<d', struct.pack('<Q', int(h, 16)))[0]

def same(x, y):
    if x is None or y is None:
        return x is None and y is None
    return struct.pack('<d', x) == struct.pack('<d', y)

bad = 0
count = 0
for line in open('kernel_vectors.tsv'):
    if line.startswith('#'):
        continue
    op, ad, ah, bd, bh, od, oh = line.split()
    fn = getattr(unit, 'm_' + op)
    a, b = val(ad, ah), val(bd, bh)
    got = fn(a) if fn.__code__.co_argcount == 1 else fn(a, b)
    count += 1
    if not same(got, val(od, oh)):
        bad += 1
        print('mismatch', line.strip(), got)
print(count, 'vectors,', bad, 'mismatches')
)";
  std::string out;
  EXPECT_EQ(testing::run_command("cd '" + dir.string() + "' && '" + t.python + "' replay.py", &out), 0);
  EXPECT_NE(out.find(" 0 mismatches"), std::string::npos) << out;
}

}  // namespace
}  // namespace mlc
