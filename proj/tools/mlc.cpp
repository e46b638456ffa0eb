// mlc: the command-line front of the toolchain.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlc/backends.hpp"
#include "mlc/frontend.hpp"
#include "mlc/harness.hpp"
#include "mlc/interp.hpp"
#include "mlc/optimizer.hpp"
#include "mlc/sema.hpp"

namespace fs = std::filesystem;
using namespace mlc;

namespace {

// Usage errors found after parsing (bad combinations, missing files).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::vector<std::string> sources;
  std::string driver;
  std::string entry = "main";
  std::string assumptions;
  std::string tests;
  bool json = false;
};

struct Loaded {
  CheckedProgram program;
  AssumptionSpec spec;
  std::optional<fs::path> tests_dir;
};

// A directory source brings its own driver (the only *.mpp in it) and its
// tests/ subdirectory unless they are given explicitly.
Loaded load(const Common& c) {
  std::vector<fs::path> paths;
  std::optional<fs::path> driver = c.driver.empty() ? std::nullopt : std::optional<fs::path>(c.driver);
  std::optional<fs::path> tests = c.tests.empty() ? std::nullopt : std::optional<fs::path>(c.tests);
  for (const auto& s : c.sources) {
    fs::path p(s);
    if (!fs::exists(p)) throw UsageError("no such file or directory: " + s);
    paths.push_back(p);
    if (!fs::is_directory(p)) continue;
    if (!driver) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.path().extension() == ".mpp") found.push_back(e.path());
      }
      if (found.size() == 1) driver = found.front();
    }
    if (!tests && fs::is_directory(p / "tests")) tests = p / "tests";
  }
  const std::vector<SourceFile> files = read_m_sources(paths);
  if (files.empty()) throw UsageError("no .m files among the sources");
  MProgram m = parse_m(files);
  std::optional<MppProgram> mpp;
  if (driver) mpp = parse_mpp(read_source(*driver));
  Loaded out;
  out.program = check(std::move(m), std::move(mpp));
  out.spec = load_assumptions(c.assumptions.empty() ? std::nullopt : std::optional<fs::path>(c.assumptions),
                              out.program.source);
  out.tests_dir = tests;
  return out;
}

std::vector<TestCase> load_tests(const Loaded& l) {
  if (!l.tests_dir) throw UsageError("no test directory: pass --tests");
  return parse_tests(*l.tests_dir, l.program.source);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
}

std::string print_outcome(const RunOutcome& r, const AssumptionSpec& spec, const CheckedProgram& p) {
  if (r.raised()) return "error " + r.error().code + "\n";
  std::ostringstream out;
  for (const auto& name : spec.outputs) {
    const VarDecl* d = p.ordered.find_var(name);
    if (d && d->is_array()) {
      for (std::uint32_t i = 0; i < d->length; ++i) {
        const std::string key = name + "[" + std::to_string(i) + "]";
        out << key << '=' << format_value(lookup_output(r.store(), key)) << '\n';
      }
    } else {
      out << name << '=' << format_value(r.store().get(name)) << '\n';
    }
  }
  return out.str();
}

// NAME=value and NAME[i]=value lines, as in the input part of a test file.
TestCase read_input_lines(std::istream& in, const CheckedProgram& p) {
  std::string text;
  for (std::string line; std::getline(in, line);) text += line + "\n";
  text += "#EXPECT-ERROR __stdin__\n";
  TestCase t;
  // Reuse the test parser for validation; the fake expectation is dropped.
  MProgram with_code = p.source;
  with_code.errors.push_back(ErrorDecl{"__stdin__", "", {}});
  t = parse_test(SourceFile{"stdin.mtest", text}, with_code);
  t.expected_error.reset();
  return t;
}

NumericMode parse_mode(const std::string& m) {
  return m == "rational" ? NumericMode::ExactRational : NumericMode::Binary64;
}

int cmd_check(const Common& c, bool emit_order_flag) {
  Loaded l = load(c);
  if (emit_order_flag) std::cout << emit_order(l.program.ordered);
  std::size_t rules = l.program.ordered.commands.size();
  if (c.json) {
    nlohmann::json j;
    j["ok"] = true;
    j["rules"] = rules;
    j["variables"] = l.program.ordered.vars.size();
    j["driver"] = l.program.mpp.has_value();
    std::cout << j.dump() << '\n';
  } else if (!emit_order_flag) {
    std::cout << "ok: " << rules << " rules, " << l.program.ordered.vars.size() << " variables"
              << (l.program.mpp ? ", with a driver" : "") << '\n';
  }
  return 0;
}

int cmd_run(const Common& c, const std::string& test, const std::string& mode, bool trace) {
  Loaded l = load(c);
  TestCase t;
  bool from_test = !test.empty();
  if (from_test) {
    fs::path p(test);
    if (!fs::exists(p) && l.tests_dir) p = *l.tests_dir / (test + ".mtest");
    if (!fs::exists(p)) throw UsageError("no such test: " + test);
    t = parse_test(read_source(p), l.program.source);
  } else {
    t = read_input_lines(std::cin, l.program);
  }
  TraceHook hook = [](const TraceEvent& e) {
    std::cerr << e.location << '\t' << e.target << '\t' << e.value << '\n';
  };
  const Store inputs = store_from_test(t, l.program.ordered);
  RunOutcome r = run_program(l.program, c.entry, inputs, parse_mode(mode), trace ? &hook : nullptr);
  std::cout << print_outcome(r, l.spec, l.program);
  if (!from_test) return 0;
  TestReport rep = check_outcome(t, r);
  std::cout << (rep.passed ? "PASS " : "FAIL ") << t.name;
  if (!rep.passed) std::cout << ": " << rep.reason;
  std::cout << '\n';
  return rep.passed ? 0 : 1;
}

BirProgram build_bir(const Loaded& l, const std::string& entry, bool opt, bool fast_math, OptStats* stats) {
  BirProgram b = inline_program(l.program, l.spec, entry);
  if (!opt) {
    if (stats) stats->before = stats->after = count_instructions(b);
    return b;
  }
  return optimize(b, fast_math, stats);
}

int cmd_optimize(const Common& c, bool fast_math, bool emit_bir, bool emit_oir, bool opt_stats,
                 const std::string& out) {
  Loaded l = load(c);
  OptStats stats;
  BirProgram b = build_bir(l, c.entry, true, fast_math, &stats);
  if (emit_bir) write_text(out, print_bir(b));
  if (emit_oir) write_text(out, print_dot(to_oir(b)));
  if (opt_stats) std::cout << stats.tsv();
  if (c.json) {
    nlohmann::json j;
    j["before"] = stats.before;
    j["after"] = stats.after;
    j["fast_math"] = fast_math;
    std::cout << j.dump() << '\n';
  } else if (!emit_bir && !emit_oir) {
    std::cout << "instructions: " << stats.before << " -> " << stats.after << '\n';
  }
  return 0;
}

int cmd_compile(const Common& c, const std::string& backend, const std::string& out, bool fast_math, bool no_opt,
                const std::string& prefix) {
  Loaded l = load(c);
  BirProgram b = build_bir(l, c.entry, !no_opt, fast_math, nullptr);
  fs::create_directories(out);
  EmitOptions o;
  o.prefix = prefix;
  if (backend == "c" || backend == "all") {
    EmittedUnit u = emit_c(b, make_layout(b.vars), o);
    write_text((fs::path(out) / (prefix + "_unit.c")).string(), u.source);
    write_text((fs::path(out) / (prefix + "_driver.c")).string(), emit_c_driver(u, o));
    write_text((fs::path(out) / (prefix + "_manifest.jsonl")).string(), manifest_jsonl(u));
  }
  if (backend == "python" || backend == "all") {
    EmittedUnit u = emit_python(b, make_layout(b.vars), o);
    const std::string module = prefix + "_unit";
    write_text((fs::path(out) / (module + ".py")).string(), u.source);
    write_text((fs::path(out) / (prefix + "_driver.py")).string(), emit_python_driver(u, module));
    if (backend == "python") {
      write_text((fs::path(out) / (prefix + "_manifest.jsonl")).string(), manifest_jsonl(u));
    }
  }
  std::cout << "wrote " << backend << " unit to " << out << '\n';
  return 0;
}

std::string replay_prefix(const Common& c) {
  std::string s = "mlc run";
  for (const auto& src : c.sources) s += " " + src;
  if (!c.driver.empty()) s += " --driver " + c.driver;
  if (!c.tests.empty()) s += " --tests " + c.tests;
  return s + " --trace --test";
}

int cmd_test(const Common& c, const std::string& backend, const std::string& mode, bool fast_math, bool no_opt,
             const std::string& work) {
  Loaded l = load(c);
  const std::vector<TestCase> tests = load_tests(l);
  if (parse_mode(mode) == NumericMode::ExactRational) {
    std::size_t failed = 0;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& t : tests) {
      TestReport r = run_test(t, l.program, c.entry, NumericMode::ExactRational);
      if (!r.passed) ++failed;
      if (c.json) {
        j.push_back({{"test", t.name}, {"passed", r.passed}, {"reason", r.reason}});
      } else if (!r.passed) {
        std::cout << "FAIL " << t.name << ": " << r.reason << '\n';
      }
    }
    if (c.json) {
      std::cout << nlohmann::json{{"mode", "rational"}, {"tests", tests.size()}, {"failed", failed}, {"results", j}}
                       .dump()
                << '\n';
    } else {
      std::cout << tests.size() - failed << "/" << tests.size() << " tests pass in rational mode\n";
    }
    return failed == 0 ? 0 : 1;
  }
  DiffOptions o;
  o.c = backend == "c" || backend == "all";
  o.python = backend == "python" || backend == "all";
  o.optimize = !no_opt;
  o.fast_math = fast_math;
  o.entry = c.entry;
  o.tools = toolchain_from_env();
  o.replay_prefix = replay_prefix(c);
  fs::path scratch;
  if (work.empty()) {
    scratch = fs::temp_directory_path() /
              ("mlc-test-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    o.work_dir = scratch;
  } else {
    o.work_dir = work;
  }
  DiffReport rep = diff_run(l.program, l.spec, tests, o);
  if (!scratch.empty()) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
  }
  if (c.json) {
    std::cout << rep.json() << '\n';
  } else {
    for (const auto& n : rep.notes) std::cout << "note: " << n << '\n';
    for (const auto& f : rep.failed_expectations) std::cout << "FAIL " << f << '\n';
    for (const auto& e : rep.entries) {
      std::cout << to_string(e.verdict) << ' ' << e.backend << ' ' << e.test;
      if (e.verdict == Verdict::Mismatch) {
        std::cout << ": " << e.variable << " interp " << e.expected << " vs " << e.actual << "\n  replay: " << e.replay;
      }
      std::cout << '\n';
    }
    std::string backends = "interp";
    for (const auto& b : rep.compared) backends += ", " + b;
    std::cout << rep.tests << " tests, " << rep.mismatches() << " mismatches (" << backends << ")\n";
  }
  return rep.interp_expectations_ok && rep.mismatches() == 0 && rep.skipped.empty() ? 0 : 1;
}

int cmd_coverage(const Common& c, const std::string& out, const std::string& buckets) {
  Loaded l = load(c);
  const std::vector<TestCase> tests = load_tests(l);
  const BirProgram b = inline_program(l.program, l.spec, c.entry);
  CoverageReport rep = measure_coverage(b, test_stores(l.program, tests));
  write_text(out, rep.csv());
  if (!buckets.empty()) write_text(buckets, rep.bucket_csv());
  return 0;
}

int cmd_fuzz(const Common& c, std::size_t count, std::uint64_t seed, const std::string& out, bool no_minimize) {
  Loaded l = load(c);
  const std::vector<TestCase> seeds = load_tests(l);
  std::vector<TestCase> valid;
  for (const auto& t : seeds) {
    if (!t.expected_error) valid.push_back(t);
  }
  MutationPolicy policy;
  policy.seed = seed;
  std::vector<TestCase> mutants = mutate_tests(valid, policy, count, l.program, c.entry);
  std::vector<TestCase> kept = mutants;
  if (!no_minimize) {
    std::vector<TestCase> all = seeds;
    all.insert(all.end(), mutants.begin(), mutants.end());
    std::vector<TestCase> minimized = minimize_corpus(all, l.program, c.entry);
    kept.clear();
    for (auto& t : minimized) {
      if (t.name.find("_m") != std::string::npos) kept.push_back(std::move(t));
    }
  }
  write_tests(out, kept);
  if (c.json) {
    std::cout << nlohmann::json{{"generated", mutants.size()}, {"written", kept.size()}, {"seed", seed}}.dump()
              << '\n';
  } else {
    std::cout << mutants.size() << " valid mutants, " << kept.size() << " written to " << out << '\n';
  }
  return 0;
}

void print_error(const Error& e, bool json) {
  if (json) {
    nlohmann::json j;
    j["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.message()},
                  {"span", e.span().known() ? e.span().str() : ""}};
    std::cout << j.dump() << '\n';
  }
  std::cerr << "mlc: ";
  if (e.span().known()) std::cerr << e.span().str() << ": ";
  std::cerr << to_string(e.kind()) << ": " << e.message() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlc: compiler and test harness for M rules and M++ drivers"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_tests) {
    sub->add_option("sources", common.sources, ".m files or directories")->required();
    sub->add_option("--driver", common.driver, "M++ driver file");
    sub->add_option("--entry", common.entry, "driver function to run");
    sub->add_option("--assumptions", common.assumptions, "assumption file (.mast)");
    if (needs_tests) sub->add_option("--tests", common.tests, "directory of .mtest files");
    sub->add_flag("--json", common.json, "machine-readable report");
  };

  bool emit_order_flag = false;
  auto* check_cmd = app.add_subcommand("check", "parse and check the sources");
  add_common(check_cmd, false);
  check_cmd->add_flag("--emit-order", emit_order_flag, "print the rule order");

  std::string test_file;
  std::string mode = "binary64";
  bool trace = false;
  auto* run_cmd = app.add_subcommand("run", "interpret one test, or NAME=value lines from stdin");
  add_common(run_cmd, true);
  run_cmd->add_option("--test", test_file, "test file, or a test name in the test directory");
  run_cmd->add_option("--mode", mode, "arithmetic")->check(CLI::IsMember({"binary64", "rational"}));
  run_cmd->add_flag("--trace", trace, "print every executed command to stderr");

  bool fast_math = false;
  bool emit_bir = false;
  bool emit_oir = false;
  bool opt_stats = false;
  std::string out;
  auto* opt_cmd = app.add_subcommand("optimize", "inline and optimize, then report");
  add_common(opt_cmd, false);
  opt_cmd->add_flag("--fast_math", fast_math, "allow rewrites that ignore -0.0 and NaN");
  auto* bir_flag = opt_cmd->add_flag("--emit-bir", emit_bir, "print the optimized program");
  opt_cmd->add_flag("--emit-oir", emit_oir, "print the control-flow graph (graphviz)")->excludes(bir_flag);
  opt_cmd->add_flag("--opt-stats", opt_stats, "instruction counts after every pass");
  opt_cmd->add_option("--out", out, "output file for --emit-bir or --emit-oir");

  std::string backend = "c";
  bool no_opt = false;
  std::string prefix = "mlc";
  auto* compile_cmd = app.add_subcommand("compile", "emit a C or Python unit and its manifest");
  add_common(compile_cmd, false);
  compile_cmd->add_option("--backend", backend, "target")->check(CLI::IsMember({"c", "python", "all"}));
  compile_cmd->add_option("--out", out, "output directory")->required();
  compile_cmd->add_flag("--fast_math", fast_math, "allow rewrites that ignore -0.0 and NaN");
  compile_cmd->add_flag("--no-opt", no_opt, "skip the optimizer");
  compile_cmd->add_option("--prefix", prefix, "prefix of the generated names");

  std::string test_backend = "none";
  std::string work;
  auto* test_cmd = app.add_subcommand("test", "run a test directory through interp and the backends");
  add_common(test_cmd, true);
  test_cmd->add_option("--backend", test_backend, "backends compared with interp besides BIR")
      ->check(CLI::IsMember({"none", "c", "python", "all"}));
  test_cmd->add_option("--mode", mode, "interp arithmetic")->check(CLI::IsMember({"binary64", "rational"}));
  test_cmd->add_flag("--fast_math", fast_math, "optimize with the fast-math rewrites");
  test_cmd->add_flag("--no-opt", no_opt, "compare the unoptimized program");
  test_cmd->add_option("--work", work, "keep generated units in this directory");

  std::string buckets;
  auto* cov_cmd = app.add_subcommand("coverage", "value coverage of the tests, as CSV");
  add_common(cov_cmd, true);
  cov_cmd->add_option("--out", out, "CSV file (default stdout)");
  cov_cmd->add_option("--buckets", buckets, "also write the bucket summary here");

  std::size_t count = 100;
  std::uint64_t seed = 0;
  bool no_minimize = false;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "mutate the tests and keep a minimal covering set");
  add_common(fuzz_cmd, true);
  fuzz_cmd->add_option("--count", count, "valid mutants to generate");
  fuzz_cmd->add_option("--seed", seed, "random seed");
  fuzz_cmd->add_option("--out", out, "directory for the new .mtest files")->required();
  fuzz_cmd->add_flag("--no-minimize", no_minimize, "write every mutant");

  auto* kv_cmd = app.add_subcommand("kernel-vectors", "value-kernel test vectors as TSV");
  kv_cmd->add_option("--out", out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check_cmd) return cmd_check(common, emit_order_flag);
    if (*run_cmd) return cmd_run(common, test_file, mode, trace);
    if (*opt_cmd) return cmd_optimize(common, fast_math, emit_bir, emit_oir, opt_stats, out);
    if (*compile_cmd) return cmd_compile(common, backend, out, fast_math, no_opt, prefix);
    if (*test_cmd) {
      if (mode == "rational" && (test_backend != "none" || fast_math || no_opt)) {
        throw UsageError("--mode rational runs interp only; drop --backend, --fast_math and --no-opt");
      }
      return cmd_test(common, test_backend, mode, fast_math, no_opt, work);
    }
    if (*cov_cmd) return cmd_coverage(common, out, buckets);
    if (*fuzz_cmd) return cmd_fuzz(common, count, seed, out, no_minimize);
    if (*kv_cmd) {
      write_text(out, kernel_vectors_tsv());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "mlc: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    print_error(e, common.json);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mlc: internal error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
