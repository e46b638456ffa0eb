#include "mlc/harness.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mlc/optimizer.hpp"

namespace mlc {

namespace fs = std::filesystem;

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string which(const std::string& tool) {
  if (tool.find('/') != std::string::npos) return fs::exists(tool) ? tool : "";
  const char* path = std::getenv("PATH");
  if (!path) return "";
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    fs::path p = fs::path(dir) / tool;
    std::error_code ec;
    if (fs::exists(p, ec) && !fs::is_directory(p, ec)) return p.string();
  }
  return "";
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void run_tool(const std::string& command, const fs::path& log, const std::string& what) {
  int status = std::system((command + " > " + quote(log.string()) + " 2>&1").c_str());
  if (status != 0) {
    throw Error(ErrorKind::Toolchain, what + " failed (" + command + "):\n" + read_file(log));
  }
}

}  // namespace

Toolchain toolchain_from_env() {
  Toolchain t;
  t.cc = which(env_or("MLC_HOST_CC", "cc"));
  t.python = which(env_or("MLC_PYTHON", "python3"));
  t.runtime_dir = env_or("MLC_RUNTIME_DIR", "");
  return t;
}

BuiltUnit build_unit(const EmittedUnit& unit, const Toolchain& tools, const fs::path& dir) {
  BuiltUnit built;
  built.unit = unit;
  built.dir = dir;
  fs::create_directories(dir);
  if (unit.language == Language::C) {
    if (tools.cc.empty()) throw Error(ErrorKind::Toolchain, "no C compiler available");
    if (tools.runtime_dir.empty() || !fs::exists(fs::path(tools.runtime_dir) / "m_runtime.h")) {
      throw Error(ErrorKind::Toolchain, "m_runtime.h not found (set MLC_RUNTIME_DIR)");
    }
    write_file(dir / "unit.c", unit.source);
    write_file(dir / "driver.c", emit_c_driver(unit));
    write_file(dir / "manifest.jsonl", manifest_jsonl(unit));
    std::string cmd = quote(tools.cc);
    for (const auto& f : tools.cflags) cmd += " " + quote(f);
    cmd += " -I" + quote(tools.runtime_dir) + " " + quote((dir / "unit.c").string()) + " " +
           quote((dir / "driver.c").string()) + " -o " + quote((dir / "unit").string()) + " -lm";
    run_tool(cmd, dir / "build.log", "C compilation");
    built.command = quote((dir / "unit").string());
    return built;
  }
  if (tools.python.empty()) throw Error(ErrorKind::Toolchain, "no Python interpreter available");
  write_file(dir / "mlc_unit.py", unit.source);
  write_file(dir / "driver.py", emit_python_driver(unit, "mlc_unit"));
  write_file(dir / "manifest.jsonl", manifest_jsonl(unit));
  run_tool(quote(tools.python) + " -m py_compile " + quote((dir / "mlc_unit.py").string()), dir / "build.log",
           "Python compilation");
  built.command = quote(tools.python) + " " + quote((dir / "driver.py").string());
  return built;
}

std::vector<RunOutcome> run_built(const BuiltUnit& built, const std::vector<Store>& inputs) {
  std::string lines;
  for (const auto& s : inputs) lines += encode_driver_inputs(built.unit, s) + "\n";
  const fs::path in = built.dir / "inputs.txt";
  const fs::path out = built.dir / "outputs.txt";
  const fs::path err = built.dir / "stderr.txt";
  write_file(in, lines);
  const std::string cmd =
      built.command + " < " + quote(in.string()) + " > " + quote(out.string()) + " 2> " + quote(err.string());
  if (std::system(cmd.c_str()) != 0) {
    throw Error(ErrorKind::Toolchain, "running " + built.command + " failed:\n" + read_file(err));
  }
  std::istringstream results(read_file(out));
  std::vector<RunOutcome> outcomes;
  std::string line;
  while (std::getline(results, line)) outcomes.push_back(decode_driver_outputs(built.unit, line));
  if (outcomes.size() != inputs.size()) {
    throw Error(ErrorKind::Toolchain, built.command + " produced " + std::to_string(outcomes.size()) +
                                          " results for " + std::to_string(inputs.size()) + " inputs");
  }
  return outcomes;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Match: return "match";
    case Verdict::Mismatch: return "mismatch";
    case Verdict::Skipped: return "skipped";
  }
  return "?";
}

std::size_t DiffReport::mismatches() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const DiffEntry& e) { return e.verdict == Verdict::Mismatch; }));
}

std::string DiffReport::json() const {
  nlohmann::ordered_json j;
  j["tests"] = tests;
  j["mismatches"] = mismatches();
  j["interp_expectations_ok"] = interp_expectations_ok;
  j["failed_expectations"] = failed_expectations;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json x;
    x["test"] = e.test;
    x["backend"] = e.backend;
    x["verdict"] = std::string(to_string(e.verdict));
    x["variable"] = e.variable;
    x["expected"] = e.expected;
    x["actual"] = e.actual;
    x["replay"] = e.replay;
    j["entries"].push_back(std::move(x));
  }
  j["notes"] = notes;
  j["compared"] = compared;
  j["skipped"] = skipped;
  return j.dump(2);
}

namespace {

std::string describe_bits(const Value& v) { return v.is_undef() ? "undef" : bits_hex(v.get()); }

std::vector<Value> elements(const Store& s, const std::string& name, std::size_t n) {
  std::vector<Value> out(n);
  if (const auto* arr = s.array(name)) {
    for (std::size_t i = 0; i < n && i < arr->size(); ++i) out[i] = (*arr)[i];
  }
  return out;
}

// Walks both stores output by output; `fn(key, a, b)` returns true to stop.
template <class F>
void each_output(const Store& a, const Store& b, const std::vector<std::string>& outputs, F&& fn) {
  for (const auto& name : outputs) {
    const auto* x = a.array(name);
    const auto* y = b.array(name);
    if (!x && !y) {
      if (fn(name, a.get(name), b.get(name))) return;
      continue;
    }
    const std::size_t n = std::max(x ? x->size() : 0, y ? y->size() : 0);
    auto ex = elements(a, name, n);
    auto ey = elements(b, name, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (fn(name + "[" + std::to_string(i) + "]", ex[i], ey[i])) return;
    }
  }
}

std::string describe_side(const RunOutcome& r, const std::string& key, const std::vector<std::string>& outputs) {
  if (r.raised()) return "error " + r.error().code;
  if (key == "error") return "no error";
  std::string out = "undef";
  each_output(r.store(), r.store(), outputs, [&](const std::string& k, const Value& v, const Value&) {
    if (k != key) return false;
    out = describe_bits(v);
    return true;
  });
  return out;
}

}  // namespace

std::optional<std::string> first_difference(const Store& a, const Store& b, const std::vector<std::string>& outputs) {
  std::optional<std::string> found;
  each_output(a, b, outputs, [&](const std::string& key, const Value& x, const Value& y) {
    if (x == y) return false;
    found = key;
    return true;
  });
  return found;
}

std::optional<std::string> first_difference(const RunOutcome& a, const RunOutcome& b,
                                            const std::vector<std::string>& outputs) {
  if (a.raised() || b.raised()) {
    if (a.raised() && b.raised() && a.error() == b.error()) return std::nullopt;
    return std::string("error");
  }
  return first_difference(a.store(), b.store(), outputs);
}

std::vector<Store> test_stores(const CheckedProgram& program, const std::vector<TestCase>& tests) {
  std::vector<Store> out;
  out.reserve(tests.size());
  for (const auto& t : tests) out.push_back(store_from_test(t, program.ordered));
  return out;
}

DiffReport diff_run(const CheckedProgram& program, const AssumptionSpec& spec, const std::vector<TestCase>& tests,
                    const DiffOptions& options) {
  DiffReport report;
  report.tests = tests.size();
  const std::vector<Store> stores = test_stores(program, tests);
  const std::vector<std::string> outputs(spec.outputs.begin(), spec.outputs.end());

  std::vector<RunOutcome> interp(tests.size());
  std::vector<char> expectation_ok(tests.size(), 1);
  parallel_for(tests.size(), [&](std::size_t i) {
    interp[i] = run_mpp<double>(program, options.entry, stores[i]);
    expectation_ok[i] = check_outcome(tests[i], interp[i]).passed;
  });
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!expectation_ok[i]) {
      report.interp_expectations_ok = false;
      report.failed_expectations.push_back(tests[i].name);
    }
  }

  BirProgram bir = inline_program(program, spec, options.entry);
  if (options.optimize) bir = optimize(bir, options.fast_math);

  auto compare = [&](const std::string& backend, const std::vector<RunOutcome>& got) {
    for (std::size_t i = 0; i < tests.size(); ++i) {
      auto diff = first_difference(interp[i], got[i], outputs);
      if (!diff) continue;
      DiffEntry e;
      e.test = tests[i].name;
      e.backend = backend;
      e.verdict = Verdict::Mismatch;
      e.variable = *diff;
      e.expected = describe_side(interp[i], *diff, outputs);
      e.actual = describe_side(got[i], *diff, outputs);
      e.replay = options.replay_prefix + " " + tests[i].name;
      report.entries.push_back(std::move(e));
    }
  };

  if (options.bir) {
    BirRunner runner(bir);
    std::vector<RunOutcome> got(tests.size());
    parallel_for(tests.size(), [&](std::size_t i) { got[i] = runner.run(stores[i]); });
    compare("bir", got);
    report.compared.push_back("bir");
  }
  const StorageLayout layout = make_layout(bir.vars);
  auto backend = [&](bool wanted, Language lang, const std::string& name, bool available) {
    if (!wanted) return;
    if (!available) {
      report.notes.push_back(name + " backend skipped: toolchain unavailable");
      report.skipped.push_back(name);
      return;
    }
    EmittedUnit unit = lang == Language::C ? emit_c(bir, layout) : emit_python(bir, layout);
    BuiltUnit built = build_unit(unit, options.tools, options.work_dir / name);
    compare(name, run_built(built, stores));
    report.compared.push_back(name);
  };
  backend(options.c, Language::C, "c", !options.tools.cc.empty() && !options.tools.runtime_dir.empty());
  backend(options.python, Language::Python, "python", !options.tools.python.empty());
  return report;
}

}  // namespace mlc
