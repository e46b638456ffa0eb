#ifndef MLC_HARNESS_HPP
#define MLC_HARNESS_HPP

// Differential testing across evaluators, value coverage, test mutation and
// corpus minimization.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlc/backends.hpp"
#include "mlc/bir.hpp"

namespace mlc {

/// Runs `fn(i)` for every i in [0, n) on `threads` workers (0: hardware
/// concurrency). Exceptions are rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

// --- host toolchains ------------------------------------------------------

struct Toolchain {
  std::string cc;          // empty: C unavailable
  std::string python;      // empty: Python unavailable
  std::string runtime_dir; // directory holding m_runtime.h
  std::vector<std::string> cflags{"-std=c99", "-O2", "-ffp-contract=off", "-fno-fast-math"};
};

/// `MLC_HOST_CC`, `MLC_PYTHON` and `MLC_RUNTIME_DIR`, falling back to `cc` and
/// `python3` when they are on PATH.
Toolchain toolchain_from_env();

/// A unit written to disk and ready to run through its line driver.
struct BuiltUnit {
  EmittedUnit unit;
  std::filesystem::path dir;
  std::string command;  // shell command reading driver lines from stdin
};

/// Throws `Toolchain` when compilation fails or the tool is missing.
BuiltUnit build_unit(const EmittedUnit& unit, const Toolchain& tools, const std::filesystem::path& dir);
std::vector<RunOutcome> run_built(const BuiltUnit& built, const std::vector<Store>& inputs);

// --- differential runs ----------------------------------------------------

enum class Verdict { Match, Mismatch, Skipped };
std::string_view to_string(Verdict v);

struct DiffEntry {
  std::string test;
  std::string backend;  // "bir", "c" or "python"
  Verdict verdict = Verdict::Match;
  std::string variable;  // first differing output, or "error"
  std::string expected;  // interp side: bits, `undef` or `error CODE`
  std::string actual;
  std::string replay;  // command reproducing the interp side with a trace
};

struct DiffReport {
  std::size_t tests = 0;
  bool interp_expectations_ok = true;  // every test met its own expectations
  std::vector<std::string> failed_expectations;
  std::vector<DiffEntry> entries;  // mismatches and skips only
  std::vector<std::string> notes;
  std::vector<std::string> compared;  // backends checked against interp
  std::vector<std::string> skipped;   // requested but not available

  std::size_t mismatches() const;
  std::string json() const;
};

struct DiffOptions {
  bool bir = true;
  bool c = false;
  bool python = false;
  bool optimize = true;
  bool fast_math = false;
  std::string entry = "main";
  Toolchain tools;
  std::filesystem::path work_dir;     // scratch space for generated units
  std::string replay_prefix = "mlc";  // shown in replay commands
};

/// Checks interp against the requested evaluators on every test, comparing
/// the outputs of `spec` (absent and undef are the same) and error codes.
DiffReport diff_run(const CheckedProgram& program, const AssumptionSpec& spec,
                    const std::vector<TestCase>& tests, const DiffOptions& options);

/// First output (in `outputs` order, arrays elementwise) where the stores
/// differ by bit pattern; absent and undef compare equal.
std::optional<std::string> first_difference(const Store& a, const Store& b,
                                            const std::vector<std::string>& outputs);
/// Same for whole outcomes; `error` names a differing raise.
std::optional<std::string> first_difference(const RunOutcome& a, const RunOutcome& b,
                                            const std::vector<std::string>& outputs);

// --- coverage ------------------------------------------------------------

inline constexpr std::size_t kCoverageCap = 16;

/// One row per user-written assignment of the BIR program.
struct CoverageRow {
  std::size_t index = 0;  // position among user-written assignments
  std::string target;
  std::string span;
  std::size_t distinct = 0;  // capped at kCoverageCap
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  /// Buckets "0", "1", "2", "3+" (3 to 15) and "16+".
  std::map<std::string, std::size_t> buckets() const;
  std::string csv() const;
  std::string bucket_csv() const;
};

/// The values one test sends through each user-written assignment.
using CoverageSignature = std::set<std::pair<std::size_t, std::string>>;

class CoverageRecorder {
 public:
  explicit CoverageRecorder(const BirProgram& program);

  /// Signature of one run; raising runs contribute what executed before the
  /// raise.
  CoverageSignature signature(const Store& inputs, RunOutcome* outcome = nullptr) const;
  CoverageReport report(const std::vector<CoverageSignature>& signatures) const;

 private:
  BirRunner runner_;
  std::vector<std::size_t> ordinal_to_row_;  // BIR assignment ordinal -> row, or npos
  std::vector<CoverageRow> rows_;
};

/// Test stores for a checked program.
std::vector<Store> test_stores(const CheckedProgram& program, const std::vector<TestCase>& tests);

CoverageReport measure_coverage(const BirProgram& program, const std::vector<Store>& inputs);

// --- mutation and minimization -------------------------------------------

struct MutationPolicy {
  std::uint64_t seed = 0;
  bool drop = true;
  bool zero = true;
  bool scale = true;
  bool pool = true;
  std::vector<double> factors{0.5, 2.0, 3.0, 0.1, 10.0};
  std::size_t max_mutations = 3;  // inputs touched per candidate
  std::size_t attempts_per_test = 50;
};

/// Candidates built from `seeds` by mutating input entries. Only candidates
/// that run without raising are kept, with `expected` filled from interp.
/// Throws `Starved` if fewer than `n` valid tests turn up within
/// `n * attempts_per_test` candidates.
std::vector<TestCase> mutate_tests(const std::vector<TestCase>& seeds, const MutationPolicy& policy,
                                   std::size_t n, const CheckedProgram& program,
                                   std::string_view entry = "main");

/// Mutated input stores without the validity filter, for differential runs.
std::vector<Store> fuzz_inputs(const std::vector<TestCase>& seeds, const CheckedProgram& program,
                               std::size_t n, std::uint64_t seed, const AssumptionSpec* spec = nullptr);

/// Greedy set cover: keeps the test adding most uncovered signature elements
/// (earliest on ties) until the union of all signatures is reached.
std::vector<std::size_t> minimize_signatures(const std::vector<CoverageSignature>& signatures);
std::vector<TestCase> minimize_corpus(const std::vector<TestCase>& tests, const CheckedProgram& program,
                                      std::string_view entry = "main");

}  // namespace mlc

#endif  // MLC_HARNESS_HPP
