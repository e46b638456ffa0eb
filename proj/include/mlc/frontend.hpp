#ifndef MLC_FRONTEND_HPP
#define MLC_FRONTEND_HPP

// Parsers and pretty-printers for the four input formats:
//   .m      rule files (declarations + rules)
//   .mpp    driver files
//   .mast   assumption files
//   .mtest  test cases
// The concrete grammar is documented in docs/grammar.md.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mlc/ast.hpp"

namespace mlc {

struct SourceFile {
  std::string path;
  std::string text;
};

SourceFile read_source(const std::filesystem::path& path);
/// Expands directories to their `*.m` files, sorted by name.
std::vector<SourceFile> read_m_sources(std::span<const std::filesystem::path> paths);

/// Rules may arrive in any order; ordering is left to `order_rules`.
MProgram parse_m(std::span<const SourceFile> sources);
MppProgram parse_mpp(const SourceFile& source);
ExprPtr parse_m_expr(std::string_view text);

std::string print_expr(const Expr& e);
std::string print_m(const MProgram& program);
std::string print_mpp(const MppProgram& program);

struct AssumptionSpec {
  std::set<std::string> inputs;
  std::set<std::string> outputs;
};

/// The assumptions with every declared input as input and every declared output as
/// output; what an empty or missing assumption file means.
AssumptionSpec all_assumptions(const MProgram& program);
AssumptionSpec parse_assumptions(const SourceFile& source, const MProgram& program);
/// `std::nullopt` path selects `all_assumptions`.
AssumptionSpec load_assumptions(const std::optional<std::filesystem::path>& path,
                                const MProgram& program);

/// One input entry of a test: a scalar, or one element of an array input.
struct TestEntry {
  std::string name;
  std::optional<std::uint32_t> index;
  double value = 0.0;

  friend bool operator==(const TestEntry&, const TestEntry&) = default;
};

struct TestCase {
  std::string name;
  std::vector<TestEntry> entries;
  std::map<std::string, Value> expected;
  std::optional<std::string> expected_error;
};

TestCase parse_test(const SourceFile& source, const MProgram& program);
/// One test per `*.mtest` file, ordered by file name.
std::vector<TestCase> parse_tests(const std::filesystem::path& dir, const MProgram& program);
std::string print_test(const TestCase& test);
void write_tests(const std::filesystem::path& dir, std::span<const TestCase> tests);

}  // namespace mlc

#endif  // MLC_FRONTEND_HPP
