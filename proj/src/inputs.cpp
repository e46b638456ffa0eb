// Assumption files and test-case files.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mlc/frontend.hpp"

namespace mlc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class F>
void for_each_line(const SourceFile& src, F&& f) {
  std::istringstream in(src.text);
  std::string line;
  int number = 0;
  auto file = std::make_shared<const std::string>(src.path);
  while (std::getline(in, line)) {
    ++number;
    f(trim(line), SourceSpan{file, number, 1});
  }
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

AssumptionSpec all_assumptions(const MProgram& program) {
  AssumptionSpec spec;
  for (const auto& v : program.vars) {
    if (v.category == VarCategory::Input) spec.inputs.insert(v.name);
    if (v.category == VarCategory::Output) spec.outputs.insert(v.name);
  }
  return spec;
}

AssumptionSpec parse_assumptions(const SourceFile& source, const MProgram& program) {
  const AssumptionSpec all = all_assumptions(program);
  AssumptionSpec spec;
  bool saw_inputs = false;
  bool saw_outputs = false;
  std::set<std::string>* section = nullptr;
  const std::set<std::string>* wildcard = nullptr;
  for_each_line(source, [&](std::string_view line, const SourceSpan& span) {
    if (line.empty() || line.front() == '#') return;
    if (line == "[inputs]") {
      saw_inputs = true;
      section = &spec.inputs;
      wildcard = &all.inputs;
      return;
    }
    if (line == "[outputs]") {
      saw_outputs = true;
      section = &spec.outputs;
      wildcard = &all.outputs;
      return;
    }
    if (section == nullptr) {
      throw Error(ErrorKind::Parse, "expected [inputs] or [outputs] section header", span);
    }
    if (line == "*") {
      section->insert(wildcard->begin(), wildcard->end());
      return;
    }
    if (!is_identifier(line)) {
      throw Error(ErrorKind::Parse, "malformed variable name: " + std::string(line), span);
    }
    if (!program.find_var(line)) {
      throw Error(ErrorKind::UndeclaredVariable,
                  "assumption file names undeclared variable " + std::string(line), span);
    }
    section->insert(std::string(line));
  });
  if (!saw_inputs) spec.inputs = all.inputs;
  if (!saw_outputs) spec.outputs = all.outputs;
  return spec;
}

AssumptionSpec load_assumptions(const std::optional<std::filesystem::path>& path,
                                const MProgram& program) {
  if (!path) return all_assumptions(program);
  return parse_assumptions(read_source(*path), program);
}

TestCase parse_test(const SourceFile& source, const MProgram& program) {
  TestCase test;
  test.name = std::filesystem::path(source.path).stem().string();
  enum class Section { Inputs, Expect } section = Section::Inputs;
  for_each_line(source, [&](std::string_view line, const SourceSpan& span) {
    if (line.empty()) return;
    if (line == "#EXPECT") {
      section = Section::Expect;
      return;
    }
    if (line.starts_with("#EXPECT-ERROR")) {
      std::string_view code = trim(line.substr(std::string_view("#EXPECT-ERROR").size()));
      if (code.empty() || !program.find_error(code)) {
        throw Error(ErrorKind::UnknownErrorCode,
                    "expected error is not a declared error code: " + std::string(code), span);
      }
      if (test.expected_error) {
        throw Error(ErrorKind::Parse, "more than one #EXPECT-ERROR line", span);
      }
      test.expected_error = std::string(code);
      return;
    }
    if (line.front() == '#') return;

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::Parse, "expected NAME=value: " + std::string(line), span);
    }
    std::string_view lhs = trim(line.substr(0, eq));
    std::string_view rhs = trim(line.substr(eq + 1));
    std::optional<std::uint32_t> index;
    std::string_view name = lhs;
    if (auto open = lhs.find('['); open != std::string_view::npos) {
      if (lhs.back() != ']') throw Error(ErrorKind::Parse, "malformed array entry", span);
      name = lhs.substr(0, open);
      std::string_view idx = lhs.substr(open + 1, lhs.size() - open - 2);
      std::uint32_t i = 0;
      auto res = std::from_chars(idx.data(), idx.data() + idx.size(), i);
      if (res.ec != std::errc() || res.ptr != idx.data() + idx.size()) {
        throw Error(ErrorKind::Parse, "malformed array index", span);
      }
      index = i;
    }
    const VarDecl* decl = program.find_var(name);
    if (!decl) {
      throw Error(ErrorKind::UndeclaredVariable, "unknown variable " + std::string(name), span);
    }
    if (index.has_value() != decl->is_array() || (index && *index >= decl->length)) {
      throw Error(ErrorKind::ShapeMismatch,
                  "entry shape does not match the declaration of " + std::string(name), span);
    }
    if (section == Section::Inputs) {
      if (decl->category != VarCategory::Input) {
        throw Error(ErrorKind::Parse, std::string(name) + " is not a declared input", span);
      }
      auto value = parse_number(rhs);
      if (!value) throw Error(ErrorKind::Parse, "malformed number: " + std::string(rhs), span);
      test.entries.push_back(TestEntry{std::string(name), index, *value});
    } else {
      Value v;
      if (rhs != "undef") {
        auto value = parse_number(rhs);
        if (!value) throw Error(ErrorKind::Parse, "malformed number: " + std::string(rhs), span);
        v = Value(*value);
      }
      test.expected[std::string(lhs)] = v;
    }
  });
  if (test.expected.empty() == !test.expected_error.has_value()) {
    throw Error(ErrorKind::Parse,
                "a test needs exactly one of an #EXPECT section or an #EXPECT-ERROR line",
                SourceSpan{std::make_shared<const std::string>(source.path), 1, 1});
  }
  return test;
}

std::vector<TestCase> parse_tests(const std::filesystem::path& dir, const MProgram& program) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "not a directory: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mtest") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TestCase> tests;
  for (const auto& f : files) tests.push_back(parse_test(read_source(f), program));
  return tests;
}

std::string print_test(const TestCase& test) {
  std::ostringstream out;
  for (const auto& e : test.entries) {
    out << e.name;
    if (e.index) out << '[' << *e.index << ']';
    out << '=' << format_double(e.value) << '\n';
  }
  if (test.expected_error) {
    out << "#EXPECT-ERROR " << *test.expected_error << '\n';
  } else {
    out << "#EXPECT\n";
    for (const auto& [name, v] : test.expected) out << name << '=' << format_value(v) << '\n';
  }
  return out.str();
}

void write_tests(const std::filesystem::path& dir, std::span<const TestCase> tests) {
  std::filesystem::create_directories(dir);
  for (const auto& t : tests) {
    std::ofstream out(dir / (t.name + ".mtest"), std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write test " + t.name);
    out << print_test(t);
  }
}

}  // namespace mlc
