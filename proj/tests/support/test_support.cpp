#include "test_support.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <sys/wait.h>
#include <unistd.h>

namespace mlc::testing {

std::filesystem::path source_dir() { return MLC_SOURCE_DIR; }

std::filesystem::path corpus_dir() { return source_dir() / "corpus"; }

SourceFile text_file(std::string text, std::string name) {
  return SourceFile{std::move(name), std::move(text)};
}

MProgram parse_m_text(const std::string& text) {
  SourceFile f = text_file(text);
  return parse_m(std::span<const SourceFile>(&f, 1));
}

MppProgram parse_mpp_text(const std::string& text) {
  return parse_mpp(text_file(text, "test.mpp"));
}

const CheckedProgram& corpus_program() {
  static const CheckedProgram program = [] {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
      if (e.path().extension() == ".m") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    auto sources = read_m_sources(files);
    return check(parse_m(sources), parse_mpp(read_source(corpus_dir() / "driver.mpp")));
  }();
  return program;
}

std::vector<TestCase> corpus_tests() { return parse_tests(corpus_dir() / "tests", corpus_program().source); }

AssumptionSpec corpus_assumptions(const std::string& name) {
  return load_assumptions(corpus_dir() / (name + ".mast"), corpus_program().source);
}

std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("mlc-" + tag + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_command(const std::string& command, std::string* output) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return -1;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    if (output) output->append(buf.data(), n);
  }
  int status = ::pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Toolchain host_toolchain() {
  Toolchain t;
  auto found = [](std::string tool) { return tool.find("NOTFOUND") == std::string::npos ? tool : ""; };
  t.cc = found(MLC_HOST_CC);
  t.python = found(MLC_PYTHON);
  t.runtime_dir = (source_dir() / "tests" / "support").string();
  t.cflags = {"-std=c99", "-pedantic", "-Wall", "-Wextra", "-Werror", "-O2", "-ffp-contract=off", "-fno-fast-math"};
  return t;
}

}  // namespace mlc::testing
