#ifndef MLC_DIAGNOSTICS_HPP
#define MLC_DIAGNOSTICS_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mlc {

struct SourceSpan {
  std::shared_ptr<const std::string> file;
  int line = 0;
  int column = 0;

  bool known() const { return file != nullptr; }
  std::string str() const;
};

enum class ErrorKind {
  Lex,
  Parse,
  DuplicateDeclaration,
  UnknownErrorCode,
  UndeclaredVariable,
  InconsistentIndentation,
  Shadowing,
  UnknownFunction,
  ReservedName,
  CyclicDefinition,
  DuplicateDefinition,
  ShapeMismatch,
  ArrayAsScalar,
  ScalarIndexed,
  BadArity,
  UnknownKind,
  UninitializedLocal,
  RecursiveCall,
  PassLimitExceeded,
  IdentifierOverflow,
  Starved,
  Toolchain,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every user-facing failure of the toolchain. Faults caused by user input
/// always arrive as an `Error`, never as a crash.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceSpan span = {});

  ErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
  SourceSpan span_;
};

class CyclicDefinition : public Error {
 public:
  CyclicDefinition(std::vector<std::string> cycle, SourceSpan span);
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

}  // namespace mlc

#endif  // MLC_DIAGNOSTICS_HPP
