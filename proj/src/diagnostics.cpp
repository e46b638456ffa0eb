#include "mlc/diagnostics.hpp"

namespace mlc {

std::string SourceSpan::str() const {
  if (!file) return "<generated>";
  return *file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Lex: return "LexError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
    case ErrorKind::UnknownErrorCode: return "UnknownErrorCode";
    case ErrorKind::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorKind::InconsistentIndentation: return "InconsistentIndentation";
    case ErrorKind::Shadowing: return "Shadowing";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::ReservedName: return "ReservedName";
    case ErrorKind::CyclicDefinition: return "CyclicDefinition";
    case ErrorKind::DuplicateDefinition: return "DuplicateDefinition";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ArrayAsScalar: return "ArrayAsScalar";
    case ErrorKind::ScalarIndexed: return "ScalarIndexed";
    case ErrorKind::BadArity: return "BadArity";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::UninitializedLocal: return "UninitializedLocal";
    case ErrorKind::RecursiveCall: return "RecursiveCall";
    case ErrorKind::PassLimitExceeded: return "PassLimitExceeded";
    case ErrorKind::IdentifierOverflow: return "IdentifierOverflow";
    case ErrorKind::Starved: return "Starved";
    case ErrorKind::Toolchain: return "ToolchainError";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

namespace {

std::string render(ErrorKind kind, const std::string& message, const SourceSpan& span) {
  std::string out;
  if (span.known()) out += span.str() + ": ";
  out += std::string(to_string(kind)) + ": " + message;
  return out;
}

std::string join_cycle(const std::vector<std::string>& cycle) {
  std::string out;
  for (const auto& name : cycle) {
    if (!out.empty()) out += " -> ";
    out += name;
  }
  if (!cycle.empty()) out += " -> " + cycle.front();
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string message, SourceSpan span)
    : std::runtime_error(render(kind, message, span)),
      kind_(kind),
      message_(std::move(message)),
      span_(std::move(span)) {}

CyclicDefinition::CyclicDefinition(std::vector<std::string> cycle, SourceSpan span)
    : Error(ErrorKind::CyclicDefinition, "cyclic definition: " + join_cycle(cycle), std::move(span)),
      cycle_(std::move(cycle)) {}

}  // namespace mlc
