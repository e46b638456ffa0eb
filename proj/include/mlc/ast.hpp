#ifndef MLC_AST_HPP
#define MLC_AST_HPP

// Syntax trees for M rule files and M++ driver files. Trees are immutable once
// built and shared through `ExprPtr`.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mlc/diagnostics.hpp"
#include "mlc/value.hpp"

namespace mlc {

/// Names starting with an uppercase letter live in the shared M scope; all
/// others are M++ locals.
enum class ScopeClass { MShared, Local };

ScopeClass scope_class(std::string_view name);
bool is_identifier(std::string_view name);
/// Double-underscore names belong to the compiler.
bool is_reserved_name(std::string_view name);

enum class VarCategory { Input, Intermediate, Output };
std::string_view to_string(VarCategory c);

struct VarDecl {
  std::string name;
  VarCategory category = VarCategory::Input;
  std::optional<std::string> kind;
  std::string description;
  std::uint32_t length = 0;  // 0 for scalars
  SourceSpan span;

  bool is_array() const { return length > 0; }
};

struct ErrorDecl {
  std::string code;
  std::string description;
  SourceSpan span;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Var,       // name
    IndexVar,  // the bound index `X` of an array assignment
    Literal,   // literal
    Binary,    // binop, args[0], args[1]
    Unary,     // unop, args[0]
    Cond,      // if args[0] then args[1] else args[2]
    Call,      // fn(args...)
    Index,     // name[args[0]]
    Exists,    // exists(name)  (M++ only; name is a kind)
  };

  Kind kind = Kind::Literal;
  SourceSpan span;
  std::string name;
  Value literal;
  BinOp binop = BinOp::Add;
  UnOp unop = UnOp::Neg;
  Builtin fn = Builtin::Round;
  std::vector<ExprPtr> args;
};

ExprPtr make_var(std::string name, SourceSpan span = {});
ExprPtr make_index_var(SourceSpan span = {});
ExprPtr make_literal(Value v, SourceSpan span = {});
ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
ExprPtr make_unary(UnOp op, ExprPtr arg, SourceSpan span = {});
ExprPtr make_cond(ExprPtr guard, ExprPtr then_e, ExprPtr else_e, SourceSpan span = {});
ExprPtr make_call(Builtin fn, std::vector<ExprPtr> args, SourceSpan span = {});
ExprPtr make_index(std::string array, ExprPtr index, SourceSpan span = {});
ExprPtr make_exists(std::string kind, SourceSpan span = {});

/// Structural equality, ignoring spans.
bool same_tree(const Expr& a, const Expr& b);

/// Variables read by `e` (array names included, `X` excluded).
void collect_reads(const Expr& e, std::set<std::string>& out);
bool mentions_index_var(const Expr& e);

struct Command {
  enum class Kind { RaiseIf, AssignScalar, AssignArray };

  Kind kind = Kind::AssignScalar;
  std::string target;        // variable, or error code for RaiseIf
  std::uint32_t length = 0;  // AssignArray only
  ExprPtr expr;              // right-hand side or guard
  SourceSpan span;
};

struct MProgram {
  std::vector<VarDecl> vars;
  std::vector<ErrorDecl> errors;
  std::vector<Command> commands;  // source order across all files

  const VarDecl* find_var(std::string_view name) const;
  const ErrorDecl* find_error(std::string_view code) const;
};

struct MppCommand;
using MppBlock = std::vector<MppCommand>;

struct MppCommand {
  enum class Kind {
    If,         // expr, then_block, else_block
    Partition,  // name = kind, then_block
    Assign,     // name = expr
    Call,       // targets <- name()
    Delete,     // del name
  };

  Kind kind = Kind::Assign;
  SourceSpan span;
  std::string name;
  ExprPtr expr;
  std::vector<std::string> targets;
  MppBlock then_block;
  MppBlock else_block;
};

inline constexpr std::string_view kCallM = "call_m";

struct MppFunction {
  std::string name;
  MppBlock body;
  SourceSpan span;
};

struct MppProgram {
  std::vector<MppFunction> functions;

  const MppFunction* find(std::string_view name) const;
};

}  // namespace mlc

#endif  // MLC_AST_HPP
