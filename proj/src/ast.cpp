#include "mlc/ast.hpp"

#include <cctype>

namespace mlc {

ScopeClass scope_class(std::string_view name) {
  if (!name.empty() && std::isupper(static_cast<unsigned char>(name.front()))) {
    return ScopeClass::MShared;
  }
  return ScopeClass::Local;
}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto head = static_cast<unsigned char>(name.front());
  if (!std::isalpha(head) && head != '_') return false;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && u != '_') return false;
  }
  return true;
}

bool is_reserved_name(std::string_view name) { return name.starts_with("__"); }

std::string_view to_string(VarCategory c) {
  switch (c) {
    case VarCategory::Input: return "input";
    case VarCategory::Intermediate: return "intermediate";
    case VarCategory::Output: return "output";
  }
  return "?";
}

namespace {

std::shared_ptr<Expr> node(Expr::Kind kind, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->span = std::move(span);
  return e;
}

}  // namespace

ExprPtr make_var(std::string name, SourceSpan span) {
  auto e = node(Expr::Kind::Var, std::move(span));
  e->name = std::move(name);
  return e;
}

ExprPtr make_index_var(SourceSpan span) { return node(Expr::Kind::IndexVar, std::move(span)); }

ExprPtr make_literal(Value v, SourceSpan span) {
  auto e = node(Expr::Kind::Literal, std::move(span));
  e->literal = v;
  return e;
}

ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
  auto e = node(Expr::Kind::Binary, std::move(span));
  e->binop = op;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr make_unary(UnOp op, ExprPtr arg, SourceSpan span) {
  auto e = node(Expr::Kind::Unary, std::move(span));
  e->unop = op;
  e->args = {std::move(arg)};
  return e;
}

ExprPtr make_cond(ExprPtr guard, ExprPtr then_e, ExprPtr else_e, SourceSpan span) {
  auto e = node(Expr::Kind::Cond, std::move(span));
  e->args = {std::move(guard), std::move(then_e), std::move(else_e)};
  return e;
}

ExprPtr make_call(Builtin fn, std::vector<ExprPtr> args, SourceSpan span) {
  auto e = node(Expr::Kind::Call, std::move(span));
  e->fn = fn;
  e->args = std::move(args);
  return e;
}

ExprPtr make_index(std::string array, ExprPtr index, SourceSpan span) {
  auto e = node(Expr::Kind::Index, std::move(span));
  e->name = std::move(array);
  e->args = {std::move(index)};
  return e;
}

ExprPtr make_exists(std::string kind, SourceSpan span) {
  auto e = node(Expr::Kind::Exists, std::move(span));
  e->name = std::move(kind);
  return e;
}

bool same_tree(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Exists:
      if (a.name != b.name) return false;
      break;
    case Expr::Kind::Index:
      if (a.name != b.name) return false;
      break;
    case Expr::Kind::Literal:
      if (!(a.literal == b.literal)) return false;
      break;
    case Expr::Kind::Binary:
      if (a.binop != b.binop) return false;
      break;
    case Expr::Kind::Unary:
      if (a.unop != b.unop) return false;
      break;
    case Expr::Kind::Call:
      if (a.fn != b.fn) return false;
      break;
    case Expr::Kind::IndexVar:
    case Expr::Kind::Cond:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_tree(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

void collect_reads(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Index) out.insert(e.name);
  for (const auto& arg : e.args) collect_reads(*arg, out);
}

bool mentions_index_var(const Expr& e) {
  if (e.kind == Expr::Kind::IndexVar) return true;
  for (const auto& arg : e.args) {
    if (mentions_index_var(*arg)) return true;
  }
  return false;
}

const VarDecl* MProgram::find_var(std::string_view name) const {
  for (const auto& v : vars) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const ErrorDecl* MProgram::find_error(std::string_view code) const {
  for (const auto& e : errors) {
    if (e.code == code) return &e;
  }
  return nullptr;
}

const MppFunction* MppProgram::find(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace mlc
