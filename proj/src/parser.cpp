#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lexer.hpp"
#include "mlc/frontend.hpp"

namespace mlc {

using detail::LexMode;
using detail::Token;
using detail::TokenKind;

SourceFile read_source(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return SourceFile{path.string(), buf.str()};
}

std::vector<SourceFile> read_m_sources(std::span<const std::filesystem::path> paths) {
  std::vector<SourceFile> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".m") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back(read_source(f));
    } else {
      out.push_back(read_source(p));
    }
  }
  return out;
}

namespace {

enum class Dialect { M, Mpp };

const std::set<std::string, std::less<>> kMppKeywords = {
    "if", "else", "partition", "with", "del", "undef", "and", "or", "not", "exists", "then",
    "endif", "present", "cast", "call_m"};

class Parser {
 public:
  Parser(std::vector<Token> tokens, Dialect dialect)
      : tokens_(std::move(tokens)), dialect_(dialect) {}

  void allow_index_var() { in_array_body_ = true; }

  // ---- shared token helpers -------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  bool at_end() const { return peek().kind == TokenKind::End; }

  Token take() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw Error(ErrorKind::Parse, message + describe(at), at.span);
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::End: return " (found end of file)";
      case TokenKind::Newline: return " (found end of line)";
      case TokenKind::Indent: return " (found indentation)";
      case TokenKind::Dedent: return " (found end of block)";
      case TokenKind::String: return " (found string)";
      default: return " (found '" + t.text + "')";
    }
  }

  Token expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
    return take();
  }

  Token expect_word(std::string_view w) {
    if (!peek().is_word(w)) fail(peek(), "expected '" + std::string(w) + "'");
    return take();
  }

  Token expect_ident(const char* what) {
    if (peek().kind != TokenKind::Ident) fail(peek(), std::string("expected ") + what);
    return take();
  }

  Token expect_kind(TokenKind kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
    return take();
  }

  bool accept_punct(std::string_view p) {
    if (!peek().is_punct(p)) return false;
    take();
    return true;
  }

  // ---- expressions ----------------------------------------------------

  ExprPtr expression() { return parse_or(); }

  bool at_or() const {
    return peek().is_punct("||") || (dialect_ == Dialect::Mpp && peek().is_word("or"));
  }
  bool at_and() const {
    return peek().is_punct("&&") || (dialect_ == Dialect::Mpp && peek().is_word("and"));
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at_or()) {
      SourceSpan span = take().span;
      lhs = make_binary(BinOp::Or, lhs, parse_and(), span);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_cmp();
    while (at_and()) {
      SourceSpan span = take().span;
      lhs = make_binary(BinOp::And, lhs, parse_cmp(), span);
    }
    return lhs;
  }

  std::optional<BinOp> cmp_op() const {
    const Token& t = peek();
    if (t.kind != TokenKind::Punct) return std::nullopt;
    if (t.text == "<=") return BinOp::Le;
    if (t.text == "<") return BinOp::Lt;
    if (t.text == ">") return BinOp::Gt;
    if (t.text == ">=") return BinOp::Ge;
    if (t.text == "==") return BinOp::Eq;
    if (t.text == "!=") return BinOp::Ne;
    return std::nullopt;
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_add();
    while (auto op = cmp_op()) {
      SourceSpan span = take().span;
      lhs = make_binary(*op, lhs, parse_add(), span);
    }
    return lhs;
  }

  ExprPtr parse_add() {
    ExprPtr lhs = parse_mul();
    while (peek().is_punct("+") || peek().is_punct("-")) {
      Token t = take();
      BinOp op = t.text == "+" ? BinOp::Add : BinOp::Sub;
      lhs = make_binary(op, lhs, parse_mul(), t.span);
    }
    return lhs;
  }

  ExprPtr parse_mul() {
    ExprPtr lhs = parse_unary();
    while (peek().is_punct("*") || peek().is_punct("/")) {
      Token t = take();
      BinOp op = t.text == "*" ? BinOp::Mul : BinOp::Div;
      lhs = make_binary(op, lhs, parse_unary(), t.span);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (peek().is_punct("-")) {
      SourceSpan span = take().span;
      return make_unary(UnOp::Neg, parse_unary(), span);
    }
    if (peek().is_punct("~") || (dialect_ == Dialect::Mpp && peek().is_word("not"))) {
      SourceSpan span = take().span;
      return make_unary(UnOp::Not, parse_unary(), span);
    }
    return parse_primary();
  }

  std::vector<ExprPtr> call_args() {
    expect_punct("(");
    std::vector<ExprPtr> args;
    if (!peek().is_punct(")")) {
      args.push_back(expression());
      while (accept_punct(",")) args.push_back(expression());
    }
    expect_punct(")");
    return args;
  }

  void check_m_variable(const Token& t) const {
    if (t.text == "X") return;
    check_not_reserved(t);
    if (scope_class(t.text) != ScopeClass::MShared) {
      throw Error(ErrorKind::Parse,
                  "M variable names must start with an uppercase letter: " + t.text, t.span);
    }
    check_not_reserved(t);
  }

  static void check_not_reserved(const Token& t) {
    if (is_reserved_name(t.text)) {
      throw Error(ErrorKind::ReservedName, "names starting with '__' are reserved: " + t.text,
                  t.span);
    }
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (t.kind == TokenKind::Number) {
      Token n = take();
      return make_literal(Value(n.number), n.span);
    }
    if (t.is_punct("(")) {
      take();
      ExprPtr inner = expression();
      expect_punct(")");
      return inner;
    }
    if (t.kind != TokenKind::Ident) fail(t, "expected an expression");

    if (t.text == "undef") return make_literal(Value::undef(), take().span);
    if (t.text == "if") {
      if (dialect_ == Dialect::Mpp) fail(t, "conditional expressions are not part of M++");
      SourceSpan span = take().span;
      ExprPtr guard = expression();
      expect_word("then");
      ExprPtr then_e = expression();
      expect_word("else");
      ExprPtr else_e = expression();
      expect_word("endif");
      return make_cond(guard, then_e, else_e, span);
    }
    if (dialect_ == Dialect::M && t.text == "X") {
      Token x = take();
      if (!in_array_body_) {
        throw Error(ErrorKind::Parse, "index variable X used outside an array assignment",
                    x.span);
      }
      return make_index_var(x.span);
    }
    if (dialect_ == Dialect::Mpp && t.text == "exists") {
      SourceSpan span = take().span;
      expect_punct("(");
      Token kind = expect_ident("a variable kind");
      expect_punct(")");
      return make_exists(kind.text, span);
    }

    Token name = take();
    if (peek().is_punct("(")) {
      auto fn = builtin_from_name(name.text);
      bool allowed = fn.has_value() &&
                     (dialect_ == Dialect::M ? *fn != Builtin::Cast
                                             : (*fn == Builtin::Cast || *fn == Builtin::Present));
      if (!allowed) {
        throw Error(ErrorKind::UnknownFunction, "unknown builtin function: " + name.text,
                    name.span);
      }
      return make_call(*fn, call_args(), name.span);
    }
    if (peek().is_punct("[")) {
      if (dialect_ == Dialect::Mpp) fail(peek(), "array indexing is not part of M++");
      check_m_variable(name);
      if (name.text == "X") fail(name, "X cannot be indexed");
      take();
      ExprPtr index = expression();
      expect_punct("]");
      return make_index(name.text, index, name.span);
    }
    if (dialect_ == Dialect::M) {
      check_m_variable(name);
    } else {
      check_mpp_variable(name);
    }
    return make_var(name.text, name.span);
  }

  void check_mpp_variable(const Token& t) const {
    if (kMppKeywords.count(t.text) || builtin_from_name(t.text) || t.text == "X") {
      fail(t, "reserved word used as a variable");
    }
    check_not_reserved(t);
  }

  // ---- M files --------------------------------------------------------

  void parse_m_file(MProgram& out) {
    while (!at_end()) {
      const Token& t = peek();
      if (t.is_word("if")) {
        out.commands.push_back(raise_if());
        continue;
      }
      if (t.kind != TokenKind::Ident) fail(t, "expected a declaration or a rule");
      const Token& next = peek(1);
      if (next.is_punct(":")) {
        declaration(out);
      } else if (next.is_punct("=")) {
        out.commands.push_back(scalar_assign());
      } else if (next.is_punct("[")) {
        out.commands.push_back(array_assign());
      } else {
        fail(next, "expected ':', '=' or '[' after '" + t.text + "'");
      }
    }
  }

  Command raise_if() {
    SourceSpan span = take().span;
    ExprPtr guard = expression();
    expect_word("then");
    expect_word("error");
    Token code = expect_ident("an error code");
    expect_punct(";");
    return Command{Command::Kind::RaiseIf, code.text, 0, guard, span};
  }

  Command scalar_assign() {
    Token target = take();
    check_m_variable(target);
    if (target.text == "X") fail(target, "X cannot be assigned");
    expect_punct("=");
    ExprPtr rhs = expression();
    expect_punct(";");
    return Command{Command::Kind::AssignScalar, target.text, 0, rhs, target.span};
  }

  std::uint32_t positive_length() {
    Token n = expect_kind(TokenKind::Number, "an array length");
    if (n.number < 1 || n.number != static_cast<double>(static_cast<std::uint32_t>(n.number)) ||
        n.number > 1'000'000) {
      throw Error(ErrorKind::Parse, "array length must be a positive integer", n.span);
    }
    return static_cast<std::uint32_t>(n.number);
  }

  Command array_assign() {
    Token target = take();
    check_m_variable(target);
    if (target.text == "X") fail(target, "X cannot be assigned");
    expect_punct("[");
    expect_word("X");
    expect_punct(",");
    std::uint32_t length = positive_length();
    expect_punct("]");
    expect_punct("=");
    in_array_body_ = true;
    ExprPtr body = expression();
    in_array_body_ = false;
    expect_punct(";");
    return Command{Command::Kind::AssignArray, target.text, length, body, target.span};
  }

  void declaration(MProgram& out) {
    Token name = take();
    take();  // ':'
    if (peek().is_word("error")) {
      take();
      expect_punct(":");
      Token desc = expect_kind(TokenKind::String, "a description string");
      expect_punct(";");
      out.errors.push_back(ErrorDecl{name.text, desc.text, name.span});
      return;
    }
    check_m_variable(name);
    if (name.text == "X") fail(name, "X is reserved for array indices");
    VarDecl decl;
    decl.name = name.text;
    decl.span = name.span;
    Token cat = expect_ident("a variable category");
    if (cat.text == "input") {
      decl.category = VarCategory::Input;
    } else if (cat.text == "intermediate") {
      decl.category = VarCategory::Intermediate;
    } else if (cat.text == "output") {
      decl.category = VarCategory::Output;
    } else {
      fail(cat, "expected 'input', 'intermediate', 'output' or 'error'");
    }
    if (peek().is_word("kind")) {
      take();
      decl.kind = expect_ident("a kind name").text;
    }
    if (peek().is_word("array")) {
      take();
      decl.length = positive_length();
    }
    expect_punct(":");
    decl.description = expect_kind(TokenKind::String, "a description string").text;
    expect_punct(";");
    out.vars.push_back(std::move(decl));
  }

  // ---- M++ files ------------------------------------------------------

  MppProgram parse_mpp_file() {
    MppProgram program;
    while (peek().kind == TokenKind::Newline) take();
    while (!at_end()) {
      program.functions.push_back(function());
      while (peek().kind == TokenKind::Newline) take();
    }
    return program;
  }

  MppFunction function() {
    Token name = expect_ident("a function name");
    check_not_reserved(name);
    expect_punct("(");
    if (!peek().is_punct(")")) {
      fail(peek(), "function parameters are not supported; calls take no arguments");
    }
    expect_punct(")");
    expect_punct(":");
    MppFunction fn;
    fn.name = name.text;
    fn.span = name.span;
    fn.body = block();
    return fn;
  }

  MppBlock block() {
    expect_kind(TokenKind::Newline, "end of line before an indented block");
    if (peek().kind != TokenKind::Indent) fail(peek(), "expected a non-empty indented block");
    take();
    MppBlock body;
    while (peek().kind != TokenKind::Dedent && !at_end()) body.push_back(command());
    expect_kind(TokenKind::Dedent, "end of block");
    return body;
  }

  MppCommand command() {
    const Token& t = peek();
    MppCommand cmd;
    cmd.span = t.span;
    if (t.is_word("if")) {
      take();
      cmd.kind = MppCommand::Kind::If;
      cmd.expr = expression();
      expect_punct(":");
      cmd.then_block = block();
      if (peek().is_word("else")) {
        take();
        expect_punct(":");
        cmd.else_block = block();
      }
      return cmd;
    }
    if (t.is_word("partition")) {
      take();
      expect_word("with");
      cmd.kind = MppCommand::Kind::Partition;
      cmd.name = expect_ident("a variable kind").text;
      expect_punct(":");
      cmd.then_block = block();
      return cmd;
    }
    if (t.is_word("del")) {
      take();
      Token var = expect_ident("a variable");
      check_mpp_variable(var);
      cmd.kind = MppCommand::Kind::Delete;
      cmd.name = var.text;
      expect_kind(TokenKind::Newline, "end of line");
      return cmd;
    }
    if (t.kind == TokenKind::Ident && peek(1).is_punct("=")) {
      Token var = take();
      check_mpp_variable(var);
      take();
      cmd.kind = MppCommand::Kind::Assign;
      cmd.name = var.text;
      cmd.expr = expression();
      expect_kind(TokenKind::Newline, "end of line");
      return cmd;
    }
    // [targets] <- f()
    cmd.kind = MppCommand::Kind::Call;
    if (!peek().is_punct("<-")) {
      do {
        Token var = expect_ident("a call target");
        if (scope_class(var.text) != ScopeClass::MShared) {
          throw Error(ErrorKind::Parse,
                      "targets of '<-' must be M variables (uppercase): " + var.text, var.span);
        }
        check_mpp_variable(var);
        cmd.targets.push_back(var.text);
      } while (accept_punct(","));
    }
    expect_punct("<-");
    cmd.name = expect_ident("a function name").text;
    expect_punct("(");
    expect_punct(")");
    expect_kind(TokenKind::Newline, "end of line");
    return cmd;
  }

 private:
  std::vector<Token> tokens_;
  Dialect dialect_;
  std::size_t pos_ = 0;
  bool in_array_body_ = false;
};

std::shared_ptr<const std::string> file_name(const SourceFile& src) {
  return std::make_shared<const std::string>(src.path);
}

void validate_m(const MProgram& program) {
  std::map<std::string, const SourceSpan*> seen;
  auto note = [&](const std::string& name, const SourceSpan& span) {
    auto [it, inserted] = seen.emplace(name, &span);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateDeclaration,
                  "duplicate declaration of " + name + " (first declared at " +
                      it->second->str() + ")",
                  span);
    }
  };
  for (const auto& v : program.vars) note(v.name, v.span);
  for (const auto& e : program.errors) note(e.code, e.span);
  std::set<std::string, std::less<>> codes;
  for (const auto& e : program.errors) codes.insert(e.code);
  for (const auto& c : program.commands) {
    if (c.kind == Command::Kind::RaiseIf && !codes.count(c.target)) {
      throw Error(ErrorKind::UnknownErrorCode, "undeclared error code " + c.target, c.span);
    }
  }
}

void collect_calls(const MppBlock& block, std::vector<const MppCommand*>& out) {
  for (const auto& c : block) {
    if (c.kind == MppCommand::Kind::Call) out.push_back(&c);
    collect_calls(c.then_block, out);
    collect_calls(c.else_block, out);
  }
}

void collect_local_writes(const MppBlock& block, std::vector<const MppCommand*>& out) {
  for (const auto& c : block) {
    if ((c.kind == MppCommand::Kind::Assign || c.kind == MppCommand::Kind::Delete) &&
        scope_class(c.name) == ScopeClass::Local) {
      out.push_back(&c);
    }
    collect_local_writes(c.then_block, out);
    collect_local_writes(c.else_block, out);
  }
}

void validate_mpp(const MppProgram& program) {
  std::map<std::string, const MppFunction*> names;
  for (const auto& fn : program.functions) {
    if (fn.name == kCallM) {
      throw Error(ErrorKind::ReservedName, "call_m is reserved and cannot be defined", fn.span);
    }
    auto [it, inserted] = names.emplace(fn.name, &fn);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateDeclaration, "duplicate function " + fn.name, fn.span);
    }
  }
  for (const auto& fn : program.functions) {
    std::vector<const MppCommand*> calls;
    collect_calls(fn.body, calls);
    for (const auto* call : calls) {
      if (call->name != kCallM && !names.count(call->name)) {
        throw Error(ErrorKind::UnknownFunction, "call to undeclared function " + call->name,
                    call->span);
      }
    }
    std::vector<const MppCommand*> writes;
    collect_local_writes(fn.body, writes);
    for (const auto* w : writes) {
      if (names.count(w->name) || w->name == kCallM) {
        throw Error(ErrorKind::Shadowing, "local variable " + w->name + " shadows a function",
                    w->span);
      }
    }
  }
}

}  // namespace

MProgram parse_m(std::span<const SourceFile> sources) {
  MProgram program;
  for (const auto& src : sources) {
    Parser parser(detail::tokenize(src.text, file_name(src), LexMode::Free), Dialect::M);
    parser.parse_m_file(program);
  }
  validate_m(program);
  return program;
}

ExprPtr parse_m_expr(std::string_view text) {
  auto file = std::make_shared<const std::string>("<expr>");
  Parser parser(detail::tokenize(text, file, LexMode::Free), Dialect::M);
  parser.allow_index_var();
  ExprPtr e = parser.expression();
  if (!parser.at_end()) parser.fail(parser.peek(), "trailing input after expression");
  return e;
}

MppProgram parse_mpp(const SourceFile& source) {
  Parser parser(detail::tokenize(source.text, file_name(source), LexMode::Layout),
                Dialect::Mpp);
  MppProgram program = parser.parse_mpp_file();
  validate_mpp(program);
  return program;
}

}  // namespace mlc
