#include <sstream>

#include "mlc/frontend.hpp"

namespace mlc {

namespace {

// Binding strength; higher binds tighter.
int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      switch (e.binop) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Add:
        case BinOp::Sub: return 4;
        case BinOp::Mul:
        case BinOp::Div: return 5;
        default: return 3;
      }
    case Expr::Kind::Unary: return 6;
    case Expr::Kind::Literal:
      // Negative literals only arise from folding; print them parenthesized.
      if (e.literal.is_defined() && std::signbit(e.literal.get())) return 0;
      return 7;
    default: return 7;
  }
}

void print(std::ostream& out, const Expr& e);

void print_child(std::ostream& out, const Expr& child, int min_prec) {
  if (precedence(child) < min_prec) {
    out << '(';
    print(out, child);
    out << ')';
  } else {
    print(out, child);
  }
}

void print(std::ostream& out, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: out << e.name; return;
    case Expr::Kind::IndexVar: out << 'X'; return;
    case Expr::Kind::Literal: out << format_value(e.literal); return;
    case Expr::Kind::Binary: {
      int p = precedence(e);
      print_child(out, *e.args[0], p);
      out << ' ' << to_string(e.binop) << ' ';
      print_child(out, *e.args[1], p + 1);
      return;
    }
    case Expr::Kind::Unary:
      out << to_string(e.unop);
      print_child(out, *e.args[0], precedence(e));
      return;
    case Expr::Kind::Cond:
      out << "if ";
      print(out, *e.args[0]);
      out << " then ";
      print(out, *e.args[1]);
      out << " else ";
      print(out, *e.args[2]);
      out << " endif";
      return;
    case Expr::Kind::Call: {
      out << to_string(e.fn) << '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out << ", ";
        print(out, *e.args[i]);
      }
      out << ')';
      return;
    }
    case Expr::Kind::Index:
      out << e.name << '[';
      print(out, *e.args[0]);
      out << ']';
      return;
    case Expr::Kind::Exists: out << "exists(" << e.name << ')'; return;
  }
}

void print_block(std::ostream& out, const MppBlock& block, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  for (const auto& c : block) {
    out << pad;
    switch (c.kind) {
      case MppCommand::Kind::If:
        out << "if " << print_expr(*c.expr) << ":\n";
        print_block(out, c.then_block, depth + 1);
        if (!c.else_block.empty()) {
          out << pad << "else:\n";
          print_block(out, c.else_block, depth + 1);
        }
        break;
      case MppCommand::Kind::Partition:
        out << "partition with " << c.name << ":\n";
        print_block(out, c.then_block, depth + 1);
        break;
      case MppCommand::Kind::Assign:
        out << c.name << " = " << print_expr(*c.expr) << '\n';
        break;
      case MppCommand::Kind::Call:
        for (std::size_t i = 0; i < c.targets.size(); ++i) {
          out << (i ? ", " : "") << c.targets[i];
        }
        out << (c.targets.empty() ? "<- " : " <- ") << c.name << "()\n";
        break;
      case MppCommand::Kind::Delete:
        out << "del " << c.name << '\n';
        break;
    }
  }
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream out;
  print(out, e);
  return out.str();
}

std::string print_m(const MProgram& program) {
  std::ostringstream out;
  for (const auto& v : program.vars) {
    out << v.name << " : " << to_string(v.category);
    if (v.kind) out << " kind " << *v.kind;
    if (v.is_array()) out << " array " << v.length;
    out << " : \"" << v.description << "\" ;\n";
  }
  for (const auto& e : program.errors) {
    out << e.code << " : error : \"" << e.description << "\" ;\n";
  }
  if (!program.commands.empty() && (!program.vars.empty() || !program.errors.empty())) {
    out << '\n';
  }
  for (const auto& c : program.commands) {
    switch (c.kind) {
      case Command::Kind::RaiseIf:
        out << "if " << print_expr(*c.expr) << " then error " << c.target << " ;\n";
        break;
      case Command::Kind::AssignScalar:
        out << c.target << " = " << print_expr(*c.expr) << " ;\n";
        break;
      case Command::Kind::AssignArray:
        out << c.target << "[X, " << c.length << "] = " << print_expr(*c.expr) << " ;\n";
        break;
    }
  }
  return out.str();
}

std::string print_mpp(const MppProgram& program) {
  std::ostringstream out;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    const auto& fn = program.functions[i];
    if (i) out << '\n';
    out << fn.name << "():\n";
    print_block(out, fn.body, 1);
  }
  return out.str();
}

}  // namespace mlc
