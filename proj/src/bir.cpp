#include "mlc/bir.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace mlc {

const BirVar* BirProgram::find_var(std::string_view name) const {
  auto it = std::lower_bound(vars.begin(), vars.end(), name,
                             [](const BirVar& v, std::string_view n) { return v.name < n; });
  return it != vars.end() && it->name == name ? &*it : nullptr;
}

const StorageLayout::Entry* StorageLayout::find(std::string_view name) const {
  auto it = entries.find(name);
  return it == entries.end() ? nullptr : &it->second;
}

std::optional<std::uint32_t> StorageLayout::slot(std::string_view name,
                                                 std::optional<std::uint32_t> element) const {
  const Entry* e = find(name);
  if (!e) return std::nullopt;
  if (e->length == 0) {
    if (element) return std::nullopt;
    return e->slot;
  }
  if (!element || *element >= e->length) return std::nullopt;
  return e->slot + *element;
}

StorageLayout make_layout(std::span<const BirVar> vars) {
  StorageLayout layout;
  for (const auto& v : vars) {
    layout.entries.emplace(v.name, StorageLayout::Entry{layout.total_slots, v.length});
    layout.total_slots += v.length == 0 ? 1 : v.length;
  }
  return layout;
}

BirInstr bir_assign(std::string target, ExprPtr rhs, BirInstr::Origin origin,
                    std::optional<std::uint32_t> element, SourceSpan span) {
  BirInstr i;
  i.kind = BirInstr::Kind::Assign;
  i.origin = origin;
  i.target = std::move(target);
  i.element = element;
  i.expr = std::move(rhs);
  i.span = std::move(span);
  return i;
}

BirInstr bir_raise(std::string code, ExprPtr guard, SourceSpan span) {
  BirInstr i;
  i.kind = BirInstr::Kind::Raise;
  i.target = std::move(code);
  i.expr = std::move(guard);
  i.span = std::move(span);
  return i;
}

BirInstr bir_cond(ExprPtr guard, std::vector<BirInstr> then_block, std::vector<BirInstr> else_block,
                  SourceSpan span) {
  BirInstr i;
  i.kind = BirInstr::Kind::Cond;
  i.origin = BirInstr::Origin::Driver;
  i.expr = std::move(guard);
  i.then_block = std::move(then_block);
  i.else_block = std::move(else_block);
  i.span = std::move(span);
  return i;
}

namespace {

using Origin = BirInstr::Origin;

ExprPtr undef_literal() {
  static const ExprPtr e = make_literal(Value::undef());
  return e;
}

ExprPtr number(double d) { return make_literal(Value(d)); }

class Inliner {
 public:
  explicit Inliner(const CheckedProgram& p) : p_(p) {
    for (const auto& d : p.source.vars) lengths_[d.name] = d.length;
    for (const auto& [name, n] : p.env.lengths) lengths_[name] = n;
    for (const auto& c : p.ordered.commands) {
      if (c.kind == Command::Kind::AssignScalar) lengths_.emplace(c.target, 0);
      if (c.kind == Command::Kind::AssignArray) lengths_[c.target] = c.length;
    }
  }

  BirProgram run(const AssumptionSpec& spec, std::string_view entry) {
    std::vector<BirInstr> body;
    if (!p_.mpp) {
      lower_rules(body);
    } else {
      const MppFunction* fn = p_.mpp->find(entry);
      if (!fn) {
        throw Error(ErrorKind::UnknownFunction,
                    "entry function " + std::string(entry) + " is not defined in the driver");
      }
      active_.insert(fn->name);
      Frame frame{next_frame_++, {}};
      lower_block(fn->body, frame, body);
    }
    for (const auto& n : spec.inputs) lengths_.emplace(n, 0);
    for (const auto& n : spec.outputs) lengths_.emplace(n, 0);

    BirProgram out;
    out.inputs.assign(spec.inputs.begin(), spec.inputs.end());
    out.outputs.assign(spec.outputs.begin(), spec.outputs.end());
    for (const auto& [name, n] : lengths_) {
      out.vars.push_back(BirVar{name, n});
      if (spec.inputs.count(name)) continue;
      if (n == 0) {
        out.instrs.push_back(bir_assign(name, undef_literal(), Origin::Seed));
      } else {
        for (std::uint32_t i = 0; i < n; ++i) {
          out.instrs.push_back(bir_assign(name, undef_literal(), Origin::Seed, i));
        }
      }
    }
    for (auto& i : body) out.instrs.push_back(std::move(i));
    return out;
  }

 private:
  struct Frame {
    int id;
    std::map<std::string, std::string> locals;
  };

  std::uint32_t length_of(const std::string& name) const {
    auto it = lengths_.find(name);
    return it == lengths_.end() ? 0 : it->second;
  }

  bool is_array(const std::string& name) const { return length_of(name) > 0; }

  std::string local_name(Frame& f, const std::string& name) {
    auto it = f.locals.find(name);
    if (it != f.locals.end()) return it->second;
    std::string renamed = "__l_" + std::to_string(f.id) + "_" + name;
    f.locals.emplace(name, renamed);
    lengths_.emplace(renamed, 0);
    return renamed;
  }

  std::string resolve(Frame* f, const std::string& name) {
    if (f && scope_class(name) == ScopeClass::Local) return local_name(*f, name);
    lengths_.emplace(name, 0);
    return name;
  }

  ExprPtr lower(const ExprPtr& ep, Frame* f, std::optional<std::uint32_t> x) {
    const Expr& e = *ep;
    switch (e.kind) {
      case Expr::Kind::Literal: return ep;
      case Expr::Kind::IndexVar:
        return x ? number(static_cast<double>(*x)) : undef_literal();
      case Expr::Kind::Var: return make_var(resolve(f, e.name), e.span);
      case Expr::Kind::Binary:
        return make_binary(e.binop, lower(e.args[0], f, x), lower(e.args[1], f, x), e.span);
      case Expr::Kind::Unary: return make_unary(e.unop, lower(e.args[0], f, x), e.span);
      case Expr::Kind::Cond:
        return make_cond(lower(e.args[0], f, x), lower(e.args[1], f, x), lower(e.args[2], f, x),
                         e.span);
      case Expr::Kind::Call: {
        if (e.fn == Builtin::Cast) {
          ExprPtr a = lower(e.args[0], f, x);
          return make_cond(make_call(Builtin::Present, {a}, e.span), a, number(0.0), e.span);
        }
        std::vector<ExprPtr> args;
        for (const auto& a : e.args) args.push_back(lower(a, f, x));
        return make_call(e.fn, std::move(args), e.span);
      }
      case Expr::Kind::Index: {
        ExprPtr idx = lower(e.args[0], f, x);
        if (is_array(e.name)) return make_index(e.name, idx, e.span);
        // Nothing ever stores this array: negative indices read 0, the rest undef.
        return make_cond(make_binary(BinOp::Lt, idx, number(0.0)), number(0.0), undef_literal(),
                         e.span);
      }
      case Expr::Kind::Exists: return lower_exists(e);
    }
    return undef_literal();
  }

  ExprPtr lower_exists(const Expr& e) {
    ExprPtr acc;
    auto add = [&](ExprPtr term) {
      acc = acc ? make_binary(BinOp::Or, acc, term, e.span) : term;
    };
    auto it = p_.kinds.find(e.name);
    if (it != p_.kinds.end()) {
      for (const auto& name : it->second) {
        std::uint32_t n = length_of(name);
        lengths_.emplace(name, 0);
        if (n == 0) {
          add(make_call(Builtin::Present, {make_var(name, e.span)}, e.span));
        } else {
          for (std::uint32_t i = 0; i < n; ++i) {
            add(make_call(Builtin::Present,
                          {make_index(name, number(static_cast<double>(i)), e.span)}, e.span));
          }
        }
      }
    }
    return acc ? acc : number(0.0);
  }

  void lower_rules(std::vector<BirInstr>& out) {
    for (const auto& c : p_.ordered.commands) {
      switch (c.kind) {
        case Command::Kind::RaiseIf:
          out.push_back(bir_raise(c.target, lower(c.expr, nullptr, std::nullopt), c.span));
          break;
        case Command::Kind::AssignScalar:
          out.push_back(
              bir_assign(c.target, lower(c.expr, nullptr, std::nullopt), Origin::Rule, {}, c.span));
          break;
        case Command::Kind::AssignArray:
          for (std::uint32_t i = 0; i < c.length; ++i) {
            out.push_back(bir_assign(c.target, lower(c.expr, nullptr, i), Origin::Rule, i, c.span));
          }
          break;
      }
    }
  }

  // M-scope variables a call to `callee` may leave changed in the caller's
  // copy. Locals never escape, and nested calls only leak their targets.
  const std::set<std::string>& writes_of(const std::string& callee) {
    auto it = writes_.find(callee);
    if (it != writes_.end()) return it->second;
    std::set<std::string> w;
    if (callee == kCallM) {
      for (const auto& c : p_.ordered.commands) {
        if (c.kind != Command::Kind::RaiseIf) w.insert(c.target);
      }
    } else {
      collect_writes(p_.mpp->find(callee)->body, w);
    }
    return writes_.emplace(callee, std::move(w)).first->second;
  }

  void collect_writes(const MppBlock& b, std::set<std::string>& w) {
    for (const auto& c : b) {
      switch (c.kind) {
        case MppCommand::Kind::Assign:
        case MppCommand::Kind::Delete:
          if (scope_class(c.name) == ScopeClass::MShared) w.insert(c.name);
          break;
        case MppCommand::Kind::Call: w.insert(c.targets.begin(), c.targets.end()); break;
        case MppCommand::Kind::If:
          collect_writes(c.then_block, w);
          collect_writes(c.else_block, w);
          break;
        case MppCommand::Kind::Partition: collect_writes(c.then_block, w); break;
      }
    }
  }

  void copy(const std::string& to, const std::string& from, std::uint32_t n, const SourceSpan& span,
            std::vector<BirInstr>& out) {
    if (n == 0) {
      out.push_back(bir_assign(to, make_var(from), Origin::Frame, {}, span));
      return;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      out.push_back(bir_assign(to, make_index(from, number(static_cast<double>(i))), Origin::Frame,
                               i, span));
    }
  }

  void set_undef(const std::string& name, Origin origin, const SourceSpan& span,
                 std::vector<BirInstr>& out) {
    std::uint32_t n = length_of(name);
    lengths_.emplace(name, 0);
    if (n == 0) {
      out.push_back(bir_assign(name, undef_literal(), origin, {}, span));
      return;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      out.push_back(bir_assign(name, undef_literal(), origin, i, span));
    }
  }

  // Saves `names` into fresh temporaries and returns the restore sequence.
  std::vector<BirInstr> save(const std::set<std::string>& names, const SourceSpan& span,
                             std::vector<BirInstr>& out) {
    std::vector<BirInstr> restore;
    if (names.empty()) return restore;
    const std::string prefix = "__t_" + std::to_string(next_frame_++) + "_";
    for (const auto& name : names) {
      std::uint32_t n = length_of(name);
      lengths_.emplace(name, 0);
      const std::string temp = prefix + name;
      lengths_[temp] = n;
      copy(temp, name, n, span, out);
      copy(name, temp, n, span, restore);
    }
    return restore;
  }

  void lower_block(const MppBlock& b, Frame& f, std::vector<BirInstr>& out) {
    for (const auto& c : b) lower_command(c, f, out);
  }

  void lower_command(const MppCommand& c, Frame& f, std::vector<BirInstr>& out) {
    switch (c.kind) {
      case MppCommand::Kind::If: {
        ExprPtr guard = lower(c.expr, &f, std::nullopt);
        std::vector<BirInstr> then_block;
        std::vector<BirInstr> else_block;
        lower_block(c.then_block, f, then_block);
        lower_block(c.else_block, f, else_block);
        out.push_back(bir_cond(guard, std::move(then_block), std::move(else_block), c.span));
        break;
      }
      case MppCommand::Kind::Partition: {
        static const std::set<std::string> kNone;
        auto it = p_.kinds.find(c.name);
        const auto& members = it == p_.kinds.end() ? kNone : it->second;
        std::vector<BirInstr> restore = save(members, c.span, out);
        for (const auto& name : members) set_undef(name, Origin::Frame, c.span, out);
        lower_block(c.then_block, f, out);
        for (auto& i : restore) out.push_back(std::move(i));
        break;
      }
      case MppCommand::Kind::Assign:
        out.push_back(bir_assign(resolve(&f, c.name), lower(c.expr, &f, std::nullopt),
                                 Origin::Driver, {}, c.span));
        break;
      case MppCommand::Kind::Delete:
        if (scope_class(c.name) == ScopeClass::Local) {
          out.push_back(bir_assign(local_name(f, c.name), undef_literal(), Origin::Driver, {}, c.span));
        } else {
          set_undef(c.name, Origin::Driver, c.span, out);
        }
        break;
      case MppCommand::Kind::Call: {
        std::set<std::string> kept = writes_of(c.name);
        for (const auto& t : c.targets) kept.erase(t);
        std::vector<BirInstr> restore = save(kept, c.span, out);
        if (c.name == kCallM) {
          lower_rules(out);
        } else {
          if (!active_.insert(c.name).second) {
            throw Error(ErrorKind::RecursiveCall, "recursive call to " + c.name, c.span);
          }
          Frame callee{next_frame_++, {}};
          lower_block(p_.mpp->find(c.name)->body, callee, out);
          active_.erase(c.name);
        }
        for (auto& i : restore) out.push_back(std::move(i));
        break;
      }
    }
  }

  const CheckedProgram& p_;
  std::map<std::string, std::uint32_t> lengths_;
  std::map<std::string, std::set<std::string>> writes_;
  std::set<std::string> active_;
  int next_frame_ = 0;
};

void print_block(std::ostream& out, std::span<const BirInstr> instrs, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  for (const auto& i : instrs) {
    switch (i.kind) {
      case BirInstr::Kind::Assign:
        out << pad << i.target;
        if (i.element) out << '[' << *i.element << ']';
        out << " = " << print_expr(*i.expr) << '\n';
        break;
      case BirInstr::Kind::Raise:
        out << pad << "raise " << i.target << " if " << print_expr(*i.expr) << '\n';
        break;
      case BirInstr::Kind::Cond:
        out << pad << "if " << print_expr(*i.expr) << ":\n";
        print_block(out, i.then_block, depth + 1);
        if (!i.else_block.empty()) {
          out << pad << "else:\n";
          print_block(out, i.else_block, depth + 1);
        }
        out << pad << "end\n";
        break;
    }
  }
}

}  // namespace

BirProgram inline_program(const CheckedProgram& program, const AssumptionSpec& spec,
                          std::string_view entry) {
  return Inliner(program).run(spec, entry);
}

std::size_t count_instructions(std::span<const BirInstr> instrs) {
  std::size_t n = 0;
  for (const auto& i : instrs) {
    n += 1;
    if (i.kind == BirInstr::Kind::Cond) {
      n += count_instructions(i.then_block) + count_instructions(i.else_block);
    }
  }
  return n;
}

std::size_t count_instructions(const BirProgram& program) {
  return count_instructions(program.instrs);
}

std::string print_bir(const BirProgram& program) {
  std::ostringstream out;
  out << "# inputs:";
  for (const auto& n : program.inputs) out << ' ' << n;
  out << "\n# outputs:";
  for (const auto& n : program.outputs) out << ' ' << n;
  out << "\n# vars: " << program.vars.size() << "\n# instructions: "
      << count_instructions(program) << '\n';
  print_block(out, program.instrs, 0);
  return out.str();
}

}  // namespace mlc
