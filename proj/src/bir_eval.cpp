#include <map>

#include "mlc/bir.hpp"

namespace mlc {

namespace {

struct Node {
  Expr::Kind kind = Expr::Kind::Literal;
  BinOp binop = BinOp::Add;
  UnOp unop = UnOp::Neg;
  Builtin fn = Builtin::Round;
  std::uint32_t slot = 0;
  std::uint32_t len = 0;
  Value lit;
  std::int32_t a = -1;
  std::int32_t b = -1;
  std::int32_t c = -1;
};

struct Step {
  BirInstr::Kind kind = BirInstr::Kind::Assign;
  std::uint32_t slot = 0;
  std::int32_t expr = -1;
  std::size_t ordinal = 0;
  const BirInstr* source = nullptr;
  std::vector<Step> then_steps;
  std::vector<Step> else_steps;
};

struct Slot {
  std::uint32_t base = 0;
  std::uint32_t len = 0;
};

}  // namespace

struct BirRunner::Impl {
  BirProgram program;  // owned copy so that `source` pointers stay valid
  std::map<std::string, Slot, std::less<>> slots;
  std::uint32_t total = 0;
  std::vector<Node> nodes;
  std::vector<Step> steps;
  std::size_t ordinals = 0;

  explicit Impl(const BirProgram& p) : program(p) {
    for (const auto& v : program.vars) {
      Slot s{total, v.length};
      slots.emplace(v.name, s);
      total += v.length == 0 ? 1 : v.length;
    }
    steps = compile_block(program.instrs);
  }

  const Slot* slot_of(std::string_view name) const {
    auto it = slots.find(name);
    return it == slots.end() ? nullptr : &it->second;
  }

  std::int32_t add(Node n) {
    nodes.push_back(n);
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::int32_t compile(const Expr& e) {
    Node n;
    n.kind = e.kind;
    switch (e.kind) {
      case Expr::Kind::Literal: n.lit = e.literal; break;
      case Expr::Kind::Var:
        if (const Slot* s = slot_of(e.name); s && s->len == 0) {
          n.slot = s->base;
        } else {
          n.kind = Expr::Kind::Literal;  // never stored anywhere
        }
        break;
      case Expr::Kind::Index:
        if (const Slot* s = slot_of(e.name)) {
          n.slot = s->base;
          n.len = s->len;
        }
        n.a = compile(*e.args[0]);
        break;
      case Expr::Kind::Binary:
        n.binop = e.binop;
        n.a = compile(*e.args[0]);
        n.b = compile(*e.args[1]);
        break;
      case Expr::Kind::Unary:
        n.unop = e.unop;
        n.a = compile(*e.args[0]);
        break;
      case Expr::Kind::Cond:
        n.a = compile(*e.args[0]);
        n.b = compile(*e.args[1]);
        n.c = compile(*e.args[2]);
        break;
      case Expr::Kind::Call:
        n.fn = e.fn;
        n.a = compile(*e.args[0]);
        if (e.args.size() > 1) n.b = compile(*e.args[1]);
        break;
      case Expr::Kind::IndexVar:
      case Expr::Kind::Exists:
        n.kind = Expr::Kind::Literal;
        break;
    }
    return add(n);
  }

  std::vector<Step> compile_block(const std::vector<BirInstr>& instrs) {
    std::vector<Step> out;
    for (const auto& i : instrs) {
      Step s;
      s.kind = i.kind;
      s.source = &i;
      s.expr = compile(*i.expr);
      switch (i.kind) {
        case BirInstr::Kind::Assign: {
          const Slot* slot = slot_of(i.target);
          if (!slot || (slot->len == 0) != !i.element || (i.element && *i.element >= slot->len)) {
            throw Error(ErrorKind::UndeclaredVariable,
                        "BIR assignment to unknown variable or element " + i.target);
          }
          s.slot = slot->base + (i.element ? *i.element : 0);
          s.ordinal = ordinals++;
          break;
        }
        case BirInstr::Kind::Raise: break;
        case BirInstr::Kind::Cond:
          s.then_steps = compile_block(i.then_block);
          s.else_steps = compile_block(i.else_block);
          break;
      }
      out.push_back(std::move(s));
    }
    return out;
  }

  Value eval(std::int32_t idx, const std::vector<Value>& mem) const {
    const Node& n = nodes[static_cast<std::size_t>(idx)];
    switch (n.kind) {
      case Expr::Kind::Literal: return n.lit;
      case Expr::Kind::Var: return mem[n.slot];
      case Expr::Kind::Index:
        return index_values<double>(std::span<const Value>(mem.data() + n.slot, n.len),
                                    eval(n.a, mem));
      case Expr::Kind::Binary: return eval_binop(n.binop, eval(n.a, mem), eval(n.b, mem));
      case Expr::Kind::Unary: return eval_unop(n.unop, eval(n.a, mem));
      case Expr::Kind::Cond: {
        Value g = eval(n.a, mem);
        if (g.is_undef()) return g;
        return g.is_true() ? eval(n.b, mem) : eval(n.c, mem);
      }
      case Expr::Kind::Call: {
        if (n.b < 0) {
          Value a = eval(n.a, mem);
          return eval_builtin<double>(n.fn, std::span<const Value>(&a, 1));
        }
        Value args[2] = {eval(n.a, mem), eval(n.b, mem)};
        return eval_builtin<double>(n.fn, std::span<const Value>(args, 2));
      }
      default: return Value::undef();
    }
  }

  struct Raised {
    std::string code;
  };

  void exec(const std::vector<Step>& block, std::vector<Value>& mem,
            const BirAssignHook* hook) const {
    for (const auto& s : block) {
      switch (s.kind) {
        case BirInstr::Kind::Assign:
          mem[s.slot] = eval(s.expr, mem);
          if (hook) (*hook)(s.ordinal, *s.source, mem[s.slot]);
          break;
        case BirInstr::Kind::Raise:
          if (eval(s.expr, mem).is_true()) throw Raised{s.source->target};
          break;
        case BirInstr::Kind::Cond:
          exec(eval(s.expr, mem).is_true() ? s.then_steps : s.else_steps, mem, hook);
          break;
      }
    }
  }

  RunOutcome run(const Store& inputs, const BirAssignHook* hook) const {
    std::vector<Value> mem(total);
    for (const auto& name : program.inputs) {
      const Slot* s = slot_of(name);
      if (!s) continue;
      if (s->len == 0) {
        mem[s->base] = inputs.get(name);
      } else if (const auto* arr = inputs.array(name)) {
        for (std::uint32_t i = 0; i < s->len && i < arr->size(); ++i) mem[s->base + i] = (*arr)[i];
      }
    }
    try {
      exec(steps, mem, hook);
    } catch (const Raised& r) {
      return RunOutcome{RaisedError{r.code}};
    }
    Store out;
    for (const auto& v : program.vars) {
      if (is_generated_name(v.name) || scope_class(v.name) == ScopeClass::Local) continue;
      const Slot& s = slots.find(v.name)->second;
      if (s.len == 0) {
        out.set(v.name, mem[s.base]);
      } else {
        out.set_array(v.name, std::vector<Value>(mem.begin() + s.base, mem.begin() + s.base + s.len));
      }
    }
    return RunOutcome{std::move(out)};
  }
};

BirRunner::BirRunner(const BirProgram& program) : impl_(std::make_unique<Impl>(program)) {}
BirRunner::~BirRunner() = default;
BirRunner::BirRunner(BirRunner&&) noexcept = default;
BirRunner& BirRunner::operator=(BirRunner&&) noexcept = default;

RunOutcome BirRunner::run(const Store& inputs, const BirAssignHook* hook) const {
  return impl_->run(inputs, hook);
}

RunOutcome run_bir(const BirProgram& program, const Store& inputs, const BirAssignHook* hook) {
  return BirRunner(program).run(inputs, hook);
}

}  // namespace mlc
