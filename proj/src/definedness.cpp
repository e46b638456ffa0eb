#include <algorithm>
#include <bit>

#include "mlc/optimizer.hpp"

namespace mlc {

Definedness join(Definedness a, Definedness b) {
  if (a == b || b == Definedness::Bottom) return a;
  if (a == Definedness::Bottom) return b;
  return Definedness::Top;
}

std::string_view to_string(Definedness d) {
  switch (d) {
    case Definedness::Bottom: return "bottom";
    case Definedness::Undef: return "undef";
    case Definedness::Float: return "float";
    case Definedness::Top: return "top";
  }
  return "?";
}

namespace {

using D = Definedness;

ConstFact join_fact(const ConstFact& a, const ConstFact& b) {
  if (b.kind == ConstFact::Kind::Unknown) return a;
  if (a.kind == ConstFact::Kind::Unknown) return b;
  if (a == b) return a;
  return ConstFact{ConstFact::Kind::Varying, -1, -1, {}};
}

void join_into(AbstractState& into, const AbstractState& from) {
  for (std::size_t i = 0; i < into.def.size(); ++i) {
    into.def[i] = join(into.def[i], from.def[i]);
    into.consts[i] = join_fact(into.consts[i], from.consts[i]);
  }
}

bool is_literal(const ExprPtr& e) { return e->kind == Expr::Kind::Literal; }

bool is_literal_value(const ExprPtr& e, double d) {
  return is_literal(e) && e->literal.is_defined() &&
         std::bit_cast<std::uint64_t>(e->literal.get()) == std::bit_cast<std::uint64_t>(d);
}

bool is_undef_literal(const ExprPtr& e) { return is_literal(e) && e->literal.is_undef(); }

ExprPtr literal(Value v) { return make_literal(std::move(v)); }

// Static reading of `T[r]` for a known index.
struct StaticIndex {
  enum class Kind { Undef, Zero, Element } kind;
  std::uint32_t element = 0;
};

StaticIndex resolve_index(const Value& index, std::uint32_t length) {
  if (index.is_undef()) return {StaticIndex::Kind::Undef};
  const double r = index.get();
  if (r < 0.0) return {StaticIndex::Kind::Zero};
  const double n = static_cast<double>(length);
  if (!(r < n)) return {StaticIndex::Kind::Undef};
  const double t = truncate_binary64(r);
  if (!(t < n)) return {StaticIndex::Kind::Undef};
  return {StaticIndex::Kind::Element, static_cast<std::uint32_t>(t)};
}

D def_of_literal(const Value& v) { return v.is_undef() ? D::Undef : D::Float; }

// Plus and minus treat a single undef operand as 0.
D cast_def(D a, D b) {
  if (a == D::Bottom || b == D::Bottom) return D::Bottom;
  if (a == D::Float || b == D::Float) return D::Float;
  if (a == D::Undef && b == D::Undef) return D::Undef;
  return D::Top;
}

// Everything else is undef as soon as one operand is.
D absorb_def(D a, D b) {
  if (a == D::Bottom || b == D::Bottom) return D::Bottom;
  if (a == D::Undef || b == D::Undef) return D::Undef;
  if (a == D::Float && b == D::Float) return D::Float;
  return D::Top;
}

D cell_def(const AbstractState& s, std::optional<std::uint32_t> slot) {
  return slot ? s.def[*slot] : D::Undef;
}

}  // namespace

Definedness abstract_eval(const Expr& e, const AbstractState& s, const StorageLayout& layout) {
  switch (e.kind) {
    case Expr::Kind::Literal: return def_of_literal(e.literal);
    case Expr::Kind::Var: return cell_def(s, layout.slot(e.name));
    case Expr::Kind::Index: {
      const D idx = abstract_eval(*e.args[0], s, layout);
      if (idx == D::Bottom || idx == D::Undef) return idx;
      const auto* entry = layout.find(e.name);
      const std::uint32_t n = entry ? entry->length : 0;
      if (e.args[0]->kind == Expr::Kind::Literal) {
        StaticIndex si = resolve_index(e.args[0]->literal, n);
        if (si.kind == StaticIndex::Kind::Undef) return D::Undef;
        if (si.kind == StaticIndex::Kind::Zero) return D::Float;
        return s.def[entry->slot + si.element];
      }
      // Unknown index: 0 for negatives, undef past the end, or any element.
      D out = join(D::Float, D::Undef);
      if (idx == D::Top) out = D::Top;
      for (std::uint32_t i = 0; i < n; ++i) out = join(out, s.def[entry->slot + i]);
      return out;
    }
    case Expr::Kind::Binary: {
      const D a = abstract_eval(*e.args[0], s, layout);
      const D b = abstract_eval(*e.args[1], s, layout);
      if (e.binop == BinOp::Add || e.binop == BinOp::Sub) return cast_def(a, b);
      return absorb_def(a, b);
    }
    case Expr::Kind::Unary: return abstract_eval(*e.args[0], s, layout);
    case Expr::Kind::Cond: {
      const D g = abstract_eval(*e.args[0], s, layout);
      if (g == D::Bottom || g == D::Undef) return g;
      if (e.args[0]->kind == Expr::Kind::Literal) {
        return abstract_eval(*e.args[e.args[0]->literal.is_true() ? 1 : 2], s, layout);
      }
      D out = join(abstract_eval(*e.args[1], s, layout), abstract_eval(*e.args[2], s, layout));
      return g == D::Top ? join(out, D::Undef) : out;
    }
    case Expr::Kind::Call: {
      const D a = abstract_eval(*e.args[0], s, layout);
      switch (e.fn) {
        case Builtin::Present: return a == D::Bottom ? D::Bottom : D::Float;
        case Builtin::Cast: return a == D::Bottom ? D::Bottom : D::Float;
        case Builtin::Min:
        case Builtin::Max: return cast_def(a, abstract_eval(*e.args[1], s, layout));
        default: return a;  // round, truncate, abs, pos, pos_or_null, null
      }
    }
    case Expr::Kind::IndexVar:
    case Expr::Kind::Exists: return D::Top;
  }
  return D::Top;
}

namespace {

class Simplifier {
 public:
  Simplifier(const AbstractState& s, const StorageLayout& layout, bool fast_math)
      : s_(s), layout_(layout), fast_(fast_math) {}

  ExprPtr run(const ExprPtr& e) {
    ExprPtr out = step(e);
    if (!is_literal(out) && abstract_eval(*out, s_, layout_) == D::Undef) {
      return literal(Value::undef());
    }
    return out;
  }

 private:
  ExprPtr cell(std::optional<std::uint32_t> slot, const ExprPtr& keep) {
    if (!slot) return literal(Value::undef());
    const ConstFact& f = s_.consts[*slot];
    if (f.kind == ConstFact::Kind::Const) return literal(f.value);
    return keep;
  }

  ExprPtr step(const ExprPtr& ep) {
    const Expr& e = *ep;
    switch (e.kind) {
      case Expr::Kind::Literal: return ep;
      case Expr::Kind::Var: return cell(layout_.slot(e.name), ep);
      case Expr::Kind::Index: {
        ExprPtr idx = run(e.args[0]);
        const auto* entry = layout_.find(e.name);
        const std::uint32_t n = entry ? entry->length : 0;
        if (is_literal(idx)) {
          StaticIndex si = resolve_index(idx->literal, n);
          if (si.kind == StaticIndex::Kind::Undef) return literal(Value::undef());
          if (si.kind == StaticIndex::Kind::Zero) return literal(Value(0.0));
          ExprPtr keep = make_index(e.name, literal(Value(static_cast<double>(si.element))), e.span);
          return cell(entry->slot + si.element, keep);
        }
        return idx == e.args[0] ? ep : make_index(e.name, idx, e.span);
      }
      case Expr::Kind::Unary: {
        ExprPtr a = run(e.args[0]);
        if (is_literal(a)) return literal(eval_unop(e.unop, a->literal));
        return a == e.args[0] ? ep : make_unary(e.unop, a, e.span);
      }
      case Expr::Kind::Binary: return binary(ep, run(e.args[0]), run(e.args[1]));
      case Expr::Kind::Cond: {
        ExprPtr g = run(e.args[0]);
        if (is_literal(g)) {
          if (g->literal.is_undef()) return g;
          return run(e.args[g->literal.is_true() ? 1 : 2]);
        }
        ExprPtr t = run(e.args[1]);
        ExprPtr f = run(e.args[2]);
        if (g == e.args[0] && t == e.args[1] && f == e.args[2]) return ep;
        return make_cond(g, t, f, e.span);
      }
      case Expr::Kind::Call: return call(ep);
      case Expr::Kind::IndexVar:
      case Expr::Kind::Exists: return ep;
    }
    return ep;
  }

  D def(const ExprPtr& e) const { return abstract_eval(*e, s_, layout_); }

  ExprPtr binary(const ExprPtr& ep, ExprPtr a, ExprPtr b) {
    const Expr& e = *ep;
    if (is_literal(a) && is_literal(b)) return literal(eval_binop(e.binop, a->literal, b->literal));
    if (e.binop == BinOp::Mul) {
      if (is_literal_value(b, 1.0)) return a;
      if (is_literal_value(a, 1.0)) return b;
    }
    if (fast_) {
      if (e.binop == BinOp::Add) {
        if (is_undef_literal(b)) return a;
        if (is_undef_literal(a)) return b;
        if (is_literal_value(b, 0.0) && def(a) == D::Float) return a;
        if (is_literal_value(a, 0.0) && def(b) == D::Float) return b;
      }
      if (e.binop == BinOp::Sub && is_undef_literal(b)) return a;
      if (e.binop == BinOp::Mul) {
        if (is_literal_value(b, 0.0) && def(a) == D::Float) return literal(Value(0.0));
        if (is_literal_value(a, 0.0) && def(b) == D::Float) return literal(Value(0.0));
      }
    }
    if (a == e.args[0] && b == e.args[1]) return ep;
    return make_binary(e.binop, a, b, e.span);
  }

  static bool is_call(const ExprPtr& e, Builtin fn) {
    return e->kind == Expr::Kind::Call && e->fn == fn;
  }

  ExprPtr call(const ExprPtr& ep) {
    const Expr& e = *ep;
    std::vector<ExprPtr> args;
    bool same = true;
    for (const auto& a : e.args) {
      args.push_back(run(a));
      same = same && args.back() == a;
    }
    if (std::all_of(args.begin(), args.end(), is_literal)) {
      std::vector<Value> vs;
      for (const auto& a : args) vs.push_back(a->literal);
      return literal(eval_builtin<double>(e.fn, std::span<const Value>(vs)));
    }
    if (e.fn == Builtin::Present && def(args[0]) == D::Float) return literal(Value(1.0));
    if (e.fn == Builtin::Max && is_literal_value(args[0], 0.0)) {
      const ExprPtr& inner = args[1];
      // max(0, min(0, x)) and max(0, -max(0, x)) are 0 whatever x is.
      if (is_call(inner, Builtin::Min) && is_literal_value(inner->args[0], 0.0)) {
        return literal(Value(0.0));
      }
      if (inner->kind == Expr::Kind::Unary && inner->unop == UnOp::Neg &&
          is_call(inner->args[0], Builtin::Max) && is_literal_value(inner->args[0]->args[0], 0.0)) {
        return literal(Value(0.0));
      }
    }
    if (same) return ep;
    return make_call(e.fn, std::move(args), e.span);
  }

  const AbstractState& s_;
  const StorageLayout& layout_;
  bool fast_;
};

AbstractState initial_state(const OirGraph& g, const StorageLayout& layout) {
  AbstractState s;
  s.def.assign(layout.total_slots, D::Bottom);
  s.consts.assign(layout.total_slots, ConstFact{});
  for (const auto& name : g.inputs) {
    const auto* e = layout.find(name);
    if (!e) continue;
    for (std::uint32_t i = 0; i < std::max<std::uint32_t>(e->length, 1); ++i) {
      s.def[e->slot + i] = D::Top;
      s.consts[e->slot + i] = ConstFact{ConstFact::Kind::Varying, -1, -1, {}};
    }
  }
  return s;
}

AbstractState bottom_state(const StorageLayout& layout) {
  AbstractState s;
  s.def.assign(layout.total_slots, D::Bottom);
  s.consts.assign(layout.total_slots, ConstFact{});
  return s;
}

// Runs one block forward; `assigned` receives per-instruction results.
void transfer(const OirBlock& blk, int b, AbstractState& s, const StorageLayout& layout,
              std::vector<Definedness>* assigned) {
  for (std::size_t pos = 0; pos < blk.instrs.size(); ++pos) {
    const BirInstr& i = blk.instrs[pos];
    if (i.kind != BirInstr::Kind::Assign) {
      if (assigned) assigned->push_back(D::Bottom);
      continue;
    }
    ExprPtr e = Simplifier(s, layout, false).run(i.expr);
    const D d = abstract_eval(*e, s, layout);
    if (assigned) assigned->push_back(d);
    auto slot = layout.slot(i.target, i.element);
    if (!slot) continue;
    s.def[*slot] = d;
    s.consts[*slot] = is_literal(e) ? ConstFact{ConstFact::Kind::Const, b, static_cast<int>(pos), e->literal}
                                    : ConstFact{ConstFact::Kind::Varying, -1, -1, {}};
  }
}

}  // namespace

ExprPtr simplify_expr(const ExprPtr& e, const AbstractState& s, const StorageLayout& layout,
                      bool fast_math) {
  return Simplifier(s, layout, fast_math).run(e);
}

DefinednessFacts analyze_definedness(const OirGraph& graph) {
  DefinednessFacts facts;
  facts.layout = make_layout(graph.vars);
  const StorageLayout& layout = facts.layout;
  facts.entry.assign(graph.blocks.size(), bottom_state(layout));
  facts.assigned.assign(graph.blocks.size(), {});
  if (graph.blocks.empty()) return facts;
  facts.entry[static_cast<std::size_t>(graph.entry)] = initial_state(graph, layout);
  const std::vector<int> rpo = graph.reverse_post_order();
  // The graph is acyclic, so one sweep in reverse post-order reaches the
  // fixpoint; the loop re-checks that.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<AbstractState> incoming(graph.blocks.size(), bottom_state(layout));
    incoming[static_cast<std::size_t>(graph.entry)] = initial_state(graph, layout);
    for (int b : rpo) {
      const auto ub = static_cast<std::size_t>(b);
      AbstractState s = incoming[ub];
      if (!(s == facts.entry[ub])) {
        facts.entry[ub] = s;
        changed = true;
      }
      std::vector<Definedness> assigned;
      transfer(graph.blocks[ub], b, s, layout, &assigned);
      facts.assigned[ub] = std::move(assigned);
      for (int succ : graph.blocks[ub].successors()) join_into(incoming[static_cast<std::size_t>(succ)], s);
    }
  }
  return facts;
}

AbstractState DefinednessFacts::before(const OirGraph& g, int block, std::size_t pos) const {
  AbstractState s = entry[static_cast<std::size_t>(block)];
  OirBlock prefix;
  const OirBlock& blk = g.blocks[static_cast<std::size_t>(block)];
  prefix.instrs.assign(blk.instrs.begin(), blk.instrs.begin() + static_cast<std::ptrdiff_t>(pos));
  transfer(prefix, block, s, layout, nullptr);
  return s;
}

Definedness DefinednessFacts::at(const OirGraph& g, int block, std::size_t pos, std::string_view var,
                                 std::optional<std::uint32_t> element) const {
  auto slot = layout.slot(var, element);
  if (!slot) return D::Undef;
  return before(g, block, pos).def[*slot];
}

OirGraph partial_eval(const OirGraph& graph, const DefinednessFacts& facts, bool fast_math) {
  OirGraph out = graph;
  const StorageLayout& layout = facts.layout;
  const std::vector<int> idom = dominators(graph);
  for (std::size_t b = 0; b < out.blocks.size(); ++b) {
    if (idom[b] < 0) continue;
    OirBlock& blk = out.blocks[b];
    AbstractState s = facts.entry[b];
    // Only assignments dominating this block may be substituted.
    for (auto& f : s.consts) {
      if (f.kind == ConstFact::Kind::Const && !dominates(idom, f.block, static_cast<int>(b))) {
        f = ConstFact{ConstFact::Kind::Varying, -1, -1, {}};
      }
    }
    std::vector<BirInstr> kept;
    kept.reserve(blk.instrs.size());
    for (auto& i : blk.instrs) {
      ExprPtr e = simplify_expr(i.expr, s, layout, fast_math);
      if (i.kind == BirInstr::Kind::Raise) {
        if (is_literal(e) && !e->literal.is_true()) continue;
        i.expr = e;
        kept.push_back(std::move(i));
        continue;
      }
      auto slot = layout.slot(i.target, i.element);
      if (slot) {
        s.def[*slot] = abstract_eval(*e, s, layout);
        s.consts[*slot] = is_literal(e)
                              ? ConstFact{ConstFact::Kind::Const, static_cast<int>(b),
                                          static_cast<int>(kept.size()), e->literal}
                              : ConstFact{ConstFact::Kind::Varying, -1, -1, {}};
      }
      i.expr = e;
      kept.push_back(std::move(i));
    }
    blk.instrs = std::move(kept);
    if (blk.exit == OirBlock::Exit::Branch) {
      ExprPtr g = simplify_expr(blk.guard, s, layout, fast_math);
      if (is_literal(g)) {
        blk.exit = OirBlock::Exit::Jump;
        blk.next = g->literal.is_true() ? blk.then_target : blk.else_target;
        blk.guard = nullptr;
        blk.then_target = blk.else_target = blk.join = -1;
      } else {
        blk.guard = g;
      }
    }
  }
  remove_unreachable(out);
  return out;
}

}  // namespace mlc
