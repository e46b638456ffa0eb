#include <algorithm>
#include <functional>
#include <sstream>

#include "mlc/optimizer.hpp"

namespace mlc {

std::vector<int> OirBlock::successors() const {
  switch (exit) {
    case Exit::Return: return {};
    case Exit::Jump: return {next};
    case Exit::Branch: return {then_target, else_target};
  }
  return {};
}

std::vector<std::vector<int>> OirGraph::predecessors() const {
  std::vector<std::vector<int>> preds(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (int s : blocks[b].successors()) preds[static_cast<std::size_t>(s)].push_back(static_cast<int>(b));
  }
  return preds;
}

std::vector<int> OirGraph::reverse_post_order() const {
  std::vector<int> order;
  std::vector<char> seen(blocks.size(), 0);
  // Iterative DFS; successors are pushed so that the then-arm is visited first.
  std::vector<std::pair<int, std::size_t>> stack;
  if (blocks.empty()) return order;
  stack.emplace_back(entry, 0);
  seen[static_cast<std::size_t>(entry)] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const auto succ = blocks[static_cast<std::size_t>(b)].successors();
    if (next < succ.size()) {
      int s = succ[next++];
      if (!seen[static_cast<std::size_t>(s)]) {
        seen[static_cast<std::size_t>(s)] = 1;
        stack.emplace_back(s, 0);
      }
      continue;
    }
    order.push_back(b);
    stack.pop_back();
  }
  std::reverse(order.begin(), order.end());
  return order;
}

namespace {

int new_block(OirGraph& g) {
  g.blocks.emplace_back();
  return static_cast<int>(g.blocks.size() - 1);
}

int build(const std::vector<BirInstr>& instrs, int cur, OirGraph& g) {
  for (const auto& i : instrs) {
    if (i.kind != BirInstr::Kind::Cond) {
      g.blocks[static_cast<std::size_t>(cur)].instrs.push_back(i);
      continue;
    }
    int then_block = new_block(g);
    int then_end = build(i.then_block, then_block, g);
    int else_block = new_block(g);
    int else_end = build(i.else_block, else_block, g);
    int join_block = new_block(g);
    OirBlock& head = g.blocks[static_cast<std::size_t>(cur)];
    head.exit = OirBlock::Exit::Branch;
    head.guard = i.expr;
    head.then_target = then_block;
    head.else_target = else_block;
    head.join = join_block;
    head.span = i.span;
    for (int end : {then_end, else_end}) {
      g.blocks[static_cast<std::size_t>(end)].exit = OirBlock::Exit::Jump;
      g.blocks[static_cast<std::size_t>(end)].next = join_block;
    }
    cur = join_block;
  }
  return cur;
}

void region(const OirGraph& g, int b, int stop, std::vector<BirInstr>& out) {
  while (b >= 0 && b != stop) {
    const OirBlock& blk = g.blocks[static_cast<std::size_t>(b)];
    out.insert(out.end(), blk.instrs.begin(), blk.instrs.end());
    switch (blk.exit) {
      case OirBlock::Exit::Return: return;
      case OirBlock::Exit::Jump: b = blk.next; break;
      case OirBlock::Exit::Branch: {
        std::vector<BirInstr> then_block;
        std::vector<BirInstr> else_block;
        region(g, blk.then_target, blk.join, then_block);
        region(g, blk.else_target, blk.join, else_block);
        out.push_back(bir_cond(blk.guard, std::move(then_block), std::move(else_block), blk.span));
        b = blk.join;
        break;
      }
    }
  }
}

}  // namespace

OirGraph to_oir(const BirProgram& program) {
  OirGraph g;
  g.vars = program.vars;
  g.inputs = program.inputs;
  g.outputs = program.outputs;
  g.entry = new_block(g);
  build(program.instrs, g.entry, g);
  return g;
}

BirProgram from_oir(const OirGraph& graph) {
  BirProgram out;
  out.vars = graph.vars;
  out.inputs = graph.inputs;
  out.outputs = graph.outputs;
  if (!graph.blocks.empty()) region(graph, graph.entry, -1, out.instrs);
  return out;
}

std::vector<int> dominators(const OirGraph& graph) {
  const std::vector<int> rpo = graph.reverse_post_order();
  std::vector<int> number(graph.blocks.size(), -1);
  for (std::size_t i = 0; i < rpo.size(); ++i) number[static_cast<std::size_t>(rpo[i])] = static_cast<int>(i);
  const auto preds = graph.predecessors();
  std::vector<int> idom(graph.blocks.size(), -1);
  if (rpo.empty()) return idom;
  idom[static_cast<std::size_t>(graph.entry)] = graph.entry;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (number[static_cast<std::size_t>(a)] > number[static_cast<std::size_t>(b)]) a = idom[static_cast<std::size_t>(a)];
      while (number[static_cast<std::size_t>(b)] > number[static_cast<std::size_t>(a)]) b = idom[static_cast<std::size_t>(b)];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i < rpo.size(); ++i) {
      int b = rpo[i];
      int new_idom = -1;
      for (int p : preds[static_cast<std::size_t>(b)]) {
        if (idom[static_cast<std::size_t>(p)] < 0) continue;
        new_idom = new_idom < 0 ? p : intersect(p, new_idom);
      }
      if (new_idom != idom[static_cast<std::size_t>(b)]) {
        idom[static_cast<std::size_t>(b)] = new_idom;
        changed = true;
      }
    }
  }
  return idom;
}

bool dominates(const std::vector<int>& idom, int a, int b) {
  if (b < 0 || idom[static_cast<std::size_t>(b)] < 0) return false;
  while (true) {
    if (a == b) return true;
    int up = idom[static_cast<std::size_t>(b)];
    if (up == b) return false;
    b = up;
  }
}

void remove_unreachable(OirGraph& graph) {
  std::vector<int> order = graph.reverse_post_order();
  std::sort(order.begin(), order.end());
  std::vector<int> remap(graph.blocks.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) remap[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  if (order.size() == graph.blocks.size()) return;
  std::vector<OirBlock> kept;
  kept.reserve(order.size());
  auto map = [&](int b) { return b < 0 ? -1 : remap[static_cast<std::size_t>(b)]; };
  for (int b : order) {
    OirBlock blk = std::move(graph.blocks[static_cast<std::size_t>(b)]);
    blk.next = map(blk.next);
    blk.then_target = map(blk.then_target);
    blk.else_target = map(blk.else_target);
    blk.join = map(blk.join);
    kept.push_back(std::move(blk));
  }
  graph.blocks = std::move(kept);
  graph.entry = map(graph.entry);
}

namespace {

struct Raised {
  std::string code;
};

Value eval_cells(const Expr& e, const std::vector<Value>& mem, const StorageLayout& layout) {
  switch (e.kind) {
    case Expr::Kind::Literal: return e.literal;
    case Expr::Kind::Var: {
      auto slot = layout.slot(e.name);
      return slot ? mem[*slot] : Value::undef();
    }
    case Expr::Kind::Index: {
      Value idx = eval_cells(*e.args[0], mem, layout);
      const auto* entry = layout.find(e.name);
      if (!entry || entry->length == 0) return index_values<double>({}, idx);
      return index_values<double>(std::span<const Value>(mem.data() + entry->slot, entry->length), idx);
    }
    case Expr::Kind::Binary:
      return eval_binop(e.binop, eval_cells(*e.args[0], mem, layout), eval_cells(*e.args[1], mem, layout));
    case Expr::Kind::Unary: return eval_unop(e.unop, eval_cells(*e.args[0], mem, layout));
    case Expr::Kind::Cond: {
      Value g = eval_cells(*e.args[0], mem, layout);
      if (g.is_undef()) return g;
      return eval_cells(*e.args[g.is_true() ? 1 : 2], mem, layout);
    }
    case Expr::Kind::Call: {
      std::vector<Value> args;
      for (const auto& a : e.args) args.push_back(eval_cells(*a, mem, layout));
      return eval_builtin<double>(e.fn, std::span<const Value>(args));
    }
    default: return Value::undef();
  }
}

}  // namespace

RunOutcome run_oir(const OirGraph& graph, const Store& inputs, const OirAssignHook* hook) {
  const StorageLayout layout = make_layout(graph.vars);
  std::vector<Value> mem(layout.total_slots);
  for (const auto& name : graph.inputs) {
    const auto* e = layout.find(name);
    if (!e) continue;
    if (e->length == 0) {
      mem[e->slot] = inputs.get(name);
    } else if (const auto* arr = inputs.array(name)) {
      for (std::uint32_t i = 0; i < e->length && i < arr->size(); ++i) mem[e->slot + i] = (*arr)[i];
    }
  }
  int b = graph.blocks.empty() ? -1 : graph.entry;
  while (b >= 0) {
    const OirBlock& blk = graph.blocks[static_cast<std::size_t>(b)];
    for (std::size_t pos = 0; pos < blk.instrs.size(); ++pos) {
      const BirInstr& i = blk.instrs[pos];
      Value v = eval_cells(*i.expr, mem, layout);
      if (i.kind == BirInstr::Kind::Raise) {
        if (v.is_true()) return RunOutcome{RaisedError{i.target}};
        continue;
      }
      mem[*layout.slot(i.target, i.element)] = v;
      if (hook) (*hook)(b, pos, i, v);
    }
    switch (blk.exit) {
      case OirBlock::Exit::Return: b = -1; break;
      case OirBlock::Exit::Jump: b = blk.next; break;
      case OirBlock::Exit::Branch:
        b = eval_cells(*blk.guard, mem, layout).is_true() ? blk.then_target : blk.else_target;
        break;
    }
  }
  Store out;
  for (const auto& v : graph.vars) {
    if (is_generated_name(v.name) || scope_class(v.name) == ScopeClass::Local) continue;
    const auto* e = layout.find(v.name);
    if (e->length == 0) {
      out.set(v.name, mem[e->slot]);
    } else {
      out.set_array(v.name, std::vector<Value>(mem.begin() + e->slot, mem.begin() + e->slot + e->length));
    }
  }
  return RunOutcome{std::move(out)};
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string print_dot(const OirGraph& graph) {
  std::ostringstream out;
  out << "digraph oir {\n  node [shape=box, fontname=monospace];\n";
  for (std::size_t b = 0; b < graph.blocks.size(); ++b) {
    const OirBlock& blk = graph.blocks[b];
    out << "  b" << b << " [label=\"b" << b << "\\l";
    for (const auto& i : blk.instrs) {
      std::string line = i.kind == BirInstr::Kind::Raise
                             ? "raise " + i.target + " if " + print_expr(*i.expr)
                             : i.target + (i.element ? "[" + std::to_string(*i.element) + "]" : "") +
                                   " = " + print_expr(*i.expr);
      out << dot_escape(line) << "\\l";
    }
    if (blk.exit == OirBlock::Exit::Branch) out << dot_escape("if " + print_expr(*blk.guard)) << "\\l";
    out << "\"];\n";
    switch (blk.exit) {
      case OirBlock::Exit::Return: break;
      case OirBlock::Exit::Jump: out << "  b" << b << " -> b" << blk.next << ";\n"; break;
      case OirBlock::Exit::Branch:
        out << "  b" << b << " -> b" << blk.then_target << " [label=\"then\"];\n";
        out << "  b" << b << " -> b" << blk.else_target << " [label=\"else\"];\n";
        break;
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace mlc
