#include "mlc/optimizer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mlc {

namespace {

void mark_reads(const Expr& e, const StorageLayout& layout, std::vector<char>& live) {
  switch (e.kind) {
    case Expr::Kind::Var:
      if (auto slot = layout.slot(e.name)) live[*slot] = 1;
      return;
    case Expr::Kind::Index: {
      mark_reads(*e.args[0], layout, live);
      const auto* entry = layout.find(e.name);
      if (!entry) return;
      const Expr& idx = *e.args[0];
      if (idx.kind == Expr::Kind::Literal && idx.literal.is_defined()) {
        const double r = idx.literal.get();
        if (r < 0.0 || !(r < entry->length)) return;
        const double t = truncate_binary64(r);
        if (t < entry->length) live[entry->slot + static_cast<std::uint32_t>(t)] = 1;
        return;
      }
      for (std::uint32_t i = 0; i < entry->length; ++i) live[entry->slot + i] = 1;
      return;
    }
    default:
      for (const auto& a : e.args) mark_reads(*a, layout, live);
  }
}

bool never_fires(const ExprPtr& guard) {
  return guard->kind == Expr::Kind::Literal && !guard->literal.is_true();
}

// True when the arm starting at `b` reaches `join` without doing anything.
bool arm_empty(const OirGraph& g, int b, int join) {
  while (b != join) {
    const OirBlock& blk = g.blocks[static_cast<std::size_t>(b)];
    if (!blk.instrs.empty() || blk.exit != OirBlock::Exit::Jump) return false;
    b = blk.next;
  }
  return true;
}

void collect_names(const Expr& e, std::set<std::string, std::less<>>& out) {
  if (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Index) out.insert(e.name);
  for (const auto& a : e.args) collect_names(*a, out);
}

void collect_names(const std::vector<BirInstr>& instrs, std::set<std::string, std::less<>>& out) {
  for (const auto& i : instrs) {
    if (i.kind == BirInstr::Kind::Assign) out.insert(i.target);
    collect_names(*i.expr, out);
    collect_names(i.then_block, out);
    collect_names(i.else_block, out);
  }
}

}  // namespace

OirGraph dce(const OirGraph& graph, const std::vector<std::string>& outputs) {
  OirGraph out = graph;
  const StorageLayout layout = make_layout(out.vars);

  std::vector<char> exit_live(layout.total_slots, 0);
  for (const auto& name : outputs) {
    const auto* e = layout.find(name);
    if (!e) continue;
    for (std::uint32_t i = 0; i < std::max<std::uint32_t>(e->length, 1); ++i) exit_live[e->slot + i] = 1;
  }
  std::vector<int> order = out.reverse_post_order();
  std::reverse(order.begin(), order.end());
  std::vector<std::vector<char>> live_in(out.blocks.size());
  for (int b : order) {
    OirBlock& blk = out.blocks[static_cast<std::size_t>(b)];
    std::vector<char> live(layout.total_slots, 0);
    if (blk.exit == OirBlock::Exit::Return) live = exit_live;
    for (int s : blk.successors()) {
      const auto& in = live_in[static_cast<std::size_t>(s)];
      for (std::size_t i = 0; i < live.size(); ++i) live[i] = live[i] || in[i];
    }
    if (blk.exit == OirBlock::Exit::Branch) mark_reads(*blk.guard, layout, live);
    std::vector<BirInstr> kept;
    for (std::size_t k = blk.instrs.size(); k-- > 0;) {
      BirInstr& i = blk.instrs[k];
      if (i.kind == BirInstr::Kind::Raise) {
        if (never_fires(i.expr)) continue;
        mark_reads(*i.expr, layout, live);
        kept.push_back(std::move(i));
        continue;
      }
      auto slot = layout.slot(i.target, i.element);
      if (!slot || !live[*slot]) continue;
      live[*slot] = 0;
      mark_reads(*i.expr, layout, live);
      kept.push_back(std::move(i));
    }
    std::reverse(kept.begin(), kept.end());
    blk.instrs = std::move(kept);
    live_in[static_cast<std::size_t>(b)] = std::move(live);
  }
  // Conditionals left empty, innermost (highest numbered) first.
  for (std::size_t b = out.blocks.size(); b-- > 0;) {
    OirBlock& blk = out.blocks[b];
    if (blk.exit != OirBlock::Exit::Branch) continue;
    if (arm_empty(out, blk.then_target, blk.join) && arm_empty(out, blk.else_target, blk.join)) {
      blk.exit = OirBlock::Exit::Jump;
      blk.next = blk.join;
      blk.guard = nullptr;
      blk.then_target = blk.else_target = blk.join = -1;
    }
  }
  remove_unreachable(out);
  return out;
}

std::string OptStats::tsv() const {
  std::ostringstream out;
  out << "iteration\tpass\tinstructions\n";
  out << "0\tinline\t" << before << '\n';
  for (const auto& p : passes) out << p.iteration << '\t' << p.pass << '\t' << p.instructions << '\n';
  return out.str();
}

namespace {

std::size_t count(const OirGraph& g) { return count_instructions(from_oir(g)); }

// Keeps inputs, outputs and every variable still mentioned.
void prune_vars(BirProgram& b) {
  std::set<std::string, std::less<>> used(b.inputs.begin(), b.inputs.end());
  used.insert(b.outputs.begin(), b.outputs.end());
  collect_names(b.instrs, used);
  std::erase_if(b.vars, [&](const BirVar& v) { return !used.count(v.name); });
}

}  // namespace

BirProgram optimize(const BirProgram& program, bool fast_math, OptStats* stats, int pass_limit) {
  OirGraph g = to_oir(program);
  OptStats local;
  OptStats& st = stats ? *stats : local;
  st = OptStats{};
  st.before = count_instructions(program);
  std::string previous = print_bir(program);
  for (int iter = 1;; ++iter) {
    if (iter > pass_limit) {
      throw Error(ErrorKind::PassLimitExceeded,
                  "optimizer did not reach a fixpoint within " + std::to_string(pass_limit) + " passes");
    }
    g = partial_eval(g, analyze_definedness(g), fast_math);
    st.passes.push_back(PassStat{iter, "partial_eval", count(g)});
    g = dce(g, g.outputs);
    st.passes.push_back(PassStat{iter, "dce", count(g)});
    std::string now = print_bir(from_oir(g));
    if (now == previous) break;
    previous = std::move(now);
  }
  BirProgram out = from_oir(g);
  prune_vars(out);
  st.after = count_instructions(out);
  return out;
}

}  // namespace mlc
