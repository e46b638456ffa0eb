#ifndef MLC_OPTIMIZER_HPP
#define MLC_OPTIMIZER_HPP

// Control-flow-graph form of BIR, the definedness and constant analyses over
// it, and the optimization loop.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mlc/bir.hpp"

namespace mlc {

struct OirBlock {
  enum class Exit { Return, Jump, Branch };

  std::vector<BirInstr> instrs;  // assignments and raises only
  Exit exit = Exit::Return;
  int next = -1;                 // Jump
  ExprPtr guard;                 // Branch
  int then_target = -1;          // Branch
  int else_target = -1;          // Branch
  int join = -1;                 // Branch: where both arms meet again
  SourceSpan span;

  std::vector<int> successors() const;
};

struct OirGraph {
  std::vector<OirBlock> blocks;
  int entry = 0;
  std::vector<BirVar> vars;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  std::vector<std::vector<int>> predecessors() const;
  /// Blocks in reverse post-order from the entry.
  std::vector<int> reverse_post_order() const;
};

/// A conditional becomes a four-block diamond: the branching block, both
/// arms, and the join.
OirGraph to_oir(const BirProgram& program);
BirProgram from_oir(const OirGraph& graph);

/// Immediate dominator per block; the entry is its own, unreachable blocks -1.
std::vector<int> dominators(const OirGraph& graph);
bool dominates(const std::vector<int>& idom, int a, int b);

/// Drops blocks not reachable from the entry and renumbers the rest.
void remove_unreachable(OirGraph& graph);

enum class Definedness : std::uint8_t { Bottom, Undef, Float, Top };
Definedness join(Definedness a, Definedness b);
std::string_view to_string(Definedness d);

/// Constant fact for one storage cell: which assignment supplied the value
/// on every path, or `Varying` when paths disagree.
struct ConstFact {
  enum class Kind : std::uint8_t { Unknown, Const, Varying };
  Kind kind = Kind::Unknown;
  int block = -1;
  int pos = -1;
  Value value;

  friend bool operator==(const ConstFact&, const ConstFact&) = default;
};

/// Abstract state per storage cell (see `make_layout`).
struct AbstractState {
  std::vector<Definedness> def;
  std::vector<ConstFact> consts;

  friend bool operator==(const AbstractState&, const AbstractState&) = default;
};

struct DefinednessFacts {
  StorageLayout layout;
  std::vector<AbstractState> entry;                 // per block
  std::vector<std::vector<Definedness>> assigned;   // per block, per instruction

  /// State just before instruction `pos` of `block`.
  AbstractState before(const OirGraph& g, int block, std::size_t pos) const;
  Definedness at(const OirGraph& g, int block, std::size_t pos, std::string_view var,
                 std::optional<std::uint32_t> element = std::nullopt) const;
};

/// Declared inputs start at top, compiler seeds at undef; join at merges.
DefinednessFacts analyze_definedness(const OirGraph& graph);

/// Abstract definedness of an expression in a state.
Definedness abstract_eval(const Expr& e, const AbstractState& s, const StorageLayout& layout);

/// Folds constants, substitutes dominating constant assignments, applies the
/// rewrite set (the `+ 0`, `* 0` and `+ undef` ones only with `fast_math`) and
/// folds branches and raises whose guards are known.
OirGraph partial_eval(const OirGraph& graph, const DefinednessFacts& facts, bool fast_math);

/// Expression-level part of `partial_eval`.
ExprPtr simplify_expr(const ExprPtr& e, const AbstractState& s, const StorageLayout& layout,
                      bool fast_math);

/// Removes assignments that reach neither an output nor a raise guard, raises
/// that can never fire, and empty conditionals.
OirGraph dce(const OirGraph& graph, const std::vector<std::string>& outputs);

struct PassStat {
  int iteration = 0;
  std::string pass;
  std::size_t instructions = 0;
};

struct OptStats {
  std::size_t before = 0;
  std::size_t after = 0;
  std::vector<PassStat> passes;

  /// `iteration\tpass\tinstructions` lines after a header.
  std::string tsv() const;
};

inline constexpr int kPassLimit = 50;

/// Iterates analysis, partial evaluation and DCE until nothing changes.
/// Throws `PassLimitExceeded` after `pass_limit` rounds without a fixpoint.
BirProgram optimize(const BirProgram& program, bool fast_math, OptStats* stats = nullptr,
                    int pass_limit = kPassLimit);

/// Called after every executed assignment with its block and position.
using OirAssignHook =
    std::function<void(int block, std::size_t pos, const BirInstr& instr, const Value& v)>;

/// Direct interpretation of the graph.
RunOutcome run_oir(const OirGraph& graph, const Store& inputs, const OirAssignHook* hook = nullptr);

/// Graphviz rendering for `--emit-oir`.
std::string print_dot(const OirGraph& graph);

}  // namespace mlc

#endif  // MLC_OPTIMIZER_HPP
