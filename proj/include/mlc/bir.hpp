#ifndef MLC_BIR_HPP
#define MLC_BIR_HPP

// Backend IR: the driver and the rules inlined into one list of assignments,
// raises and conditionals over a fixed set of variables.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlc/interp.hpp"

namespace mlc {

struct BirVar {
  std::string name;
  std::uint32_t length = 0;  // 0 for scalars
  bool is_array() const { return length > 0; }
};

struct BirInstr {
  enum class Kind { Assign, Cond, Raise };
  /// Where an instruction came from. Rule and Driver assignments are the ones
  /// a user wrote; the others are inlining plumbing.
  enum class Origin { Rule, Driver, Seed, Frame };

  Kind kind = Kind::Assign;
  Origin origin = Origin::Rule;
  std::string target;                    // variable, or error code for Raise
  std::optional<std::uint32_t> element;  // array element written by Assign
  ExprPtr expr;                          // right-hand side or guard
  std::vector<BirInstr> then_block;
  std::vector<BirInstr> else_block;
  SourceSpan span;
};

/// Expressions use the M tree with no `X`, `exists` or `cast` left. A
/// conditional instruction takes its then-branch only on a defined nonzero
/// guard.
struct BirProgram {
  std::vector<BirVar> vars;  // sorted by name
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<BirInstr> instrs;

  const BirVar* find_var(std::string_view name) const;
};

BirInstr bir_assign(std::string target, ExprPtr rhs, BirInstr::Origin origin,
                    std::optional<std::uint32_t> element = std::nullopt, SourceSpan span = {});
BirInstr bir_raise(std::string code, ExprPtr guard, SourceSpan span = {});
BirInstr bir_cond(ExprPtr guard, std::vector<BirInstr> then_block,
                  std::vector<BirInstr> else_block, SourceSpan span = {});

/// Inlines `entry` (or the bare rules when there is no driver). Every
/// variable outside `spec.inputs` starts with an explicit undef assignment.
BirProgram inline_program(const CheckedProgram& program, const AssumptionSpec& spec,
                          std::string_view entry = "main");

/// Assign and raise count 1; a conditional 1 plus both branches.
std::size_t count_instructions(std::span<const BirInstr> instrs);
std::size_t count_instructions(const BirProgram& program);

/// One instruction per line; nested blocks indented by two spaces.
std::string print_bir(const BirProgram& program);

/// Every variable gets consecutive slots in name order: one for a scalar, n
/// for an array of length n.
struct StorageLayout {
  struct Entry {
    std::uint32_t slot = 0;
    std::uint32_t length = 0;  // 0 for scalars
  };
  std::map<std::string, Entry, std::less<>> entries;
  std::uint32_t total_slots = 0;

  const Entry* find(std::string_view name) const;
  /// The slot of a scalar or of one array element.
  std::optional<std::uint32_t> slot(std::string_view name,
                                    std::optional<std::uint32_t> element = std::nullopt) const;
};

StorageLayout make_layout(std::span<const BirVar> vars);

inline bool is_generated_name(std::string_view name) { return is_reserved_name(name); }

/// Called after every executed assignment; `ordinal` numbers assignments in
/// program order. Array elements report their element value.
using BirAssignHook = std::function<void(std::size_t ordinal, const BirInstr& instr, const Value& v)>;

/// Reads `spec` inputs from `inputs`; the final store holds every variable
/// that is not compiler-generated.
RunOutcome run_bir(const BirProgram& program, const Store& inputs,
                   const BirAssignHook* hook = nullptr);

/// Slot-resolved form for repeated runs.
class BirRunner {
 public:
  explicit BirRunner(const BirProgram& program);
  ~BirRunner();
  BirRunner(BirRunner&&) noexcept;
  BirRunner& operator=(BirRunner&&) noexcept;

  RunOutcome run(const Store& inputs, const BirAssignHook* hook = nullptr) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mlc

#endif  // MLC_BIR_HPP
