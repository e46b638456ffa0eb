#ifndef MLC_SEMA_HPP
#define MLC_SEMA_HPP

// Dependency ordering, shape checking and the kind table.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mlc/ast.hpp"

namespace mlc {

/// M rules in an order where every variable is assigned before it is read.
struct OrderedProgram {
  std::vector<VarDecl> vars;
  std::vector<ErrorDecl> errors;
  std::vector<Command> commands;
  std::map<std::string, std::size_t> var_to_def;  // target -> index in `commands`
  std::map<std::string, std::string> kinds;       // variable -> kind
  std::map<std::string, std::size_t, std::less<>> var_index;  // name -> index in `vars`

  const VarDecl* find_var(std::string_view name) const;
};

/// Topological sort of the rules. Among ready rules, raise-ifs go first (in
/// source order) and assignments follow by target name, so the order does not
/// depend on how assignments are laid out across files.
/// Throws `CyclicDefinition` or `DuplicateDefinition`.
OrderedProgram order_rules(const MProgram& program);

enum class Shape { Scalar, Array };

struct TypeEnv {
  std::map<std::string, Shape> shapes;
  std::map<std::string, std::uint32_t> lengths;  // arrays only

  std::optional<Shape> shape(std::string_view name) const;
  friend bool operator==(const TypeEnv&, const TypeEnv&) = default;
};

/// Seeds the environment with the declared shapes and checks every command in
/// order. Throws `ShapeMismatch`, `ArrayAsScalar`, `ScalarIndexed` or `BadArity`.
TypeEnv typecheck(const OrderedProgram& ordered);

using KindIndex = std::map<std::string, std::set<std::string>>;
KindIndex build_kind_index(std::span<const VarDecl> decls);

/// Static checks on a driver: known kinds, definite assignment of locals
/// before use, a non-recursive call graph, and shapes of M variables.
void check_mpp(const MppProgram& mpp, const TypeEnv& env, const KindIndex& kinds);

/// Everything later stages need, checked together.
struct CheckedProgram {
  MProgram source;
  OrderedProgram ordered;
  TypeEnv env;
  KindIndex kinds;
  std::optional<MppProgram> mpp;
};

CheckedProgram check(MProgram program, std::optional<MppProgram> mpp = std::nullopt);

/// One line per command: `index<TAB>target<TAB>free-vars` (comma separated).
std::string emit_order(const OrderedProgram& ordered);

}  // namespace mlc

#endif  // MLC_SEMA_HPP
