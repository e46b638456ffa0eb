#ifndef MLC_INTERP_HPP
#define MLC_INTERP_HPP

// Reference interpreter for M rules and M++ drivers, in binary64 or exact
// rational arithmetic.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mlc/frontend.hpp"
#include "mlc/sema.hpp"

namespace mlc {

/// Variable store; a name that is absent reads as undef.
template <class Scalar>
class BasicStore {
 public:
  using V = BasicValue<Scalar>;

  V get(std::string_view name) const;
  const std::vector<V>* array(std::string_view name) const;
  bool contains(std::string_view name) const;

  void set(const std::string& name, V v);
  void set_array(const std::string& name, std::vector<V> values);
  /// Makes `name` absent (scalar or array).
  void erase(const std::string& name);
  /// Copies `name` from `other`, including its absence.
  void copy_from(const BasicStore& other, const std::string& name);

  const std::map<std::string, V, std::less<>>& scalars() const { return scalars_; }
  const std::map<std::string, std::vector<V>, std::less<>>& arrays() const { return arrays_; }

  friend bool operator==(const BasicStore&, const BasicStore&) = default;

 private:
  std::map<std::string, V, std::less<>> scalars_;
  std::map<std::string, std::vector<V>, std::less<>> arrays_;
};

using Store = BasicStore<double>;
using RationalStore = BasicStore<Rational>;

struct RaisedError {
  std::string code;
  friend bool operator==(const RaisedError&, const RaisedError&) = default;
};

template <class Scalar>
struct BasicRunOutcome {
  std::variant<BasicStore<Scalar>, RaisedError> result;

  bool raised() const { return std::holds_alternative<RaisedError>(result); }
  const RaisedError& error() const { return std::get<RaisedError>(result); }
  const BasicStore<Scalar>& store() const { return std::get<BasicStore<Scalar>>(result); }
};

using RunOutcome = BasicRunOutcome<double>;
using RationalRunOutcome = BasicRunOutcome<Rational>;

/// One executed command: `location` is the index in the ordered program for M
/// rules and `file:line` for M++ commands.
struct TraceEvent {
  std::string location;
  std::string target;
  std::string value;
};
using TraceHook = std::function<void(const TraceEvent&)>;

/// `index` binds `X` inside array-assignment bodies.
template <class Scalar>
BasicValue<Scalar> eval_expr(const BasicStore<Scalar>& store, const Expr& e,
                             std::optional<std::uint32_t> index = std::nullopt);

/// Indexing rule shared by every evaluator: undef index gives undef, a
/// negative one 0, and anything at or past the end (after truncating the index)
/// undef. `values` is null for an absent array.
template <class Scalar>
BasicValue<Scalar> index_array(const std::vector<BasicValue<Scalar>>* values,
                               const BasicValue<Scalar>& index);

/// Same rule over contiguous elements; an absent array behaves as empty.
template <class Scalar>
BasicValue<Scalar> index_values(std::span<const BasicValue<Scalar>> values,
                                const BasicValue<Scalar>& index);

template <class Scalar>
BasicRunOutcome<Scalar> run_commands(BasicStore<Scalar> store, const OrderedProgram& program,
                                     const TraceHook* trace = nullptr);

/// Runs `entry` from the driver, or the M rules directly when there is none.
/// Throws `UnknownFunction` when `entry` does not exist.
template <class Scalar>
BasicRunOutcome<Scalar> run_mpp(const CheckedProgram& program, std::string_view entry,
                                BasicStore<Scalar> inputs, const TraceHook* trace = nullptr);

/// The store a test case describes; array inputs get their declared length.
Store store_from_test(const TestCase& test, const OrderedProgram& program);

/// Looks up `NAME` or `NAME[i]` in a store.
Value lookup_output(const Store& store, std::string_view key);

/// Converts a binary64 store to exact rationals, or back with final rounding.
RationalStore to_rational(const Store& store);
Store to_binary64(const RationalStore& store);

RunOutcome run_program(const CheckedProgram& program, std::string_view entry,
                       const Store& inputs, NumericMode mode = NumericMode::Binary64,
                       const TraceHook* trace = nullptr);

struct OutputDiff {
  std::string name;
  Value expected;
  Value actual;
};

struct TestReport {
  std::string name;
  bool passed = false;
  std::vector<OutputDiff> diffs;
  std::optional<std::string> raised;
  std::string reason;  // empty on success
};

/// Outputs are compared by bit pattern; error codes by equality.
TestReport check_outcome(const TestCase& test, const RunOutcome& outcome);
TestReport run_test(const TestCase& test, const CheckedProgram& program,
                    std::string_view entry = "main", NumericMode mode = NumericMode::Binary64);

/// `undef`, a number, or `[a, b, ...]` for arrays.
std::string describe_variable(const Store& store, std::string_view name);

}  // namespace mlc

#endif  // MLC_INTERP_HPP
