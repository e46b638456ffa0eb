#ifndef MLC_VALUE_HPP
#define MLC_VALUE_HPP

// The value kernel: runtime data and the operator/builtin semantics shared by
// the interpreter, the optimizer's constant folder and (by replication) the
// generated C and Python code.
//
// Everything here is templated on the scalar payload so that the same code
// serves the binary64 interpreter and the exact-rational interpreter.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace mlc {

using Rational = mpq_class;

enum class NumericMode { Binary64, ExactRational };

enum class BinOp { Add, Sub, Mul, Div, Le, Lt, Gt, Ge, Eq, Ne, And, Or };
enum class UnOp { Neg, Not };
enum class Builtin {
  Round,
  Truncate,
  Abs,
  Pos,
  PosOrNull,
  Null,
  Present,
  Min,
  Max,
  Cast,  // M++ only: undef -> 0, float -> itself
};

std::string_view to_string(BinOp op);
std::string_view to_string(UnOp op);
std::string_view to_string(Builtin fn);
std::optional<Builtin> builtin_from_name(std::string_view name);
/// Number of arguments a builtin takes.
int arity(Builtin fn);
bool is_comparison(BinOp op);

/// Correctly rounded (nearest, ties to even) conversion of a rational.
double rational_to_double(const Rational& q);

template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double from_double(double d) { return d; }
  static double to_double(double d) { return d; }
  static bool is_zero(double d) { return d == 0.0; }
};

template <>
struct ScalarTraits<Rational> {
  static Rational from_double(double d) { return Rational(d); }
  static double to_double(const Rational& q) { return rational_to_double(q); }
  static bool is_zero(const Rational& q) { return sgn(q) == 0; }
};

/// Either `undef` or a defined scalar. Arrays live at the store level.
template <class Scalar>
class BasicValue {
 public:
  BasicValue() = default;
  explicit BasicValue(Scalar s) : payload_(std::move(s)) {}

  static BasicValue undef() { return BasicValue(); }

  bool is_undef() const { return !payload_.has_value(); }
  bool is_defined() const { return payload_.has_value(); }
  const Scalar& get() const { return *payload_; }

  /// Nonzero defined value; the truth test of guards and assertions.
  bool is_true() const {
    return is_defined() && !ScalarTraits<Scalar>::is_zero(*payload_);
  }

  /// Identity: undef equals only undef, binary64 floats compare by bit
  /// pattern (so -0.0 != 0.0), rationals by value.
  friend bool operator==(const BasicValue& a, const BasicValue& b) {
    if (a.is_undef() || b.is_undef()) return a.is_undef() == b.is_undef();
    if constexpr (std::is_same_v<Scalar, double>) {
      return std::bit_cast<std::uint64_t>(a.get()) ==
             std::bit_cast<std::uint64_t>(b.get());
    } else {
      return a.get() == b.get();
    }
  }

 private:
  std::optional<Scalar> payload_;
};

using Value = BasicValue<double>;
using RationalValue = BasicValue<Rational>;

inline Value lit(double d) { return Value(d); }

template <class Scalar>
BasicValue<Scalar> from_binary64(const Value& v) {
  if (v.is_undef()) return BasicValue<Scalar>::undef();
  return BasicValue<Scalar>(ScalarTraits<Scalar>::from_double(v.get()));
}

template <class Scalar>
Value to_binary64(const BasicValue<Scalar>& v) {
  if (v.is_undef()) return Value::undef();
  return Value(ScalarTraits<Scalar>::to_double(v.get()));
}

/// `undef`, or the shortest decimal that round-trips to the same binary64.
std::string format_value(const Value& v);
std::string format_double(double d);
/// 16 hex digits of the IEEE-754 bit pattern.
std::string bits_hex(double d);
double double_from_bits_hex(std::string_view hex);

/// One kernel operation applied to fixed operands. `op` is the suffix of the
/// matching `m_runtime.h` helper; unary operations leave `b` undef.
struct KernelVector {
  std::string op;
  Value a;
  Value b;
  Value out;
};

/// Every binary operator over pairs of edge values, and every builtin over a
/// list of rounding edge cases.
std::vector<KernelVector> kernel_vectors();
/// Tab separated: op, a-def, a-val-hex, b-def, b-val-hex, out-def, out-val-hex,
/// after one `#` header line. Undef operands print as `0` and zero bits.
std::string kernel_vectors_tsv();

// Rounding helpers with a binary64 intermediate. The shifted value is cast
// toward zero, matching the deployed `(double)(long long)` cast.
inline double round_binary64(double f) {
  double shifted = f < 0 ? f - 0.50005 : f + 0.50005;
  return std::trunc(shifted) + 0.0;
}

inline double truncate_binary64(double f) { return std::floor(f + 0.000001); }

namespace detail {

template <class Scalar>
BasicValue<Scalar> boolean(bool b) {
  return BasicValue<Scalar>(ScalarTraits<Scalar>::from_double(b ? 1.0 : 0.0));
}

template <class Scalar>
BasicValue<Scalar> zero() {
  return BasicValue<Scalar>(ScalarTraits<Scalar>::from_double(0.0));
}

// min/max keep the first operand on ties so that max(0, -0.0) is +0.0.
template <class Scalar>
Scalar min_scalar(const Scalar& a, const Scalar& b) {
  return b < a ? b : a;
}

template <class Scalar>
Scalar max_scalar(const Scalar& a, const Scalar& b) {
  return a < b ? b : a;
}

}  // namespace detail

template <class Scalar>
BasicValue<Scalar> eval_binop(BinOp op, const BasicValue<Scalar>& a,
                              const BasicValue<Scalar>& b) {
  using V = BasicValue<Scalar>;
  switch (op) {
    case BinOp::Add:
    case BinOp::Sub: {
      if (a.is_undef() && b.is_undef()) return V::undef();
      Scalar lhs = a.is_undef() ? ScalarTraits<Scalar>::from_double(0.0) : a.get();
      Scalar rhs = b.is_undef() ? ScalarTraits<Scalar>::from_double(0.0) : b.get();
      if (op == BinOp::Add) return V(Scalar(lhs + rhs));
      return V(Scalar(lhs - rhs));
    }
    case BinOp::Mul:
      if (a.is_undef() || b.is_undef()) return V::undef();
      return V(Scalar(a.get() * b.get()));
    case BinOp::Div:
      if (a.is_undef() || b.is_undef()) return V::undef();
      if (ScalarTraits<Scalar>::is_zero(b.get())) return detail::zero<Scalar>();
      return V(Scalar(a.get() / b.get()));
    default:
      break;
  }
  if (a.is_undef() || b.is_undef()) return V::undef();
  const Scalar& x = a.get();
  const Scalar& y = b.get();
  switch (op) {
    case BinOp::Le: return detail::boolean<Scalar>(x <= y);
    case BinOp::Lt: return detail::boolean<Scalar>(x < y);
    case BinOp::Gt: return detail::boolean<Scalar>(x > y);
    case BinOp::Ge: return detail::boolean<Scalar>(x >= y);
    case BinOp::Eq: return detail::boolean<Scalar>(x == y);
    case BinOp::Ne: return detail::boolean<Scalar>(x != y);
    case BinOp::And:
      return detail::boolean<Scalar>(!ScalarTraits<Scalar>::is_zero(x) &&
                                     !ScalarTraits<Scalar>::is_zero(y));
    case BinOp::Or:
      return detail::boolean<Scalar>(!ScalarTraits<Scalar>::is_zero(x) ||
                                     !ScalarTraits<Scalar>::is_zero(y));
    default:
      break;
  }
  return V::undef();  // unreachable
}

template <class Scalar>
BasicValue<Scalar> eval_unop(UnOp op, const BasicValue<Scalar>& a) {
  if (a.is_undef()) return a;
  if (op == UnOp::Neg) return BasicValue<Scalar>(Scalar(-a.get()));
  return detail::boolean<Scalar>(ScalarTraits<Scalar>::is_zero(a.get()));
}

template <class Scalar>
BasicValue<Scalar> round_m(const BasicValue<Scalar>& a) {
  if (a.is_undef()) return a;
  double r = round_binary64(ScalarTraits<Scalar>::to_double(a.get()));
  return BasicValue<Scalar>(ScalarTraits<Scalar>::from_double(r));
}

template <class Scalar>
BasicValue<Scalar> truncate_m(const BasicValue<Scalar>& a) {
  if (a.is_undef()) return a;
  double r = truncate_binary64(ScalarTraits<Scalar>::to_double(a.get()));
  return BasicValue<Scalar>(ScalarTraits<Scalar>::from_double(r));
}

/// Builtin application; `args.size()` must equal `arity(fn)`.
template <class Scalar>
BasicValue<Scalar> eval_builtin(Builtin fn, std::span<const BasicValue<Scalar>> args) {
  using V = BasicValue<Scalar>;
  const V zero = detail::zero<Scalar>();
  switch (fn) {
    case Builtin::Round: return round_m(args[0]);
    case Builtin::Truncate: return truncate_m(args[0]);
    case Builtin::Abs: {
      // if x >= 0 then x else -x
      const V guard = eval_binop(BinOp::Ge, args[0], zero);
      if (guard.is_undef()) return V::undef();
      return guard.is_true() ? args[0] : eval_unop(UnOp::Neg, args[0]);
    }
    case Builtin::Pos: return eval_binop(BinOp::Gt, args[0], zero);
    case Builtin::PosOrNull: return eval_binop(BinOp::Ge, args[0], zero);
    case Builtin::Null: return eval_binop(BinOp::Eq, args[0], zero);
    case Builtin::Present: return detail::boolean<Scalar>(args[0].is_defined());
    case Builtin::Cast: return args[0].is_undef() ? zero : args[0];
    case Builtin::Min:
    case Builtin::Max: {
      const V& a = args[0];
      const V& b = args[1];
      if (a.is_undef() && b.is_undef()) return V::undef();
      Scalar x = a.is_undef() ? zero.get() : a.get();
      Scalar y = b.is_undef() ? zero.get() : b.get();
      return V(fn == Builtin::Min ? detail::min_scalar(x, y) : detail::max_scalar(x, y));
    }
  }
  return V::undef();  // unreachable
}

template <class Scalar>
BasicValue<Scalar> eval_builtin(Builtin fn, std::initializer_list<BasicValue<Scalar>> args) {
  return eval_builtin<Scalar>(fn, std::span<const BasicValue<Scalar>>(args.begin(), args.size()));
}

}  // namespace mlc

#endif  // MLC_VALUE_HPP
