#include "mlc/value.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace mlc {

std::string_view to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Le: return "<=";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

std::string_view to_string(UnOp op) { return op == UnOp::Neg ? "-" : "~"; }

std::string_view to_string(Builtin fn) {
  switch (fn) {
    case Builtin::Round: return "round";
    case Builtin::Truncate: return "truncate";
    case Builtin::Abs: return "abs";
    case Builtin::Pos: return "pos";
    case Builtin::PosOrNull: return "pos_or_null";
    case Builtin::Null: return "null";
    case Builtin::Present: return "present";
    case Builtin::Min: return "min";
    case Builtin::Max: return "max";
    case Builtin::Cast: return "cast";
  }
  return "?";
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
  static constexpr std::array<Builtin, 10> all = {
      Builtin::Round, Builtin::Truncate, Builtin::Abs,     Builtin::Pos, Builtin::PosOrNull,
      Builtin::Null,  Builtin::Present,  Builtin::Min,     Builtin::Max, Builtin::Cast};
  for (Builtin b : all) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

int arity(Builtin fn) { return fn == Builtin::Min || fn == Builtin::Max ? 2 : 1; }

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Le:
    case BinOp::Lt:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Ne:
      return true;
    default:
      return false;
  }
}

double rational_to_double(const Rational& q) {
  int sign = sgn(q);
  if (sign == 0) return 0.0;
  mpz_class num = abs(q.get_num());
  const mpz_class& den = q.get_den();

  // Pick `shift` so that m = floor(num * 2^shift / den) has 53 significant
  // bits, then clamp for the subnormal range.
  long num_bits = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2));
  long den_bits = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  long shift = 53 - (num_bits - den_bits);
  auto scaled_quotient = [&](long s, mpz_class& rem) {
    mpz_class n = num;
    mpz_class d = den;
    if (s >= 0) {
      n <<= static_cast<mp_bitcnt_t>(s);
    } else {
      d <<= static_cast<mp_bitcnt_t>(-s);
    }
    mpz_class m;
    mpz_fdiv_qr(m.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return std::pair<mpz_class, mpz_class>(m, d);
  };
  mpz_class rem;
  auto [m, d] = scaled_quotient(shift, rem);
  if (mpz_sizeinbase(m.get_mpz_t(), 2) > 53) {
    shift -= 1;
    std::tie(m, d) = scaled_quotient(shift, rem);
  } else if (mpz_sizeinbase(m.get_mpz_t(), 2) < 53) {
    shift += 1;
    std::tie(m, d) = scaled_quotient(shift, rem);
  }
  // value = m * 2^-shift with 2^52 <= m < 2^53, exponent = 52 - shift.
  if (shift > 1074) {
    shift = 1074;
    std::tie(m, d) = scaled_quotient(shift, rem);
  }
  mpz_class twice = rem * 2;
  int cmp = mpz_cmp(twice.get_mpz_t(), d.get_mpz_t());
  if (cmp > 0 || (cmp == 0 && mpz_odd_p(m.get_mpz_t()))) m += 1;
  if (52 - shift > 1023 + 1) return sign * std::numeric_limits<double>::infinity();
  double mantissa = m.get_d();  // exact: m <= 2^53
  double result = std::ldexp(mantissa, static_cast<int>(-shift));
  return sign < 0 ? -result : result;
}

std::string format_double(double d) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), d);
  return std::string(buf.data(), res.ptr);
}

std::string format_value(const Value& v) {
  if (v.is_undef()) return "undef";
  return format_double(v.get());
}

std::string bits_hex(double d) {
  static constexpr char digits[] = "0123456789abcdef";
  auto bits = std::bit_cast<std::uint64_t>(d);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[bits & 0xf];
    bits >>= 4;
  }
  return out;
}

double double_from_bits_hex(std::string_view hex) {
  std::uint64_t bits = 0;
  auto res = std::from_chars(hex.data(), hex.data() + hex.size(), bits, 16);
  if (res.ec != std::errc() || res.ptr != hex.data() + hex.size()) {
    throw std::invalid_argument("bad bit pattern: " + std::string(hex));
  }
  return std::bit_cast<double>(bits);
}

}  // namespace mlc
