#include <limits>

#include "mlc/value.hpp"

namespace mlc {

std::vector<KernelVector> kernel_vectors() {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Value> pair_values{Value::undef(), lit(0.0), lit(-0.0), lit(1.0), lit(-1.0),
                                       lit(2.5),       lit(-2.5), lit(0.49994), lit(3.0), lit(1e300)};
  const std::vector<Value> unary_values{
      Value::undef(), lit(0.0),        lit(-0.0),        lit(1.0),          lit(-1.0),
      lit(2.5),       lit(-2.5),       lit(0.49994),     lit(-0.49994),     lit(0.49995),
      lit(-0.49995),  lit(0.5),        lit(-0.5),        lit(1.5),          lit(-1.5),
      lit(2.9999999), lit(-2.9999999), lit(2.999999),    lit(0.9999985),    lit(1e-7),
      lit(-1e-7),     lit(1234.5),     lit(-1234.5),     lit(0.1),          lit(1e300),
      lit(-1e300),    lit(inf),        lit(-inf),        lit(4503599627370496.0), lit(9007199254740993.0)};

  std::vector<KernelVector> out;
  const std::pair<const char*, BinOp> binops[] = {
      {"add", BinOp::Add},       {"sub", BinOp::Sub},       {"mul", BinOp::Mul},       {"div", BinOp::Div},
      {"cmp_le", BinOp::Le},     {"cmp_lt", BinOp::Lt},     {"cmp_gt", BinOp::Gt},     {"cmp_ge", BinOp::Ge},
      {"cmp_eq", BinOp::Eq},     {"cmp_ne", BinOp::Ne},     {"and", BinOp::And},       {"or", BinOp::Or}};
  for (const auto& [name, op] : binops) {
    for (const auto& a : pair_values) {
      for (const auto& b : pair_values) out.push_back(KernelVector{name, a, b, eval_binop(op, a, b)});
    }
  }
  for (const auto& [name, fn] : {std::pair<const char*, Builtin>{"min", Builtin::Min}, {"max", Builtin::Max}}) {
    for (const auto& a : pair_values) {
      for (const auto& b : pair_values) out.push_back(KernelVector{name, a, b, eval_builtin(fn, {a, b})});
    }
  }
  for (const auto& a : unary_values) {
    out.push_back(KernelVector{"neg", a, Value::undef(), eval_unop(UnOp::Neg, a)});
    out.push_back(KernelVector{"not", a, Value::undef(), eval_unop(UnOp::Not, a)});
  }
  const std::pair<const char*, Builtin> unary[] = {
      {"round", Builtin::Round},         {"truncate", Builtin::Truncate}, {"abs", Builtin::Abs},
      {"pos", Builtin::Pos},             {"pos_or_null", Builtin::PosOrNull}, {"null", Builtin::Null},
      {"present", Builtin::Present}};
  for (const auto& [name, fn] : unary) {
    for (const auto& a : unary_values) out.push_back(KernelVector{name, a, Value::undef(), eval_builtin(fn, {a})});
  }
  return out;
}

std::string kernel_vectors_tsv() {
  std::string out = "# op\ta-def\ta-val-hex\tb-def\tb-val-hex\tout-def\tout-val-hex\n";
  auto field = [&](const Value& v) {
    out += v.is_undef() ? "0\t0000000000000000" : "1\t" + bits_hex(v.get());
  };
  for (const auto& k : kernel_vectors()) {
    out += k.op;
    out += '\t';
    field(k.a);
    out += '\t';
    field(k.b);
    out += '\t';
    field(k.out);
    out += '\n';
  }
  return out;
}

}  // namespace mlc
