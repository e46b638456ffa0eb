#include "random_program.hpp"

#include <algorithm>

namespace mlc::testing {

namespace {

class Generator {
 public:
  explicit Generator(std::mt19937_64& rng) : rng_(rng) {}

  int pick(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng_)); }
  bool chance(int percent) { return pick(100) < percent; }

  Value random_value() {
    switch (pick(8)) {
      case 0: return Value::undef();
      case 1: return Value(0.0);
      case 2: return Value(-0.0);
      case 3: return Value(static_cast<double>(pick(7) - 3));
      case 4: return Value(pick(2000) / 8.0 - 100.0);
      case 5: return Value(std::uniform_real_distribution<double>(-1e6, 1e6)(rng_));
      case 6: return Value(pick(10) / 3.0);
      default: return Value(static_cast<double>(pick(5)) + 0.4999);
    }
  }

  ExprPtr expr(int depth, bool in_array) {
    if (depth <= 0 || chance(25)) return leaf(in_array);
    switch (pick(7)) {
      case 0:
      case 1: {
        static const BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div,
                                    BinOp::Le,  BinOp::Lt,  BinOp::Gt,  BinOp::Ge,
                                    BinOp::Eq,  BinOp::Ne,  BinOp::And, BinOp::Or};
        return make_binary(ops[pick(12)], expr(depth - 1, in_array), expr(depth - 1, in_array));
      }
      case 2:
        return make_unary(chance(50) ? UnOp::Neg : UnOp::Not, expr(depth - 1, in_array));
      case 3:
        return make_cond(expr(depth - 1, in_array), expr(depth - 1, in_array),
                         expr(depth - 1, in_array));
      case 4: {
        static const Builtin unary[] = {Builtin::Round, Builtin::Truncate, Builtin::Abs,
                                        Builtin::Pos,   Builtin::PosOrNull, Builtin::Null,
                                        Builtin::Present};
        return make_call(unary[pick(7)], {expr(depth - 1, in_array)});
      }
      case 5:
        return make_call(chance(50) ? Builtin::Min : Builtin::Max,
                         {expr(depth - 1, in_array), expr(depth - 1, in_array)});
      default:
        if (!arrays_.empty()) {
          const auto& [name, n] = arrays_[pick(static_cast<int>(arrays_.size()))];
          (void)n;
          return make_index(name, index_expr(depth - 1, in_array));
        }
        return leaf(in_array);
    }
  }

  ExprPtr index_expr(int depth, bool in_array) {
    switch (pick(4)) {
      case 0: return make_literal(Value(static_cast<double>(pick(9) - 2)));
      case 1: return make_literal(Value(pick(40) / 7.0 - 1.0));
      case 2:
        if (in_array) return make_index_var();
        return expr(depth, in_array);
      default: return expr(depth, in_array);
    }
  }

  ExprPtr leaf(bool in_array) {
    int r = pick(10);
    if (r < 3) return make_literal(random_value());
    if (r < 4 && in_array) return make_index_var();
    if (r < 5) return make_var("UNSET" + std::to_string(pick(3)));
    if (r < 6 && !arrays_.empty()) {
      const auto& [name, n] = arrays_[pick(static_cast<int>(arrays_.size()))];
      return make_index(name, make_literal(Value(static_cast<double>(pick(static_cast<int>(n) + 2) - 1))));
    }
    if (scalars_.empty()) return make_literal(random_value());
    return make_var(scalars_[pick(static_cast<int>(scalars_.size()))]);
  }

  std::vector<std::string> scalars_;
  std::vector<std::pair<std::string, std::uint32_t>> arrays_;

 private:
  std::mt19937_64& rng_;
};

}  // namespace

RandomProgram random_program(std::mt19937_64& rng, int rules) {
  Generator g(rng);
  RandomProgram out;
  int n_scalar = 1 + g.pick(4);
  int n_array = g.pick(3);
  for (int i = 0; i < n_scalar; ++i) {
    std::string name = "IN" + std::to_string(i);
    out.program.vars.push_back(VarDecl{name, VarCategory::Input, std::nullopt, "", 0, {}});
    out.scalar_inputs.push_back(name);
    g.scalars_.push_back(name);
  }
  for (int i = 0; i < n_array; ++i) {
    std::string name = "TIN" + std::to_string(i);
    std::uint32_t len = static_cast<std::uint32_t>(1 + g.pick(4));
    out.program.vars.push_back(VarDecl{name, VarCategory::Input, std::nullopt, "", len, {}});
    out.array_inputs.emplace_back(name, len);
    g.arrays_.emplace_back(name, len);
  }
  int n_errors = 1 + g.pick(2);
  for (int i = 0; i < n_errors; ++i) {
    out.program.errors.push_back(ErrorDecl{"E" + std::to_string(i), "", {}});
  }
  for (int i = 0; i < rules; ++i) {
    int depth = 1 + g.pick(4);
    int kind = g.pick(10);
    if (kind == 0) {
      out.program.commands.push_back(Command{Command::Kind::RaiseIf,
                                             "E" + std::to_string(g.pick(n_errors)), 0,
                                             g.expr(depth, false), {}});
    } else if (kind <= 2) {
      std::string name = "ARR" + std::to_string(i);
      std::uint32_t len = static_cast<std::uint32_t>(1 + g.pick(4));
      out.program.commands.push_back(
          Command{Command::Kind::AssignArray, name, len, g.expr(depth, true), {}});
      g.arrays_.emplace_back(name, len);
    } else {
      std::string name = "V" + std::to_string(i);
      out.program.commands.push_back(
          Command{Command::Kind::AssignScalar, name, 0, g.expr(depth, false), {}});
      g.scalars_.push_back(name);
    }
    if (g.chance(20)) {
      out.program.vars.push_back(VarDecl{out.program.commands.back().target,
                                         VarCategory::Output, std::nullopt, "",
                                         out.program.commands.back().length, {}});
      if (out.program.commands.back().kind == Command::Kind::RaiseIf) out.program.vars.pop_back();
    }
  }
  std::shuffle(out.program.commands.begin(), out.program.commands.end(), rng);
  return out;
}

Store random_store(const RandomProgram& p, std::mt19937_64& rng) {
  Generator g(rng);
  Store store;
  for (const auto& name : p.scalar_inputs) {
    if (g.chance(80)) store.set(name, g.random_value());
  }
  for (const auto& [name, n] : p.array_inputs) {
    if (!g.chance(80)) continue;
    std::vector<Value> values;
    for (std::uint32_t i = 0; i < n; ++i) values.push_back(g.random_value());
    store.set_array(name, std::move(values));
  }
  return store;
}

}  // namespace mlc::testing
