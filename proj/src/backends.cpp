#include "mlc/backends.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace mlc {

std::string_view to_string(Language l) { return l == Language::C ? "c" : "python"; }

std::uint32_t EmittedUnit::input_width() const {
  std::uint32_t w = 0;
  for (const auto& m : manifest) {
    if (m.role == "input") w = std::max(w, m.index + std::max<std::uint32_t>(m.length, 1));
  }
  return w;
}

std::uint32_t EmittedUnit::output_width() const {
  std::uint32_t w = 0;
  for (const auto& m : manifest) {
    if (m.role == "output") w = std::max(w, m.index + std::max<std::uint32_t>(m.length, 1));
  }
  return w;
}

namespace {

constexpr int kMaxBlockDepth = 24;  // nested conditionals inside one function
constexpr int kMaxExprDepth = 32;   // deeper subexpressions go through temporaries

std::vector<ManifestEntry> build_manifest(const BirProgram& b, const StorageLayout& layout) {
  std::vector<ManifestEntry> out;
  auto add = [&](const std::vector<std::string>& names, const char* role) {
    std::uint32_t index = 0;
    for (const auto& name : names) {
      const auto* e = layout.find(name);
      if (!e) continue;
      out.push_back(ManifestEntry{name, e->slot, role, index, e->length});
      index += std::max<std::uint32_t>(e->length, 1);
    }
  };
  add(b.inputs, "input");
  add(b.outputs, "output");
  return out;
}

std::size_t hoists(const Expr& e, int depth) {
  std::size_t n = 0;
  if (!e.args.empty() && depth > 0 && depth % kMaxExprDepth == 0) ++n;
  for (const auto& a : e.args) n += hoists(*a, depth + 1);
  return n;
}

std::size_t cost(const BirInstr& i) {
  std::size_t n = 1 + hoists(*i.expr, 0);
  for (const auto& c : i.then_block) n += cost(c);
  for (const auto& c : i.else_block) n += cost(c);
  return n;
}

std::string indent(int n) { return std::string(static_cast<std::size_t>(n) * 4, ' '); }

// Language-neutral chunking; subclasses print expressions and statements.
class Emitter {
 public:
  Emitter(const StorageLayout& layout, const EmitOptions& options) : layout_(layout), options_(options) {}
  virtual ~Emitter() = default;

  struct Function {
    std::string name;
    std::vector<std::string> lines;
  };

  // Emits `instrs` as chunk functions and returns the calls that run them.
  std::vector<std::string> run(const std::vector<BirInstr>& instrs, int depth) {
    std::vector<std::string> calls;
    call_chunks(instrs, depth, calls);
    return calls;
  }

  const std::vector<Function>& functions() const { return functions_; }

 protected:
  virtual std::string chunk_name(std::size_t n) const = 0;
  virtual std::string call_line(const std::string& fn) const = 0;
  virtual std::string literal(const Value& v) const = 0;
  virtual std::string var(std::uint32_t slot) const = 0;
  virtual std::string undef() const = 0;
  virtual std::string index(std::uint32_t base, std::uint32_t length, const std::string& idx) const = 0;
  virtual std::string temp_decl(const std::string& name, const std::string& value) const = 0;
  virtual std::string assign(std::uint32_t slot, const std::string& value) const = 0;
  virtual std::vector<std::string> raise(const std::string& code, const std::string& guard) const = 0;
  virtual std::string if_open(const std::string& guard) const = 0;
  virtual std::string else_line() const = 0;
  virtual std::string if_close() const = 0;   // may be empty
  virtual std::string empty_body() const = 0;  // may be empty

  static std::string call(std::string_view fn, std::initializer_list<std::string> args) {
    std::string out(fn);
    out += '(';
    bool first = true;
    for (const auto& a : args) {
      if (!first) out += ", ";
      out += a;
      first = false;
    }
    return out + ')';
  }

  std::string expr(const Expr& e, int depth, int ind, std::vector<std::string>& pre) {
    if (!e.args.empty() && depth > 0 && depth % kMaxExprDepth == 0) {
      std::string name = "t" + std::to_string(temps_++);
      std::string value = expr_node(e, depth, ind, pre);
      pre.push_back(indent(ind) + temp_decl(name, value));
      return name;
    }
    return expr_node(e, depth, ind, pre);
  }

 private:
  std::string expr_node(const Expr& e, int depth, int ind, std::vector<std::string>& pre) {
    auto sub = [&](std::size_t k) { return expr(*e.args[k], depth + 1, ind, pre); };
    switch (e.kind) {
      case Expr::Kind::Literal: return literal(e.literal);
      case Expr::Kind::Var: {
        auto slot = layout_.slot(e.name);
        return slot ? var(*slot) : undef();
      }
      case Expr::Kind::Index: {
        const auto* entry = layout_.find(e.name);
        std::string idx = sub(0);
        if (!entry || entry->length == 0) return index(0, 0, idx);
        return index(entry->slot, entry->length, idx);
      }
      case Expr::Kind::Binary: {
        static constexpr const char* names[] = {"m_add",    "m_sub",    "m_mul",    "m_div",
                                                "m_cmp_le", "m_cmp_lt", "m_cmp_gt", "m_cmp_ge",
                                                "m_cmp_eq", "m_cmp_ne", "m_and",    "m_or"};
        std::string a = sub(0);
        std::string b = sub(1);
        return call(names[static_cast<int>(e.binop)], {a, b});
      }
      case Expr::Kind::Unary: return call(e.unop == UnOp::Neg ? "m_neg" : "m_not", {sub(0)});
      case Expr::Kind::Cond: {
        std::string g = sub(0);
        std::string t = sub(1);
        std::string f = sub(2);
        return call("m_select", {g, t, f});
      }
      case Expr::Kind::Call: {
        if (e.fn == Builtin::Cast) {
          std::string a = sub(0);
          return call("m_select", {call("m_present", {a}), a, literal(Value(0.0))});
        }
        static constexpr const char* names[] = {"m_round",       "m_truncate", "m_abs",
                                                "m_pos",         "m_pos_or_null", "m_null",
                                                "m_present",     "m_min",      "m_max"};
        const char* fn = names[static_cast<int>(e.fn)];
        if (e.args.size() == 2) {
          std::string a = sub(0);
          std::string b = sub(1);
          return call(fn, {a, b});
        }
        return call(fn, {sub(0)});
      }
      default:
        throw Error(ErrorKind::UnknownKind, "expression form not valid in BIR", e.span);
    }
  }

  void call_chunks(const std::vector<BirInstr>& instrs, int ind, std::vector<std::string>& out) {
    std::size_t i = 0;
    if (instrs.empty()) return;
    while (i < instrs.size()) {
      Function f;
      f.name = chunk_name(chunk_count_++);
      std::size_t used = 0;
      while (i < instrs.size()) {
        const std::size_t c = cost(instrs[i]);
        if (used > 0 && used + c > options_.chunk_limit) break;
        emit(instrs[i], 1, 0, f.lines);
        used += c;
        ++i;
      }
      out.push_back(indent(ind) + call_line(f.name));
      functions_.push_back(std::move(f));
    }
  }

  void emit_block(const std::vector<BirInstr>& instrs, int ind, int depth, std::vector<std::string>& out) {
    const std::size_t before = out.size();
    for (const auto& c : instrs) emit(c, ind, depth, out);
    if (out.size() == before && !empty_body().empty()) out.push_back(indent(ind) + empty_body());
  }

  void emit(const BirInstr& i, int ind, int depth, std::vector<std::string>& out) {
    std::vector<std::string> pre;
    std::string value = expr(*i.expr, 0, ind, pre);
    out.insert(out.end(), pre.begin(), pre.end());
    switch (i.kind) {
      case BirInstr::Kind::Assign: {
        auto slot = layout_.slot(i.target, i.element);
        if (!slot) throw Error(ErrorKind::UndeclaredVariable, "no slot for " + i.target, i.span);
        out.push_back(indent(ind) + assign(*slot, value));
        return;
      }
      case BirInstr::Kind::Raise:
        for (const auto& l : raise(i.target, value)) out.push_back(indent(ind) + l);
        return;
      case BirInstr::Kind::Cond: {
        const bool split = cost(i) > options_.chunk_limit || depth + 1 >= kMaxBlockDepth;
        out.push_back(indent(ind) + if_open(value));
        auto body = [&](const std::vector<BirInstr>& block) {
          if (split) {
            const std::size_t before = out.size();
            call_chunks(block, ind + 1, out);
            if (out.size() == before && !empty_body().empty()) out.push_back(indent(ind + 1) + empty_body());
          } else {
            emit_block(block, ind + 1, depth + 1, out);
          }
        };
        body(i.then_block);
        if (!i.else_block.empty()) {
          out.push_back(indent(ind) + else_line());
          body(i.else_block);
        }
        if (!if_close().empty()) out.push_back(indent(ind) + if_close());
        return;
      }
    }
  }

 protected:
  const StorageLayout& layout_;
  const EmitOptions& options_;

 private:
  std::vector<Function> functions_;
  std::size_t chunk_count_ = 0;
  std::size_t temps_ = 0;
};

std::string c_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", d);
  return buf;
}

class CEmitter : public Emitter {
 public:
  using Emitter::Emitter;

 protected:
  std::string chunk_name(std::size_t n) const override {
    std::string name = options_.prefix + "_c" + std::to_string(n);
    if (name.size() > kMaxIdentifier) {
      throw Error(ErrorKind::IdentifierOverflow,
                  "generated identifier '" + name + "' exceeds " + std::to_string(kMaxIdentifier) + " characters");
    }
    return name;
  }
  std::string call_line(const std::string& fn) const override { return "if (" + fn + "(s, error_code)) return 1;"; }
  std::string literal(const Value& v) const override {
    if (v.is_undef()) return "m_undef()";
    if (!std::isfinite(v.get())) return "m_bits(0x" + bits_hex(v.get()) + "ULL)";
    return "m_num(" + c_double(v.get()) + ")";
  }
  std::string var(std::uint32_t slot) const override { return "s[" + std::to_string(slot) + "]"; }
  std::string undef() const override { return "m_undef()"; }
  std::string index(std::uint32_t base, std::uint32_t length, const std::string& idx) const override {
    return "m_index(s + " + std::to_string(base) + ", " + std::to_string(length) + ", " + idx + ")";
  }
  std::string temp_decl(const std::string& name, const std::string& value) const override {
    return "const m_value " + name + " = " + value + ";";
  }
  std::string assign(std::uint32_t slot, const std::string& value) const override {
    return "s[" + std::to_string(slot) + "] = " + value + ";";
  }
  std::vector<std::string> raise(const std::string& code, const std::string& guard) const override {
    return {"if (m_is_true(" + guard + ")) {", "    *error_code = \"" + code + "\";", "    return 1;", "}"};
  }
  std::string if_open(const std::string& guard) const override { return "if (m_is_true(" + guard + ")) {"; }
  std::string else_line() const override { return "} else {"; }
  std::string if_close() const override { return "}"; }
  std::string empty_body() const override { return ""; }
};

std::string py_double(double d) {
  if (std::isnan(d)) return std::signbit(d) ? "(-float('nan'))" : "float('nan')";
  if (std::isinf(d)) return d > 0 ? "float('inf')" : "(-float('inf'))";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  if (d < 0) s = "(" + s + ")";
  return s;
}

class PyEmitter : public Emitter {
 public:
  using Emitter::Emitter;

 protected:
  std::string chunk_name(std::size_t n) const override { return "_c" + std::to_string(n); }
  std::string call_line(const std::string& fn) const override { return fn + "(s)"; }
  std::string literal(const Value& v) const override { return v.is_undef() ? "None" : py_double(v.get()); }
  std::string var(std::uint32_t slot) const override { return "s[" + std::to_string(slot) + "]"; }
  std::string undef() const override { return "None"; }
  std::string index(std::uint32_t base, std::uint32_t length, const std::string& idx) const override {
    return "m_index(s, " + std::to_string(base) + ", " + std::to_string(length) + ", " + idx + ")";
  }
  std::string temp_decl(const std::string& name, const std::string& value) const override {
    return name + " = " + value;
  }
  std::string assign(std::uint32_t slot, const std::string& value) const override {
    return "s[" + std::to_string(slot) + "] = " + value;
  }
  std::vector<std::string> raise(const std::string& code, const std::string& guard) const override {
    return {"if m_is_true(" + guard + "):", "    raise MError('" + code + "')"};
  }
  std::string if_open(const std::string& guard) const override { return "if m_is_true(" + guard + "):"; }
  std::string else_line() const override { return "else:"; }
  std::string if_close() const override { return ""; }
  std::string empty_body() const override { return "pass"; }
};

std::string layout_comment(const StorageLayout& layout, const char* open, const char* close) {
  std::ostringstream out;
  for (const auto& [name, e] : layout.entries) {
    out << open << "slot " << e.slot;
    if (e.length > 0) out << ".." << (e.slot + e.length - 1);
    out << ": " << name;
    if (e.length > 0) out << '[' << e.length << ']';
    out << close << '\n';
  }
  return out.str();
}

void check_identifier(const std::string& name) {
  if (name.size() > kMaxIdentifier) {
    throw Error(ErrorKind::IdentifierOverflow,
                "generated identifier '" + name + "' exceeds " + std::to_string(kMaxIdentifier) + " characters");
  }
}

}  // namespace

EmittedUnit emit_c(const BirProgram& program, const StorageLayout& layout, const EmitOptions& options) {
  EmittedUnit unit;
  unit.language = Language::C;
  unit.entry = options.prefix + "_compute";
  check_identifier(unit.entry);
  unit.total_slots = layout.total_slots;
  unit.manifest = build_manifest(program, layout);

  CEmitter em(layout, options);
  std::vector<std::string> calls = em.run(program.instrs, 1);

  std::ostringstream out;
  out << "/* Generated by mlc. C99; needs m_runtime.h and the C math library.\n"
         " * Compile without fast-math style options (for example with\n"
         " * -ffp-contract=off) so that every operation rounds as binary64. */\n";
  out << "#include \"m_runtime.h\"\n\n";
  out << "/* state layout: " << layout.total_slots << " slots */\n";
  out << layout_comment(layout, "/* ", " */");
  out << '\n';
  for (const auto& f : em.functions()) out << "static int " << f.name << "(m_value *s, const char **error_code);\n";
  if (!em.functions().empty()) out << '\n';
  for (const auto& f : em.functions()) {
    out << "static int " << f.name << "(m_value *s, const char **error_code)\n{\n";
    out << "    (void)error_code;\n";
    for (const auto& l : f.lines) out << l << '\n';
    out << "    return 0;\n}\n\n";
  }
  out << "int " << unit.entry
      << "(const m_value *inputs, m_value *outputs, m_value *state, const char **error_code)\n{\n";
  out << "    m_value *s = state;\n";
  out << "    unsigned long i;\n";
  if (layout.total_slots > 0) {
    out << "    for (i = 0; i < " << layout.total_slots << "UL; ++i) s[i] = m_undef();\n";
  }
  out << "    *error_code = 0;\n";
  for (const auto& m : unit.manifest) {
    if (m.role != "input") continue;
    if (m.length == 0) {
      out << "    s[" << m.slot << "] = inputs[" << m.index << "]; /* " << m.name << " */\n";
    } else {
      out << "    for (i = 0; i < " << m.length << "UL; ++i) s[" << m.slot << " + i] = inputs[" << m.index
          << " + i]; /* " << m.name << " */\n";
    }
  }
  for (const auto& l : calls) out << l << '\n';
  for (const auto& m : unit.manifest) {
    if (m.role != "output") continue;
    if (m.length == 0) {
      out << "    outputs[" << m.index << "] = s[" << m.slot << "]; /* " << m.name << " */\n";
    } else {
      out << "    for (i = 0; i < " << m.length << "UL; ++i) outputs[" << m.index << " + i] = s[" << m.slot
          << " + i]; /* " << m.name << " */\n";
    }
  }
  out << "    (void)inputs;\n    (void)outputs;\n    (void)s;\n    (void)i;\n";
  out << "    return 0;\n}\n";
  unit.source = out.str();
  return unit;
}

namespace {

constexpr const char* kPythonHelpers = R"(from math import floor


class MError(Exception):
    def __init__(self, code):
        Exception.__init__(self, code)
        self.code = code


def m_add(a, b):
    if a is None and b is None:
        return None
    return (0.0 if a is None else a) + (0.0 if b is None else b)


def m_sub(a, b):
    if a is None and b is None:
        return None
    return (0.0 if a is None else a) - (0.0 if b is None else b)


def m_mul(a, b):
    if a is None or b is None:
        return None
    return a * b


def m_div(a, b):
    if a is None or b is None:
        return None
    if b == 0.0:
        return 0.0
    return a / b


def m_cmp_le(a, b):
    return None if a is None or b is None else (1.0 if a <= b else 0.0)


def m_cmp_lt(a, b):
    return None if a is None or b is None else (1.0 if a < b else 0.0)


def m_cmp_gt(a, b):
    return None if a is None or b is None else (1.0 if a > b else 0.0)


def m_cmp_ge(a, b):
    return None if a is None or b is None else (1.0 if a >= b else 0.0)


def m_cmp_eq(a, b):
    return None if a is None or b is None else (1.0 if a == b else 0.0)


def m_cmp_ne(a, b):
    return None if a is None or b is None else (1.0 if a != b else 0.0)


def m_and(a, b):
    return None if a is None or b is None else (1.0 if a != 0.0 and b != 0.0 else 0.0)


def m_or(a, b):
    return None if a is None or b is None else (1.0 if a != 0.0 or b != 0.0 else 0.0)


def m_neg(a):
    return None if a is None else -a


def m_not(a):
    return None if a is None else (1.0 if a == 0.0 else 0.0)


def m_round(a):
    if a is None:
        return None
    s = a - 0.50005 if a < 0 else a + 0.50005
    if s != s or abs(s) >= 4503599627370496.0:
        return s + 0.0
    return float(int(s))


def m_truncate(a):
    if a is None:
        return None
    s = a + 0.000001
    if s != s or abs(s) >= 4503599627370496.0:
        return s
    return float(floor(s))


def m_abs(a):
    if a is None:
        return None
    return a if a >= 0.0 else -a


def m_pos(a):
    return None if a is None else (1.0 if a > 0.0 else 0.0)


def m_pos_or_null(a):
    return None if a is None else (1.0 if a >= 0.0 else 0.0)


def m_null(a):
    return None if a is None else (1.0 if a == 0.0 else 0.0)


def m_present(a):
    return 0.0 if a is None else 1.0


def m_min(a, b):
    if a is None and b is None:
        return None
    x = 0.0 if a is None else a
    y = 0.0 if b is None else b
    return y if y < x else x


def m_max(a, b):
    if a is None and b is None:
        return None
    x = 0.0 if a is None else a
    y = 0.0 if b is None else b
    return y if x < y else x


def m_is_true(a):
    return a is not None and a != 0.0


def m_select(g, a, b):
    if g is None:
        return None
    return a if g != 0.0 else b


def m_index(s, base, n, i):
    if i is None:
        return None
    if i < 0:
        return 0.0
    if not i < n:
        return None
    t = m_truncate(i)
    if not t < n:
        return None
    return s[base + int(t)]
)";

}  // namespace

EmittedUnit emit_python(const BirProgram& program, const StorageLayout& layout, const EmitOptions& options) {
  EmittedUnit unit;
  unit.language = Language::Python;
  unit.entry = "compute";
  unit.total_slots = layout.total_slots;
  unit.manifest = build_manifest(program, layout);

  PyEmitter em(layout, options);
  std::vector<std::string> calls = em.run(program.instrs, 1);

  std::ostringstream out;
  out << "# Generated by mlc. Undef is None.\n";
  out << "# state layout: " << layout.total_slots << " slots\n";
  out << layout_comment(layout, "# ", "");
  out << kPythonHelpers;
  for (const auto& f : em.functions()) {
    out << "\n\ndef " << f.name << "(s):\n";
    for (const auto& l : f.lines) out << l << '\n';
    if (f.lines.empty()) out << "    pass\n";
  }
  out << "\n\ndef compute(inputs):\n";
  out << "    s = [None] * " << layout.total_slots << '\n';
  for (const auto& m : unit.manifest) {
    if (m.role != "input") continue;
    out << "    v = inputs.get('" << m.name << "')\n";
    if (m.length == 0) {
      out << "    s[" << m.slot << "] = None if v is None else float(v)\n";
    } else {
      out << "    if v is not None:\n";
      out << "        for i in range(min(len(v), " << m.length << ")):\n";
      out << "            s[" << m.slot << " + i] = None if v[i] is None else float(v[i])\n";
    }
  }
  for (const auto& l : calls) out << l << '\n';
  out << "    return {";
  bool first = true;
  for (const auto& m : unit.manifest) {
    if (m.role != "output") continue;
    if (!first) out << ", ";
    first = false;
    out << "'" << m.name << "': ";
    if (m.length == 0) {
      out << "s[" << m.slot << "]";
    } else {
      out << "s[" << m.slot << ":" << (m.slot + m.length) << "]";
    }
  }
  out << "}\n";
  unit.source = out.str();
  return unit;
}

std::string manifest_jsonl(const EmittedUnit& unit) {
  std::string out;
  for (const auto& m : unit.manifest) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["slot"] = m.slot;
    j["role"] = m.role;
    j["index"] = m.index;
    j["length"] = m.length;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string emit_c_driver(const EmittedUnit& unit, const EmitOptions&) {
  const std::uint32_t in_w = std::max<std::uint32_t>(unit.input_width(), 1);
  const std::uint32_t out_w = std::max<std::uint32_t>(unit.output_width(), 1);
  const std::uint32_t slots = std::max<std::uint32_t>(unit.total_slots, 1);
  std::ostringstream out;
  out << "/* Generated by mlc: line driver for " << unit.entry << ". */\n"
      << "#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\n"
      << "#include \"m_runtime.h\"\n\n"
      << "int " << unit.entry
      << "(const m_value *inputs, m_value *outputs, m_value *state, const char **error_code);\n\n"
      << "static int read_token(FILE *f, char *buf, size_t cap)\n{\n"
      << "    int c;\n    size_t n = 0;\n"
      << "    do { c = fgetc(f); } while (c == ' ' || c == '\\t');\n"
      << "    if (c == EOF) return -1;\n"
      << "    if (c == '\\n') return 0;\n"
      << "    while (c != EOF && c != ' ' && c != '\\t' && c != '\\n') {\n"
      << "        if (n + 1 < cap) buf[n++] = (char)c;\n"
      << "        c = fgetc(f);\n    }\n"
      << "    buf[n] = 0;\n"
      << "    if (c == '\\n') ungetc(c, f);\n"
      << "    return 1;\n}\n\n"
      << "int main(void)\n{\n"
      << "    static m_value inputs[" << in_w << "], outputs[" << out_w << "], state[" << slots << "];\n"
      << "    char tok[64];\n"
      << "    for (;;) {\n"
      << "        unsigned long k = 0, i;\n"
      << "        const char *code = 0;\n"
      << "        int r;\n"
      << "        while ((r = read_token(stdin, tok, sizeof tok)) == 1) {\n"
      << "            if (k < " << in_w << "UL) {\n"
      << "                if (strcmp(tok, \"u\") == 0) {\n"
      << "                    inputs[k] = m_undef();\n"
      << "                } else {\n"
      << "                    unsigned long long bits = strtoull(tok, 0, 16);\n"
      << "                    double d;\n"
      << "                    memcpy(&d, &bits, sizeof d);\n"
      << "                    inputs[k] = m_num(d);\n"
      << "                }\n"
      << "            }\n"
      << "            ++k;\n"
      << "        }\n"
      << "        if (r < 0 && k == 0) break;\n"
      << "        if (" << unit.entry << "(inputs, outputs, state, &code)) {\n"
      << "            printf(\"error %s\\n\", code);\n"
      << "        } else {\n"
      << "            fputs(\"ok\", stdout);\n"
      << "            for (i = 0; i < " << unit.output_width() << "UL; ++i) {\n"
      << "                if (!outputs[i].def) {\n"
      << "                    fputs(\" u\", stdout);\n"
      << "                } else {\n"
      << "                    unsigned long long bits;\n"
      << "                    memcpy(&bits, &outputs[i].val, sizeof bits);\n"
      << "                    printf(\" %016llx\", bits);\n"
      << "                }\n"
      << "            }\n"
      << "            fputc('\\n', stdout);\n"
      << "        }\n"
      << "        if (r < 0) break;\n"
      << "    }\n"
      << "    return 0;\n}\n";
  return out.str();
}

std::string emit_python_driver(const EmittedUnit& unit, const std::string& module_name) {
  std::ostringstream out;
  out << "# Generated by mlc: line driver for " << module_name << '.' << unit.entry << ".\n"
      << "import os\nimport struct\nimport sys\n\n"
      << "sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))\n"
      << "import " << module_name << " as unit\n\n"
      << "INPUTS = [";
  bool first = true;
  for (const auto& m : unit.manifest) {
    if (m.role != "input") continue;
    if (!first) out << ", ";
    first = false;
    out << "('" << m.name << "', " << m.length << ")";
  }
  out << "]\nOUTPUTS = [";
  first = true;
  for (const auto& m : unit.manifest) {
    if (m.role != "output") continue;
    if (!first) out << ", ";
    first = false;
    out << "('" << m.name << "', " << m.length << ")";
  }
  out << "]\n\n"
      << "def dec(t):\n"
      << "    return None if t == 'u' else struct.unpack('<d', struct.pack('<Q', int(t, 16)))[0]\n\n\n"
      << "def enc(v):\n"
      << "    return 'u' if v is None else '%016x' % struct.unpack('<Q', struct.pack('<d', v))[0]\n\n\n"
      << "def main():\n"
      << "    out = []\n"
      << "    for line in sys.stdin:\n"
      << "        toks = line.split()\n"
      << "        k = 0\n"
      << "        inputs = {}\n"
      << "        for name, n in INPUTS:\n"
      << "            if n == 0:\n"
      << "                v = dec(toks[k])\n"
      << "                k += 1\n"
      << "                if v is not None:\n"
      << "                    inputs[name] = v\n"
      << "            else:\n"
      << "                inputs[name] = [dec(t) for t in toks[k:k + n]]\n"
      << "                k += n\n"
      << "        try:\n"
      << "            res = unit.compute(inputs)\n"
      << "        except unit.MError as e:\n"
      << "            out.append('error ' + e.code)\n"
      << "            continue\n"
      << "        words = ['ok']\n"
      << "        for name, n in OUTPUTS:\n"
      << "            v = res[name]\n"
      << "            if n == 0:\n"
      << "                words.append(enc(v))\n"
      << "            else:\n"
      << "                words.extend(enc(x) for x in v)\n"
      << "        out.append(' '.join(words))\n"
      << "    sys.stdout.write(''.join(l + '\\n' for l in out))\n\n\n"
      << "main()\n";
  return out.str();
}

std::string encode_driver_inputs(const EmittedUnit& unit, const Store& inputs) {
  std::string out;
  auto token = [&](const Value& v) {
    if (!out.empty()) out += ' ';
    out += v.is_undef() ? std::string("u") : bits_hex(v.get());
  };
  for (const auto& m : unit.manifest) {
    if (m.role != "input") continue;
    if (m.length == 0) {
      token(inputs.get(m.name));
      continue;
    }
    const auto* arr = inputs.array(m.name);
    for (std::uint32_t i = 0; i < m.length; ++i) token(arr && i < arr->size() ? (*arr)[i] : Value::undef());
  }
  return out;
}

RunOutcome decode_driver_outputs(const EmittedUnit& unit, const std::string& line) {
  std::istringstream in(line);
  std::string word;
  in >> word;
  if (word == "error") {
    std::string code;
    in >> code;
    return RunOutcome{RaisedError{code}};
  }
  if (word != "ok") throw Error(ErrorKind::Toolchain, "unexpected driver output: " + line);
  auto next = [&]() {
    std::string t;
    if (!(in >> t)) throw Error(ErrorKind::Toolchain, "short driver output: " + line);
    return t == "u" ? Value::undef() : Value(double_from_bits_hex(t));
  };
  Store out;
  for (const auto& m : unit.manifest) {
    if (m.role != "output") continue;
    if (m.length == 0) {
      out.set(m.name, next());
      continue;
    }
    std::vector<Value> values;
    for (std::uint32_t i = 0; i < m.length; ++i) values.push_back(next());
    out.set_array(m.name, std::move(values));
  }
  return RunOutcome{std::move(out)};
}

}  // namespace mlc
