#include "mlc/interp.hpp"

#include <charconv>
#include <sstream>

namespace mlc {

template <class S>
typename BasicStore<S>::V BasicStore<S>::get(std::string_view name) const {
  auto it = scalars_.find(name);
  return it == scalars_.end() ? V::undef() : it->second;
}

template <class S>
const std::vector<typename BasicStore<S>::V>* BasicStore<S>::array(std::string_view name) const {
  auto it = arrays_.find(name);
  return it == arrays_.end() ? nullptr : &it->second;
}

template <class S>
bool BasicStore<S>::contains(std::string_view name) const {
  return scalars_.find(name) != scalars_.end() || arrays_.find(name) != arrays_.end();
}

template <class S>
void BasicStore<S>::set(const std::string& name, V v) {
  arrays_.erase(name);
  scalars_.insert_or_assign(name, std::move(v));
}

template <class S>
void BasicStore<S>::set_array(const std::string& name, std::vector<V> values) {
  scalars_.erase(name);
  arrays_.insert_or_assign(name, std::move(values));
}

template <class S>
void BasicStore<S>::erase(const std::string& name) {
  scalars_.erase(name);
  arrays_.erase(name);
}

template <class S>
void BasicStore<S>::copy_from(const BasicStore& other, const std::string& name) {
  erase(name);
  if (auto it = other.scalars_.find(name); it != other.scalars_.end()) {
    scalars_.emplace(name, it->second);
  }
  if (auto it = other.arrays_.find(name); it != other.arrays_.end()) {
    arrays_.emplace(name, it->second);
  }
}

template class BasicStore<double>;
template class BasicStore<Rational>;

template <class S>
BasicValue<S> index_values(std::span<const BasicValue<S>> values, const BasicValue<S>& index) {
  using V = BasicValue<S>;
  using T = ScalarTraits<S>;
  if (index.is_undef()) return V::undef();
  const S& r = index.get();
  if (r < T::from_double(0.0)) return V(T::from_double(0.0));
  const double n = static_cast<double>(values.size());
  if (!(r < T::from_double(n))) return V::undef();
  double t = truncate_binary64(T::to_double(r));
  if (!(t < n)) return V::undef();
  return values[static_cast<std::size_t>(t)];
}

template <class S>
BasicValue<S> index_array(const std::vector<BasicValue<S>>* values, const BasicValue<S>& index) {
  if (!values) return index_values<S>({}, index);
  return index_values<S>(std::span<const BasicValue<S>>(*values), index);
}

template Value index_values(std::span<const Value>, const Value&);
template RationalValue index_values(std::span<const RationalValue>, const RationalValue&);
template Value index_array(const std::vector<Value>*, const Value&);
template RationalValue index_array(const std::vector<RationalValue>*, const RationalValue&);

namespace {

template <class S>
std::string show(const BasicValue<S>& v) {
  return format_value(to_binary64(v));
}

template <class S>
std::string show_array(const std::vector<BasicValue<S>>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += show(values[i]);
  }
  return out + "]";
}

// Evaluates M and M++ expressions. `Locals` is null for M rules.
template <class S>
class Evaluator {
 public:
  using V = BasicValue<S>;
  using Locals = std::map<std::string, V, std::less<>>;

  Evaluator(const BasicStore<S>& store, const Locals* locals, const KindIndex* kinds)
      : store_(store), locals_(locals), kinds_(kinds) {}

  V eval(const Expr& e, std::optional<std::uint32_t> index) const {
    switch (e.kind) {
      case Expr::Kind::Literal: return from_binary64<S>(e.literal);
      case Expr::Kind::IndexVar:
        if (!index) return V::undef();
        return V(ScalarTraits<S>::from_double(static_cast<double>(*index)));
      case Expr::Kind::Var:
        if (locals_ && scope_class(e.name) == ScopeClass::Local) {
          auto it = locals_->find(e.name);
          return it == locals_->end() ? V::undef() : it->second;
        }
        return store_.get(e.name);
      case Expr::Kind::Binary:
        return eval_binop(e.binop, eval(*e.args[0], index), eval(*e.args[1], index));
      case Expr::Kind::Unary: return eval_unop(e.unop, eval(*e.args[0], index));
      case Expr::Kind::Cond: {
        V guard = eval(*e.args[0], index);
        if (guard.is_undef()) return V::undef();
        return guard.is_true() ? eval(*e.args[1], index) : eval(*e.args[2], index);
      }
      case Expr::Kind::Call: {
        if (e.args.size() == 1) {
          V a = eval(*e.args[0], index);
          return eval_builtin<S>(e.fn, std::span<const V>(&a, 1));
        }
        V args[2] = {eval(*e.args[0], index), eval(*e.args[1], index)};
        return eval_builtin<S>(e.fn, std::span<const V>(args, 2));
      }
      case Expr::Kind::Index:
        return index_array(store_.array(e.name), eval(*e.args[0], index));
      case Expr::Kind::Exists: return exists(e.name);
    }
    return V::undef();
  }

 private:
  V exists(const std::string& kind) const {
    bool any = false;
    if (kinds_) {
      auto it = kinds_->find(kind);
      if (it != kinds_->end()) {
        for (const auto& name : it->second) {
          if (store_.get(name).is_defined()) any = true;
          if (const auto* arr = store_.array(name)) {
            for (const auto& v : *arr) any = any || v.is_defined();
          }
          if (any) break;
        }
      }
    }
    return V(ScalarTraits<S>::from_double(any ? 1.0 : 0.0));
  }

  const BasicStore<S>& store_;
  const Locals* locals_;
  const KindIndex* kinds_;
};

struct Raised {
  std::string code;
};

template <class S>
void exec_commands(BasicStore<S>& store, const OrderedProgram& program, const TraceHook* trace) {
  using V = BasicValue<S>;
  Evaluator<S> ev(store, nullptr, nullptr);
  for (std::size_t i = 0; i < program.commands.size(); ++i) {
    const Command& c = program.commands[i];
    switch (c.kind) {
      case Command::Kind::RaiseIf: {
        V guard = ev.eval(*c.expr, std::nullopt);
        if (trace) (*trace)(TraceEvent{std::to_string(i), c.target, show(guard)});
        if (guard.is_true()) throw Raised{c.target};
        break;
      }
      case Command::Kind::AssignScalar: {
        V v = ev.eval(*c.expr, std::nullopt);
        if (trace) (*trace)(TraceEvent{std::to_string(i), c.target, show(v)});
        store.set(c.target, std::move(v));
        break;
      }
      case Command::Kind::AssignArray: {
        std::vector<V> values;
        values.reserve(c.length);
        for (std::uint32_t x = 0; x < c.length; ++x) values.push_back(ev.eval(*c.expr, x));
        if (trace) (*trace)(TraceEvent{std::to_string(i), c.target, show_array(values)});
        store.set_array(c.target, std::move(values));
        break;
      }
    }
  }
}

template <class S>
class MppRunner {
 public:
  using V = BasicValue<S>;
  using Locals = typename Evaluator<S>::Locals;

  MppRunner(const CheckedProgram& program, const TraceHook* trace)
      : program_(program), mpp_(*program.mpp), trace_(trace) {}

  void call(const MppFunction& fn, BasicStore<S>& shared) {
    Locals locals;
    block(fn.body, shared, locals);
  }

 private:
  void block(const MppBlock& b, BasicStore<S>& shared, Locals& locals) {
    for (const auto& c : b) command(c, shared, locals);
  }

  void note(const MppCommand& c, const std::string& target, const std::string& value) {
    if (trace_) (*trace_)(TraceEvent{c.span.str(), target, value});
  }

  void command(const MppCommand& c, BasicStore<S>& shared, Locals& locals) {
    Evaluator<S> ev(shared, &locals, &program_.kinds);
    switch (c.kind) {
      case MppCommand::Kind::If: {
        V guard = ev.eval(*c.expr, std::nullopt);
        block(guard.is_true() ? c.then_block : c.else_block, shared, locals);
        break;
      }
      case MppCommand::Kind::Partition: {
        BasicStore<S> saved;
        const auto it = program_.kinds.find(c.name);
        static const std::set<std::string> kNone;
        const auto& members = it == program_.kinds.end() ? kNone : it->second;
        for (const auto& name : members) {
          saved.copy_from(shared, name);
          shared.erase(name);
        }
        block(c.then_block, shared, locals);
        for (const auto& name : members) shared.copy_from(saved, name);
        break;
      }
      case MppCommand::Kind::Assign: {
        V v = ev.eval(*c.expr, std::nullopt);
        note(c, c.name, show(v));
        if (scope_class(c.name) == ScopeClass::Local) {
          locals.insert_or_assign(c.name, std::move(v));
        } else {
          shared.set(c.name, std::move(v));
        }
        break;
      }
      case MppCommand::Kind::Delete:
        note(c, c.name, "undef");
        if (scope_class(c.name) == ScopeClass::Local) {
          locals.insert_or_assign(c.name, V::undef());
        } else {
          shared.erase(c.name);
        }
        break;
      case MppCommand::Kind::Call: {
        BasicStore<S> copy = shared;
        if (c.name == kCallM) {
          exec_commands(copy, program_.ordered, trace_);
        } else {
          call(*mpp_.find(c.name), copy);
        }
        for (const auto& t : c.targets) shared.copy_from(copy, t);
        break;
      }
    }
  }

  const CheckedProgram& program_;
  const MppProgram& mpp_;
  const TraceHook* trace_;
};

}  // namespace

template <class S>
BasicValue<S> eval_expr(const BasicStore<S>& store, const Expr& e,
                        std::optional<std::uint32_t> index) {
  return Evaluator<S>(store, nullptr, nullptr).eval(e, index);
}

template <class S>
BasicRunOutcome<S> run_commands(BasicStore<S> store, const OrderedProgram& program,
                                const TraceHook* trace) {
  try {
    exec_commands(store, program, trace);
  } catch (const Raised& r) {
    return BasicRunOutcome<S>{RaisedError{r.code}};
  }
  return BasicRunOutcome<S>{std::move(store)};
}

template <class S>
BasicRunOutcome<S> run_mpp(const CheckedProgram& program, std::string_view entry,
                           BasicStore<S> inputs, const TraceHook* trace) {
  if (!program.mpp) return run_commands(std::move(inputs), program.ordered, trace);
  const MppFunction* fn = program.mpp->find(entry);
  if (!fn) {
    throw Error(ErrorKind::UnknownFunction, "entry function " + std::string(entry) +
                                                " is not defined in the driver");
  }
  try {
    MppRunner<S>(program, trace).call(*fn, inputs);
  } catch (const Raised& r) {
    return BasicRunOutcome<S>{RaisedError{r.code}};
  }
  return BasicRunOutcome<S>{std::move(inputs)};
}

template Value eval_expr(const Store&, const Expr&, std::optional<std::uint32_t>);
template RationalValue eval_expr(const RationalStore&, const Expr&, std::optional<std::uint32_t>);
template RunOutcome run_commands(Store, const OrderedProgram&, const TraceHook*);
template RationalRunOutcome run_commands(RationalStore, const OrderedProgram&, const TraceHook*);
template RunOutcome run_mpp(const CheckedProgram&, std::string_view, Store, const TraceHook*);
template RationalRunOutcome run_mpp(const CheckedProgram&, std::string_view, RationalStore,
                                    const TraceHook*);

Store store_from_test(const TestCase& test, const OrderedProgram& program) {
  Store store;
  for (const auto& e : test.entries) {
    if (!e.index) {
      store.set(e.name, Value(e.value));
      continue;
    }
    std::vector<Value> values;
    if (const auto* existing = store.array(e.name)) {
      values = *existing;
    } else {
      const VarDecl* decl = program.find_var(e.name);
      values.assign(decl ? decl->length : *e.index + 1, Value::undef());
    }
    if (*e.index >= values.size()) values.resize(*e.index + 1, Value::undef());
    values[*e.index] = Value(e.value);
    store.set_array(e.name, std::move(values));
  }
  return store;
}

Value lookup_output(const Store& store, std::string_view key) {
  auto open = key.find('[');
  if (open == std::string_view::npos) return store.get(key);
  std::string_view name = key.substr(0, open);
  std::string_view digits = key.substr(open + 1, key.size() - open - 2);
  std::uint32_t i = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), i);
  const auto* arr = store.array(name);
  if (!arr || i >= arr->size()) return Value::undef();
  return (*arr)[i];
}

RationalStore to_rational(const Store& store) {
  RationalStore out;
  for (const auto& [name, v] : store.scalars()) out.set(name, from_binary64<Rational>(v));
  for (const auto& [name, values] : store.arrays()) {
    std::vector<RationalValue> converted;
    for (const auto& v : values) converted.push_back(from_binary64<Rational>(v));
    out.set_array(name, std::move(converted));
  }
  return out;
}

Store to_binary64(const RationalStore& store) {
  Store out;
  for (const auto& [name, v] : store.scalars()) out.set(name, to_binary64(v));
  for (const auto& [name, values] : store.arrays()) {
    std::vector<Value> converted;
    for (const auto& v : values) converted.push_back(to_binary64(v));
    out.set_array(name, std::move(converted));
  }
  return out;
}

RunOutcome run_program(const CheckedProgram& program, std::string_view entry,
                       const Store& inputs, NumericMode mode, const TraceHook* trace) {
  if (mode == NumericMode::Binary64) return run_mpp(program, entry, inputs, trace);
  RationalRunOutcome r = run_mpp(program, entry, to_rational(inputs), trace);
  if (r.raised()) return RunOutcome{r.error()};
  return RunOutcome{to_binary64(r.store())};
}

TestReport check_outcome(const TestCase& test, const RunOutcome& outcome) {
  TestReport report;
  report.name = test.name;
  if (outcome.raised()) report.raised = outcome.error().code;
  if (test.expected_error) {
    if (!outcome.raised()) {
      report.reason = "no error raised";
    } else if (outcome.error().code != *test.expected_error) {
      report.reason = "raised " + outcome.error().code + ", expected " + *test.expected_error;
    }
  } else if (outcome.raised()) {
    report.reason = "unexpected error " + outcome.error().code;
  } else {
    for (const auto& [name, want] : test.expected) {
      Value got = lookup_output(outcome.store(), name);
      if (!(got == want)) report.diffs.push_back(OutputDiff{name, want, got});
    }
    if (!report.diffs.empty()) {
      const auto& d = report.diffs.front();
      report.reason = d.name + ": expected " + format_value(d.expected) + ", got " +
                      format_value(d.actual);
    }
  }
  report.passed = report.reason.empty();
  return report;
}

TestReport run_test(const TestCase& test, const CheckedProgram& program, std::string_view entry,
                    NumericMode mode) {
  Store inputs = store_from_test(test, program.ordered);
  return check_outcome(test, run_program(program, entry, inputs, mode));
}

std::string describe_variable(const Store& store, std::string_view name) {
  if (const auto* arr = store.array(name)) return show_array(*arr);
  return format_value(store.get(name));
}

}  // namespace mlc
