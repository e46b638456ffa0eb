#include "mlc/sema.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <queue>
#include <sstream>
#include <tuple>

namespace mlc {

const VarDecl* OrderedProgram::find_var(std::string_view name) const {
  auto it = var_index.find(name);
  return it == var_index.end() ? nullptr : &vars[it->second];
}

std::optional<Shape> TypeEnv::shape(std::string_view name) const {
  auto it = shapes.find(std::string(name));
  if (it == shapes.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string> find_cycle(const std::map<std::string, std::set<std::string>>& deps) {
  // Every remaining node still depends on another remaining node, so following
  // the smallest dependency from the smallest node must loop.
  std::vector<std::string> path;
  std::map<std::string, std::size_t> seen;
  std::string cur = deps.begin()->first;
  while (!seen.count(cur)) {
    seen[cur] = path.size();
    path.push_back(cur);
    const auto& next = deps.at(cur);
    cur = *next.begin();
  }
  std::vector<std::string> cycle(path.begin() + static_cast<std::ptrdiff_t>(seen[cur]),
                                 path.end());
  std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
  return cycle;
}

}  // namespace

OrderedProgram order_rules(const MProgram& program) {
  OrderedProgram out;
  out.vars = program.vars;
  out.errors = program.errors;
  for (std::size_t i = 0; i < out.vars.size(); ++i) {
    out.var_index.emplace(out.vars[i].name, i);
    if (out.vars[i].kind) out.kinds[out.vars[i].name] = *out.vars[i].kind;
  }

  const auto& cmds = program.commands;
  std::map<std::string, std::size_t> def;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (cmds[i].kind == Command::Kind::RaiseIf) continue;
    auto [it, inserted] = def.emplace(cmds[i].target, i);
    if (!inserted) {
      const Command& first = cmds[it->second];
      if (first.kind != cmds[i].kind || first.length != cmds[i].length) {
        throw Error(ErrorKind::ShapeMismatch,
                    cmds[i].target + " is assigned with two different shapes (first at " +
                        first.span.str() + ")",
                    cmds[i].span);
      }
      throw Error(ErrorKind::DuplicateDefinition,
                  cmds[i].target + " is assigned more than once (first at " +
                      cmds[it->second].span.str() + ")",
                  cmds[i].span);
    }
  }

  // Edges run from a definition to each rule reading it; raise-ifs are also
  // chained to keep their source order.
  std::vector<std::vector<std::size_t>> users(cmds.size());
  std::vector<std::size_t> pending(cmds.size(), 0);
  std::vector<std::set<std::string>> reads(cmds.size());
  std::optional<std::size_t> last_raise;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    collect_reads(*cmds[i].expr, reads[i]);
    for (const auto& r : reads[i]) {
      auto it = def.find(r);
      if (it == def.end()) continue;
      users[it->second].push_back(i);
      ++pending[i];
    }
    if (cmds[i].kind == Command::Kind::RaiseIf) {
      if (last_raise) {
        users[*last_raise].push_back(i);
        ++pending[i];
      }
      last_raise = i;
    }
  }

  // Ready queue ordered by (assignment?, raise sequence or target name).
  using Key = std::tuple<bool, std::size_t, std::string, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  auto key = [&](std::size_t i) {
    bool is_assign = cmds[i].kind != Command::Kind::RaiseIf;
    return Key{is_assign, is_assign ? 0 : i, is_assign ? cmds[i].target : "", i};
  };
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (pending[i] == 0) ready.push(key(i));
  }
  std::vector<bool> done(cmds.size(), false);
  while (!ready.empty()) {
    std::size_t i = std::get<3>(ready.top());
    ready.pop();
    done[i] = true;
    if (cmds[i].kind != Command::Kind::RaiseIf) {
      out.var_to_def[cmds[i].target] = out.commands.size();
    }
    out.commands.push_back(cmds[i]);
    for (std::size_t u : users[i]) {
      if (--pending[u] == 0) ready.push(key(u));
    }
  }

  if (out.commands.size() != cmds.size()) {
    std::map<std::string, std::set<std::string>> deps;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (done[i] || cmds[i].kind == Command::Kind::RaiseIf) continue;
      auto& d = deps[cmds[i].target];
      for (const auto& r : reads[i]) {
        auto it = def.find(r);
        if (it != def.end() && !done[it->second]) d.insert(r);
      }
    }
    // Drop rules that merely wait on a cycle without being part of one.
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = deps.begin(); it != deps.end();) {
        std::erase_if(it->second, [&](const std::string& s) { return !deps.count(s); });
        if (it->second.empty()) {
          it = deps.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    std::vector<std::string> cycle = find_cycle(deps);
    throw CyclicDefinition(cycle, cmds[def.at(cycle.front())].span);
  }
  return out;
}

namespace {

class ShapeChecker {
 public:
  explicit ShapeChecker(TypeEnv& env) : env_(env) {}

  void expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Var:
        if (env_.shape(e.name) == Shape::Array) {
          throw Error(ErrorKind::ArrayAsScalar,
                      "array " + e.name + " used where a scalar is expected", e.span);
        }
        break;
      case Expr::Kind::Index:
        if (env_.shape(e.name) == Shape::Scalar) {
          throw Error(ErrorKind::ScalarIndexed, "scalar " + e.name + " cannot be indexed",
                      e.span);
        }
        break;
      case Expr::Kind::Call:
        if (static_cast<int>(e.args.size()) != arity(e.fn)) {
          throw Error(ErrorKind::BadArity,
                      std::string(to_string(e.fn)) + " takes " + std::to_string(arity(e.fn)) +
                          " argument(s), got " + std::to_string(e.args.size()),
                      e.span);
        }
        break;
      default:
        break;
    }
    for (const auto& a : e.args) expr(*a);
  }

  void bind(const std::string& name, Shape shape, std::uint32_t length, const SourceSpan& span) {
    auto current = env_.shape(name);
    if (current && *current != shape) {
      throw Error(ErrorKind::ShapeMismatch,
                  name + " is " + (*current == Shape::Array ? "an array" : "a scalar") +
                      " but is assigned as " + (shape == Shape::Array ? "an array" : "a scalar"),
                  span);
    }
    if (shape == Shape::Array) {
      auto it = env_.lengths.find(name);
      if (it != env_.lengths.end() && it->second != length) {
        throw Error(ErrorKind::ShapeMismatch,
                    name + " has length " + std::to_string(it->second) +
                        " but is assigned with length " + std::to_string(length),
                    span);
      }
      env_.lengths[name] = length;
    }
    env_.shapes[name] = shape;
  }

 private:
  TypeEnv& env_;
};

}  // namespace

TypeEnv typecheck(const OrderedProgram& ordered) {
  TypeEnv env;
  ShapeChecker checker(env);
  for (const auto& v : ordered.vars) {
    checker.bind(v.name, v.is_array() ? Shape::Array : Shape::Scalar, v.length, v.span);
  }
  for (const auto& c : ordered.commands) {
    checker.expr(*c.expr);
    switch (c.kind) {
      case Command::Kind::RaiseIf: break;
      case Command::Kind::AssignScalar: checker.bind(c.target, Shape::Scalar, 0, c.span); break;
      case Command::Kind::AssignArray:
        checker.bind(c.target, Shape::Array, c.length, c.span);
        break;
    }
  }
  return env;
}

KindIndex build_kind_index(std::span<const VarDecl> decls) {
  KindIndex index;
  for (const auto& v : decls) {
    if (v.kind) index[*v.kind].insert(v.name);
  }
  return index;
}

namespace {

class MppChecker {
 public:
  MppChecker(const TypeEnv& env, const KindIndex& kinds) : env_(env), kinds_(kinds) {}

  void function(const MppFunction& fn) {
    std::set<std::string> assigned;
    block(fn.body, assigned);
  }

 private:
  void block(const MppBlock& b, std::set<std::string>& assigned) {
    for (const auto& c : b) command(c, assigned);
  }

  void command(const MppCommand& c, std::set<std::string>& assigned) {
    switch (c.kind) {
      case MppCommand::Kind::If: {
        expr(*c.expr, assigned);
        std::set<std::string> then_set = assigned;
        std::set<std::string> else_set = assigned;
        block(c.then_block, then_set);
        block(c.else_block, else_set);
        std::set<std::string> both;
        std::set_intersection(then_set.begin(), then_set.end(), else_set.begin(),
                              else_set.end(), std::inserter(both, both.end()));
        assigned = std::move(both);
        break;
      }
      case MppCommand::Kind::Partition:
        known_kind(c.name, c.span);
        block(c.then_block, assigned);
        break;
      case MppCommand::Kind::Assign:
        expr(*c.expr, assigned);
        if (scope_class(c.name) == ScopeClass::Local) {
          assigned.insert(c.name);
        } else if (env_.shape(c.name) == Shape::Array) {
          throw Error(ErrorKind::ShapeMismatch, "array " + c.name + " assigned a scalar",
                      c.span);
        }
        break;
      case MppCommand::Kind::Delete:
        if (scope_class(c.name) == ScopeClass::Local) assigned.insert(c.name);
        break;
      case MppCommand::Kind::Call: break;
    }
  }

  void expr(const Expr& e, const std::set<std::string>& assigned) {
    switch (e.kind) {
      case Expr::Kind::Var:
        if (scope_class(e.name) == ScopeClass::Local) {
          if (!assigned.count(e.name)) {
            throw Error(ErrorKind::UninitializedLocal,
                        "local " + e.name + " may be read before it is assigned", e.span);
          }
        } else if (env_.shape(e.name) == Shape::Array) {
          throw Error(ErrorKind::ArrayAsScalar,
                      "array " + e.name + " used where a scalar is expected", e.span);
        }
        break;
      case Expr::Kind::Exists: known_kind(e.name, e.span); break;
      case Expr::Kind::Call:
        if (static_cast<int>(e.args.size()) != arity(e.fn)) {
          throw Error(ErrorKind::BadArity,
                      std::string(to_string(e.fn)) + " takes " + std::to_string(arity(e.fn)) +
                          " argument(s)",
                      e.span);
        }
        break;
      default: break;
    }
    for (const auto& a : e.args) expr(*a, assigned);
  }

  void known_kind(const std::string& kind, const SourceSpan& span) {
    if (!kinds_.count(kind)) throw Error(ErrorKind::UnknownKind, "unknown kind " + kind, span);
  }

  const TypeEnv& env_;
  const KindIndex& kinds_;
};

void collect_callees(const MppBlock& b, std::vector<const MppCommand*>& out) {
  for (const auto& c : b) {
    if (c.kind == MppCommand::Kind::Call && c.name != kCallM) out.push_back(&c);
    collect_callees(c.then_block, out);
    collect_callees(c.else_block, out);
  }
}

void check_recursion(const MppProgram& mpp) {
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> marks;
  std::vector<std::string> stack;
  std::function<void(const MppFunction&)> visit = [&](const MppFunction& fn) {
    marks[fn.name] = Mark::Active;
    stack.push_back(fn.name);
    std::vector<const MppCommand*> calls;
    collect_callees(fn.body, calls);
    for (const auto* call : calls) {
      const MppFunction* callee = mpp.find(call->name);
      if (!callee) {
        throw Error(ErrorKind::UnknownFunction, "call to undeclared function " + call->name,
                    call->span);
      }
      Mark m = marks[callee->name];
      if (m == Mark::Active) {
        std::string path;
        auto start = std::find(stack.begin(), stack.end(), callee->name);
        for (auto it = start; it != stack.end(); ++it) path += *it + " -> ";
        throw Error(ErrorKind::RecursiveCall, "recursive call: " + path + callee->name,
                    call->span);
      }
      if (m == Mark::None) visit(*callee);
    }
    stack.pop_back();
    marks[fn.name] = Mark::Done;
  };
  for (const auto& fn : mpp.functions) {
    if (marks[fn.name] == Mark::None) visit(fn);
  }
}

}  // namespace

void check_mpp(const MppProgram& mpp, const TypeEnv& env, const KindIndex& kinds) {
  check_recursion(mpp);
  MppChecker checker(env, kinds);
  for (const auto& fn : mpp.functions) checker.function(fn);
}

CheckedProgram check(MProgram program, std::optional<MppProgram> mpp) {
  CheckedProgram out;
  out.ordered = order_rules(program);
  out.env = typecheck(out.ordered);
  out.kinds = build_kind_index(program.vars);
  if (mpp) check_mpp(*mpp, out.env, out.kinds);
  out.source = std::move(program);
  out.mpp = std::move(mpp);
  return out;
}

std::string emit_order(const OrderedProgram& ordered) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ordered.commands.size(); ++i) {
    const Command& c = ordered.commands[i];
    std::set<std::string> reads;
    collect_reads(*c.expr, reads);
    out << i << '\t' << c.target << '\t';
    bool first = true;
    for (const auto& r : reads) {
      out << (first ? "" : ",") << r;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mlc
