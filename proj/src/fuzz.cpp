#include <algorithm>
#include <random>

#include "mlc/harness.hpp"

namespace mlc {

namespace {

struct Slot {
  std::string name;
  std::optional<std::uint32_t> index;
};

std::vector<Slot> input_slots(const CheckedProgram& program, const AssumptionSpec* spec) {
  std::vector<Slot> out;
  for (const auto& v : program.ordered.vars) {
    if (v.category != VarCategory::Input) continue;
    if (spec && !spec->inputs.count(v.name)) continue;
    if (v.is_array()) {
      for (std::uint32_t i = 0; i < v.length; ++i) out.push_back(Slot{v.name, i});
    } else {
      out.push_back(Slot{v.name, std::nullopt});
    }
  }
  return out;
}

class Mutator {
 public:
  Mutator(const std::vector<TestCase>& seeds, const CheckedProgram& program, const MutationPolicy& policy,
          const AssumptionSpec* spec)
      : seeds_(seeds), policy_(policy), slots_(input_slots(program, spec)), rng_(policy.seed) {
    for (const auto& t : seeds) {
      for (const auto& e : t.entries) pool_.push_back(e.value);
    }
    std::sort(pool_.begin(), pool_.end());
    pool_.erase(std::unique(pool_.begin(), pool_.end()), pool_.end());
    if (policy.drop) actions_.push_back(Action::Drop);
    if (policy.zero) actions_.push_back(Action::Zero);
    if (policy.scale && !policy.factors.empty()) actions_.push_back(Action::Scale);
    if (policy.pool && !pool_.empty()) actions_.push_back(Action::Pool);
  }

  // A mutated copy of a random seed, named after it.
  TestCase next(std::size_t serial) {
    const TestCase& seed = seeds_[pick(seeds_.size())];
    TestCase t;
    t.name = seed.name + "_m" + std::to_string(serial);
    t.entries = seed.entries;
    if (slots_.empty() || actions_.empty()) return t;
    const std::size_t count = 1 + pick(std::max<std::size_t>(policy_.max_mutations, 1));
    for (std::size_t k = 0; k < count; ++k) mutate(t.entries, slots_[pick(slots_.size())]);
    std::sort(t.entries.begin(), t.entries.end(), [](const TestEntry& a, const TestEntry& b) {
      return std::tie(a.name, a.index) < std::tie(b.name, b.index);
    });
    return t;
  }

 private:
  enum class Action { Drop, Zero, Scale, Pool };

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  void mutate(std::vector<TestEntry>& entries, const Slot& slot) {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const TestEntry& e) { return e.name == slot.name && e.index == slot.index; });
    switch (actions_[pick(actions_.size())]) {
      case Action::Drop:
        if (it != entries.end()) entries.erase(it);
        return;
      case Action::Zero: set(entries, it, slot, 0.0); return;
      case Action::Scale: {
        const double f = policy_.factors[pick(policy_.factors.size())];
        const double base = it != entries.end() ? it->value : pool_.empty() ? 1.0 : pool_[pick(pool_.size())];
        set(entries, it, slot, base * f + 0.0);
        return;
      }
      case Action::Pool: set(entries, it, slot, pool_[pick(pool_.size())]); return;
    }
  }

  static void set(std::vector<TestEntry>& entries, std::vector<TestEntry>::iterator it, const Slot& slot, double v) {
    if (it != entries.end()) {
      it->value = v;
    } else {
      entries.push_back(TestEntry{slot.name, slot.index, v});
    }
  }

  const std::vector<TestCase>& seeds_;
  const MutationPolicy& policy_;
  std::vector<Slot> slots_;
  std::vector<double> pool_;
  std::vector<Action> actions_;
  std::mt19937_64 rng_;
};

std::map<std::string, Value> expected_outputs(const CheckedProgram& program, const Store& store) {
  std::map<std::string, Value> out;
  for (const auto& v : program.ordered.vars) {
    if (v.category != VarCategory::Output) continue;
    if (v.is_array()) {
      for (std::uint32_t i = 0; i < v.length; ++i) {
        std::string key = v.name + "[" + std::to_string(i) + "]";
        out[key] = lookup_output(store, key);
      }
    } else {
      out[v.name] = store.get(v.name);
    }
  }
  return out;
}

}  // namespace

std::vector<TestCase> mutate_tests(const std::vector<TestCase>& seeds, const MutationPolicy& policy, std::size_t n,
                                   const CheckedProgram& program, std::string_view entry) {
  std::vector<TestCase> out;
  if (n == 0) return out;
  if (seeds.empty()) throw Error(ErrorKind::Starved, "no seed tests to mutate");
  Mutator mut(seeds, program, policy, nullptr);
  const std::size_t budget = n * std::max<std::size_t>(policy.attempts_per_test, 1);
  for (std::size_t attempt = 0; attempt < budget && out.size() < n; ++attempt) {
    TestCase t = mut.next(attempt);
    RunOutcome r = run_mpp<double>(program, entry, store_from_test(t, program.ordered));
    if (r.raised()) continue;
    t.expected = expected_outputs(program, r.store());
    if (t.expected.empty()) continue;
    out.push_back(std::move(t));
  }
  if (out.size() < n) {
    throw Error(ErrorKind::Starved, "only " + std::to_string(out.size()) + " valid tests out of " +
                                        std::to_string(budget) + " candidates (wanted " + std::to_string(n) + ")");
  }
  return out;
}

std::vector<Store> fuzz_inputs(const std::vector<TestCase>& seeds, const CheckedProgram& program, std::size_t n,
                               std::uint64_t seed, const AssumptionSpec* spec) {
  std::vector<Store> out;
  if (n == 0 || seeds.empty()) return out;
  MutationPolicy policy;
  policy.seed = seed;
  policy.max_mutations = 6;
  Mutator mut(seeds, program, policy, spec);
  for (std::size_t k = 0; k < n; ++k) {
    TestCase t = mut.next(k);
    if (spec) {
      std::erase_if(t.entries, [&](const TestEntry& e) { return !spec->inputs.count(e.name); });
    }
    out.push_back(store_from_test(t, program.ordered));
  }
  return out;
}

}  // namespace mlc
