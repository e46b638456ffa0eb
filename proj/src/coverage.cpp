#include <algorithm>
#include <sstream>

#include "mlc/harness.hpp"

namespace mlc {

namespace {

void collect_assigns(const std::vector<BirInstr>& instrs, std::vector<const BirInstr*>& out) {
  for (const auto& i : instrs) {
    switch (i.kind) {
      case BirInstr::Kind::Assign: out.push_back(&i); break;
      case BirInstr::Kind::Raise: break;
      case BirInstr::Kind::Cond:
        collect_assigns(i.then_block, out);
        collect_assigns(i.else_block, out);
        break;
    }
  }
}

std::string value_class(const Value& v) { return v.is_undef() ? "undef" : bits_hex(v.get()); }

std::string bucket_of(std::size_t distinct) {
  if (distinct >= kCoverageCap) return "16+";
  if (distinct >= 3) return "3+";
  return std::to_string(distinct);
}

}  // namespace

std::map<std::string, std::size_t> CoverageReport::buckets() const {
  std::map<std::string, std::size_t> out{{"0", 0}, {"1", 0}, {"2", 0}, {"3+", 0}, {"16+", 0}};
  for (const auto& r : rows) ++out[bucket_of(r.distinct)];
  return out;
}

std::string CoverageReport::csv() const {
  std::ostringstream out;
  out << "index,target,span,distinct\n";
  for (const auto& r : rows) {
    out << r.index << ',' << r.target << ',' << r.span << ',';
    if (r.distinct >= kCoverageCap) {
      out << kCoverageCap << '+';
    } else {
      out << r.distinct;
    }
    out << '\n';
  }
  return out.str();
}

std::string CoverageReport::bucket_csv() const {
  std::ostringstream out;
  out << "bucket,assignments\n";
  const auto b = buckets();
  for (const char* k : {"0", "1", "2", "3+", "16+"}) out << k << ',' << b.at(k) << '\n';
  return out.str();
}

CoverageRecorder::CoverageRecorder(const BirProgram& program) : runner_(program) {
  std::vector<const BirInstr*> assigns;
  collect_assigns(program.instrs, assigns);
  ordinal_to_row_.assign(assigns.size(), static_cast<std::size_t>(-1));
  for (std::size_t k = 0; k < assigns.size(); ++k) {
    const BirInstr& i = *assigns[k];
    if (i.origin != BirInstr::Origin::Rule && i.origin != BirInstr::Origin::Driver) continue;
    ordinal_to_row_[k] = rows_.size();
    CoverageRow row;
    row.index = rows_.size();
    row.target = i.target + (i.element ? "[" + std::to_string(*i.element) + "]" : "");
    row.span = i.span.known() ? i.span.str() : "";
    rows_.push_back(std::move(row));
  }
}

CoverageSignature CoverageRecorder::signature(const Store& inputs, RunOutcome* outcome) const {
  CoverageSignature sig;
  BirAssignHook hook = [&](std::size_t ordinal, const BirInstr&, const Value& v) {
    const std::size_t row = ordinal_to_row_[ordinal];
    if (row != static_cast<std::size_t>(-1)) sig.emplace(row, value_class(v));
  };
  RunOutcome r = runner_.run(inputs, &hook);
  if (outcome) *outcome = std::move(r);
  return sig;
}

CoverageReport CoverageRecorder::report(const std::vector<CoverageSignature>& signatures) const {
  CoverageReport rep;
  rep.rows = rows_;
  std::vector<std::set<std::string>> seen(rows_.size());
  for (const auto& sig : signatures) {
    for (const auto& [row, value] : sig) {
      if (seen[row].size() < kCoverageCap) seen[row].insert(value);
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) rep.rows[r].distinct = seen[r].size();
  return rep;
}

CoverageReport measure_coverage(const BirProgram& program, const std::vector<Store>& inputs) {
  CoverageRecorder rec(program);
  std::vector<CoverageSignature> sigs(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) { sigs[i] = rec.signature(inputs[i]); });
  return rec.report(sigs);
}

std::vector<std::size_t> minimize_signatures(const std::vector<CoverageSignature>& signatures) {
  CoverageSignature uncovered;
  for (const auto& s : signatures) uncovered.insert(s.begin(), s.end());
  std::vector<std::size_t> kept;
  std::vector<char> used(signatures.size(), 0);
  while (!uncovered.empty()) {
    std::size_t best = 0;
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < signatures.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (const auto& e : signatures[i]) gain += uncovered.count(e);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best_gain == 0) break;
    used[best] = 1;
    kept.push_back(best);
    for (const auto& e : signatures[best]) uncovered.erase(e);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<TestCase> minimize_corpus(const std::vector<TestCase>& tests, const CheckedProgram& program,
                                      std::string_view entry) {
  const BirProgram bir = inline_program(program, all_assumptions(program.source), entry);
  CoverageRecorder rec(bir);
  const std::vector<Store> stores = test_stores(program, tests);
  std::vector<CoverageSignature> sigs(tests.size());
  parallel_for(tests.size(), [&](std::size_t i) { sigs[i] = rec.signature(stores[i]); });
  std::vector<TestCase> out;
  for (std::size_t i : minimize_signatures(sigs)) out.push_back(tests[i]);
  return out;
}

}  // namespace mlc
