#include <algorithm>
#include <atomic>
#include <bit>
#include <map>
#include <set>
#include <stdexcept>

#include "fourops/solver.hpp"

namespace fourops {

namespace debug {

namespace {
std::atomic<Fault> g_fault{Fault::None};
}

void set_fault(Fault f) { g_fault.store(f, std::memory_order_relaxed); }
Fault fault() { return g_fault.load(std::memory_order_relaxed); }

}  // namespace debug

namespace {

bool sorted_contains(std::span<const Value> sorted, Value v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

SubsetTable::SubsetTable(const Bag& bag) : bag_(bag) {
  const std::size_t n = bag_.size();
  const SubsetMask full = static_cast<SubsetMask>((1u << n) - 1);
  rep_.assign(std::size_t{1} << n, 0);
  tables_.resize(std::size_t{1} << n);
  partitions_.resize(std::size_t{1} << n);
  witness_cache_.resize(std::size_t{1} << n);

  std::map<std::vector<Value>, SubsetMask> first_with;
  for (SubsetMask s = 1; s <= full; ++s) {
    auto [it, inserted] = first_with.emplace(subset_values(s), s);
    rep_[s] = it->second;
  }
  for (SubsetMask s = 1; s <= full; ++s)
    if (rep_[s] == s) reps_.push_back(s);
  std::stable_sort(reps_.begin(), reps_.end(), [](SubsetMask a, SubsetMask b) {
    return std::popcount(a) < std::popcount(b);
  });

  const bool faulty = debug::fault() == debug::Fault::InexactDivision;
  for (SubsetMask s : reps_) {
    std::vector<Value>& out = tables_[s];
    if (std::popcount(s) == 1) {
      out.push_back(bag_[static_cast<std::size_t>(std::countr_zero(s))]);
      continue;
    }
    std::set<std::pair<SubsetMask, SubsetMask>> seen;
    // Sub-masks a of s with a < s ^ a enumerate each unordered partition once.
    for (SubsetMask a = (s - 1) & s; a != 0; a = (a - 1) & s) {
      const SubsetMask b = s ^ a;
      if (a > b) continue;
      const SubsetMask ra = rep_[a];
      const SubsetMask rb = rep_[b];
      if (!seen.emplace(std::min(ra, rb), std::max(ra, rb)).second) continue;
      partitions_[s].emplace_back(ra, rb);
      for (Value u : tables_[ra]) {
        for (Value w : tables_[rb]) {
          const Value hi = std::max(u, w);
          const Value lo = std::min(u, w);
          Value prod = 0;
          if (__builtin_mul_overflow(hi, lo, &prod)) throw std::overflow_error("intermediate value overflows 64 bits");
          out.push_back(hi + lo);
          out.push_back(prod);
          if (hi > lo) out.push_back(hi - lo);
          if (hi % lo == 0 || faulty) out.push_back(hi / lo);
        }
      }
    }
    std::sort(partitions_[s].begin(), partitions_[s].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
}

std::vector<Value> SubsetTable::subset_values(SubsetMask subset) const {
  std::vector<Value> out;
  for (std::size_t i = 0; i < bag_.size(); ++i)
    if (subset & (SubsetMask{1} << i)) out.push_back(bag_[i]);
  return out;
}

std::span<const Value> SubsetTable::values(SubsetMask subset) const {
  if (subset == 0 || subset >= subset_count()) throw std::out_of_range("subset mask out of range");
  return tables_[rep_[subset]];
}

bool SubsetTable::contains(SubsetMask subset, Value v) const {
  return sorted_contains(values(subset), v);
}

ReachMap SubsetTable::reach() const {
  ReachMap out;
  for (SubsetMask s : reps_) {
    const int ops = std::popcount(s) - 1;
    for (Value v : tables_[s]) out.emplace(v, ops);  // reps_ is popcount-ordered
  }
  return out;
}

const SubsetTable::Witness* SubsetTable::find_witness(SubsetMask rep, Value v) const {
  auto& cache = witness_cache_[rep];
  if (auto it = cache.find(v); it != cache.end()) return it->second.text.empty() ? nullptr : &it->second;
  Witness w = build_witness(rep, v);
  auto [it, inserted] = cache.emplace(v, std::move(w));
  return it->second.text.empty() ? nullptr : &it->second;
}

namespace {

// Lexicographic comparison of "(" + l + op + r + ")" against `best` without
// materializing the candidate.
bool candidate_less(const std::string& l, char op, const std::string& r, const std::string& best) {
  if (best.empty()) return true;
  const std::size_t total = l.size() + r.size() + 3;
  auto at = [&](std::size_t i) -> char {
    if (i == 0) return '(';
    i -= 1;
    if (i < l.size()) return l[i];
    i -= l.size();
    if (i == 0) return op;
    i -= 1;
    if (i < r.size()) return r[i];
    return ')';
  };
  const std::size_t n = std::min(total, best.size());
  for (std::size_t i = 0; i < n; ++i) {
    const char c = at(i);
    if (c != best[i]) return c < best[i];
  }
  return total < best.size();
}

}  // namespace

SubsetTable::Witness SubsetTable::build_witness(SubsetMask rep, Value v) const {
  if (!sorted_contains(tables_[rep], v)) return {};
  if (std::popcount(rep) == 1) return {Expression::leaf(v), std::to_string(v)};

  std::string best;
  Operator best_op = Operator::Add;
  const Witness* best_left = nullptr;
  const Witness* best_right = nullptr;

  // Consider node (op, lw, rw); commutative operands are put in text order.
  auto consider = [&](Operator op, const Witness* lw, const Witness* rw) {
    if (!lw || !rw) return;
    if ((op == Operator::Add || op == Operator::Mul) && rw->text < lw->text) std::swap(lw, rw);
    if (candidate_less(lw->text, operator_symbol(op), rw->text, best)) {
      best = "(" + lw->text + operator_symbol(op) + rw->text + ")";
      best_op = op;
      best_left = lw;
      best_right = rw;
    }
  };

  for (auto [ra, rb] : partitions_[rep]) {
    // Walk the smaller table and look the partner value up in the larger.
    SubsetMask x = ra, y = rb;
    if (tables_[x].size() > tables_[y].size()) std::swap(x, y);
    const std::span<const Value> ys = tables_[y];
    auto in_y = [&](Value w) { return w >= 1 && sorted_contains(ys, w); };
    for (Value u : tables_[x]) {
      if (Value w = v - u; in_y(w))
        consider(Operator::Add, find_witness(x, u), find_witness(y, w));
      if (v % u == 0)
        if (Value w = v / u; in_y(w)) consider(Operator::Mul, find_witness(x, u), find_witness(y, w));
      if (Value w = u - v; in_y(w))
        consider(Operator::Sub, find_witness(x, u), find_witness(y, w));
      if (Value w = v + u; in_y(w))
        consider(Operator::Sub, find_witness(y, w), find_witness(x, u));
      if (u % v == 0)
        if (Value w = u / v; in_y(w)) consider(Operator::Div, find_witness(x, u), find_witness(y, w));
      if (Value w = 0; !__builtin_mul_overflow(v, u, &w) && in_y(w))
        consider(Operator::Div, find_witness(y, w), find_witness(x, u));
    }
  }
  if (best.empty()) return {};
  return {Expression::node(best_op, best_left->expr, best_right->expr), std::move(best)};
}

std::optional<Expression> SubsetTable::witness(SubsetMask subset, Value v) const {
  if (subset == 0 || subset >= subset_count()) throw std::out_of_range("subset mask out of range");
  if (const Witness* w = find_witness(rep_[subset], v)) return w->expr;
  return std::nullopt;
}

const std::string& SubsetTable::witness_text(SubsetMask subset, Value v) const {
  static const std::string kEmpty;
  if (subset == 0 || subset >= subset_count()) throw std::out_of_range("subset mask out of range");
  if (const Witness* w = find_witness(rep_[subset], v)) return w->text;
  return kEmpty;
}

SubsetTable subset_dp(const Bag& bag) { return SubsetTable(bag); }

SolveResult solve(const SubsetTable& table, Value target) {
  SolveResult result;
  if (target < 1) return result;
  int size = 0;
  const std::string* best_text = nullptr;
  SubsetMask best_rep = 0;
  for (SubsetMask s : table.representatives()) {
    const int pc = std::popcount(s);
    if (size != 0 && pc > size) break;
    if (!table.contains(s, target)) continue;
    size = pc;
    result.minimal_value_subsets.push_back(table.subset_values(s));
    const std::string& text = table.witness_text(s, target);
    if (text.empty())
      throw std::logic_error("solver invariant violated: no witness for " + std::to_string(target) +
                             " over " + Bag(table.subset_values(s)).to_string());
    if (!best_text || text < *best_text) {
      best_text = &text;
      best_rep = s;
    }
  }
  if (size == 0) return result;
  std::sort(result.minimal_value_subsets.begin(), result.minimal_value_subsets.end());
  result.solvable = true;
  result.min_ops = size - 1;
  result.subset_size = size;
  result.witness = table.witness(best_rep, target);
  result.max_intermediate = max_intermediate(*result.witness);
  result.op_counts = count_operators(*result.witness);
  return result;
}

SolveResult solve(const Bag& bag, Value target) { return solve(SubsetTable(bag), target); }

std::map<Value, SolveResult> reachable_targets(const Bag& bag, Value lo, Value hi) {
  if (lo > hi) throw std::invalid_argument("empty target range");
  const SubsetTable table(bag);
  std::map<Value, SolveResult> out;
  for (Value t = lo; t <= hi; ++t) out.emplace(t, solve(table, t));
  return out;
}

}  // namespace fourops
