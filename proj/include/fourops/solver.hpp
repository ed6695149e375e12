#pragma once

// Exact reachability and minimal witnesses for a bag.
//
// Two independent formulations are provided: a memoized closure search over
// sorted value states, and a subset-indexed dynamic program that combines
// disjoint partitions. brute_force_oracle is a third, memo-free enumerator
// used for verification.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fourops/engine.hpp"

namespace fourops {

/// value -> minimum number of operations needed to obtain it.
using ReachMap = std::map<Value, int>;

using SubsetMask = std::uint32_t;

ReachMap closure_reach(const Bag& bag);

/// Subset DP over bag positions. Subsets holding the same value multiset share
/// one table. Witnesses are reconstructed on demand and cached, so a table
/// must not be queried from several threads at once.
class SubsetTable {
 public:
  explicit SubsetTable(const Bag& bag);

  const Bag& bag() const { return bag_; }
  std::size_t subset_count() const { return std::size_t{1} << bag_.size(); }

  /// Sorted values obtainable using exactly the elements of `subset`.
  std::span<const Value> values(SubsetMask subset) const;
  bool contains(SubsetMask subset, Value v) const;

  /// Lowest-numbered subset with the same value multiset as `subset`.
  SubsetMask representative(SubsetMask subset) const { return rep_[subset]; }
  /// Distinct representatives, by population count then numerically.
  std::span<const SubsetMask> representatives() const { return reps_; }
  std::vector<Value> subset_values(SubsetMask subset) const;

  /// Witness over exactly `subset` evaluating to v, in canonical orientation:
  /// the lexicographically smallest canonical form among all such witnesses.
  std::optional<Expression> witness(SubsetMask subset, Value v) const;
  /// canonical_form of witness(subset, v); empty when absent.
  const std::string& witness_text(SubsetMask subset, Value v) const;

  /// Union over subsets, each value tagged with its smallest |S| - 1.
  ReachMap reach() const;

 private:
  struct Witness {
    Expression expr;
    std::string text;
  };
  const Witness* find_witness(SubsetMask rep, Value v) const;
  Witness build_witness(SubsetMask rep, Value v) const;

  Bag bag_;
  std::vector<SubsetMask> rep_;
  std::vector<SubsetMask> reps_;
  std::vector<std::vector<Value>> tables_;
  // Unordered partitions (A, B) of each representative, deduplicated by the
  // representatives of the two sides.
  std::vector<std::vector<std::pair<SubsetMask, SubsetMask>>> partitions_;
  mutable std::vector<std::unordered_map<Value, Witness>> witness_cache_;
};

SubsetTable subset_dp(const Bag& bag);

struct SolveResult {
  bool solvable = false;
  std::optional<int> min_ops;
  std::optional<int> subset_size;
  std::optional<Expression> witness;
  /// Distinct value multisets (each sorted) of minimal subsets reaching the target.
  std::vector<std::vector<Value>> minimal_value_subsets;
  std::optional<Value> max_intermediate;
  OpCounts op_counts;
};

SolveResult solve(const SubsetTable& table, Value target);
SolveResult solve(const Bag& bag, Value target);

/// solve() for every target in [lo, hi], sharing one subset DP.
std::map<Value, SolveResult> reachable_targets(const Bag& bag, Value lo, Value hi);

/// Exhaustive pair-combination search without memoization. Bags of up to six
/// values only.
std::optional<int> brute_force_oracle(const Bag& bag, Value target);

namespace debug {

// Fault injection for mutation testing of the verifier. Affects the forward
// passes of subset_dp and closure_reach only; evaluation, witness search and
// the oracle keep the real rules.
enum class Fault { None, InexactDivision };

void set_fault(Fault f);
Fault fault();

}  // namespace debug

}  // namespace fourops
