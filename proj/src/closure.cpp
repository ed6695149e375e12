#include <algorithm>
#include <array>
#include <stdexcept>
#include <unordered_set>

#include "fourops/solver.hpp"

namespace fourops {

namespace {

// Sorted working multiset; unused slots stay zero so equal states compare equal.
struct State {
  std::array<Value, Bag::kMaxSize> v{};
  std::uint8_t size = 0;
  friend bool operator==(const State&, const State&) = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const {
    std::size_t h = s.size;
    for (std::size_t i = 0; i < s.size; ++i) h = (h ^ static_cast<std::size_t>(s.v[i])) * 0x100000001b3ULL;
    return h;
  }
};

class ClosureSearch {
 public:
  explicit ClosureSearch(const Bag& bag) : n_(static_cast<int>(bag.size())) {
    State start;
    start.size = static_cast<std::uint8_t>(bag.size());
    for (std::size_t i = 0; i < bag.size(); ++i) {
      start.v[i] = bag[i];
      record(bag[i], 0);
    }
    faulty_ = debug::fault() == debug::Fault::InexactDivision;
    expand(start);
  }

  ReachMap take() { return std::move(reach_); }

 private:
  void record(Value v, int ops) {
    auto [it, inserted] = reach_.emplace(v, ops);
    if (!inserted && ops < it->second) it->second = ops;
  }

  // Successor of `s` with positions i < j replaced by `r`.
  static State replace_pair(const State& s, std::size_t i, std::size_t j, Value r) {
    State next;
    next.size = static_cast<std::uint8_t>(s.size - 1);
    std::size_t k = 0;
    bool placed = false;
    for (std::size_t p = 0; p < s.size; ++p) {
      if (p == i || p == j) continue;
      if (!placed && r <= s.v[p]) {
        next.v[k++] = r;
        placed = true;
      }
      next.v[k++] = s.v[p];
    }
    if (!placed) next.v[k++] = r;
    return next;
  }

  void expand(const State& s) {
    // Every state of size k has consumed n - k operations.
    const int ops = n_ - s.size + 1;
    std::array<Value, 4> results{};
    // Only the first index pair of each distinct value pair is expanded.
    for (std::size_t i = 0; i < s.size; ++i) {
      if (i > 0 && s.v[i] == s.v[i - 1]) continue;
      for (std::size_t j = i + 1; j < s.size; ++j) {
        if (j > i + 1 && s.v[j] == s.v[j - 1]) continue;
        const Value lo = s.v[i];
        const Value hi = s.v[j];
        std::size_t count = 0;
        Value prod = 0;
        if (__builtin_mul_overflow(hi, lo, &prod)) throw std::overflow_error("intermediate value overflows 64 bits");
        results[count++] = hi + lo;
        results[count++] = prod;
        if (hi > lo) results[count++] = hi - lo;
        if (hi % lo == 0 || faulty_) results[count++] = hi / lo;
        for (std::size_t k = 0; k < count; ++k) {
          record(results[k], ops);
          if (s.size <= 2) continue;  // successor is a single value
          State next = replace_pair(s, i, j, results[k]);
          if (visited_.insert(next).second) expand(next);
        }
      }
    }
  }

  int n_;
  bool faulty_ = false;
  ReachMap reach_;
  std::unordered_set<State, StateHash> visited_;
};

}  // namespace

ReachMap closure_reach(const Bag& bag) { return ClosureSearch(bag).take(); }

}  // namespace fourops
