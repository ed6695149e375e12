#include <algorithm>
#include <stdexcept>

#include "fourops/solver.hpp"

namespace fourops {

namespace {

// Depth-first over every sequence of pair combinations. A value that appears
// after k combinations costs k operations; branches that cannot beat the best
// count found so far are cut.
class Exhaustive {
 public:
  explicit Exhaustive(Value target) : target_(target) {}

  void run(std::vector<Value> items, int done) {
    for (Value x : items)
      if (x == target_) best_ = std::min(best_, done);
    descend(items, done);
  }

  std::optional<int> best() const {
    if (best_ == kNone) return std::nullopt;
    return best_;
  }

 private:
  static constexpr int kNone = 1 << 20;

  void descend(std::vector<Value>& items, int done) {
    const std::size_t n = items.size();
    if (n < 2 || done + 1 >= best_) return;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        for (Operator op : kAllOperators) {
          // + and * are symmetric: visit (i, j) with i < j only.
          if ((op == Operator::Add || op == Operator::Mul) && i > j) continue;
          const auto r = combine(items[i], items[j], op);
          if (!r) continue;
          if (*r == target_) {
            best_ = std::min(best_, done + 1);
            continue;
          }
          if (n == 2 || done + 2 >= best_) continue;
          std::vector<Value> next;
          next.reserve(n - 1);
          for (std::size_t k = 0; k < n; ++k)
            if (k != i && k != j) next.push_back(items[k]);
          next.push_back(*r);
          descend(next, done + 1);
        }
      }
    }
  }

  Value target_;
  int best_ = kNone;
};

}  // namespace

std::optional<int> brute_force_oracle(const Bag& bag, Value target) {
  if (bag.size() > 6) throw std::invalid_argument("brute_force_oracle supports at most six values");
  Exhaustive search(target);
  search.run({bag.values().begin(), bag.values().end()}, 0);
  return search.best();
}

}  // namespace fourops
