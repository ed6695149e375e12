#pragma once

// Generators shared by the unit tests.

#include <random>
#include <vector>

#include "fourops/engine.hpp"

namespace fourops::testing {

inline Expression random_expression(std::mt19937_64& rng, int leaves) {
  if (leaves <= 1) return Expression::leaf(1 + static_cast<Value>(rng() % 100));
  const int left = 1 + static_cast<int>(rng() % static_cast<unsigned>(leaves - 1));
  const Operator op = kAllOperators[rng() % 4];
  return Expression::node(op, random_expression(rng, left), random_expression(rng, leaves - left));
}

// Independent of eval_expression: recomputes values bottom-up with raw
// arithmetic and reports whether every node is defined.
inline bool all_nodes_defined(const Expression& e, long double* value = nullptr) {
  if (e.is_leaf()) {
    if (value) *value = static_cast<long double>(e.leaf_value());
    return e.leaf_value() >= 1;
  }
  long double l = 0, r = 0;
  if (!all_nodes_defined(e.left(), &l) || !all_nodes_defined(e.right(), &r)) return false;
  long double v = 0;
  switch (e.op()) {
    case Operator::Add:
      v = l + r;
      break;
    case Operator::Sub:
      v = l - r;
      break;
    case Operator::Mul:
      v = l * r;
      break;
    case Operator::Div:
      v = l / r;
      if (static_cast<long long>(v) * static_cast<long long>(r) != static_cast<long long>(l)) return false;
      break;
  }
  if (value) *value = v;
  return v >= 1;
}

inline Expression random_commute(const Expression& e, std::mt19937_64& rng) {
  if (e.is_leaf()) return e;
  Expression l = random_commute(e.left(), rng);
  Expression r = random_commute(e.right(), rng);
  const bool commutative = e.op() == Operator::Add || e.op() == Operator::Mul;
  if (commutative && (rng() & 1)) std::swap(l, r);
  return Expression::node(e.op(), std::move(l), std::move(r));
}

/// Dataset-shaped bag: five values in 1..9 plus one of 25, 50, 75.
inline Bag random_dataset_bag(std::mt19937_64& rng) {
  std::vector<Value> v;
  for (int i = 0; i < 5; ++i) v.push_back(1 + static_cast<Value>(rng() % 9));
  static constexpr Value kBig[] = {25, 50, 75};
  v.push_back(kBig[rng() % 3]);
  return Bag(std::move(v));
}

/// Small bag of `n` values in 1..max_value.
inline Bag random_bag(std::mt19937_64& rng, std::size_t n, Value max_value) {
  std::vector<Value> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(1 + static_cast<Value>(rng() % static_cast<std::uint64_t>(max_value)));
  return Bag(std::move(v));
}

}  // namespace fourops::testing
