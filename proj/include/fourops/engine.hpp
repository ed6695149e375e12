#pragma once

// Puzzle values, integer-constrained operations and expression trees.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fourops {

using Value = std::int64_t;

enum class Operator : std::uint8_t { Add, Sub, Mul, Div };

inline constexpr std::array<Operator, 4> kAllOperators = {Operator::Add, Operator::Sub,
                                                          Operator::Mul, Operator::Div};

char operator_symbol(Operator op);

class ConstraintViolation : public std::runtime_error {
 public:
  ConstraintViolation(std::string node, std::string rule);
  const std::string& node() const { return node_; }
  const std::string& rule() const { return rule_; }

 private:
  std::string node_;
  std::string rule_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Sorted multiset of positive integers. The engine accepts 1 to 8 values.
class Bag {
 public:
  static constexpr std::size_t kMaxSize = 8;

  Bag() = default;
  /// Sorts the input; throws std::invalid_argument on a value < 1 or a bad size.
  explicit Bag(std::vector<Value> values);
  Bag(std::initializer_list<Value> values) : Bag(std::vector<Value>(values)) {}

  std::span<const Value> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  Value operator[](std::size_t i) const { return values_[i]; }
  std::string to_string() const;

  friend bool operator==(const Bag&, const Bag&) = default;
  friend auto operator<=>(const Bag&, const Bag&) = default;

 private:
  std::vector<Value> values_;
};

/// Result of applying `op` to (a, b) in that order, or nullopt when the result
/// would not be a positive integer.
constexpr std::optional<Value> combine(Value a, Value b, Operator op) {
  switch (op) {
    case Operator::Add:
      return a + b;
    case Operator::Sub:
      if (a > b) return a - b;
      return std::nullopt;
    case Operator::Mul:
      return a * b;
    case Operator::Div:
      if (b != 0 && a % b == 0 && a / b >= 1) return a / b;
      return std::nullopt;
  }
  return std::nullopt;
}

struct OpResult {
  Operator op;
  Value value;
  friend bool operator==(const OpResult&, const OpResult&) = default;
  friend auto operator<=>(const OpResult&, const OpResult&) = default;
};

/// Every valid (operator, value) outcome of the unordered pair {a, b}, in
/// Add, Sub, Mul, Div order. At most four entries.
struct PairResults {
  std::array<OpResult, 4> items{};
  std::size_t count = 0;
  const OpResult* begin() const { return items.data(); }
  const OpResult* end() const { return items.data() + count; }
  std::size_t size() const { return count; }
};

PairResults valid_results(Value a, Value b);

/// Immutable binary expression tree. Copies share structure.
class Expression {
 public:
  static Expression leaf(Value v);
  static Expression node(Operator op, Expression left, Expression right);

  bool is_leaf() const { return node_ == nullptr; }
  Value leaf_value() const { return leaf_; }
  Operator op() const;
  const Expression& left() const;
  const Expression& right() const;

  std::size_t leaf_count() const;
  std::size_t op_count() const { return leaf_count() - 1; }
  /// Leaf values in ascending order.
  std::vector<Value> leaves() const;

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  struct Node;
  Value leaf_ = 0;
  std::shared_ptr<const Node> node_;
};

/// Root value; throws ConstraintViolation naming the offending node and rule.
Value eval_expression(const Expression& expr);

/// Fully parenthesized infix, no whitespace, e.g. "((75/3)*4)".
std::string serialize_expression(const Expression& expr);

/// Inverse of serialize_expression. Throws ParseError with a byte offset.
Expression parse_expression(std::string_view text);

/// serialize_expression with the operands of + and * emitted in lexicographic
/// order, so expressions equal up to commutativity share one text.
std::string canonical_form(const Expression& expr);

/// Rebuilds `expr` so that serialize_expression(result) == canonical_form(expr).
Expression canonicalize(const Expression& expr);

struct OpCounts {
  int add = 0;
  int sub = 0;
  int mul = 0;
  int div = 0;
  int total() const { return add + sub + mul + div; }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

OpCounts count_operators(const Expression& expr);

/// Largest internal-node value (root included); the leaf value for a bare leaf.
/// Assumes expr evaluates cleanly.
Value max_intermediate(const Expression& expr);

/// True if `sub` is a sub-multiset of `super`; both must be sorted ascending.
bool is_sub_multiset(std::span<const Value> sub, std::span<const Value> super);

}  // namespace fourops
