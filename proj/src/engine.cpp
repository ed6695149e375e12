#include "fourops/engine.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace fourops {

char operator_symbol(Operator op) {
  switch (op) {
    case Operator::Add:
      return '+';
    case Operator::Sub:
      return '-';
    case Operator::Mul:
      return '*';
    case Operator::Div:
      return '/';
  }
  return '?';
}

ConstraintViolation::ConstraintViolation(std::string node, std::string rule)
    : std::runtime_error("constraint violation at " + node + ": " + rule),
      node_(std::move(node)),
      rule_(std::move(rule)) {}

ParseError::ParseError(std::size_t offset, const std::string& what)
    : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

Bag::Bag(std::vector<Value> values) : values_(std::move(values)) {
  if (values_.empty() || values_.size() > kMaxSize)
    throw std::invalid_argument("bag must hold between 1 and 8 values");
  for (Value v : values_)
    if (v < 1) throw std::invalid_argument("bag values must be positive integers");
  std::sort(values_.begin(), values_.end());
}

std::string Bag::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values_[i]);
  }
  return out + ")";
}

PairResults valid_results(Value a, Value b) {
  const Value hi = std::max(a, b);
  const Value lo = std::min(a, b);
  PairResults out;
  for (Operator op : kAllOperators) {
    // Sub and Div are only ever valid larger-over-smaller.
    if (auto r = combine(hi, lo, op)) out.items[out.count++] = {op, *r};
  }
  return out;
}

struct Expression::Node {
  Operator op;
  Expression left;
  Expression right;
};

Expression Expression::leaf(Value v) {
  Expression e;
  e.leaf_ = v;
  return e;
}

Expression Expression::node(Operator op, Expression left, Expression right) {
  Expression e;
  e.node_ = std::make_shared<const Node>(Node{op, std::move(left), std::move(right)});
  return e;
}

Operator Expression::op() const {
  if (!node_) throw std::logic_error("leaf has no operator");
  return node_->op;
}

const Expression& Expression::left() const {
  if (!node_) throw std::logic_error("leaf has no children");
  return node_->left;
}

const Expression& Expression::right() const {
  if (!node_) throw std::logic_error("leaf has no children");
  return node_->right;
}

std::size_t Expression::leaf_count() const {
  if (is_leaf()) return 1;
  return node_->left.leaf_count() + node_->right.leaf_count();
}

namespace {

void collect_leaves(const Expression& e, std::vector<Value>& out) {
  if (e.is_leaf()) {
    out.push_back(e.leaf_value());
    return;
  }
  collect_leaves(e.left(), out);
  collect_leaves(e.right(), out);
}

}  // namespace

std::vector<Value> Expression::leaves() const {
  std::vector<Value> out;
  collect_leaves(*this, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.is_leaf() || b.is_leaf())
    return a.is_leaf() && b.is_leaf() && a.leaf_value() == b.leaf_value();
  if (a.node_ == b.node_) return true;
  return a.op() == b.op() && a.left() == b.left() && a.right() == b.right();
}

Value eval_expression(const Expression& expr) {
  if (expr.is_leaf()) {
    if (expr.leaf_value() < 1)
      throw ConstraintViolation(std::to_string(expr.leaf_value()), "leaf is not a positive integer");
    return expr.leaf_value();
  }
  const Value l = eval_expression(expr.left());
  const Value r = eval_expression(expr.right());
  if (auto v = combine(l, r, expr.op())) return *v;
  const std::string where = std::to_string(l) + operator_symbol(expr.op()) + std::to_string(r);
  if (expr.op() == Operator::Sub)
    throw ConstraintViolation(where, "subtraction result is not positive");
  throw ConstraintViolation(where, "division is not exact");
}

namespace {

void serialize_into(const Expression& e, std::string& out) {
  if (e.is_leaf()) {
    out += std::to_string(e.leaf_value());
    return;
  }
  out += '(';
  serialize_into(e.left(), out);
  out += operator_symbol(e.op());
  serialize_into(e.right(), out);
  out += ')';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse_all() {
    Expression e = parse_expr();
    if (pos_ != text_.size()) throw ParseError(pos_, "trailing characters");
    return e;
  }

 private:
  Expression parse_expr() {
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of input");
    if (text_[pos_] == '(') {
      ++pos_;
      Expression left = parse_expr();
      const Operator op = parse_op();
      Expression right = parse_expr();
      if (pos_ >= text_.size()) throw ParseError(pos_, "expected ')'");
      if (text_[pos_] != ')') throw ParseError(pos_, "expected ')'");
      ++pos_;
      return Expression::node(op, std::move(left), std::move(right));
    }
    return Expression::leaf(parse_int());
  }

  Operator parse_op() {
    if (pos_ >= text_.size()) throw ParseError(pos_, "expected operator");
    switch (text_[pos_++]) {
      case '+':
        return Operator::Add;
      case '-':
        return Operator::Sub;
      case '*':
        return Operator::Mul;
      case '/':
        return Operator::Div;
    }
    throw ParseError(pos_ - 1, "expected operator");
  }

  Value parse_int() {
    const std::size_t start = pos_;
    if (text_[pos_] < '1' || text_[pos_] > '9') throw ParseError(pos_, "expected integer");
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    Value v = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc()) throw ParseError(start, "integer out of range");
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_expression(const Expression& expr) {
  std::string out;
  serialize_into(expr, out);
  return out;
}

Expression parse_expression(std::string_view text) { return Parser(text).parse_all(); }

Expression canonicalize(const Expression& expr) {
  if (expr.is_leaf()) return expr;
  Expression l = canonicalize(expr.left());
  Expression r = canonicalize(expr.right());
  const bool commutative = expr.op() == Operator::Add || expr.op() == Operator::Mul;
  if (commutative && serialize_expression(r) < serialize_expression(l)) std::swap(l, r);
  return Expression::node(expr.op(), std::move(l), std::move(r));
}

std::string canonical_form(const Expression& expr) {
  if (expr.is_leaf()) return std::to_string(expr.leaf_value());
  std::string l = canonical_form(expr.left());
  std::string r = canonical_form(expr.right());
  const bool commutative = expr.op() == Operator::Add || expr.op() == Operator::Mul;
  if (commutative && r < l) std::swap(l, r);
  std::string out;
  out.reserve(l.size() + r.size() + 3);
  out += '(';
  out += l;
  out += operator_symbol(expr.op());
  out += r;
  out += ')';
  return out;
}

OpCounts count_operators(const Expression& expr) {
  OpCounts c;
  if (expr.is_leaf()) return c;
  const OpCounts l = count_operators(expr.left());
  const OpCounts r = count_operators(expr.right());
  c = {l.add + r.add, l.sub + r.sub, l.mul + r.mul, l.div + r.div};
  switch (expr.op()) {
    case Operator::Add:
      ++c.add;
      break;
    case Operator::Sub:
      ++c.sub;
      break;
    case Operator::Mul:
      ++c.mul;
      break;
    case Operator::Div:
      ++c.div;
      break;
  }
  return c;
}

namespace {

// Returns the node's value; tracks the max over internal nodes.
Value max_internal(const Expression& e, Value& best) {
  if (e.is_leaf()) return e.leaf_value();
  const Value l = max_internal(e.left(), best);
  const Value r = max_internal(e.right(), best);
  const Value v = combine(l, r, e.op()).value_or(0);
  best = std::max(best, v);
  return v;
}

}  // namespace

Value max_intermediate(const Expression& expr) {
  if (expr.is_leaf()) return expr.leaf_value();
  Value best = std::numeric_limits<Value>::min();
  max_internal(expr, best);
  return best;
}

bool is_sub_multiset(std::span<const Value> sub, std::span<const Value> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

}  // namespace fourops
