// SPDX-License-Identifier: Apache-2.0
#include "nmd/formula_ast.h"

#include <sstream>

namespace nmd {

std::string_view operator_text(BinaryOperator op) {
  switch (op) {
    case BinaryOperator::Add: return "+";
    case BinaryOperator::Sub: return "-";
    case BinaryOperator::Mul: return "*";
    case BinaryOperator::Div: return "/";
    case BinaryOperator::Eq: return "=";
    case BinaryOperator::Lt: return "<";
    case BinaryOperator::Gt: return ">";
    case BinaryOperator::Le: return "<=";
    case BinaryOperator::Ge: return ">=";
    case BinaryOperator::Ne: return "<>";
  }
  return "?";
}

bool is_comparison(BinaryOperator op) {
  switch (op) {
    case BinaryOperator::Eq:
    case BinaryOperator::Lt:
    case BinaryOperator::Gt:
    case BinaryOperator::Le:
    case BinaryOperator::Ge:
    case BinaryOperator::Ne:
      return true;
    default:
      return false;
  }
}

std::string_view function_name(Function fn) {
  switch (fn) {
    case Function::If: return "IF";
    case Function::Sum: return "SUM";
    case Function::Max: return "MAX";
    case Function::Min: return "MIN";
    case Function::Count: return "COUNT";
  }
  return "?";
}

std::string_view aggregator_name(Aggregator agg) {
  return function_name(as_function(agg));
}

std::optional<Function> parse_function_name(std::string_view name) {
  for (Function fn : {Function::If, Function::Sum, Function::Max, Function::Min,
                      Function::Count}) {
    if (iequals(name, function_name(fn))) return fn;
  }
  return std::nullopt;
}

std::optional<Aggregator> as_aggregator(Function fn) {
  switch (fn) {
    case Function::Sum: return Aggregator::Sum;
    case Function::Max: return Aggregator::Max;
    case Function::Min: return Aggregator::Min;
    case Function::Count: return Aggregator::Count;
    case Function::If: return std::nullopt;
  }
  return std::nullopt;
}

Function as_function(Aggregator agg) {
  switch (agg) {
    case Aggregator::Sum: return Function::Sum;
    case Aggregator::Max: return Function::Max;
    case Aggregator::Min: return Function::Min;
    case Aggregator::Count: return Function::Count;
  }
  return Function::Sum;
}

namespace {
Expr wrap(Node n) { return std::make_shared<const Node>(std::move(n)); }
}  // namespace

Expr make_number(Decimal d) { return wrap(Node{NumberLit{std::move(d)}}); }
Expr make_bool(bool b) { return wrap(Node{BoolLit{b}}); }
Expr make_text(std::string s) { return wrap(Node{TextLit{std::move(s)}}); }
Expr make_cell(CellRef r) { return wrap(Node{std::move(r)}); }
Expr make_range(RangeRef r) { return wrap(Node{std::move(r)}); }
Expr make_name(QualifiedName q) { return wrap(Node{NameRef{std::move(q)}}); }
Expr make_binary(BinaryOperator op, Expr lhs, Expr rhs) {
  return wrap(Node{BinaryOp{op, std::move(lhs), std::move(rhs)}});
}
Expr make_call(Function fn, std::vector<Expr> args) {
  return wrap(Node{FunctionCall{fn, std::move(args)}});
}
Expr make_array_conditional(ArrayConditional ac) {
  return wrap(Node{std::move(ac)});
}

bool is_literal(const Expr& e) {
  return as<NumberLit>(e) || as<BoolLit>(e) || as<TextLit>(e);
}

namespace {

struct EqualVisitor {
  const Node& other;

  bool operator()(const NumberLit& a) const {
    auto* b = std::get_if<NumberLit>(&other.v);
    return b && a.value == b->value;
  }
  bool operator()(const BoolLit& a) const {
    auto* b = std::get_if<BoolLit>(&other.v);
    return b && a.value == b->value;
  }
  bool operator()(const TextLit& a) const {
    auto* b = std::get_if<TextLit>(&other.v);
    return b && a.value == b->value;
  }
  bool operator()(const CellRef& a) const {
    auto* b = std::get_if<CellRef>(&other.v);
    return b && a.sheet == b->sheet && a.column == b->column && a.row == b->row &&
           a.abs_column == b->abs_column && a.abs_row == b->abs_row;
  }
  bool operator()(const RangeRef& a) const {
    auto* b = std::get_if<RangeRef>(&other.v);
    return b && a.sheet == b->sheet && a.column == b->column &&
           a.first_row == b->first_row && a.last_row == b->last_row &&
           a.abs_column_first == b->abs_column_first &&
           a.abs_row_first == b->abs_row_first &&
           a.abs_column_last == b->abs_column_last &&
           a.abs_row_last == b->abs_row_last;
  }
  bool operator()(const NameRef& a) const {
    auto* b = std::get_if<NameRef>(&other.v);
    return b && a.name == b->name;
  }
  bool operator()(const BinaryOp& a) const {
    auto* b = std::get_if<BinaryOp>(&other.v);
    return b && a.op == b->op && equal(a.lhs, b->lhs) && equal(a.rhs, b->rhs);
  }
  bool operator()(const FunctionCall& a) const {
    auto* b = std::get_if<FunctionCall>(&other.v);
    if (!b || a.fn != b->fn || a.args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (!equal(a.args[i], b->args[i])) return false;
    }
    return true;
  }
  bool operator()(const ArrayConditional& a) const {
    auto* b = std::get_if<ArrayConditional>(&other.v);
    if (!b || a.aggregator != b->aggregator ||
        a.conditions.size() != b->conditions.size() || !equal(a.value, b->value)) {
      return false;
    }
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
      const auto& x = a.conditions[i];
      const auto& y = b->conditions[i];
      if (x.op != y.op || !equal(x.range, y.range) || !equal(x.operand, y.operand)) {
        return false;
      }
    }
    return true;
  }
};

void debug(std::ostream& os, const Expr& e) {
  if (!e) {
    os << "null";
    return;
  }
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          os << "Number(" << n.value.to_string() << ")";
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          os << "Bool(" << (n.value ? "TRUE" : "FALSE") << ")";
        } else if constexpr (std::is_same_v<T, TextLit>) {
          os << "Text(\"" << n.value << "\")";
        } else if constexpr (std::is_same_v<T, CellRef>) {
          os << "Cell(" << n.sheet << "!" << (n.abs_column ? "$" : "")
             << column_letters(n.column) << (n.abs_row ? "$" : "") << n.row << ")";
        } else if constexpr (std::is_same_v<T, RangeRef>) {
          os << "Range(" << n.sheet << "!" << column_letters(n.column) << n.first_row
             << ":" << n.last_row << ")";
        } else if constexpr (std::is_same_v<T, NameRef>) {
          os << "Name(" << n.name.sheet << "|" << n.name.name << ")";
        } else if constexpr (std::is_same_v<T, BinaryOp>) {
          os << "Bin(" << operator_text(n.op) << ", ";
          debug(os, n.lhs);
          os << ", ";
          debug(os, n.rhs);
          os << ")";
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          os << function_name(n.fn) << "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) os << ", ";
            debug(os, n.args[i]);
          }
          os << ")";
        } else if constexpr (std::is_same_v<T, ArrayConditional>) {
          os << "ArrayCond(" << aggregator_name(n.aggregator) << ", [";
          for (std::size_t i = 0; i < n.conditions.size(); ++i) {
            if (i) os << ", ";
            debug(os, n.conditions[i].range);
            os << " " << operator_text(n.conditions[i].op) << " ";
            debug(os, n.conditions[i].operand);
          }
          os << "], ";
          debug(os, n.value);
          os << ")";
        }
      },
      e->v);
}

}  // namespace

bool equal(const Expr& a, const Expr& b) {
  if (!a || !b) return !a && !b;
  if (a == b) return true;
  return std::visit(EqualVisitor{*b}, a->v);
}

std::string debug_string(const Expr& e) {
  std::ostringstream os;
  debug(os, e);
  return os.str();
}

}  // namespace nmd
