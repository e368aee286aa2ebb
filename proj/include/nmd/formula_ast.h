// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nmd/decimal.h"
#include "nmd/workbook.h"

namespace nmd {

enum class BinaryOperator { Add, Sub, Mul, Div, Eq, Lt, Gt, Le, Ge, Ne };
enum class Function { If, Sum, Max, Min, Count };
enum class Aggregator { Sum, Max, Min, Count };

std::string_view operator_text(BinaryOperator op);
bool is_comparison(BinaryOperator op);
std::string_view function_name(Function fn);
std::string_view aggregator_name(Aggregator agg);
std::optional<Function> parse_function_name(std::string_view name);
std::optional<Aggregator> as_aggregator(Function fn);
Function as_function(Aggregator agg);

struct Node;
using Expr = std::shared_ptr<const Node>;

struct NumberLit {
  Decimal value;
};
struct BoolLit {
  bool value = false;
};
struct TextLit {
  std::string value;
};

// `sheet` is uppercase, or empty for a reference relative to the host sheet.
struct CellRef {
  std::string sheet;
  int column = 1;
  int row = 1;
  bool abs_column = false;
  bool abs_row = false;
};

// Single-column range. Each end keeps its own `$` markers.
struct RangeRef {
  std::string sheet;
  int column = 1;
  int first_row = 1;
  int last_row = 1;
  bool abs_column_first = false;
  bool abs_row_first = false;
  bool abs_column_last = false;
  bool abs_row_last = false;
};

// Reference to a defined name. Straight out of the parser `name.sheet` is
// set only when the text used the quoted `'Sheet'.Name` form; after
// resolution against a workbook both parts are filled in.
struct NameRef {
  QualifiedName name;
};

struct BinaryOp {
  BinaryOperator op;
  Expr lhs;
  Expr rhs;
};

struct FunctionCall {
  Function fn;
  std::vector<Expr> args;
};

struct ArrayCondition {
  Expr range;     // RangeRef or NameRef naming a column
  BinaryOperator op;  // comparison
  Expr operand;   // CellRef, NameRef or literal
};

// AGG(IF(c1, IF(c2, ... IF(cK, value)...))) with K >= 1.
struct ArrayConditional {
  Aggregator aggregator;
  std::vector<ArrayCondition> conditions;
  Expr value;  // RangeRef or NameRef naming a column
};

struct Node {
  std::variant<NumberLit, BoolLit, TextLit, CellRef, RangeRef, NameRef,
               BinaryOp, FunctionCall, ArrayConditional>
      v;
};

Expr make_number(Decimal d);
Expr make_bool(bool b);
Expr make_text(std::string s);
Expr make_cell(CellRef r);
Expr make_range(RangeRef r);
Expr make_name(QualifiedName q);
Expr make_binary(BinaryOperator op, Expr lhs, Expr rhs);
Expr make_call(Function fn, std::vector<Expr> args);
Expr make_array_conditional(ArrayConditional ac);

// Deep structural equality.
bool equal(const Expr& a, const Expr& b);

template <typename T>
const T* as(const Expr& e) {
  return e ? std::get_if<T>(&e->v) : nullptr;
}

bool is_literal(const Expr& e);

// Debug rendering used in test failure messages.
std::string debug_string(const Expr& e);

}  // namespace nmd
