// SPDX-License-Identifier: Apache-2.0
// Conditional-aggregate notation: parse_named, compile and decompile.
#include "nmd/errors.h"
#include "nmd/formula.h"

namespace nmd {

namespace {

ColumnRange require_column(const Workbook& w, const QualifiedName& q) {
  ResolvedTarget t = resolve_name(w, q);
  if (const auto* r = std::get_if<ColumnRange>(&t)) return *r;
  throw PreconditionError("'" + render_qualified(q) +
                          "' names a single cell, a column name is required here");
}

bool all_names(const ArrayConditional& ac) {
  if (!as<NameRef>(ac.value)) return false;
  for (const auto& c : ac.conditions) {
    if (!as<NameRef>(c.range)) return false;
    if (!as<NameRef>(c.operand) && !is_literal(c.operand)) return false;
  }
  return true;
}

CellValue literal_value(const Expr& e) {
  if (const auto* n = as<NumberLit>(e)) return CellValue::number(n->value);
  if (const auto* b = as<BoolLit>(e)) return CellValue::boolean(b->value);
  if (const auto* t = as<TextLit>(e)) return CellValue::text(t->value);
  throw ShapeError(ShapeError::Kind::NotConditional, "operand is not a literal");
}

ConditionalAggregate from_named_node(const ArrayConditional& ac, const Workbook& w) {
  ConditionalAggregate c;
  c.aggregator = ac.aggregator;
  c.value_column = as<NameRef>(ac.value)->name;
  require_column(w, c.value_column);
  for (const auto& cond : ac.conditions) {
    Condition out;
    out.lhs = as<NameRef>(cond.range)->name;
    require_column(w, out.lhs);
    out.op = cond.op;
    if (const auto* n = as<NameRef>(cond.operand)) {
      require_column(w, n->name);
      out.rhs = CurrentRowCell{n->name};
    } else {
      out.rhs = literal_value(cond.operand);
    }
    c.conditions.push_back(std::move(out));
  }
  return c;
}

}  // namespace

NamedItem parse_named(std::string_view text, const Workbook& context,
                      const std::optional<std::string>& host_sheet) {
  Expr raw = parse_formula(text);
  std::string host_name;
  if (host_sheet) {
    const Sheet* s = context.find_sheet(*host_sheet);
    host_name = s ? s->name : *host_sheet;
  }
  Expr resolved = resolve_names(raw, context, host_sheet ? &host_name : nullptr);
  if (const auto* ac = as<ArrayConditional>(resolved); ac && all_names(*ac)) {
    return from_named_node(*ac, context);
  }
  return resolved;
}

CompiledFormula compile_conditional(const ConditionalAggregate& c,
                                    const Workbook& context,
                                    const CellAddress& host) {
  if (c.conditions.empty()) {
    throw PreconditionError("a conditional aggregate needs at least one condition");
  }
  const Sheet* host_sheet = context.find_sheet(host.sheet);
  if (!host_sheet) throw NotFoundError("host sheet '" + host.sheet + "' does not exist");
  if (host.row < host_sheet->first_data_row || host.row > host_sheet->last_data_row) {
    throw PreconditionError("host row " + std::to_string(host.row) +
                            " is outside the data region " +
                            std::to_string(host_sheet->first_data_row) + ".." +
                            std::to_string(host_sheet->last_data_row) + " of " +
                            host_sheet->name);
  }

  ColumnRange value = require_column(context, c.value_column);
  auto range_expr = [&](const ColumnRange& r, const QualifiedName& q) {
    if (r.first_row != value.first_row || r.last_row != value.last_row) {
      throw PreconditionError(
          "misaligned row spans: '" + render_qualified(q) + "' covers rows " +
          std::to_string(r.first_row) + ".." + std::to_string(r.last_row) + " but '" +
          render_qualified(c.value_column) + "' covers " + std::to_string(value.first_row) +
          ".." + std::to_string(value.last_row));
    }
    RangeRef rr;
    rr.sheet = r.sheet;
    rr.column = r.column;
    rr.first_row = r.first_row;
    rr.last_row = r.last_row;
    rr.abs_column_first = rr.abs_row_first = rr.abs_column_last = rr.abs_row_last = true;
    return make_range(rr);
  };

  ArrayConditional ac{c.aggregator, {}, range_expr(value, c.value_column)};
  for (const auto& cond : c.conditions) {
    if (!is_comparison(cond.op)) throw PreconditionError("condition operator must be a comparison");
    Expr lhs = range_expr(require_column(context, cond.lhs), cond.lhs);
    Expr operand;
    if (const auto* cur = std::get_if<CurrentRowCell>(&cond.rhs)) {
      ColumnRange col = require_column(context, cur->column);
      if (host.row < col.first_row || host.row > col.last_row) {
        throw PreconditionError("host row " + std::to_string(host.row) +
                                " is outside the data region of '" +
                                render_qualified(cur->column) + "'");
      }
      operand = make_cell(CellRef{col.sheet, col.column, host.row, true, false});
    } else {
      const auto& v = std::get<CellValue>(cond.rhs);
      switch (v.kind()) {
        case CellValue::Kind::Number: operand = make_number(v.as_number()); break;
        case CellValue::Kind::Boolean: operand = make_bool(v.as_boolean()); break;
        case CellValue::Kind::Text: operand = make_text(v.as_text()); break;
        default:
          throw PreconditionError("condition literals must be numbers, booleans or text");
      }
    }
    ac.conditions.push_back(ArrayCondition{lhs, cond.op, operand});
  }
  return CompiledFormula{make_array_conditional(std::move(ac)), true};
}

namespace {

[[noreturn]] void not_conditional(const std::string& why) {
  throw ShapeError(ShapeError::Kind::NotConditional, "not a nested-IF aggregate: " + why);
}

// Explains why an aggregate call did not match the nested-IF shape.
[[noreturn]] void diagnose(const Expr& ast) {
  const auto* call = as<FunctionCall>(ast);
  if (!call || !as_aggregator(call->fn)) not_conditional("expected SUM, MAX, MIN or COUNT");
  if (call->args.size() != 1) not_conditional("aggregate must have exactly one IF argument");
  Expr cur = call->args.front();
  for (;;) {
    const auto* inner = as<FunctionCall>(cur);
    if (!inner || inner->fn != Function::If) not_conditional("expected IF(condition, ...)");
    if (inner->args.size() != 2) not_conditional("IF must have no else branch");
    const auto* cond = as<BinaryOp>(inner->args[0]);
    if (!cond || !is_comparison(cond->op) ||
        !(as<RangeRef>(cond->lhs) || as<NameRef>(cond->lhs)) ||
        !(as<CellRef>(cond->rhs) || as<NameRef>(cond->rhs) || is_literal(cond->rhs))) {
      not_conditional("condition is not column-vs-scalar");
    }
    cur = inner->args[1];
    if (!as<FunctionCall>(cur)) not_conditional("value is not a column range");
  }
}

}  // namespace

ConditionalAggregate decompile_array(const Expr& ast, const Workbook& context,
                                     const std::optional<CellAddress>& host) {
  const auto* ac = as<ArrayConditional>(ast);
  if (!ac) diagnose(ast);

  auto ref_sheet = [&](const std::string& s) -> std::string {
    if (!s.empty()) return s;
    if (host) return host->sheet;
    throw ShapeError(ShapeError::Kind::RangeNotNamed, "reference lacks a sheet prefix");
  };
  auto column_name = [&](const Expr& e) -> QualifiedName {
    if (const auto* n = as<NameRef>(e)) {
      if (!std::holds_alternative<ColumnRange>(resolve_name(context, n->name))) {
        throw ShapeError(ShapeError::Kind::RangeNotNamed,
                         "'" + render_qualified(n->name) + "' is not a column name");
      }
      return n->name;
    }
    const auto* r = as<RangeRef>(e);
    if (!r) not_conditional("expected a column range");
    std::string sheet = ref_sheet(r->sheet);
    const Sheet* s = context.find_sheet(sheet);
    bool absolute = r->abs_column_first && r->abs_row_first && r->abs_column_last &&
                    r->abs_row_last;
    if (s && absolute && r->first_row == s->first_data_row &&
        r->last_row == s->last_data_row) {
      if (auto q = name_for_column(context, sheet, r->column)) return *q;
    }
    RangeRef shown = *r;
    shown.sheet = to_upper(sheet);
    throw ShapeError(ShapeError::Kind::RangeNotNamed,
                     "range " + print_a1(make_range(shown)).substr(1) +
                         " is not coextensive with a named column");
  };

  ConditionalAggregate out;
  out.aggregator = ac->aggregator;
  out.value_column = column_name(ac->value);
  for (const auto& c : ac->conditions) {
    Condition cond;
    cond.lhs = column_name(c.range);
    cond.op = c.op;
    if (const auto* cell = as<CellRef>(c.operand)) {
      std::string sheet = ref_sheet(cell->sheet);
      const Sheet* s = context.find_sheet(sheet);
      auto q = name_for_column(context, sheet, cell->column);
      bool row_ok = host ? cell->row == host->row : true;
      if (!s || !q || !cell->abs_column || cell->abs_row || !row_ok ||
          cell->row < s->first_data_row || cell->row > s->last_data_row) {
        throw ShapeError(ShapeError::Kind::RangeNotNamed,
                         "operand " + CellAddress{to_upper(sheet), cell->column, cell->row}.to_string() +
                             " is not a current-row cell of a named column");
      }
      cond.rhs = CurrentRowCell{*q};
    } else if (const auto* n = as<NameRef>(c.operand)) {
      if (!std::holds_alternative<ColumnRange>(resolve_name(context, n->name))) {
        throw ShapeError(ShapeError::Kind::RangeNotNamed,
                         "'" + render_qualified(n->name) + "' is not a column name");
      }
      cond.rhs = CurrentRowCell{n->name};
    } else {
      cond.rhs = literal_value(c.operand);
    }
    out.conditions.push_back(std::move(cond));
  }
  return out;
}

CompiledFormula compile_conditional_text(std::string_view named_text,
                                         const Workbook& context,
                                         const CellAddress& host) {
  NamedItem item = parse_named(named_text, context, host.sheet);
  const auto* c = std::get_if<ConditionalAggregate>(&item);
  if (!c) throw PreconditionError("text is not a conditional aggregate: " + std::string(named_text));
  return compile_conditional(*c, context, host);
}

std::string decompile_text(std::string_view a1_text, const Workbook& context,
                           const std::optional<CellAddress>& host) {
  return print_named(decompile_array(parse_a1(a1_text), context, host), context);
}

}  // namespace nmd
