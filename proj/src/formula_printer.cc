// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "nmd/errors.h"
#include "nmd/formula.h"

namespace nmd {

namespace {

int precedence(BinaryOperator op) {
  if (is_comparison(op)) return 1;
  if (op == BinaryOperator::Add || op == BinaryOperator::Sub) return 2;
  return 3;
}

std::string quote_text(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

std::string a1_part(int column, int row, bool abs_column, bool abs_row) {
  return (abs_column ? "$" : "") + column_letters(column) + (abs_row ? "$" : "") +
         std::to_string(row);
}

std::string sheet_prefix(const std::string& sheet) {
  return sheet.empty() ? "" : quote_sheet_for_a1(sheet) + "!";
}

std::string print_cell_a1(const CellRef& r) {
  return sheet_prefix(r.sheet) + a1_part(r.column, r.row, r.abs_column, r.abs_row);
}

std::string print_range_a1(const RangeRef& r) {
  return sheet_prefix(r.sheet) +
         a1_part(r.column, r.first_row, r.abs_column_first, r.abs_row_first) + ":" +
         a1_part(r.column, r.last_row, r.abs_column_last, r.abs_row_last);
}

// Raw spelling that parse_formula reads back into the same NameRef.
std::string print_name_raw(const QualifiedName& q) {
  if (q.sheet.empty()) return q.name;
  std::string out = "'";
  for (char c : q.sheet) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'." + q.name;
}

class Printer {
 public:
  // `context` == nullptr selects the compact A1 surface.
  Printer(const Workbook* context, std::optional<CellAddress> host)
      : context_(context), host_(std::move(host)) {}

  std::string print(const Expr& e) {
    std::ostringstream os;
    emit(os, e);
    return os.str();
  }

 private:
  bool named() const { return context_ != nullptr; }

  void emit(std::ostream& os, const Expr& e) {
    std::visit([&](const auto& n) { emit_node(os, n); }, e->v);
  }

  void emit_node(std::ostream& os, const NumberLit& n) { os << n.value.to_string(); }
  void emit_node(std::ostream& os, const BoolLit& n) { os << (n.value ? "TRUE" : "FALSE"); }
  void emit_node(std::ostream& os, const TextLit& n) { os << quote_text(n.value); }

  void emit_node(std::ostream& os, const CellRef& r) {
    if (!named()) {
      os << print_cell_a1(r);
      return;
    }
    os << qualified_or_bare(cell_name(r, /*in_array=*/false));
  }

  void emit_node(std::ostream& os, const RangeRef& r) {
    if (!named()) {
      os << print_range_a1(r);
      return;
    }
    os << render_qualified(range_name(r));
  }

  void emit_node(std::ostream& os, const NameRef& n) {
    if (!named() || n.name.sheet.empty()) {
      os << print_name_raw(n.name);
      return;
    }
    os << qualified_or_bare(n.name);
  }

  void emit_node(std::ostream& os, const BinaryOp& b) {
    int p = precedence(b.op);
    emit_operand(os, b.lhs, p, false);
    if (named()) {
      os << " " << operator_text(b.op) << " ";
    } else {
      os << operator_text(b.op);
    }
    emit_operand(os, b.rhs, p, true);
  }

  void emit_operand(std::ostream& os, const Expr& e, int parent, bool right) {
    const auto* child = as<BinaryOp>(e);
    bool parens = child && (precedence(child->op) < parent ||
                            (right && precedence(child->op) == parent));
    if (parens) os << "(";
    emit(os, e);
    if (parens) os << ")";
  }

  void emit_node(std::ostream& os, const FunctionCall& f) {
    os << function_name(f.fn) << "(";
    for (std::size_t i = 0; i < f.args.size(); ++i) {
      if (i) os << (named() ? ", " : ",");
      emit(os, f.args[i]);
    }
    os << ")";
  }

  void emit_node(std::ostream& os, const ArrayConditional& ac) {
    if (!named()) {
      os << aggregator_name(ac.aggregator) << "(";
      for (const auto& c : ac.conditions) {
        os << "IF(";
        emit(os, c.range);
        os << operator_text(c.op);
        emit(os, c.operand);
        os << ",";
      }
      emit(os, ac.value);
      for (std::size_t i = 0; i < ac.conditions.size(); ++i) os << ")";
      os << ")";
      return;
    }
    os << aggregator_name(ac.aggregator) << "(" << render_qualified(column_of(ac.value))
       << " [";
    for (std::size_t i = 0; i < ac.conditions.size(); ++i) {
      const auto& c = ac.conditions[i];
      if (i) os << " AND ";
      os << render_qualified(column_of(c.range)) << " " << operator_text(c.op) << " ";
      if (const auto* cell = as<CellRef>(c.operand)) {
        os << render_qualified(cell_name(*cell, /*in_array=*/true));
      } else if (const auto* nr = as<NameRef>(c.operand)) {
        os << render_qualified(nr->name);
      } else {
        emit(os, c.operand);
      }
    }
    os << "])";
  }

  std::string sheet_of(const std::string& ref_sheet) const {
    if (!ref_sheet.empty()) return ref_sheet;
    if (host_) return host_->sheet;
    return "";
  }

  [[noreturn]] static void unnamed(const std::string& address) {
    throw NameError(NameError::Kind::Unnamed,
                    "reference " + address + " has no defined name");
  }

  // Named cell, or the column name when the cell sits on the host row
  // (inside an array condition, any row-relative cell of a named column).
  QualifiedName cell_name(const CellRef& r, bool in_array) const {
    std::string sheet = sheet_of(r.sheet);
    CellAddress addr{to_upper(sheet), r.column, r.row};
    if (sheet.empty()) unnamed(print_cell_a1(r));
    if (auto q = name_for_cell(*context_, addr)) return *q;
    const Sheet* s = context_->find_sheet(sheet);
    bool current_row = host_ ? r.row == host_->row : (in_array && r.abs_column && !r.abs_row);
    if (s && current_row && r.row >= s->first_data_row && r.row <= s->last_data_row) {
      if (auto q = name_for_column(*context_, sheet, r.column)) return *q;
    }
    unnamed(addr.to_string());
  }

  QualifiedName range_name(const RangeRef& r) const {
    std::string sheet = sheet_of(r.sheet);
    if (!sheet.empty()) {
      const Sheet* s = context_->find_sheet(sheet);
      if (s && r.first_row == s->first_data_row && r.last_row == s->last_data_row) {
        if (auto q = name_for_column(*context_, sheet, r.column)) return *q;
      }
    }
    RangeRef shown = r;
    shown.sheet = to_upper(sheet);
    unnamed(print_range_a1(shown));
  }

  QualifiedName column_of(const Expr& e) const {
    if (const auto* r = as<RangeRef>(e)) return range_name(*r);
    if (const auto* n = as<NameRef>(e)) return n->name;
    if (const auto* c = as<CellRef>(e)) return cell_name(*c, false);
    unnamed(print_a1(e));
  }

  // Names on the host sheet drop their prefix when the bare spelling reads
  // back to the same definition.
  std::string qualified_or_bare(const QualifiedName& q) const {
    if (host_ && iequals(q.sheet, host_->sheet)) {
      try {
        const Sheet* s = context_->find_sheet(host_->sheet);
        if (s && resolve_name_text(*context_, q.name, &s->name) == q) return q.name;
      } catch (const NameError&) {
      }
    }
    return render_qualified(q);
  }

  const Workbook* context_;
  std::optional<CellAddress> host_;
};

}  // namespace

std::string print_a1(const Expr& ast) { return "=" + Printer(nullptr, std::nullopt).print(ast); }

Expr to_expr(const ConditionalAggregate& c) {
  ArrayConditional ac{c.aggregator, {}, make_name(c.value_column)};
  for (const auto& cond : c.conditions) {
    Expr operand;
    if (const auto* cur = std::get_if<CurrentRowCell>(&cond.rhs)) {
      operand = make_name(cur->column);
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
    ac.conditions.push_back(ArrayCondition{make_name(cond.lhs), cond.op, operand});
  }
  return make_array_conditional(std::move(ac));
}

std::string print_named(const NamedItem& item, const Workbook& context,
                        const std::optional<CellAddress>& host) {
  Expr e = std::holds_alternative<Expr>(item) ? std::get<Expr>(item)
                                              : to_expr(std::get<ConditionalAggregate>(item));
  std::string body = Printer(&context, host).print(e);
  if (as<ArrayConditional>(e)) return body;
  return "=" + body;
}

}  // namespace nmd
