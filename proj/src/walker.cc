// SPDX-License-Identifier: Apache-2.0
#include "nmd/walker.h"

#include <algorithm>
#include <sstream>

#include "nmd/errors.h"
#include "nmd/formula.h"

namespace nmd {

std::shared_ptr<const Model> Model::build(Workbook w) {
  auto m = std::make_shared<Model>();
  m->workbook = std::move(w);
  m->graph = build_graph(m->workbook);
  m->eval = recalculate(m->workbook, m->graph);
  return m;
}

namespace {

std::string display_sheet(const Workbook& w, const std::string& upper) {
  const Sheet* s = w.find_sheet(upper);
  return s ? s->name : upper;
}

std::string cell_label(const Workbook& w, const CellAddress& cell) {
  const Sheet* s = w.find_sheet(cell.sheet);
  if (!s) return cell.a1();
  if (const std::string* n = s->name_of_cell(cell.column, cell.row)) return *n;
  if (cell.row >= s->first_data_row && cell.row <= s->last_data_row) {
    if (auto q = name_for_column(w, cell.sheet, cell.column)) return q->name + "@" + cell.a1();
  }
  return cell.a1();
}

std::string formula_text(const Model& m, const CellAddress& cell) {
  const Expr* f = m.graph.formula(cell);
  if (!f) return "";
  try {
    return print_named(*f, m.workbook, cell);
  } catch (const NameError&) {
    return print_a1(*f);
  }
}

WalkRow range_row(const Model& m, const ColumnRange& r) {
  WalkRow row;
  row.sheetname = display_sheet(m.workbook, r.sheet);
  const Sheet* s = m.workbook.find_sheet(r.sheet);
  std::optional<QualifiedName> q;
  if (s && r.first_row == s->first_data_row && r.last_row == s->last_data_row) {
    q = name_for_column(m.workbook, r.sheet, r.column);
  }
  row.name = q ? q->name
               : column_letters(r.column) + std::to_string(r.first_row) + ":" +
                     column_letters(r.column) + std::to_string(r.last_row);
  row.value = CellValue::number(
      Decimal(static_cast<std::int64_t>(expand_target(m.workbook, r).size())));
  row.target = r;
  return row;
}

// Sort key: sheet, column, row of the row's anchor cell.
CellAddress anchor(const ResolvedTarget& t) {
  if (const auto* c = std::get_if<CellAddress>(&t)) return *c;
  return std::get<ColumnRange>(t).top();
}

}  // namespace

WalkRow cell_row(const Model& m, const CellAddress& cell) {
  WalkRow row;
  row.sheetname = display_sheet(m.workbook, cell.sheet);
  row.name = cell_label(m.workbook, cell);
  row.value = value_of(m.workbook, m.eval, cell);
  row.formula = formula_text(m, cell);
  row.target = cell;
  return row;
}

Inspection inspect(const Model& m, const CellAddress& cell) {
  if (!m.workbook.find_sheet(cell.sheet)) {
    throw NotFoundError("no sheet '" + cell.sheet + "'");
  }
  if (!m.graph.nodes().count(cell)) {
    throw NotFoundError("cell " + cell.to_string() + " is empty and unreferenced");
  }
  Inspection out;
  for (const auto& t : m.graph.references(cell)) {
    if (const auto* c = std::get_if<CellAddress>(&t)) {
      out.precedents.push_back(cell_row(m, *c));
    } else {
      out.precedents.push_back(range_row(m, std::get<ColumnRange>(t)));
    }
  }
  std::stable_sort(out.precedents.begin(), out.precedents.end(),
                   [](const WalkRow& a, const WalkRow& b) {
                     return anchor(a.target) < anchor(b.target);
                   });
  out.current = cell_row(m, cell);
  for (const auto& d : m.graph.dependents(cell)) out.dependents.push_back(cell_row(m, d));
  return out;
}

std::string_view step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::Start: return "start";
    case StepKind::Precedent: return "precedent";
    case StepKind::Dependent: return "dependent";
    case StepKind::Back: return "back";
  }
  return "";
}

WalkSession::WalkSession(std::shared_ptr<const Model> model, std::string created_by,
                         std::string created_at)
    : model_(std::move(model)),
      created_by_(std::move(created_by)),
      created_at_(std::move(created_at)) {}

const CellAddress& WalkSession::current() const {
  if (cursor_.empty()) throw PreconditionError("walk has not started");
  return cursor_.back();
}

void WalkSession::start(const CellAddress& cell) {
  inspect(*model_, cell);
  cursor_.push_back(cell);
  trail_.push_back({cell, StepKind::Start});
}

void WalkSession::step(StepKind direction, std::size_t index) {
  if (direction != StepKind::Precedent && direction != StepKind::Dependent) {
    throw PreconditionError("step direction must be precedent or dependent");
  }
  Inspection ins = inspect(*model_, current());
  const auto& rows = direction == StepKind::Precedent ? ins.precedents : ins.dependents;
  if (index >= rows.size()) {
    throw PreconditionError("index " + std::to_string(index) + " out of range: " +
                            std::to_string(rows.size()) + " " +
                            std::string(step_kind_name(direction)) + " row(s)");
  }
  CellAddress next;
  if (const auto* c = std::get_if<CellAddress>(&rows[index].target)) {
    next = *c;
  } else {
    const auto& r = std::get<ColumnRange>(rows[index].target);
    auto cells = expand_target(model_->workbook, r);
    next = cells.empty() ? r.top() : cells.front();
    if (!model_->graph.nodes().count(next)) {
      throw PreconditionError("range " + r.to_string() + " has no populated cell to step into");
    }
  }
  cursor_.push_back(next);
  trail_.push_back({next, direction});
}

void WalkSession::back() {
  if (cursor_.size() < 2) throw PreconditionError("nothing to go back to");
  cursor_.pop_back();
  trail_.push_back({cursor_.back(), StepKind::Back});
}

namespace {

std::string field(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; },
                  ' ');
  return s;
}

void emit_row(std::ostream& os, const WalkRow& r) {
  os << field(r.sheetname) << '\t' << field(r.name) << '\t' << field(r.value.to_display())
     << '\t' << field(r.formula) << '\n';
}

}  // namespace

std::string render_block(const Inspection& ins) {
  std::ostringstream os;
  os << "Precedents\t\t\t\n";
  for (const auto& r : ins.precedents) emit_row(os, r);
  os << "Current Formula\t\t\t\n";
  emit_row(os, ins.current);
  os << "Dependents\t\t\t\n";
  for (const auto& r : ins.dependents) emit_row(os, r);
  return os.str();
}

std::string export_trail(const WalkSession& s) {
  std::string out = "Sheetname\tName\tValue\tFormula\n";
  for (const auto& step : s.trail()) out += render_block(inspect(s.model(), step.cell));
  return out;
}

}  // namespace nmd
