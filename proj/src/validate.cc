// SPDX-License-Identifier: Apache-2.0
// Structured-spreadsheet rules R1..R5.
#include <map>

#include "nmd/eval.h"

namespace nmd {

namespace {

void duplicate_names(const Sheet& s, std::vector<ValidationFinding>& out) {
  std::map<std::string, std::vector<std::string>> definitions;
  for (const auto& c : s.columns) {
    if (c.name) definitions[*c.name].push_back("column " + c.letter);
  }
  std::map<std::string, std::vector<std::string>> by_cell;
  for (const auto& [name, a1] : s.named_cells) {
    definitions[name].push_back("cell " + a1);
    by_cell[to_upper(a1)].push_back(name);
  }
  for (const auto& [name, defs] : definitions) {
    if (defs.size() < 2) continue;
    std::string msg = "name '" + render_qualified({s.name, name}) + "' is defined as";
    for (std::size_t i = 0; i < defs.size(); ++i) msg += (i ? " and " : " ") + defs[i];
    out.push_back({RuleId::R3_DUPLICATE_NAME, render_qualified({s.name, name}), msg});
  }
  for (const auto& [a1, names] : by_cell) {
    if (names.size() < 2) continue;
    std::string msg = "cell " + s.upper_name() + "!" + a1 + " carries names";
    for (std::size_t i = 0; i < names.size(); ++i) msg += (i ? ", " : " ") + names[i];
    out.push_back({RuleId::R3_DUPLICATE_NAME, s.upper_name() + "!" + a1, msg});
  }
}

std::string target_text(const ResolvedTarget& t) {
  if (const auto* c = std::get_if<CellAddress>(&t)) return c->to_string();
  return std::get<ColumnRange>(t).to_string();
}

std::string target_sheet(const ResolvedTarget& t) {
  if (const auto* c = std::get_if<CellAddress>(&t)) return c->sheet;
  return std::get<ColumnRange>(t).sheet;
}

}  // namespace

std::vector<ValidationFinding> validate_structure(const Workbook& w) {
  std::vector<ValidationFinding> out;

  for (const auto& s : w.sheets) {
    if (s.role != SheetRole::Input) continue;
    for (const auto& [a1, content] : s.cells) {
      if (!content.is_formula()) continue;
      std::string loc = s.upper_name() + "!" + a1;
      out.push_back({RuleId::R1_INPUT_HAS_FORMULA, loc,
                     "input sheet cell holds formula " + content.formula_text});
    }
  }

  std::vector<FormulaProblem> problems;
  DependencyGraph g = build_graph_lenient(w, &problems);

  for (const auto& s : w.sheets) {
    if (s.role != SheetRole::Output) continue;
    for (const auto& [a1, content] : s.cells) {
      if (!content.is_formula()) continue;
      auto rc = parse_cell_a1(a1);
      if (!rc) continue;
      CellAddress cell{s.upper_name(), rc->first, rc->second};
      for (const auto& t : g.references(cell)) {
        const Sheet* ts = w.find_sheet(target_sheet(t));
        if (!ts || ts->role == SheetRole::Calculation) continue;
        out.push_back({RuleId::R2_OUTPUT_REFS_NONCALC, cell.to_string(),
                       "output formula references " + target_text(t) + " on " +
                           std::string(role_name(ts->role)) + " sheet " + ts->name});
      }
    }
  }

  for (const auto& s : w.sheets) duplicate_names(s, out);

  for (const auto& cycle : g.cycles()) {
    std::string msg = "circular dependency:";
    for (const auto& c : cycle) msg += " " + c.to_string();
    out.push_back({RuleId::R4_CIRCULAR_DEPENDENCY, cycle.front().to_string(), msg});
  }

  for (const auto& p : problems) {
    out.push_back({RuleId::R5_UNRESOLVED_NAME, p.cell.to_string(),
                   p.unresolved_name ? p.message : "unparseable formula: " + p.message});
  }
  return out;
}

}  // namespace nmd
