// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nmd/formula_ast.h"
#include "nmd/workbook.h"

namespace nmd {

// Parses a cell's formula text and binds its names, with the cell's sheet as
// the host for bare names. Throws FormulaError citing the address.
Expr parse_cell_formula(const Workbook& w, const CellAddress& cell,
                        const std::string& text);

// What a resolved formula refers to, as written: single cells stay cells and
// column ranges stay ranges. Column names used where a scalar is expected
// read the host row. Sorted, without duplicates.
std::vector<ResolvedTarget> references_of(const Expr& resolved, const Workbook& w,
                                          const CellAddress& host);

// Populated cells covered by a reference.
std::vector<CellAddress> expand_target(const Workbook& w, const ResolvedTarget& t);

struct FormulaProblem {
  CellAddress cell;
  std::string message;
  bool unresolved_name = false;  // false: syntax error
};

class DependencyGraph;
// Skips formulas that do not parse or resolve and reports them instead.
DependencyGraph build_graph_lenient(const Workbook& w,
                                    std::vector<FormulaProblem>* problems);

class DependencyGraph {
 public:
  const std::set<CellAddress>& nodes() const { return nodes_; }
  const std::set<CellAddress>& precedents(const CellAddress& cell) const;
  const std::set<CellAddress>& dependents(const CellAddress& cell) const;
  // References of a formula cell as written; empty for literal cells.
  const std::vector<ResolvedTarget>& references(const CellAddress& cell) const;
  // Parsed, name-resolved formula, or nullptr for non-formula cells.
  const Expr* formula(const CellAddress& cell) const;

  std::vector<std::pair<CellAddress, CellAddress>> edges() const;  // (precedent, dependent)
  std::size_t edge_count() const;

  bool acyclic() const { return cycles_.empty(); }
  // Strongly connected groups of cells that depend on themselves.
  const std::vector<std::vector<CellAddress>>& cycles() const { return cycles_; }
  // Topological order, ties broken by (sheet, column, row). Empty if cyclic.
  const std::vector<CellAddress>& topo_order() const { return topo_order_; }

 private:
  friend DependencyGraph build_graph_lenient(const Workbook&,
                                             std::vector<FormulaProblem>*);
  void finish();

  std::set<CellAddress> nodes_;
  std::map<CellAddress, std::set<CellAddress>> precedents_;
  std::map<CellAddress, std::set<CellAddress>> dependents_;
  std::map<CellAddress, std::vector<ResolvedTarget>> references_;
  std::map<CellAddress, Expr> formulas_;
  std::vector<std::vector<CellAddress>> cycles_;
  std::vector<CellAddress> topo_order_;
};

// Throws FormulaError on the first formula that does not parse or resolve.
DependencyGraph build_graph(const Workbook& w);

// Values of formula cells. Every formula cell lands in exactly one map.
struct EvalResult {
  std::map<CellAddress, CellValue> values;
  std::map<CellAddress, std::string> errors;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

// Throws CycleError when the graph is cyclic.
EvalResult recalculate(const Workbook& w);
EvalResult recalculate(const Workbook& w, const DependencyGraph& graph);

// Current value of any cell: computed for formulas, stored for literals,
// Blank otherwise.
CellValue value_of(const Workbook& w, const EvalResult& eval, const CellAddress& cell);

struct ValueChange {
  CellAddress cell;
  CellValue before;
  CellValue after;
  friend bool operator==(const ValueChange&, const ValueChange&) = default;
};

// Resolves an override key: "SHEET!B5", a qualified name, or a bare name
// defined on exactly one Input sheet. The target must be on an Input sheet.
CellAddress resolve_override_target(const Workbook& w, const std::string& key);

// Formula cells whose value differs once the overrides are applied, in
// address order. `w` is not modified.
std::vector<ValueChange> what_if(const Workbook& w,
                                 const std::map<std::string, CellValue>& overrides);

}  // namespace nmd
