// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nmd/eval.h"

namespace nmd {

// A loaded workbook with its graph and current values.
struct Model {
  Workbook workbook;
  DependencyGraph graph;
  EvalResult eval;

  // Throws FormulaError or CycleError.
  static std::shared_ptr<const Model> build(Workbook w);
};

struct WalkRow {
  std::string sheetname;  // as the workbook spells it
  std::string name;       // defined name, `Column@B5`, or the A1 address
  CellValue value;
  std::string formula;    // named form when printable, else A1; empty for literals

  // What the row stands for.
  ResolvedTarget target;

  friend bool operator==(const WalkRow&, const WalkRow&) = default;
};

struct Inspection {
  std::vector<WalkRow> precedents;
  WalkRow current;
  std::vector<WalkRow> dependents;
};

// Throws NotFoundError for a cell that is neither populated nor referenced.
Inspection inspect(const Model& m, const CellAddress& cell);

// The row shown for a single cell.
WalkRow cell_row(const Model& m, const CellAddress& cell);

enum class StepKind { Start, Precedent, Dependent, Back };
std::string_view step_kind_name(StepKind k);  // "start" | "precedent" | ...

struct TrailStep {
  CellAddress cell;  // cursor after the step
  StepKind kind;
  friend bool operator==(const TrailStep&, const TrailStep&) = default;
};

class WalkSession {
 public:
  WalkSession(std::shared_ptr<const Model> model, std::string created_by = "",
              std::string created_at = "");

  // Places the cursor; records a Start step.
  void start(const CellAddress& cell);
  // Moves into the index-th precedent or dependent row of the current cell.
  // Throws PreconditionError when the index is out of range.
  void step(StepKind direction, std::size_t index);
  // Returns to the previous cursor; the move is recorded. Throws
  // PreconditionError when there is nowhere to go back to.
  void back();

  bool started() const { return !cursor_.empty(); }
  const CellAddress& current() const;
  const std::vector<TrailStep>& trail() const { return trail_; }
  const Model& model() const { return *model_; }
  const std::string& created_by() const { return created_by_; }
  const std::string& created_at() const { return created_at_; }

 private:
  std::shared_ptr<const Model> model_;
  std::string created_by_;
  std::string created_at_;
  std::vector<CellAddress> cursor_;
  std::vector<TrailStep> trail_;
};

// Tab-separated report: the header line, then a Precedents / Current Formula /
// Dependents block for every step of the trail.
std::string export_trail(const WalkSession& s);

// One block as export_trail renders it.
std::string render_block(const Inspection& ins);

}  // namespace nmd
