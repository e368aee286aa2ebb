// SPDX-License-Identifier: Apache-2.0
// Fixtures, random generators and reference implementations for the tests.
#pragma once

#include <map>
#include <random>
#include <string>

#include "nmd/audit_log.h"
#include "nmd/eval.h"
#include "nmd/formula.h"

namespace nmd::testing {

using Rng = std::mt19937_64;

std::string data_path(const std::string& file);
Workbook fixture(const std::string& file);

// FIX-A extended plus the SecDI_2 sheet: a naming context with dotted names
// and a sheet that needs quoting.
Workbook naming_context();

// --- generators ---------------------------------------------------------------

// A1-only expression (no names) in canonical form.
Expr random_a1_expr(Rng& rng, int depth);
// Expression over the defined names of `context`, in the form parse_named
// returns (resolved names, no A1 references).
Expr random_named_expr(Rng& rng, const Workbook& context, int depth);
// With `match_types`, literals are drawn from the condition's own column and
// current-row operands from columns of the same type, so most conditions
// compare like with like.
ConditionalAggregate random_conditional(Rng& rng, const Workbook& context, bool match_types = false);

struct RandomWorkbookOptions {
  int max_sheets = 5;
  int max_formulas = 50;
};
// Acyclic by construction; formulas mix A1 references, names, ranges and
// conditional aggregates.
Workbook random_workbook(Rng& rng, const RandomWorkbookOptions& opts = {});

// One or two table sheets and a HOST sheet, all sharing the data region
// 5..5+rows-1. Every table column is named; HOST column B is named Anchor.
// Values come from a small pool so conditions both match and miss.
Workbook random_table_workbook(Rng& rng, int max_rows = 200);

// A single edit applied to `w`. `sheet` names the sheet the edit lands on as
// spelled in the workbook it exists in.
struct Mutation {
  Workbook after;
  std::string sheet;
  std::string what;
};
Mutation random_mutation(Rng& rng, const Workbook& w);

// random_workbook with roles shuffled over the sheets.
Workbook random_role_workbook(Rng& rng);

// Scripted commit history of a production model, versions 87 to 92.
struct ScriptedCommit {
  bool version_change;
  std::string description;
  std::string user;
  std::string when;  // DD/MM/YYYY HH:MM
};
const std::vector<ScriptedCommit>& model_history_script();
// The history report those commits must render to.
extern const char* const kModelHistoryReport;
// Commits the script on top of `base` (expected at version 86, revision 1)
// and returns the final workbook.
Workbook replay_model_history(AuditLog& log, Workbook base, bool archive_last = false);

// --- reference implementations ------------------------------------------------

// Re-evaluates every formula cell recursively with memoization.
std::map<CellAddress, CellValue> naive_values(const Workbook& w);

// Filter the rows, then aggregate.
CellValue brute_force(const Workbook& w, const ConditionalAggregate& c, const CellAddress& host);

}  // namespace nmd::testing
