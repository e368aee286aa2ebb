// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nmd/formula_ast.h"
#include "nmd/workbook.h"

namespace nmd {

// --- A1 surface ---------------------------------------------------------------

// Parses `=MAX(IF(SECDI!$B$5:$B$754=SEC_GTEEADJ!$B5, ...))` style text.
// Defined names are not accepted here. Throws ParseError.
Expr parse_a1(std::string_view text);

// Canonical A1 text: leading `=`, no interior spaces, `$` markers kept,
// sheets uppercase.
std::string print_a1(const Expr& ast);

// --- cell formulas ------------------------------------------------------------

// Accepts everything a cell may hold: A1 references, defined names and the
// bracketed conditional notation. Names are left unresolved.
Expr parse_formula(std::string_view text);

// Binds every NameRef to a (sheet, name) pair. Bare names are looked up on
// `host_sheet`. Throws NameError.
Expr resolve_names(const Expr& ast, const Workbook& w,
                   const std::string* host_sheet);

// --- conditional aggregate notation ------------------------------------------

struct CurrentRowCell {
  QualifiedName column;
  friend bool operator==(const CurrentRowCell&, const CurrentRowCell&) = default;
};

struct Condition {
  QualifiedName lhs;
  BinaryOperator op = BinaryOperator::Eq;
  std::variant<CurrentRowCell, CellValue> rhs;
  friend bool operator==(const Condition&, const Condition&) = default;
};

// `AGG(value [cond AND cond ...])`
struct ConditionalAggregate {
  Aggregator aggregator = Aggregator::Sum;
  QualifiedName value_column;
  std::vector<Condition> conditions;
  friend bool operator==(const ConditionalAggregate&,
                         const ConditionalAggregate&) = default;
};

using NamedItem = std::variant<Expr, ConditionalAggregate>;

// Parses named-form text against `context`. A text that is exactly one
// bracketed aggregate yields a ConditionalAggregate; anything else yields an
// expression with resolved NameRefs. Throws ParseError / NameError.
NamedItem parse_named(std::string_view text, const Workbook& context,
                      const std::optional<std::string>& host_sheet = std::nullopt);

// Readable rendering. A1 references are translated to their defined names;
// a reference with no name raises NameError(Unnamed) citing the address.
// `host` decides which column cells read as "current row" and which names
// may drop their sheet prefix.
std::string print_named(const NamedItem& item, const Workbook& context,
                        const std::optional<CellAddress>& host = std::nullopt);

// The ArrayConditional node spelled with NameRefs.
Expr to_expr(const ConditionalAggregate& c);

struct CompiledFormula {
  Expr ast;
  bool is_array = true;
  std::string text() const { return print_a1(ast); }
};

// Emits AGG(IF(c1, IF(c2, ..., value))) with ranges fully absolute and
// current-row operands column-absolute at the host row.
// Throws NameError or PreconditionError (misaligned spans, host row).
CompiledFormula compile_conditional(const ConditionalAggregate& c,
                                    const Workbook& context,
                                    const CellAddress& host);

// Inverse of compile_conditional. Throws ShapeError.
ConditionalAggregate decompile_array(
    const Expr& ast, const Workbook& context,
    const std::optional<CellAddress>& host = std::nullopt);

// Convenience overloads on text.
CompiledFormula compile_conditional_text(std::string_view named_text,
                                         const Workbook& context,
                                         const CellAddress& host);
std::string decompile_text(std::string_view a1_text, const Workbook& context,
                           const std::optional<CellAddress>& host = std::nullopt);

}  // namespace nmd
