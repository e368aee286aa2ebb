// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nmd/address.h"
#include "nmd/cell_value.h"

namespace nmd {

enum class SheetRole { Input, Output, Calculation };

std::string_view role_name(SheetRole role);  // "input" | "output" | "calculation"
std::optional<SheetRole> parse_role(std::string_view text);

struct ColumnDef {
  std::string letter;               // canonical uppercase
  std::optional<std::string> name;  // defined name of the column
  friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

struct CellContent {
  enum class Kind { Literal, Formula };

  static CellContent literal(CellValue v) {
    CellContent c;
    c.kind = Kind::Literal;
    c.literal_value = std::move(v);
    return c;
  }
  static CellContent formula(std::string text, bool array = false) {
    CellContent c;
    c.kind = Kind::Formula;
    c.formula_text = std::move(text);
    c.is_array = array;
    return c;
  }
  bool is_formula() const { return kind == Kind::Formula; }

  Kind kind = Kind::Literal;
  CellValue literal_value;
  std::string formula_text;
  bool is_array = false;

  friend bool operator==(const CellContent&, const CellContent&) = default;
};

struct Sheet {
  std::string name;
  SheetRole role = SheetRole::Calculation;
  int first_data_row = 5;
  int last_data_row = 754;
  std::vector<ColumnDef> columns;
  std::map<std::string, CellContent> cells;       // "B5" -> content
  std::map<std::string, std::string> named_cells;  // name -> "B5"

  std::string upper_name() const { return to_upper(name); }
  const CellContent* cell(int column, int row) const;
  const ColumnDef* column_by_letter(std::string_view letter) const;
  const ColumnDef* column_by_name(std::string_view name) const;
  // Name of the cell defined at (column, row), if any.
  const std::string* name_of_cell(int column, int row) const;

  friend bool operator==(const Sheet&, const Sheet&) = default;
};

struct Workbook {
  std::string name;
  std::vector<Sheet> sheets;
  int version = 1;
  int revision = 1;

  // Case-insensitive lookup.
  const Sheet* find_sheet(std::string_view sheet_name) const;
  Sheet* find_sheet(std::string_view sheet_name);
  const Sheet& sheet(std::string_view sheet_name) const;  // throws NotFoundError
  const CellContent* cell(const CellAddress& address) const;

  friend bool operator==(const Workbook&, const Workbook&) = default;
};

// `Sheet.Name`. The sheet is kept as the workbook spells it for display;
// comparison against sheets is case-insensitive, names compare exactly.
struct QualifiedName {
  std::string sheet;
  std::string name;
  friend bool operator==(const QualifiedName&, const QualifiedName&) = default;
  friend auto operator<=>(const QualifiedName&, const QualifiedName&) = default;
};

// Renders `Sheet.Name`, quoting the sheet as `'Sheet'.` when it holds
// characters other than letters, digits and underscore, starts with a digit,
// or when the name itself contains a dot.
std::string render_qualified(const QualifiedName& q);

// Vertical range of a named column: letter!first_data_row..last_data_row.
struct ColumnRange {
  std::string sheet;  // uppercase
  int column = 1;
  int first_row = 1;
  int last_row = 1;

  bool contains(const CellAddress& a) const {
    return a.sheet == sheet && a.column == column && a.row >= first_row &&
           a.row <= last_row;
  }
  CellAddress top() const { return CellAddress{sheet, column, first_row}; }
  std::string to_string() const;  // "SHEET!$L$5:$L$754"
  friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
  friend auto operator<=>(const ColumnRange&, const ColumnRange&) = default;
};

using ResolvedTarget = std::variant<CellAddress, ColumnRange>;

// Throws NameError (Unresolved / Ambiguous).
ResolvedTarget resolve_name(const Workbook& w, const QualifiedName& q);

// Resolves the raw text of a name token the way formulas spell it:
// `'Sheet'.Name`, `Sheet.Name`, or a bare `Name` relative to `host_sheet`.
// An unquoted token is first split at its first dot into sheet and name;
// when that does not resolve, the whole token is looked up on the host sheet.
QualifiedName resolve_name_text(const Workbook& w, std::string_view text,
                                const std::string* host_sheet);

// The named form a reference to `target` would print as, if any.
std::optional<QualifiedName> name_for_cell(const Workbook& w,
                                           const CellAddress& cell);
std::optional<QualifiedName> name_for_column(const Workbook& w,
                                             const std::string& sheet,
                                             int column);

// Interchange document (UTF-8 JSON, canonical key order).
// Throws DocumentError with a field path on malformed input.
Workbook load_workbook(std::string_view document);
std::string save_workbook(const Workbook& w);

Workbook load_workbook_file(const std::filesystem::path& path);
void save_workbook_file(const Workbook& w, const std::filesystem::path& path);

// Throws DocumentError when a structural invariant does not hold.
void check_invariants(const Workbook& w);

enum class RuleId {
  R1_INPUT_HAS_FORMULA,
  R2_OUTPUT_REFS_NONCALC,
  R3_DUPLICATE_NAME,
  R4_CIRCULAR_DEPENDENCY,
  R5_UNRESOLVED_NAME,
};
std::string_view rule_name(RuleId id);

struct ValidationFinding {
  RuleId rule_id;
  std::string location;
  std::string message;
  friend bool operator==(const ValidationFinding&, const ValidationFinding&) = default;
};

// Structured-spreadsheet checks. An empty list means compliant.
std::vector<ValidationFinding> validate_structure(const Workbook& w);

}  // namespace nmd
