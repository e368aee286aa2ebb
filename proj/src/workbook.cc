// SPDX-License-Identifier: Apache-2.0
#include "nmd/workbook.h"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "nmd/errors.h"

namespace nmd {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

// Names must lex as a single identifier token and must not collide with
// A1 references or keywords.
bool is_valid_defined_name(std::string_view name) {
  if (name.empty() || name.back() == '.') return false;
  if (!std::isalpha(static_cast<unsigned char>(name.front())) && name.front() != '_') {
    return false;
  }
  for (char c : name) {
    if (!is_name_char(c)) return false;
  }
  if (name.find("..") != std::string_view::npos) return false;
  if (parse_cell_a1(name)) return false;
  for (std::string_view kw : {"TRUE", "FALSE", "AND", "OR"}) {
    if (iequals(name, kw)) return false;
  }
  return true;
}

bool is_canonical_a1(std::string_view key) {
  auto parsed = parse_cell_a1(key);
  return parsed &&
         column_letters(parsed->first) + std::to_string(parsed->second) == key;
}

}  // namespace

std::string_view role_name(SheetRole role) {
  switch (role) {
    case SheetRole::Input:
      return "input";
    case SheetRole::Output:
      return "output";
    case SheetRole::Calculation:
      return "calculation";
  }
  return "calculation";
}

std::optional<SheetRole> parse_role(std::string_view text) {
  if (text == "input") return SheetRole::Input;
  if (text == "output") return SheetRole::Output;
  if (text == "calculation") return SheetRole::Calculation;
  return std::nullopt;
}

std::string_view rule_name(RuleId id) {
  switch (id) {
    case RuleId::R1_INPUT_HAS_FORMULA:
      return "R1_INPUT_HAS_FORMULA";
    case RuleId::R2_OUTPUT_REFS_NONCALC:
      return "R2_OUTPUT_REFS_NONCALC";
    case RuleId::R3_DUPLICATE_NAME:
      return "R3_DUPLICATE_NAME";
    case RuleId::R4_CIRCULAR_DEPENDENCY:
      return "R4_CIRCULAR_DEPENDENCY";
    case RuleId::R5_UNRESOLVED_NAME:
      return "R5_UNRESOLVED_NAME";
  }
  return "";
}

const CellContent* Sheet::cell(int column, int row) const {
  auto it = cells.find(column_letters(column) + std::to_string(row));
  return it == cells.end() ? nullptr : &it->second;
}

const ColumnDef* Sheet::column_by_letter(std::string_view letter) const {
  for (const auto& c : columns) {
    if (iequals(c.letter, letter)) return &c;
  }
  return nullptr;
}

const ColumnDef* Sheet::column_by_name(std::string_view n) const {
  for (const auto& c : columns) {
    if (c.name && *c.name == n) return &c;
  }
  return nullptr;
}

const std::string* Sheet::name_of_cell(int column, int row) const {
  std::string a1 = column_letters(column) + std::to_string(row);
  for (const auto& [n, addr] : named_cells) {
    if (addr == a1) return &n;
  }
  return nullptr;
}

const Sheet* Workbook::find_sheet(std::string_view sheet_name) const {
  for (const auto& s : sheets) {
    if (iequals(s.name, sheet_name)) return &s;
  }
  return nullptr;
}

Sheet* Workbook::find_sheet(std::string_view sheet_name) {
  for (auto& s : sheets) {
    if (iequals(s.name, sheet_name)) return &s;
  }
  return nullptr;
}

const Sheet& Workbook::sheet(std::string_view sheet_name) const {
  const Sheet* s = find_sheet(sheet_name);
  if (!s) throw NotFoundError("no sheet named '" + std::string(sheet_name) + "'");
  return *s;
}

const CellContent* Workbook::cell(const CellAddress& address) const {
  const Sheet* s = find_sheet(address.sheet);
  return s ? s->cell(address.column, address.row) : nullptr;
}

std::string render_qualified(const QualifiedName& q) {
  bool quote = q.sheet.empty() ||
               std::isdigit(static_cast<unsigned char>(q.sheet.front())) ||
               q.name.find('.') != std::string::npos;
  for (char c : q.sheet) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') quote = true;
  }
  if (!quote) return q.sheet + "." + q.name;
  std::string out = "'";
  for (char c : q.sheet) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'." + q.name;
}

std::string ColumnRange::to_string() const {
  std::string col = "$" + column_letters(column);
  return quote_sheet_for_a1(sheet) + "!" + col + "$" + std::to_string(first_row) +
         ":" + col + "$" + std::to_string(last_row);
}

ResolvedTarget resolve_name(const Workbook& w, const QualifiedName& q) {
  const Sheet* sheet = w.find_sheet(q.sheet);
  if (!sheet) {
    throw NameError(NameError::Kind::Unresolved,
                    "unresolved name '" + render_qualified(q) + "': no sheet '" +
                        q.sheet + "'");
  }
  auto named = sheet->named_cells.find(q.name);
  const ColumnDef* column = sheet->column_by_name(q.name);
  if (named != sheet->named_cells.end() && column) {
    throw NameError(NameError::Kind::Ambiguous,
                    "ambiguous name '" + render_qualified(q) +
                        "': defined as both cell " + named->second +
                        " and column " + column->letter);
  }
  if (named != sheet->named_cells.end()) {
    auto rc = parse_cell_a1(named->second);
    if (!rc) {
      throw NameError(NameError::Kind::Unresolved,
                      "name '" + render_qualified(q) + "' targets malformed address");
    }
    return CellAddress{sheet->upper_name(), rc->first, rc->second};
  }
  if (column) {
    return ColumnRange{sheet->upper_name(), *column_index(column->letter),
                       sheet->first_data_row, sheet->last_data_row};
  }
  throw NameError(NameError::Kind::Unresolved,
                  "unresolved name '" + render_qualified(q) + "'");
}

namespace {

bool defines(const Sheet& s, std::string_view name) {
  return s.named_cells.count(std::string(name)) > 0 ||
         s.column_by_name(name) != nullptr;
}

}  // namespace

QualifiedName resolve_name_text(const Workbook& w, std::string_view text,
                                const std::string* host_sheet) {
  QualifiedName q;
  if (!text.empty() && text.front() == '\'') {
    std::size_t i = 1;
    std::string sheet;
    for (; i < text.size(); ++i) {
      if (text[i] == '\'') {
        if (i + 1 < text.size() && text[i + 1] == '\'') {
          sheet += '\'';
          ++i;
          continue;
        }
        break;
      }
      sheet += text[i];
    }
    if (i + 1 >= text.size() || text[i + 1] != '.') {
      throw NameError(NameError::Kind::Unresolved,
                      "malformed qualified name '" + std::string(text) + "'");
    }
    const Sheet* s = w.find_sheet(sheet);
    q = QualifiedName{s ? s->name : sheet, std::string(text.substr(i + 2))};
    resolve_name(w, q);
    return q;
  }
  auto dot = text.find('.');
  if (dot != std::string_view::npos) {
    const Sheet* s = w.find_sheet(text.substr(0, dot));
    if (s && defines(*s, text.substr(dot + 1))) {
      q = QualifiedName{s->name, std::string(text.substr(dot + 1))};
      resolve_name(w, q);
      return q;
    }
  }
  if (host_sheet) {
    const Sheet* s = w.find_sheet(*host_sheet);
    if (s && defines(*s, text)) {
      q = QualifiedName{s->name, std::string(text)};
      resolve_name(w, q);
      return q;
    }
  }
  throw NameError(NameError::Kind::Unresolved,
                  "unresolved name '" + std::string(text) + "'");
}

std::optional<QualifiedName> name_for_cell(const Workbook& w,
                                           const CellAddress& cell) {
  const Sheet* s = w.find_sheet(cell.sheet);
  if (!s) return std::nullopt;
  if (const std::string* n = s->name_of_cell(cell.column, cell.row)) {
    return QualifiedName{s->name, *n};
  }
  return std::nullopt;
}

std::optional<QualifiedName> name_for_column(const Workbook& w,
                                             const std::string& sheet,
                                             int column) {
  const Sheet* s = w.find_sheet(sheet);
  if (!s) return std::nullopt;
  const ColumnDef* c = s->column_by_letter(column_letters(column));
  if (!c || !c->name) return std::nullopt;
  return QualifiedName{s->name, *c->name};
}

void check_invariants(const Workbook& w) {
  if (w.version < 1) throw DocumentError("version: must be >= 1");
  if (w.revision < 1) throw DocumentError("revision: must be >= 1");
  std::map<std::string, std::size_t> seen_sheets;
  for (std::size_t i = 0; i < w.sheets.size(); ++i) {
    const Sheet& s = w.sheets[i];
    std::string path = "sheets[" + std::to_string(i) + "]";
    if (s.name.empty()) throw DocumentError(path + ".name: empty sheet name");
    auto [it, inserted] = seen_sheets.emplace(s.upper_name(), i);
    if (!inserted) {
      throw DocumentError(path + ".name: duplicate sheet name '" + s.name +
                          "' (also sheets[" + std::to_string(it->second) + "])");
    }
    if (s.first_data_row < 1 || s.last_data_row > kMaxRow ||
        s.first_data_row > s.last_data_row) {
      throw DocumentError(path + ": first_data_row must be <= last_data_row");
    }
    // Every defined name on the sheet, with where it was defined.
    std::map<std::string, std::string> definitions;
    std::set<std::string> letters;
    for (std::size_t c = 0; c < s.columns.size(); ++c) {
      const ColumnDef& col = s.columns[c];
      std::string cpath = path + ".columns[" + std::to_string(c) + "]";
      if (!column_index(col.letter) || to_upper(col.letter) != col.letter) {
        throw DocumentError(cpath + ".letter: invalid column letter '" +
                            col.letter + "'");
      }
      if (!letters.insert(col.letter).second) {
        throw DocumentError(cpath + ".letter: duplicate column letter " + col.letter);
      }
      if (col.name) {
        if (!is_valid_defined_name(*col.name)) {
          throw DocumentError(cpath + ".name: invalid name '" + *col.name + "'");
        }
        auto [d, fresh] = definitions.emplace(*col.name, "column " + col.letter);
        if (!fresh) {
          throw DocumentError(cpath + ".name: duplicate name '" + *col.name +
                              "' on sheet " + s.name + " (" + d->second +
                              " and column " + col.letter + ")");
        }
      }
    }
    for (const auto& [addr, content] : s.cells) {
      std::string cpath = path + ".cells." + addr;
      if (!is_canonical_a1(addr)) {
        throw DocumentError(cpath + ": invalid cell address");
      }
      if (content.is_formula() && content.formula_text.empty()) {
        throw DocumentError(cpath + ".f: empty formula");
      }
    }
    std::map<std::string, std::string> named_targets;
    for (const auto& [name, addr] : s.named_cells) {
      std::string npath = path + ".named_cells." + name;
      if (!is_valid_defined_name(name)) {
        throw DocumentError(npath + ": invalid name");
      }
      if (!is_canonical_a1(addr)) {
        throw DocumentError(npath + ": address '" + addr +
                            "' is outside the addressable area");
      }
      auto [d, fresh] = definitions.emplace(name, "cell " + addr);
      if (!fresh) {
        throw DocumentError(npath + ": duplicate name '" + name + "' on sheet " +
                            s.name + " (" + d->second + " and cell " + addr + ")");
      }
      auto [t, unique] = named_targets.emplace(addr, name);
      if (!unique) {
        throw DocumentError(npath + ": cell " + addr + " already named '" +
                            t->second + "'");
      }
    }
  }
}

// --- interchange document ---------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw DocumentError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(path, "unknown field '" + key + "'");
  }
}

int get_positive_int(const json& obj, const char* key, int fallback,
                     const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1 ||
      v.get<std::int64_t>() > kMaxRow * 16LL) {
    fail(path + "." + key, "expected a positive integer");
  }
  return static_cast<int>(v.get<std::int64_t>());
}

std::string get_string(const json& obj, const char* key, const std::string& path,
                       bool required) {
  if (!obj.contains(key)) {
    if (required) fail(path + "." + key, "missing required field");
    return "";
  }
  if (!obj.at(key).is_string()) fail(path + "." + key, "expected a string");
  return obj.at(key).get<std::string>();
}

CellValue value_from_json(const json& v, const std::string& path) {
  switch (v.type()) {
    case json::value_t::null:
      return CellValue::blank();
    case json::value_t::boolean:
      return CellValue::boolean(v.get<bool>());
    case json::value_t::string:
      return CellValue::text(v.get<std::string>());
    case json::value_t::number_integer:
      return CellValue::number(Decimal(v.get<std::int64_t>()));
    case json::value_t::number_unsigned:
      return CellValue::number(Decimal::parse(std::to_string(v.get<std::uint64_t>())));
    case json::value_t::number_float:
      return CellValue::number(Decimal::from_double(v.get<double>()));
    default:
      fail(path, "expected number, string, boolean or null");
  }
}

ordered_json value_to_json(const CellValue& v) {
  switch (v.kind()) {
    case CellValue::Kind::Blank:
      return nullptr;
    case CellValue::Kind::Boolean:
      return v.as_boolean();
    case CellValue::Kind::Text:
      return v.as_text();
    case CellValue::Kind::Number:
      if (auto i = v.as_number().to_int64()) return *i;
      return v.as_number().to_double();
    case CellValue::Kind::Error:
      return v.error_code();
  }
  return nullptr;
}

Sheet sheet_from_json(const json& js, const std::string& path) {
  check_keys(js, path,
             {"name", "role", "first_data_row", "last_data_row", "columns",
              "cells", "named_cells"});
  Sheet s;
  s.name = get_string(js, "name", path, true);
  std::string role = get_string(js, "role", path, true);
  auto parsed_role = parse_role(role);
  if (!parsed_role) fail(path + ".role", "invalid role '" + role + "'");
  s.role = *parsed_role;
  s.first_data_row = get_positive_int(js, "first_data_row", 5, path);
  s.last_data_row = get_positive_int(js, "last_data_row", 754, path);
  if (js.contains("columns")) {
    const json& cols = js.at("columns");
    if (!cols.is_array()) fail(path + ".columns", "expected an array");
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::string cpath = path + ".columns[" + std::to_string(i) + "]";
      check_keys(cols[i], cpath, {"letter", "name"});
      ColumnDef c;
      c.letter = get_string(cols[i], "letter", cpath, true);
      if (cols[i].contains("name")) c.name = get_string(cols[i], "name", cpath, true);
      s.columns.push_back(std::move(c));
    }
  }
  if (js.contains("cells")) {
    const json& cells = js.at("cells");
    if (!cells.is_object()) fail(path + ".cells", "expected an object");
    for (const auto& [addr, cj] : cells.items()) {
      std::string cpath = path + ".cells." + addr;
      check_keys(cj, cpath, {"v", "f", "array"});
      if (cj.contains("v") == cj.contains("f")) {
        fail(cpath, "exactly one of 'v' or 'f' is required");
      }
      if (cj.contains("v")) {
        if (cj.contains("array")) fail(cpath, "'array' only applies to formulas");
        s.cells.emplace(addr, CellContent::literal(value_from_json(cj.at("v"), cpath + ".v")));
      } else {
        std::string f = get_string(cj, "f", cpath, true);
        bool array = false;
        if (cj.contains("array")) {
          if (!cj.at("array").is_boolean()) fail(cpath + ".array", "expected a boolean");
          array = cj.at("array").get<bool>();
        }
        s.cells.emplace(addr, CellContent::formula(std::move(f), array));
      }
    }
  }
  if (js.contains("named_cells")) {
    const json& named = js.at("named_cells");
    if (!named.is_object()) fail(path + ".named_cells", "expected an object");
    for (const auto& [n, a] : named.items()) {
      if (!a.is_string()) fail(path + ".named_cells." + n, "expected a string");
      s.named_cells.emplace(n, a.get<std::string>());
    }
  }
  return s;
}

}  // namespace

Workbook load_workbook(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw DocumentError(std::string("malformed document: ") + e.what());
  }
  check_keys(doc, "$", {"name", "version", "revision", "sheets"});
  Workbook w;
  w.name = get_string(doc, "name", "$", false);
  w.version = get_positive_int(doc, "version", 1, "$");
  w.revision = get_positive_int(doc, "revision", 1, "$");
  if (doc.contains("sheets")) {
    const json& sheets = doc.at("sheets");
    if (!sheets.is_array()) fail("$.sheets", "expected an array");
    for (std::size_t i = 0; i < sheets.size(); ++i) {
      w.sheets.push_back(sheet_from_json(sheets[i], "sheets[" + std::to_string(i) + "]"));
    }
  }
  check_invariants(w);
  return w;
}

std::string save_workbook(const Workbook& w) {
  ordered_json doc;
  doc["name"] = w.name;
  doc["version"] = w.version;
  doc["revision"] = w.revision;
  doc["sheets"] = ordered_json::array();
  for (const Sheet& s : w.sheets) {
    ordered_json js;
    js["name"] = s.name;
    js["role"] = std::string(role_name(s.role));
    js["first_data_row"] = s.first_data_row;
    js["last_data_row"] = s.last_data_row;
    js["columns"] = ordered_json::array();
    for (const ColumnDef& c : s.columns) {
      ordered_json cj;
      cj["letter"] = c.letter;
      if (c.name) cj["name"] = *c.name;
      js["columns"].push_back(std::move(cj));
    }
    js["cells"] = ordered_json::object();
    for (const auto& [addr, content] : s.cells) {
      ordered_json cj;
      if (content.is_formula()) {
        cj["f"] = content.formula_text;
        cj["array"] = content.is_array;
      } else {
        cj["v"] = value_to_json(content.literal_value);
      }
      js["cells"][addr] = std::move(cj);
    }
    js["named_cells"] = ordered_json::object();
    for (const auto& [n, a] : s.named_cells) js["named_cells"][n] = a;
    doc["sheets"].push_back(std::move(js));
  }
  return doc.dump(2) + "\n";
}

Workbook load_workbook_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read workbook '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_workbook(ss.str());
}

void save_workbook_file(const Workbook& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write workbook '" + path.string() + "'");
  out << save_workbook(w);
}

}  // namespace nmd
