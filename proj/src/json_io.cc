// SPDX-License-Identifier: Apache-2.0
#include "nmd/json_io.h"

#include "nmd/errors.h"

namespace nmd::json_io {

Json value(const CellValue& v) {
  Json j;
  switch (v.kind()) {
    case CellValue::Kind::Blank:
      j["type"] = "blank";
      j["value"] = nullptr;
      break;
    case CellValue::Kind::Number:
      j["type"] = "number";
      j["value"] = v.as_number().to_string();
      break;
    case CellValue::Kind::Boolean:
      j["type"] = "boolean";
      j["value"] = v.as_boolean();
      break;
    case CellValue::Kind::Text:
      j["type"] = "text";
      j["value"] = v.as_text();
      break;
    case CellValue::Kind::Error:
      j["type"] = "error";
      j["value"] = v.error_code();
      break;
  }
  j["display"] = v.to_display();
  return j;
}

CellValue value_from_json(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return CellValue::blank();
    case Json::value_t::boolean: return CellValue::boolean(j.get<bool>());
    case Json::value_t::string: return CellValue::text(j.get<std::string>());
    case Json::value_t::number_integer: return CellValue::number(Decimal(j.get<std::int64_t>()));
    case Json::value_t::number_unsigned:
      return CellValue::number(Decimal::parse(std::to_string(j.get<std::uint64_t>())));
    case Json::value_t::number_float: return CellValue::number(Decimal::from_double(j.get<double>()));
    default: throw PreconditionError("override values must be numbers, strings, booleans or null");
  }
}

CellValue value_from_text(const std::string& text) {
  if (text.empty()) return CellValue::blank();
  std::string upper = to_upper(text);
  if (upper == "TRUE") return CellValue::boolean(true);
  if (upper == "FALSE") return CellValue::boolean(false);
  if (auto d = Decimal::try_parse(text)) return CellValue::number(*d);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    return CellValue::text(text.substr(1, text.size() - 2));
  }
  return CellValue::text(text);
}

std::string target_text(const ResolvedTarget& t) {
  if (const auto* c = std::get_if<CellAddress>(&t)) return c->to_string();
  return std::get<ColumnRange>(t).to_string();
}

Json workbook_summary(const Workbook& w) {
  Json j;
  j["name"] = w.name;
  j["version"] = w.version;
  j["revision"] = w.revision;
  j["sheets"] = Json::array();
  for (const auto& s : w.sheets) {
    Json js;
    js["name"] = s.name;
    js["role"] = std::string(role_name(s.role));
    js["first_data_row"] = s.first_data_row;
    js["last_data_row"] = s.last_data_row;
    js["columns"] = Json::array();
    for (const auto& c : s.columns) {
      Json jc;
      jc["letter"] = c.letter;
      jc["name"] = c.name ? Json(*c.name) : Json(nullptr);
      js["columns"].push_back(jc);
    }
    js["named_cells"] = Json::object();
    for (const auto& [n, a] : s.named_cells) js["named_cells"][n] = a;
    js["cell_count"] = s.cells.size();
    j["sheets"].push_back(js);
  }
  return j;
}

Json walk_row(const WalkRow& r) {
  Json j;
  j["sheetname"] = r.sheetname;
  j["name"] = r.name;
  j["value"] = value(r.value);
  j["formula"] = r.formula;
  j["target"] = target_text(r.target);
  j["range"] = std::holds_alternative<ColumnRange>(r.target);
  return j;
}

Json inspection(const Inspection& ins) {
  Json j;
  j["precedents"] = Json::array();
  for (const auto& r : ins.precedents) j["precedents"].push_back(walk_row(r));
  j["current"] = walk_row(ins.current);
  j["dependents"] = Json::array();
  for (const auto& r : ins.dependents) j["dependents"].push_back(walk_row(r));
  return j;
}

Json trail(const WalkSession& s) {
  Json j = Json::array();
  for (const auto& step : s.trail()) {
    j.push_back({{"cell", step.cell.to_string()}, {"kind", std::string(step_kind_name(step.kind))}});
  }
  return j;
}

Json findings(const std::vector<ValidationFinding>& f) {
  Json j = Json::array();
  for (const auto& x : f) {
    j.push_back({{"rule_id", std::string(rule_name(x.rule_id))},
                 {"location", x.location},
                 {"message", x.message}});
  }
  return j;
}

namespace {

Json cell_name(const Workbook& w, const CellAddress& a) {
  if (auto q = name_for_cell(w, a)) return render_qualified(*q);
  return nullptr;
}

}  // namespace

Json eval_result(const Workbook& w, const EvalResult& r) {
  std::set<CellAddress> cells;
  for (const auto& [a, v] : r.values) cells.insert(a);
  for (const auto& [a, v] : r.errors) cells.insert(a);
  Json j = Json::array();
  for (const auto& a : cells) {
    j.push_back({{"cell", a.to_string()}, {"name", cell_name(w, a)}, {"value", value(value_of(w, r, a))}});
  }
  return j;
}

Json value_changes(const Workbook& w, const std::vector<ValueChange>& changes) {
  Json j = Json::array();
  for (const auto& c : changes) {
    j.push_back({{"cell", c.cell.to_string()},
                 {"name", cell_name(w, c.cell)},
                 {"before", value(c.before)},
                 {"after", value(c.after)}});
  }
  return j;
}

Json change_set(const ChangeSet& cs) {
  Json j;
  j["classification"] = std::string(classification_name(cs.classification));
  j["entries"] = Json::array();
  for (const auto& e : cs.entries) {
    j["entries"].push_back({{"sheet", e.sheet},
                            {"location", e.location},
                            {"kind", std::string(change_kind_name(e.kind))},
                            {"before", e.before},
                            {"after", e.after}});
  }
  return j;
}

Json log_record(const LogRecord& r) {
  Json j;
  j["seq"] = r.seq;
  j["version"] = r.version;
  j["revision"] = r.revision;
  j["modified_by"] = r.modified_by;
  j["modified_on"] = r.modified_on.iso();
  j["description"] = r.description;
  j["comments"] = Json::array();
  for (const auto& c : r.comments) {
    j["comments"].push_back({{"text", c.text}, {"user", c.user}, {"at", c.at.iso()}});
  }
  j["snapshot_path"] = r.snapshot_path ? Json(*r.snapshot_path) : Json(nullptr);
  return j;
}

Json history(const std::vector<HistoryGroup>& groups) {
  Json j = Json::array();
  for (const auto& g : groups) {
    Json jg;
    jg["version"] = g.version;
    jg["rows"] = Json::array();
    for (const auto& r : g.rows) {
      jg["rows"].push_back({{"revision", r.revision},
                            {"name", r.name},
                            {"modified_by", r.modified_by},
                            {"modified_on", r.modified_on}});
    }
    j.push_back(jg);
  }
  return j;
}

}  // namespace nmd::json_io
