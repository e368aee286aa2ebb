// SPDX-License-Identifier: Apache-2.0
#include "nmd/audit_log.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nmd/errors.h"

namespace nmd {

using nlohmann::ordered_json;

std::string_view change_kind_name(ChangeKind k) {
  switch (k) {
    case ChangeKind::CellAdded: return "CellAdded";
    case ChangeKind::CellRemoved: return "CellRemoved";
    case ChangeKind::FormulaChanged: return "FormulaChanged";
    case ChangeKind::LiteralChanged: return "LiteralChanged";
    case ChangeKind::NameAdded: return "NameAdded";
    case ChangeKind::NameRemoved: return "NameRemoved";
    case ChangeKind::NameRetargeted: return "NameRetargeted";
    case ChangeKind::RoleChanged: return "RoleChanged";
    case ChangeKind::SheetAdded: return "SheetAdded";
    case ChangeKind::SheetRemoved: return "SheetRemoved";
  }
  return "";
}

std::string_view classification_name(Classification c) {
  switch (c) {
    case Classification::NoChange: return "NoChange";
    case Classification::RevisionChange: return "RevisionChange";
    case Classification::VersionChange: return "VersionChange";
  }
  return "";
}

std::string render_content(const CellContent& c) {
  if (c.is_formula()) return c.is_array ? "{" + c.formula_text + "}" : c.formula_text;
  const CellValue& v = c.literal_value;
  switch (v.kind()) {
    case CellValue::Kind::Blank: return "null";
    case CellValue::Kind::Number: return v.as_number().to_string();
    case CellValue::Kind::Boolean: return v.as_boolean() ? "true" : "false";
    case CellValue::Kind::Text: return ordered_json(v.as_text()).dump();
    case CellValue::Kind::Error: return ordered_json(v.error_code()).dump();
  }
  return "";
}

// --- diff ---------------------------------------------------------------------

namespace {

bool is_io(SheetRole r) { return r != SheetRole::Calculation; }

// Defined names of a sheet with what they denote.
std::map<std::string, std::string> name_targets(const Sheet& s) {
  std::map<std::string, std::string> out;
  for (const auto& c : s.columns) {
    if (c.name) out[*c.name] = "column " + c.letter;
  }
  for (const auto& [n, a] : s.named_cells) out[n] = to_upper(a);
  return out;
}

std::set<std::string> unnamed_columns(const Sheet& s) {
  std::set<std::string> out;
  for (const auto& c : s.columns) {
    if (!c.name) out.insert(c.letter);
  }
  return out;
}

// Cells in address order rather than key order.
std::map<CellAddress, const CellContent*> cells_of(const Sheet& s) {
  std::map<CellAddress, const CellContent*> out;
  for (const auto& [a1, c] : s.cells) {
    if (auto rc = parse_cell_a1(a1)) out[{s.upper_name(), rc->first, rc->second}] = &c;
  }
  return out;
}

void diff_sheet(const Sheet& a, const Sheet& b, std::vector<ChangeEntry>& out) {
  bool io = is_io(a.role) || is_io(b.role);
  auto add = [&](std::string location, ChangeKind kind, std::string before,
                 std::string after) {
    out.push_back({b.name, std::move(location), kind, std::move(before), std::move(after), io});
  };
  std::string upper = b.upper_name();

  if (a.role != b.role) {
    add(b.name, ChangeKind::RoleChanged, std::string(role_name(a.role)),
        std::string(role_name(b.role)));
  }
  if (a.first_data_row != b.first_data_row || a.last_data_row != b.last_data_row) {
    add(b.name + " data region", ChangeKind::NameRetargeted,
        std::to_string(a.first_data_row) + ".." + std::to_string(a.last_data_row),
        std::to_string(b.first_data_row) + ".." + std::to_string(b.last_data_row));
  }

  auto na = name_targets(a);
  auto nb = name_targets(b);
  std::set<std::string> names;
  for (const auto& [n, t] : na) names.insert(n);
  for (const auto& [n, t] : nb) names.insert(n);
  for (const auto& n : names) {
    auto ia = na.find(n);
    auto ib = nb.find(n);
    std::string loc = render_qualified({b.name, n});
    if (ia == na.end()) {
      add(loc, ChangeKind::NameAdded, "", ib->second);
    } else if (ib == nb.end()) {
      add(loc, ChangeKind::NameRemoved, ia->second, "");
    } else if (ia->second != ib->second) {
      add(loc, ChangeKind::NameRetargeted, ia->second, ib->second);
    }
  }

  auto ua = unnamed_columns(a);
  auto ub = unnamed_columns(b);
  for (const auto& l : ua) {
    if (!ub.count(l)) add(upper + "!column " + l, ChangeKind::NameRemoved, "column " + l, "");
  }
  for (const auto& l : ub) {
    if (!ua.count(l)) add(upper + "!column " + l, ChangeKind::NameAdded, "", "column " + l);
  }

  auto ca = cells_of(a);
  auto cb = cells_of(b);
  std::set<CellAddress> addresses;
  for (const auto& [k, v] : ca) addresses.insert(k);
  for (const auto& [k, v] : cb) addresses.insert(k);
  for (const auto& addr : addresses) {
    auto ia = ca.find(addr);
    auto ib = cb.find(addr);
    std::string loc = addr.to_string();
    if (ia == ca.end()) {
      add(loc, ChangeKind::CellAdded, "", render_content(*ib->second));
    } else if (ib == cb.end()) {
      add(loc, ChangeKind::CellRemoved, render_content(*ia->second), "");
    } else if (!(*ia->second == *ib->second)) {
      bool formula = ia->second->is_formula() || ib->second->is_formula();
      add(loc, formula ? ChangeKind::FormulaChanged : ChangeKind::LiteralChanged,
          render_content(*ia->second), render_content(*ib->second));
    }
  }
}

}  // namespace

ChangeSet diff(const Workbook& before, const Workbook& after) {
  ChangeSet cs;
  std::map<std::string, std::pair<const Sheet*, const Sheet*>> sheets;
  for (const auto& s : before.sheets) sheets[s.upper_name()].first = &s;
  for (const auto& s : after.sheets) sheets[s.upper_name()].second = &s;
  for (const auto& [upper, pair] : sheets) {
    const auto [a, b] = pair;
    if (!a) {
      cs.entries.push_back({b->name, b->name, ChangeKind::SheetAdded, "",
                            std::string(role_name(b->role)), is_io(b->role)});
    } else if (!b) {
      cs.entries.push_back({a->name, a->name, ChangeKind::SheetRemoved,
                            std::string(role_name(a->role)), "", is_io(a->role)});
    } else {
      diff_sheet(*a, *b, cs.entries);
    }
  }
  if (cs.entries.empty()) {
    cs.classification = Classification::NoChange;
  } else if (std::any_of(cs.entries.begin(), cs.entries.end(),
                         [](const ChangeEntry& e) { return e.touches_io; })) {
    cs.classification = Classification::VersionChange;
  } else {
    cs.classification = Classification::RevisionChange;
  }
  return cs;
}

// --- timestamps ---------------------------------------------------------------

namespace {

bool valid(const Timestamp& t) {
  using namespace std::chrono;
  year_month_day ymd{year{t.year}, month{static_cast<unsigned>(t.month)},
                     day{static_cast<unsigned>(t.day)}};
  return ymd.ok() && t.hour >= 0 && t.hour < 24 && t.minute >= 0 && t.minute < 60 &&
         t.second >= 0 && t.second < 60;
}

std::string two(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

}  // namespace

Timestamp Timestamp::parse(std::string_view text) {
  std::string s(text);
  Timestamp t;
  int n = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &t.year, &t.month, &t.day, &t.hour,
                  &t.minute, &t.second, &n) == 6 &&
      (static_cast<std::size_t>(n) == s.size() ||
       (static_cast<std::size_t>(n) + 1 == s.size() && s.back() == 'Z'))) {
    if (valid(t)) return t;
  }
  t = Timestamp{};
  n = 0;
  int fields = std::sscanf(s.c_str(), "%2d/%2d/%4d %2d:%2d%n", &t.day, &t.month, &t.year,
                           &t.hour, &t.minute, &n);
  if (fields == 5) {
    std::size_t used = static_cast<std::size_t>(n);
    if (used < s.size()) {
      int m = 0;
      if (std::sscanf(s.c_str() + used, ":%2d%n", &t.second, &m) == 1 &&
          used + static_cast<std::size_t>(m) == s.size()) {
        used = s.size();
      }
    }
    if (used == s.size() && valid(t)) return t;
  }
  throw PreconditionError("invalid timestamp '" + s +
                          "': expected YYYY-MM-DDTHH:MM:SS or DD/MM/YYYY HH:MM[:SS]");
}

Timestamp Timestamp::now() {
  using namespace std::chrono;
  auto tp = floor<seconds>(system_clock::now());
  auto d = floor<days>(tp);
  year_month_day ymd{d};
  hh_mm_ss hms{tp - d};
  return Timestamp{int(ymd.year()),
                   int(unsigned(ymd.month())),
                   int(unsigned(ymd.day())),
                   int(hms.hours().count()),
                   int(hms.minutes().count()),
                   int(hms.seconds().count())};
}

std::string Timestamp::iso() const {
  return std::to_string(year) + "-" + two(month) + "-" + two(day) + "T" + two(hour) + ":" +
         two(minute) + ":" + two(second);
}

std::string Timestamp::short_form() const {
  return two(day) + "/" + two(month) + "/" + std::to_string(year) + " " + two(hour) + ":" +
         two(minute);
}

std::string Timestamp::long_form() const { return short_form() + ":" + two(second); }

// --- log ----------------------------------------------------------------------

namespace {

ordered_json record_to_json(const LogRecord& r) {
  ordered_json j;
  j["seq"] = r.seq;
  j["version"] = r.version;
  j["revision"] = r.revision;
  j["modified_by"] = r.modified_by;
  j["modified_on"] = r.modified_on.iso();
  j["description"] = r.description;
  j["comments"] = ordered_json::array();
  for (const auto& c : r.comments) {
    j["comments"].push_back({{"text", c.text}, {"user", c.user}, {"at", c.at.iso()}});
  }
  if (r.snapshot_path) j["snapshot_path"] = *r.snapshot_path;
  return j;
}

LogRecord record_from_json(const ordered_json& j) {
  LogRecord r;
  r.seq = j.at("seq").get<int>();
  r.version = j.at("version").get<int>();
  r.revision = j.at("revision").get<int>();
  r.modified_by = j.at("modified_by").get<std::string>();
  r.modified_on = Timestamp::parse(j.at("modified_on").get<std::string>());
  r.description = j.at("description").get<std::string>();
  for (const auto& c : j.at("comments")) {
    r.comments.push_back({c.at("text").get<std::string>(), c.at("user").get<std::string>(),
                          Timestamp::parse(c.at("at").get<std::string>())});
  }
  if (j.contains("snapshot_path")) r.snapshot_path = j.at("snapshot_path").get<std::string>();
  return r;
}

std::filesystem::path archive_dir(const std::filesystem::path& file) {
  return file.string() + ".d";
}

std::string snapshot_name(int version, int revision) {
  return "v" + std::to_string(version) + "r" + std::to_string(revision) + ".nmd.json";
}

}  // namespace

AuditLog::AuditLog(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(*file_);
  if (!in) return;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    LogRecord r;
    try {
      r = record_from_json(ordered_json::parse(line));
    } catch (const std::exception& e) {
      throw DocumentError(file_->string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    // A line repeating a seq replaces it (comments are added this way).
    if (r.seq >= 1 && static_cast<std::size_t>(r.seq) <= records_.size()) {
      records_[r.seq - 1] = std::move(r);
    } else if (static_cast<std::size_t>(r.seq) == records_.size() + 1) {
      records_.push_back(std::move(r));
    } else {
      throw DocumentError(file_->string() + ":" + std::to_string(lineno) +
                          ": out-of-order seq " + std::to_string(r.seq));
    }
  }
}

std::vector<LogRecord> AuditLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::optional<std::pair<int, int>> AuditLog::head() const {
  std::lock_guard lock(mu_);
  if (records_.empty()) return std::nullopt;
  return std::pair{records_.back().version, records_.back().revision};
}

void AuditLog::persist(const LogRecord& r) {
  if (!file_) return;
  std::ofstream out(*file_, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to log '" + file_->string() + "'");
  out << record_to_json(r).dump() << "\n";
  if (!out.flush()) throw Error("cannot append to log '" + file_->string() + "'");
}

CommitResult AuditLog::commit(const Workbook& before, const Workbook& after,
                              const std::string& user, const Timestamp& at,
                              const std::string& description, bool archive) {
  std::lock_guard lock(mu_);
  ChangeSet changes = diff(before, after);
  if (changes.classification == Classification::NoChange) {
    throw PreconditionError("nothing to commit: the workbooks are identical");
  }
  if (!records_.empty() && at < records_.back().modified_on) {
    throw PreconditionError("timestamp " + at.iso() + " is earlier than the last record (" +
                            records_.back().modified_on.iso() + ")");
  }
  int version = records_.empty() ? before.version : records_.back().version;
  int revision = records_.empty() ? before.revision : records_.back().revision;
  if (changes.classification == Classification::VersionChange) {
    ++version;
    revision = 1;
  } else {
    ++revision;
  }

  CommitResult out{after, {}, std::move(changes)};
  out.workbook.version = version;
  out.workbook.revision = revision;

  LogRecord r;
  r.seq = static_cast<int>(records_.size()) + 1;
  r.version = version;
  r.revision = revision;
  r.modified_by = user;
  r.modified_on = at;
  r.description = description;
  if (archive) {
    std::string doc = save_workbook(out.workbook);
    std::string name = snapshot_name(version, revision);
    if (file_) {
      auto dir = archive_dir(*file_);
      std::filesystem::create_directories(dir);
      std::ofstream snap(dir / name, std::ios::binary | std::ios::trunc);
      if (!(snap << doc) || !snap.flush()) {
        throw Error("cannot write snapshot '" + (dir / name).string() + "'");
      }
      r.snapshot_path = (archive_dir(file_->filename()) / name).string();
    } else {
      r.snapshot_path = name;
    }
    snapshots_[{version, revision}] = std::move(doc);
  }
  persist(r);
  records_.push_back(r);
  out.record = std::move(r);
  return out;
}

std::vector<HistoryGroup> AuditLog::history(std::optional<int> from_version,
                                            std::optional<int> to_version) const {
  std::lock_guard lock(mu_);
  std::vector<HistoryGroup> out;
  for (const auto& r : records_) {
    if (from_version && r.version < *from_version) continue;
    if (to_version && r.version > *to_version) continue;
    if (out.empty() || out.back().version != r.version) out.push_back({r.version, {}});
    out.back().rows.push_back(
        {r.revision, r.description, r.modified_by, r.modified_on.short_form()});
  }
  return out;
}

std::string AuditLog::recall_document(int version, int revision) const {
  std::lock_guard lock(mu_);
  auto rec = std::find_if(records_.begin(), records_.end(), [&](const LogRecord& r) {
    return r.version == version && r.revision == revision;
  });
  std::string ids = "(" + std::to_string(version) + ", " + std::to_string(revision) + ")";
  if (rec == records_.end()) throw NotFoundError("no record for version/revision " + ids);
  if (!rec->snapshot_path) throw PreconditionError("version/revision " + ids + " was not archived");
  if (auto it = snapshots_.find({version, revision}); it != snapshots_.end()) return it->second;
  if (!file_) throw NotFoundError("snapshot for " + ids + " is missing");
  auto path = file_->parent_path() / *rec->snapshot_path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("snapshot file '" + path.string() + "' is missing");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Workbook AuditLog::recall(int version, int revision) const {
  return load_workbook(recall_document(version, revision));
}

void AuditLog::attach_comment(Comment c) {
  LogRecord& r = records_.back();
  r.comments.push_back(std::move(c));
  persist(r);
}

ExportResult AuditLog::export_model(const Workbook& w, const std::string& user,
                                    const Timestamp& at) {
  std::lock_guard lock(mu_);
  ExportResult out;
  out.document = save_workbook(w);
  out.comment = "Exported by: " + user + " on " + at.long_form();
  if (!records_.empty()) {
    attach_comment({out.comment, user, at});
    out.recorded = true;
  }
  return out;
}

void AuditLog::add_comment(const std::string& text, const std::string& user,
                           const Timestamp& at) {
  std::lock_guard lock(mu_);
  if (records_.empty()) throw PreconditionError("the log has no record to comment on");
  attach_comment({text, user, at});
}

std::string render_history(const std::vector<HistoryGroup>& groups) {
  std::string out = "Revision\tName\tModified By\tModified On\n";
  for (const auto& g : groups) {
    out += "Version " + std::to_string(g.version) + "\t\t\t\n";
    for (const auto& r : g.rows) {
      out += std::to_string(r.revision) + "\t" + r.name + "\t" + r.modified_by + "\t" +
             r.modified_on + "\n";
    }
  }
  return out;
}

}  // namespace nmd
