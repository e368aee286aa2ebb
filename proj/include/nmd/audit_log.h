// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmd/workbook.h"

namespace nmd {

// --- diff ---------------------------------------------------------------------

enum class ChangeKind {
  CellAdded,
  CellRemoved,
  FormulaChanged,
  LiteralChanged,
  NameAdded,
  NameRemoved,
  NameRetargeted,
  RoleChanged,
  SheetAdded,
  SheetRemoved,
};
std::string_view change_kind_name(ChangeKind k);

enum class Classification { NoChange, RevisionChange, VersionChange };
std::string_view classification_name(Classification c);

struct ChangeEntry {
  std::string sheet;     // as spelled in the newer workbook when present
  std::string location;  // "SHEET!B5", "Sheet.Name", "SHEET!column C", or the sheet
  ChangeKind kind;
  std::string before;
  std::string after;
  bool touches_io = false;  // the sheet is an Input or Output sheet on either side

  friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

struct ChangeSet {
  std::vector<ChangeEntry> entries;
  Classification classification = Classification::NoChange;
};

ChangeSet diff(const Workbook& before, const Workbook& after);

// Cell content as diff entries show it: JSON for literals, the formula text
// for formulas, `{...}` around array formulas.
std::string render_content(const CellContent& c);

// --- timestamps ---------------------------------------------------------------

struct Timestamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;

  // Accepts `2009-05-26T11:01:01` (optional trailing Z) and
  // `26/05/2009 11:01[:01]`. Throws PreconditionError.
  static Timestamp parse(std::string_view text);
  static Timestamp now();  // UTC, whole seconds

  std::string iso() const;         // 2009-05-26T11:01:01
  std::string short_form() const;  // 26/05/2009 11:01
  std::string long_form() const;   // 26/05/2009 11:01:01

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// --- log ----------------------------------------------------------------------

struct Comment {
  std::string text;
  std::string user;
  Timestamp at;
  friend bool operator==(const Comment&, const Comment&) = default;
};

struct LogRecord {
  int seq = 0;
  int version = 1;
  int revision = 1;
  std::string modified_by;
  Timestamp modified_on;
  std::string description;
  std::vector<Comment> comments;
  std::optional<std::string> snapshot_path;
  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct CommitResult {
  Workbook workbook;  // the new workbook carrying its new ids
  LogRecord record;
  ChangeSet changes;
};

struct HistoryRow {
  int revision;
  std::string name;
  std::string modified_by;
  std::string modified_on;  // DD/MM/YYYY HH:MM
};

struct HistoryGroup {
  int version;
  std::vector<HistoryRow> rows;
};

struct ExportResult {
  std::string document;  // plain interchange document
  std::string comment;   // "Exported by: <user> on DD/MM/YYYY HH:MM:SS"
  bool recorded = false;  // false when the log has no record to attach it to
};

// Append-only history of commits. In memory by default; with a file, each
// change appends a JSON line and archived snapshots go to `<file>.d/`.
class AuditLog {
 public:
  AuditLog() = default;
  // Loads existing records; the file is created on the first append.
  explicit AuditLog(std::filesystem::path file);

  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  std::vector<LogRecord> records() const;
  // (version, revision) of the last record.
  std::optional<std::pair<int, int>> head() const;

  // Throws PreconditionError for a NoChange diff or a timestamp earlier than
  // the last record.
  CommitResult commit(const Workbook& before, const Workbook& after, const std::string& user,
                      const Timestamp& at, const std::string& description,
                      bool archive = false);

  // Groups ascending by version; bounds are inclusive.
  std::vector<HistoryGroup> history(std::optional<int> from_version = std::nullopt,
                                    std::optional<int> to_version = std::nullopt) const;

  // Throws NotFoundError for unknown ids, PreconditionError when the
  // snapshot was not archived.
  std::string recall_document(int version, int revision) const;
  Workbook recall(int version, int revision) const;

  ExportResult export_model(const Workbook& w, const std::string& user, const Timestamp& at);

  // Appends a comment to the last record. Throws PreconditionError on an
  // empty log.
  void add_comment(const std::string& text, const std::string& user, const Timestamp& at);

  const std::optional<std::filesystem::path>& file() const { return file_; }

 private:
  void persist(const LogRecord& r);
  void attach_comment(Comment c);

  mutable std::mutex mu_;
  std::optional<std::filesystem::path> file_;
  std::vector<LogRecord> records_;
  std::map<std::pair<int, int>, std::string> snapshots_;  // in-memory archive
};

// "Revision\tName\tModified By\tModified On", then a "Version N" line and the
// revision rows of each group.
std::string render_history(const std::vector<HistoryGroup>& groups);

}  // namespace nmd
