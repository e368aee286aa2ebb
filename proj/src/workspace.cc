// SPDX-License-Identifier: Apache-2.0
#include "nmd/workspace.h"

#include "nmd/errors.h"

namespace nmd {

std::filesystem::path head_path(const std::filesystem::path& log_file) {
  return std::filesystem::path(log_file.string() + ".d") / "head.nmd.json";
}

std::optional<Workbook> load_head(const std::filesystem::path& log_file) {
  auto p = head_path(log_file);
  if (!std::filesystem::exists(p)) return std::nullopt;
  return load_workbook_file(p);
}

CommitResult commit_workbook_file(AuditLog& log, const std::filesystem::path& workbook_path,
                                  const std::optional<Workbook>& base,
                                  const std::string& user, const Timestamp& at,
                                  const std::string& message, bool archive) {
  if (!log.file()) throw PreconditionError("committing files needs a log file");
  std::optional<Workbook> before = load_head(*log.file());
  if (!before) before = base;
  if (!before) {
    throw PreconditionError("nothing committed yet: pass the previous workbook as the base");
  }
  Workbook after = load_workbook_file(workbook_path);
  CommitResult r = log.commit(*before, after, user, at, message, archive);
  auto head = head_path(*log.file());
  std::filesystem::create_directories(head.parent_path());
  save_workbook_file(r.workbook, head);
  save_workbook_file(r.workbook, workbook_path);
  return r;
}

}  // namespace nmd
