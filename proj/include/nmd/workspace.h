// SPDX-License-Identifier: Apache-2.0
// Working files around a log: the last committed workbook is kept at
// `<log>.d/head.nmd.json` so the next commit has something to diff against.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "nmd/audit_log.h"

namespace nmd {

std::filesystem::path head_path(const std::filesystem::path& log_file);
std::optional<Workbook> load_head(const std::filesystem::path& log_file);

// Commits the workbook at `workbook_path` against the head (or `base` when
// nothing was committed yet), then writes the new head and stamps the new
// ids into the workbook file. Throws PreconditionError without a baseline.
CommitResult commit_workbook_file(AuditLog& log, const std::filesystem::path& workbook_path,
                                  const std::optional<Workbook>& base,
                                  const std::string& user, const Timestamp& at,
                                  const std::string& message, bool archive);

}  // namespace nmd
