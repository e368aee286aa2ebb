// SPDX-License-Identifier: Apache-2.0
// JSON renderings shared by the command line and the HTTP service.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmd/audit_log.h"
#include "nmd/eval.h"
#include "nmd/walker.h"

namespace nmd::json_io {

using Json = nlohmann::ordered_json;

// {"type": "number", "value": "10"}; numbers travel as exact decimal text.
Json value(const CellValue& v);

// Override values: JSON numbers, strings, booleans and null.
CellValue value_from_json(const Json& j);

// Command-line spelling: TRUE/FALSE, a decimal number, "quoted text", empty
// for blank; anything else is text.
CellValue value_from_text(const std::string& text);

Json workbook_summary(const Workbook& w);
Json walk_row(const WalkRow& r);
Json inspection(const Inspection& ins);
Json trail(const WalkSession& s);
Json findings(const std::vector<ValidationFinding>& f);
Json eval_result(const Workbook& w, const EvalResult& r);
Json value_changes(const Workbook& w, const std::vector<ValueChange>& changes);
Json change_set(const ChangeSet& cs);
Json log_record(const LogRecord& r);
Json history(const std::vector<HistoryGroup>& groups);

std::string target_text(const ResolvedTarget& t);

}  // namespace nmd::json_io
