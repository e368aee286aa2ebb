// SPDX-License-Identifier: Apache-2.0
#include "nmd/cli.h"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nmd/errors.h"
#include "nmd/formula.h"
#include "nmd/json_io.h"
#include "nmd/service.h"
#include "nmd/workspace.h"

namespace nmd::cli {

using json_io::Json;

namespace {

struct Config {
  std::string workbook;
  std::string log;
  std::string user;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

class Failure : public Error {
 public:
  using Error::Error;
};

Workbook require_workbook(const Config& c) {
  if (c.workbook.empty()) throw Failure("--workbook is required for this command");
  return load_workbook_file(c.workbook);
}

std::string require_user(const Config& c) {
  if (c.user.empty()) throw Failure("a user id is required (--user or NMD_USER)");
  return c.user;
}

void print_json(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

CellAddress canonical_cell(const Workbook& w, const std::string& text) {
  CellAddress a = parse_cell_address(text);
  const Sheet* s = w.find_sheet(a.sheet);
  if (!s) throw NotFoundError("no sheet '" + a.sheet + "'");
  a.sheet = s->upper_name();
  return a;
}

std::string label(const Workbook& w, const CellAddress& a) {
  if (auto q = name_for_cell(w, a)) return a.to_string() + " (" + render_qualified(*q) + ")";
  return a.to_string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!(f << text) || !f.flush()) throw Error("cannot write '" + path + "'");
}

void print_rows(std::ostream& out, const char* title, const std::vector<WalkRow>& rows,
                char key) {
  out << title << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  " << key << " " << i << "\t" << r.sheetname << "\t" << r.name << "\t"
        << r.value.to_display() << "\t" << r.formula << "\n";
  }
}

void print_inspection(std::ostream& out, const Inspection& ins) {
  print_rows(out, "Precedents", ins.precedents, 'p');
  const auto& c = ins.current;
  out << "Current Formula\n  " << c.sheetname << "\t" << c.name << "\t" << c.value.to_display()
      << "\t" << c.formula << "\n";
  print_rows(out, "Dependents", ins.dependents, 'd');
}

int walk(const Config& cfg, const std::string& start, const std::string& trail_path,
         std::istream& in, std::ostream& out, std::ostream& err) {
  auto model = Model::build(require_workbook(cfg));
  WalkSession session(model, cfg.user, Timestamp::now().iso());
  session.start(canonical_cell(model->workbook, start));
  if (!cfg.json()) print_inspection(out, inspect(*model, session.current()));
  std::string line;
  while (true) {
    if (!cfg.json()) out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    std::istringstream words(line);
    std::string cmd;
    words >> cmd;
    if (cmd.empty()) continue;
    if (cmd == "q") break;
    try {
      if (cmd == "b") {
        session.back();
      } else if (cmd == "p" || cmd == "d") {
        long long index = -1;
        if (!(words >> index) || index < 0) throw PreconditionError("usage: " + cmd + " <index>");
        session.step(cmd == "p" ? StepKind::Precedent : StepKind::Dependent,
                     static_cast<std::size_t>(index));
      } else {
        throw PreconditionError("commands: p <n>, d <n>, b, q");
      }
      if (!cfg.json()) print_inspection(out, inspect(*model, session.current()));
    } catch (const PreconditionError& e) {
      err << "error: " << e.what() << "\n";
    }
  }
  std::string report = export_trail(session);
  if (!trail_path.empty()) write_text(trail_path, report);
  if (cfg.json()) {
    print_json(out, Json{{"trail", json_io::trail(session)}, {"report", report}});
  } else if (trail_path.empty()) {
    out << "\n" << report;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Model transparency and audit workbench", "nmd"};
  app.require_subcommand(1);
  Config cfg;
  if (const char* u = std::getenv("NMD_USER")) cfg.user = u;
  app.add_option("-w,--workbook", cfg.workbook, "Workbook document (.nmd.json)");
  app.add_option("--log", cfg.log, "Audit log file (JSON lines)");
  app.add_option("--user", cfg.user, "User id (default: $NMD_USER)");
  app.add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  auto* validate = app.add_subcommand("validate", "Check the structural rules");
  auto* eval = app.add_subcommand("eval", "Recalculate every formula cell");

  std::vector<std::string> sets;
  auto* whatif = app.add_subcommand("whatif", "Recalculate with input overrides");
  whatif->add_option("--set", sets, "name=value (repeatable)")->required();

  std::string walk_cell, trail_path;
  auto* walk_cmd = app.add_subcommand("walk", "Step through precedents and dependents");
  walk_cmd->add_option("cell", walk_cell, "Start cell, e.g. SEC_GTEEADJ!M5")->required();
  walk_cmd->add_option("--trail", trail_path, "Write the trail report here on quit");

  std::string compile_text, host_text;
  auto* compile = app.add_subcommand("compile", "Named conditional aggregate to A1 array formula");
  compile->add_option("text", compile_text)->required();
  compile->add_option("--host", host_text, "Host cell")->required();

  std::string decompile_text_arg, decompile_host;
  auto* decompile = app.add_subcommand("decompile", "A1 array formula to named notation");
  decompile->add_option("text", decompile_text_arg)->required();
  decompile->add_option("--host", decompile_host, "Host cell");

  std::string diff_old, diff_new;
  auto* diff_cmd = app.add_subcommand("diff", "Classify the changes between two workbooks");
  diff_cmd->add_option("old", diff_old)->required()->check(CLI::ExistingFile);
  diff_cmd->add_option("new", diff_new)->required()->check(CLI::ExistingFile);

  std::string message, base_path, at_text;
  bool archive = false;
  auto* commit = app.add_subcommand("commit", "Log the workbook's changes since the last commit");
  commit->add_option("--message,-m", message, "Description")->required();
  commit->add_option("--base", base_path, "Previous workbook, for the first commit")
      ->check(CLI::ExistingFile);
  commit->add_flag("--archive", archive, "Archive a snapshot for recall");
  commit->add_option("--at", at_text, "Timestamp (default: now)");
  commit->add_option("--user", cfg.user, "User id");

  int history_version = 0;
  auto* history = app.add_subcommand("history", "Version and revision history");
  auto* version_opt = history->add_option("--version", history_version, "Only this version");

  int recall_v = 0, recall_r = 0;
  std::string output_path;
  auto* recall = app.add_subcommand("recall", "Print an archived snapshot");
  recall->add_option("version", recall_v)->required();
  recall->add_option("revision", recall_r)->required();
  recall->add_option("-o,--output", output_path, "Write the document here");

  auto* export_cmd = app.add_subcommand("export", "Plain document, stamped in the log");
  export_cmd->add_option("--user", cfg.user, "User id");
  export_cmd->add_option("-o,--output", output_path, "Write the document here");
  export_cmd->add_option("--at", at_text, "Timestamp (default: now)");

  int port = 8080;
  std::string bind_host = "127.0.0.1";
  bool enable_commit = false;
  int idle_minutes = 30;
  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--bind", bind_host, "Address to bind");
  serve->add_flag("--enable-commit", enable_commit, "Allow POST /api/commit");
  serve->add_option("--idle-minutes", idle_minutes, "Walk session idle timeout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kError;
  }

  try {
    auto timestamp = [&] { return at_text.empty() ? Timestamp::now() : Timestamp::parse(at_text); };

    if (*validate) {
      auto f = validate_structure(require_workbook(cfg));
      if (cfg.json()) {
        print_json(out, Json{{"findings", json_io::findings(f)}});
      } else if (f.empty()) {
        out << "no findings\n";
      } else {
        for (const auto& x : f) {
          out << rule_name(x.rule_id) << "\t" << x.location << "\t" << x.message << "\n";
        }
      }
      return f.empty() ? kOk : kFindings;
    }
    if (*eval) {
      Workbook w = require_workbook(cfg);
      EvalResult r = recalculate(w);
      if (cfg.json()) {
        print_json(out, Json{{"values", json_io::eval_result(w, r)}});
      } else {
        std::set<CellAddress> cells;
        for (const auto& [a, v] : r.values) cells.insert(a);
        for (const auto& [a, v] : r.errors) cells.insert(a);
        for (const auto& a : cells) out << label(w, a) << "\t" << value_of(w, r, a).to_display() << "\n";
      }
      return kOk;
    }
    if (*whatif) {
      Workbook w = require_workbook(cfg);
      std::map<std::string, CellValue> overrides;
      for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw Failure("--set expects name=value, got '" + s + "'");
        overrides[s.substr(0, eq)] = json_io::value_from_text(s.substr(eq + 1));
      }
      auto changes = what_if(w, overrides);
      if (cfg.json()) {
        print_json(out, Json{{"changes", json_io::value_changes(w, changes)}});
      } else if (changes.empty()) {
        out << "no change\n";
      } else {
        for (const auto& c : changes) {
          out << label(w, c.cell) << "\t" << c.before.to_display() << " -> "
              << c.after.to_display() << "\n";
        }
      }
      return kOk;
    }
    if (*walk_cmd) return walk(cfg, walk_cell, trail_path, in, out, err);
    if (*compile) {
      Workbook w = require_workbook(cfg);
      CompiledFormula f = compile_conditional_text(compile_text, w, canonical_cell(w, host_text));
      if (cfg.json()) {
        print_json(out, Json{{"formula", f.text()}, {"array", f.is_array}});
      } else {
        out << f.text() << "\n";
      }
      return kOk;
    }
    if (*decompile) {
      Workbook w = require_workbook(cfg);
      std::optional<CellAddress> host;
      if (!decompile_host.empty()) host = canonical_cell(w, decompile_host);
      std::string text = decompile_text(decompile_text_arg, w, host);
      if (cfg.json()) {
        print_json(out, Json{{"text", text}});
      } else {
        out << text << "\n";
      }
      return kOk;
    }
    if (*diff_cmd) {
      ChangeSet cs = diff(load_workbook_file(diff_old), load_workbook_file(diff_new));
      if (cfg.json()) {
        print_json(out, json_io::change_set(cs));
      } else if (cs.entries.empty()) {
        out << "no change\n";
      } else {
        out << classification_name(cs.classification) << "\n";
        for (const auto& e : cs.entries) {
          out << change_kind_name(e.kind) << "\t" << e.location << "\t" << e.before << "\t"
              << e.after << "\n";
        }
      }
      return cs.entries.empty() ? kOk : kFindings;
    }
    if (*commit) {
      if (cfg.log.empty()) throw Failure("--log is required for commit");
      if (cfg.workbook.empty()) throw Failure("--workbook is required for commit");
      std::string user = require_user(cfg);
      AuditLog log(cfg.log);
      std::optional<Workbook> base;
      if (!base_path.empty()) base = load_workbook_file(base_path);
      CommitResult r = commit_workbook_file(log, cfg.workbook, base, user, timestamp(), message,
                                            archive);
      if (cfg.json()) {
        print_json(out, Json{{"record", json_io::log_record(r.record)},
                             {"changes", json_io::change_set(r.changes)}});
      } else {
        out << "committed version " << r.record.version << " revision " << r.record.revision
            << " (" << classification_name(r.changes.classification) << ")\n";
      }
      return kOk;
    }
    if (*history) {
      if (cfg.log.empty()) throw Failure("--log is required for history");
      AuditLog log(cfg.log);
      std::optional<int> v;
      if (*version_opt) v = history_version;
      auto groups = log.history(v, v);
      if (cfg.json()) {
        print_json(out, Json{{"groups", json_io::history(groups)}});
      } else {
        out << render_history(groups);
      }
      return kOk;
    }
    if (*recall) {
      if (cfg.log.empty()) throw Failure("--log is required for recall");
      AuditLog log(cfg.log);
      std::string doc = log.recall_document(recall_v, recall_r);
      if (!output_path.empty()) {
        write_text(output_path, doc);
      } else {
        out << doc;
      }
      return kOk;
    }
    if (*export_cmd) {
      if (cfg.log.empty()) throw Failure("--log is required for export");
      std::string user = require_user(cfg);
      Workbook w = require_workbook(cfg);
      AuditLog log(cfg.log);
      ExportResult r = log.export_model(w, user, timestamp());
      if (cfg.json()) {
        print_json(out, Json{{"document", r.document}, {"comment", r.comment}, {"recorded", r.recorded}});
        if (!output_path.empty()) write_text(output_path, r.document);
      } else if (!output_path.empty()) {
        write_text(output_path, r.document);
        out << r.comment << "\n";
      } else {
        out << r.document;
        err << r.comment << "\n";
      }
      return kOk;
    }
    if (*serve) {
      Workbook w = require_workbook(cfg);
      std::optional<AuditLog> log;
      if (!cfg.log.empty()) log.emplace(cfg.log);
      ServiceOptions opts;
      opts.enable_commit = enable_commit;
      opts.idle_timeout = std::chrono::minutes(idle_minutes);
      opts.workbook_path = cfg.workbook;
      Service service(std::move(w), log ? &*log : nullptr, opts);
      err << "listening on http://" << bind_host << ":" << port << "\n";
      service.serve(bind_host, port);
      return kOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace nmd::cli
