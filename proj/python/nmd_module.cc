// SPDX-License-Identifier: Apache-2.0
// Python bindings. Structured results cross as JSON text; the package's
// __init__ decodes them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "nmd/audit_log.h"
#include "nmd/errors.h"
#include "nmd/eval.h"
#include "nmd/formula.h"
#include "nmd/json_io.h"
#include "nmd/walker.h"

namespace py = pybind11;
using nmd::json_io::Json;

namespace {

nmd::CellAddress cell_in(const nmd::Workbook& w, const std::string& text) {
  nmd::CellAddress a = nmd::parse_cell_address(text);
  const nmd::Sheet* s = w.find_sheet(a.sheet);
  if (!s) throw nmd::NotFoundError("no sheet '" + a.sheet + "'");
  a.sheet = s->upper_name();
  return a;
}

nmd::StepKind direction(const std::string& d) {
  if (d == "precedent") return nmd::StepKind::Precedent;
  if (d == "dependent") return nmd::StepKind::Dependent;
  throw nmd::PreconditionError("direction must be 'precedent' or 'dependent'");
}

}  // namespace

PYBIND11_MODULE(_nmd, m) {
  m.doc() = "Structured spreadsheet models: formulas, walker, audit log";

  auto& error = py::register_exception<nmd::Error>(m, "NmdError");
  py::register_exception<nmd::NotFoundError>(m, "NotFoundError", error.ptr());
  py::register_exception<nmd::PreconditionError>(m, "PreconditionError", error.ptr());

  py::class_<nmd::Workbook>(m, "Workbook")
      .def_static("load", [](const std::string& path) { return nmd::load_workbook_file(path); })
      .def_static("from_json", [](const std::string& doc) { return nmd::load_workbook(doc); })
      .def("to_json", [](const nmd::Workbook& w) { return nmd::save_workbook(w); })
      .def("save", [](const nmd::Workbook& w, const std::string& path) { nmd::save_workbook_file(w, path); })
      .def("summary_json", [](const nmd::Workbook& w) { return nmd::json_io::workbook_summary(w).dump(); })
      .def("set_literal",
           [](nmd::Workbook& w, const std::string& cell, const std::string& value_json) {
             nmd::CellAddress a = cell_in(w, cell);
             nmd::CellValue v = nmd::json_io::value_from_json(Json::parse(value_json));
             auto& cells = w.find_sheet(a.sheet)->cells;
             if (v.is_blank()) {
               cells.erase(a.a1());
             } else {
               cells[a.a1()] = nmd::CellContent::literal(std::move(v));
             }
           })
      .def_property_readonly("version", [](const nmd::Workbook& w) { return w.version; })
      .def_property_readonly("revision", [](const nmd::Workbook& w) { return w.revision; })
      .def_property_readonly("name", [](const nmd::Workbook& w) { return w.name; });

  m.def("validate_json", [](const nmd::Workbook& w) {
    return nmd::json_io::findings(nmd::validate_structure(w)).dump();
  });
  m.def("evaluate_json", [](const nmd::Workbook& w) {
    return nmd::json_io::eval_result(w, nmd::recalculate(w)).dump();
  });
  m.def("what_if_json", [](const nmd::Workbook& w, const std::string& overrides_json) {
    std::map<std::string, nmd::CellValue> overrides;
    const Json parsed = Json::parse(overrides_json);
    for (const auto& [k, v] : parsed.items()) {
      overrides[k] = nmd::json_io::value_from_json(v);
    }
    return nmd::json_io::value_changes(w, nmd::what_if(w, overrides)).dump();
  });
  m.def("compile", [](const nmd::Workbook& w, const std::string& text, const std::string& host) {
    return nmd::compile_conditional_text(text, w, cell_in(w, host)).text();
  });
  m.def(
      "decompile",
      [](const nmd::Workbook& w, const std::string& text, std::optional<std::string> host) {
        std::optional<nmd::CellAddress> h;
        if (host) h = cell_in(w, *host);
        return nmd::decompile_text(text, w, h);
      },
      py::arg("workbook"), py::arg("text"), py::arg("host") = py::none());
  m.def("diff_json", [](const nmd::Workbook& a, const nmd::Workbook& b) {
    return nmd::json_io::change_set(nmd::diff(a, b)).dump();
  });

  py::class_<nmd::WalkSession>(m, "WalkSession")
      .def(py::init([](const nmd::Workbook& w, const std::string& cell) {
        auto model = nmd::Model::build(w);
        auto s = std::make_unique<nmd::WalkSession>(model);
        s->start(cell_in(model->workbook, cell));
        return s;
      }))
      .def("step", [](nmd::WalkSession& s, const std::string& d, std::size_t i) { s.step(direction(d), i); })
      .def("back", &nmd::WalkSession::back)
      .def("current", [](const nmd::WalkSession& s) { return s.current().to_string(); })
      .def("inspection_json",
           [](const nmd::WalkSession& s) { return nmd::json_io::inspection(nmd::inspect(s.model(), s.current())).dump(); })
      .def("trail_report", [](const nmd::WalkSession& s) { return nmd::export_trail(s); });

  py::class_<nmd::AuditLog>(m, "AuditLog")
      .def(py::init<>())
      .def(py::init([](const std::string& path) { return std::make_unique<nmd::AuditLog>(path); }))
      .def("commit",
           [](nmd::AuditLog& log, const nmd::Workbook& before, const nmd::Workbook& after, const std::string& user,
              const std::string& at, const std::string& description, bool archive) {
             nmd::CommitResult r = log.commit(before, after, user, nmd::Timestamp::parse(at), description, archive);
             Json j{{"record", nmd::json_io::log_record(r.record)}, {"changes", nmd::json_io::change_set(r.changes)}};
             return std::make_pair(r.workbook, j.dump());
           },
           py::arg("before"), py::arg("after"), py::arg("user"), py::arg("at"), py::arg("description"),
           py::arg("archive") = false)
      .def(
          "history_text",
          [](const nmd::AuditLog& log, std::optional<int> version) {
            return nmd::render_history(log.history(version, version));
          },
          py::arg("version") = py::none())
      .def("recall", &nmd::AuditLog::recall)
      .def("export_json", [](nmd::AuditLog& log, const nmd::Workbook& w, const std::string& user, const std::string& at) {
        nmd::ExportResult r = log.export_model(w, user, nmd::Timestamp::parse(at));
        return Json{{"document", r.document}, {"comment", r.comment}, {"recorded", r.recorded}}.dump();
      });
}
