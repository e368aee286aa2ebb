// SPDX-License-Identifier: Apache-2.0
#include "nmd/service.h"

#include <random>
#include <sstream>

#include "httplib.h"
#include "nmd/errors.h"
#include "nmd/formula.h"
#include "nmd/json_io.h"
#include "nmd/workspace.h"

namespace nmd {

using json_io::Json;

namespace {

HttpResponse json_response(int status, const Json& j) {
  return HttpResponse{status, j.dump(2) + "\n", "application/json"};
}

HttpResponse error_response(int status, const std::string& kind, const std::string& message) {
  return json_response(status, Json{{"error", message}, {"kind", kind}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '/')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  Json j = Json::parse(body);
  if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return j;
}

std::string required_string(const Json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw PreconditionError("field '" + key + "' (string) is required");
  }
  return j.at(key).get<std::string>();
}

Timestamp timestamp_or_now(const std::optional<std::string>& text) {
  return text ? Timestamp::parse(*text) : Timestamp::now();
}

std::optional<std::string> query_value(const std::map<std::string, std::string>& q,
                                       const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw PreconditionError(what + " must be an integer, got '" + text + "'");
}

}  // namespace

Service::Service(Workbook w, AuditLog* log, ServiceOptions options)
    : options_(std::move(options)), log_(log), model_(Model::build(std::move(w))) {}

std::shared_ptr<const Model> Service::model() const {
  std::lock_guard lock(model_mu_);
  return model_;
}

HttpResponse Service::handle(const std::string& method, const std::string& target,
                             const std::string& body) {
  std::string path = target;
  std::map<std::string, std::string> query;
  if (auto q = target.find('?'); q != std::string::npos) {
    path = target.substr(0, q);
    httplib::Params params;
    httplib::detail::parse_query_text(target.substr(q + 1), params);
    for (const auto& [k, v] : params) query[k] = v;
  }
  return handle(method, httplib::detail::decode_url(path, false), query, body);
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query,
                             const std::string& body) {
  try {
    return route(method, path, query, body);
  } catch (const NotFoundError& e) {
    return error_response(404, "not_found", e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const Error& e) {
    return error_response(422, "precondition", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::route(const std::string& method, const std::string& path,
                            const std::map<std::string, std::string>& query,
                            const std::string& body) {
  auto parts = split_path(path);
  auto is = [&](const char* m, std::initializer_list<const char*> segs) {
    if (method != m || parts.size() != segs.size()) return false;
    std::size_t i = 0;
    for (const char* s : segs) {
      if (*s != '*' && parts[i] != s) return false;
      ++i;
    }
    return true;
  };

  if (parts.empty() || parts[0] != "api") {
    return error_response(404, "not_found", "no route for " + method + " " + path);
  }
  if (is("GET", {"api", "workbook"})) {
    return json_response(200, json_io::workbook_summary(model()->workbook));
  }
  if (is("GET", {"api", "cells", "*", "*"})) return get_cell(parts[2], parts[3]);
  if (is("POST", {"api", "sessions"})) return create_session(body);
  if (parts.size() >= 3 && parts[1] == "sessions") {
    std::string action = parts.size() == 4 ? parts[3] : "";
    if (parts.size() <= 4) return session_action(parts[2], action, method, body, query);
  }
  if (is("POST", {"api", "whatif"})) return whatif(body);
  if (is("GET", {"api", "history"})) return history(query);
  if (is("POST", {"api", "compile"})) return compile(body);
  if (is("POST", {"api", "decompile"})) return decompile(body);
  if (is("POST", {"api", "commit"})) return commit(body);
  if (is("GET", {"api", "export"})) return export_model(query);
  return error_response(404, "not_found", "no route for " + method + " " + path);
}

HttpResponse Service::get_cell(const std::string& sheet, const std::string& addr) {
  auto m = model();
  const Sheet* s = m->workbook.find_sheet(sheet);
  if (!s) throw NotFoundError("no sheet '" + sheet + "'");
  auto rc = parse_cell_a1(to_upper(addr));
  if (!rc) throw NotFoundError("'" + addr + "' is not a cell address");
  CellAddress cell{s->upper_name(), rc->first, rc->second};
  Json j = json_io::inspection(inspect(*m, cell));
  j["cell"] = cell.to_string();
  return json_response(200, j);
}

void Service::evict_idle_locked() {
  auto now = options_.clock();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.last_used > options_.idle_timeout) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::size_t Service::session_count() {
  std::lock_guard lock(sessions_mu_);
  evict_idle_locked();
  return sessions_.size();
}

std::string Service::new_session_id() {
  static thread_local std::random_device rd;
  std::ostringstream os;
  os << std::hex;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = rd();
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", word);
    os << buf;
  }
  return os.str();
}

namespace {

Json session_state(const std::string& id, const WalkSession& s) {
  Json j;
  j["id"] = id;
  j["trail_length"] = s.trail().size();
  if (s.started()) {
    j["current"] = s.current().to_string();
    j["inspection"] = json_io::inspection(inspect(s.model(), s.current()));
  } else {
    j["current"] = nullptr;
  }
  return j;
}

}  // namespace

HttpResponse Service::create_session(const std::string& body) {
  Json req = parse_body(body);
  auto m = model();
  std::string user = req.contains("user") ? required_string(req, "user") : "";
  auto session = std::make_unique<WalkSession>(m, user, Timestamp::now().iso());
  if (req.contains("cell")) {
    std::string text = required_string(req, "cell");
    CellAddress cell = parse_cell_address(text);
    const Sheet* s = m->workbook.find_sheet(cell.sheet);
    if (!s) throw NotFoundError("no sheet '" + cell.sheet + "'");
    cell.sheet = s->upper_name();
    session->start(cell);
  }
  std::lock_guard lock(sessions_mu_);
  evict_idle_locked();
  std::string id = new_session_id();
  Json j = session_state(id, *session);
  sessions_[id] = SessionEntry{std::move(session), options_.clock()};
  return json_response(201, j);
}

HttpResponse Service::session_action(const std::string& id, const std::string& action,
                                     const std::string& method, const std::string& body,
                                     const std::map<std::string, std::string>& query) {
  std::lock_guard lock(sessions_mu_);
  evict_idle_locked();
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
  it->second.last_used = options_.clock();
  WalkSession& s = *it->second.session;

  if (method == "GET" && action.empty()) return json_response(200, session_state(id, s));
  if (method == "POST" && action == "step") {
    Json req = parse_body(body);
    std::string dir = required_string(req, "direction");
    StepKind kind;
    if (dir == "precedent" || dir == "into-precedent") {
      kind = StepKind::Precedent;
    } else if (dir == "dependent" || dir == "into-dependent") {
      kind = StepKind::Dependent;
    } else {
      throw PreconditionError("direction must be 'precedent' or 'dependent'");
    }
    if (!req.contains("index") || !req.at("index").is_number_integer() ||
        req.at("index").get<std::int64_t>() < 0) {
      throw PreconditionError("field 'index' (non-negative integer) is required");
    }
    s.step(kind, req.at("index").get<std::size_t>());
    return json_response(200, session_state(id, s));
  }
  if (method == "POST" && action == "back") {
    s.back();
    return json_response(200, session_state(id, s));
  }
  if (method == "GET" && action == "trail") {
    if (query_value(query, "format") == std::optional<std::string>("json")) {
      return json_response(200, Json{{"trail", json_io::trail(s)}, {"report", export_trail(s)}});
    }
    return HttpResponse{200, export_trail(s), "text/tab-separated-values; charset=utf-8"};
  }
  if (method == "DELETE" && action.empty()) {
    sessions_.erase(it);
    return json_response(200, Json{{"id", id}, {"deleted", true}});
  }
  return error_response(404, "not_found", "no route for " + method + " session " + action);
}

HttpResponse Service::whatif(const std::string& body) {
  Json req = parse_body(body);
  std::map<std::string, CellValue> overrides;
  if (req.contains("overrides")) {
    const Json& o = req.at("overrides");
    if (!o.is_object()) throw PreconditionError("'overrides' must be an object");
    for (const auto& [k, v] : o.items()) overrides[k] = json_io::value_from_json(v);
  }
  auto m = model();
  auto changes = what_if(m->workbook, overrides);
  return json_response(200, Json{{"changes", json_io::value_changes(m->workbook, changes)}});
}

HttpResponse Service::history(const std::map<std::string, std::string>& query) {
  std::optional<int> version;
  if (auto v = query_value(query, "version")) version = parse_int(*v, "version");
  std::vector<HistoryGroup> groups;
  if (log_) groups = log_->history(version, version);
  return json_response(200, Json{{"groups", json_io::history(groups)},
                                 {"text", render_history(groups)}});
}

HttpResponse Service::compile(const std::string& body) {
  Json req = parse_body(body);
  std::string text = required_string(req, "text");
  CellAddress host = parse_cell_address(required_string(req, "host"));
  auto m = model();
  CompiledFormula f = compile_conditional_text(text, m->workbook, host);
  return json_response(200, Json{{"formula", f.text()}, {"array", f.is_array}});
}

HttpResponse Service::decompile(const std::string& body) {
  Json req = parse_body(body);
  std::string text = required_string(req, "text");
  std::optional<CellAddress> host;
  if (req.contains("host")) host = parse_cell_address(required_string(req, "host"));
  auto m = model();
  return json_response(200, Json{{"text", decompile_text(text, m->workbook, host)}});
}

HttpResponse Service::commit(const std::string& body) {
  if (!options_.enable_commit) {
    return error_response(403, "disabled", "commit is disabled; start the service with commit enabled");
  }
  if (!log_) throw PreconditionError("commit needs an audit log");
  if (!options_.workbook_path) throw PreconditionError("commit needs the workbook file");
  Json req = parse_body(body);
  std::string user = required_string(req, "user");
  std::string message = required_string(req, "message");
  bool archive = req.value("archive", false);
  std::optional<std::string> at;
  if (req.contains("at")) at = required_string(req, "at");

  std::lock_guard lock(commit_mu_);
  auto current = model();
  if (req.contains("base_version") || req.contains("base_revision")) {
    int v = req.value("base_version", current->workbook.version);
    int r = req.value("base_revision", current->workbook.revision);
    if (v != current->workbook.version || r != current->workbook.revision) {
      return error_response(409, "conflict",
                            "stale base (" + std::to_string(v) + ", " + std::to_string(r) +
                                "): the model is at (" +
                                std::to_string(current->workbook.version) + ", " +
                                std::to_string(current->workbook.revision) + ")");
    }
  }
  CommitResult result;
  if (log_->file()) {
    result = commit_workbook_file(*log_, *options_.workbook_path, current->workbook, user,
                                  timestamp_or_now(at), message, archive);
  } else {
    Workbook after = load_workbook_file(*options_.workbook_path);
    result = log_->commit(current->workbook, after, user, timestamp_or_now(at), message, archive);
    save_workbook_file(result.workbook, *options_.workbook_path);
  }
  auto next = Model::build(result.workbook);
  {
    std::lock_guard mlock(model_mu_);
    model_ = next;
  }
  return json_response(200, Json{{"record", json_io::log_record(result.record)},
                                 {"changes", json_io::change_set(result.changes)}});
}

HttpResponse Service::export_model(const std::map<std::string, std::string>& query) {
  if (!log_) throw PreconditionError("export needs an audit log");
  auto user = query_value(query, "user");
  if (!user || user->empty()) throw PreconditionError("query parameter 'user' is required");
  auto m = model();
  ExportResult r = log_->export_model(m->workbook, *user, timestamp_or_now(query_value(query, "at")));
  return json_response(200, Json{{"document", r.document},
                                 {"comment", r.comment},
                                 {"recorded", r.recorded}});
}

void Service::serve(const std::string& host, int port) {
  httplib::Server server;
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    HttpResponse r = handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
  server.Delete(".*", dispatch);
  if (!server.bind_to_port(host, port)) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
  }
  {
    std::lock_guard lock(server_mu_);
    server_ = &server;
  }
  server.listen_after_bind();
  std::lock_guard lock(server_mu_);
  server_ = nullptr;
}

void Service::stop() {
  std::lock_guard lock(server_mu_);
  if (server_) static_cast<httplib::Server*>(server_)->stop();
}

}  // namespace nmd
