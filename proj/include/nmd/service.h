// SPDX-License-Identifier: Apache-2.0
// JSON-over-HTTP facade. `handle` is transport-free so tests can call it
// directly; `serve` puts it behind cpp-httplib.
#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "nmd/audit_log.h"
#include "nmd/walker.h"

namespace nmd {

struct ServiceOptions {
  bool enable_commit = false;
  std::chrono::seconds idle_timeout{30 * 60};
  // Working copy re-read by /api/commit.
  std::optional<std::filesystem::path> workbook_path;
  std::function<std::chrono::steady_clock::time_point()> clock =
      [] { return std::chrono::steady_clock::now(); };
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  // `log` may be null (history empty, commit and export unavailable).
  Service(Workbook w, AuditLog* log, ServiceOptions options = {});

  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query,
                      const std::string& body);
  // `target` may carry a percent-encoded query string.
  HttpResponse handle(const std::string& method, const std::string& target,
                      const std::string& body = "");

  // Blocks until stop() is called. Throws Error when the port is taken.
  void serve(const std::string& host, int port);
  void stop();

  std::size_t session_count();
  std::shared_ptr<const Model> model() const;

 private:
  struct SessionEntry {
    std::unique_ptr<WalkSession> session;
    std::chrono::steady_clock::time_point last_used;
  };

  HttpResponse route(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query,
                     const std::string& body);
  HttpResponse get_cell(const std::string& sheet, const std::string& addr);
  HttpResponse create_session(const std::string& body);
  HttpResponse session_action(const std::string& id, const std::string& action,
                              const std::string& method, const std::string& body,
                              const std::map<std::string, std::string>& query);
  HttpResponse whatif(const std::string& body);
  HttpResponse history(const std::map<std::string, std::string>& query);
  HttpResponse compile(const std::string& body);
  HttpResponse decompile(const std::string& body);
  HttpResponse commit(const std::string& body);
  HttpResponse export_model(const std::map<std::string, std::string>& query);

  void evict_idle_locked();
  std::string new_session_id();

  ServiceOptions options_;
  AuditLog* log_;
  mutable std::mutex model_mu_;
  std::shared_ptr<const Model> model_;
  std::mutex commit_mu_;
  std::mutex sessions_mu_;
  std::map<std::string, SessionEntry> sessions_;
  std::mutex server_mu_;
  void* server_ = nullptr;  // httplib::Server while serving
};

}  // namespace nmd
