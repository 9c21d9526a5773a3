#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "autoedit/pipeline.hpp"

namespace httplib {
class Server;
}

namespace autoedit {

/// HTTP-shaped reply: status code plus a JSON body. Errors carry {stage, message}.
struct ServiceReply {
  int status = 200;
  std::string body;
  bool cache_hit = false;
  double elapsed_ms = 0.0;  // solve wall time, sent as the X-Solve-Ms header
};

/// 64-bit FNV-1a, used for project ids and parameter hashes.
std::uint64_t fnv1a(std::string_view text);

/// Registry of loaded projects with per-project caches of the stages that do
/// not depend on the parameters being tuned. Safe for concurrent use.
class EditService {
 public:
  ServiceReply register_project(const std::string& path);
  ServiceReply describe(const std::string& id) const;
  ServiceReply solve(const std::string& id, const nlohmann::json& overrides, int stride = 1);
  ServiceReply frame_rects(const std::string& id, std::int64_t frame);
  ServiceReply potentials(const std::string& id, int stride = 1);

  /// Installs the REST routes on `server`.
  void mount(httplib::Server& server);

 private:
  struct Project;
  std::shared_ptr<Project> find(const std::string& id) const;

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Project>> projects_;
  std::map<std::string, std::string> ids_by_path_;
};

}  // namespace autoedit
