#include "autoedit/service.hpp"

#include <chrono>
#include <cstdio>

#include <httplib.h>

namespace autoedit {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

using Rushes = std::vector<RushTrajectory>;

ServiceReply error_reply(int status, const std::string& stage, const std::string& message) {
  ordered_json j;
  j["stage"] = stage;
  j["message"] = message;
  return {status, j.dump(), false};
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Range: return 416;
    case ErrorKind::Llm: return 502;
    default: return 400;
  }
}

template <typename Fn>
ServiceReply guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_reply(status_for(e.kind()), e.stage(), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "service", e.what());
  }
}

std::string real_key(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string smoothing_key(const EditParams& p) {
  return real_key(p.lambda_vel) + "|" + real_key(p.lambda_jerk) + "|" + real_key(p.aspect);
}

std::string hex_id(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ordered_json rect_json(const Rect& r) { return {{"cx", r.cx}, {"cy", r.cy}, {"w", r.w()}, {"h", r.h}}; }

ordered_json downsample(const Grid& g, int stride) {
  ordered_json out = ordered_json::array();
  for (std::size_t s = 0; s < g.cols(); ++s) {
    ordered_json lane = ordered_json::array();
    for (std::size_t t = 0; t < g.rows(); t += static_cast<std::size_t>(stride)) lane.push_back(g(t, s));
    out.push_back(std::move(lane));
  }
  return out;
}

void check_stride(int stride) {
  if (stride < 1) throw Error(ErrorKind::Validation, "service", "stride must be at least 1");
}

}  // namespace

struct EditService::Project {
  std::string id;
  fs::path path;
  std::shared_ptr<const PreparedProject> prepared;
  std::vector<std::string> warnings;

  struct Solved {
    EditParams params;
    std::shared_ptr<const Rushes> rushes;
    EditSequence seq;
  };

  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const Rushes>> rushes;
  std::map<std::string, std::shared_ptr<const PenaltyContext>> contexts;
  std::map<std::string, std::shared_ptr<const Grid>> saliency;
  std::map<std::string, std::pair<std::string, std::shared_ptr<const Solved>>> payloads;
  std::shared_ptr<const Solved> last;

  // Looks up `key`; on a miss computes outside the lock and keeps the first
  // value inserted, so concurrent misses agree on one result.
  template <typename T, typename Make>
  std::shared_ptr<const T> cached(std::map<std::string, std::shared_ptr<const T>>& cache, const std::string& key,
                                  Make&& make) {
    {
      std::lock_guard lock(mutex);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto value = std::make_shared<const T>(make());
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(value)).first->second;
  }

  std::shared_ptr<const Rushes> rushes_for(const EditParams& params) {
    return cached(rushes, smoothing_key(params), [&] { return compute_rushes(*prepared, params); });
  }

  std::shared_ptr<const PenaltyContext> context_for(const EditParams& params) {
    return cached(contexts, smoothing_key(params) + "|" + real_key(params.theta_mis), [&] {
      return PenaltyContext::from_rushes(prepared->lattice, *rushes_for(params), prepared->tracks,
                                         prepared->bundle.meta, params.theta_mis);
    });
  }

  std::shared_ptr<const Grid> saliency_for(const EditParams& params) {
    return cached(saliency, real_key(params.tau_sal),
                  [&] { return compute_raw_saliency(*prepared, params.tau_sal); });
  }

  EditParams current_params() {
    std::lock_guard lock(mutex);
    return last ? last->params : prepared->bundle.params;
  }

  std::shared_ptr<const Solved> last_solve() {
    std::lock_guard lock(mutex);
    return last;
  }
};

std::shared_ptr<EditService::Project> EditService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) return nullptr;
  return it->second;
}

ServiceReply EditService::register_project(const std::string& path) {
  return guarded([&]() -> ServiceReply {
    if (path.empty()) throw Error(ErrorKind::Validation, "service", "request needs a non-empty 'path'");
    std::error_code ec;
    const auto canonical = fs::weakly_canonical(fs::path(path), ec);
    if (ec || !fs::is_directory(canonical)) {
      throw Error(ErrorKind::Io, "ingest", "project directory " + path + " does not exist");
    }
    const auto key = canonical.string();
    const auto id = hex_id(fnv1a(key));
    if (find(id)) return {200, ordered_json{{"id", id}}.dump(), true};

    Diagnostics diag;
    auto bundle = load_bundle(canonical, std::nullopt, &diag);
    bundle.meta.validate();
    bundle.params.validate();
    if (!bundle.llm_cache && !bundle.transcript.empty()) {
      throw Error(ErrorKind::Config, "dialogue",
                  "the service only uses cached LLM responses; " + bundle.llm_cache_path().string() + " is missing");
    }
    PrepareOptions options;
    options.offline = true;
    auto project = std::make_shared<Project>();
    project->id = id;
    project->path = canonical;
    project->prepared = std::make_shared<const PreparedProject>(prepare_project(std::move(bundle), options, &diag));
    project->warnings = diag.warnings;

    std::lock_guard lock(mutex_);
    projects_.emplace(id, project);
    ids_by_path_.emplace(key, id);
    return {201, ordered_json{{"id", id}}.dump(), false};
  });
}

ServiceReply EditService::describe(const std::string& id) const {
  auto project = find(id);
  if (!project) return error_reply(404, "service", "unknown project '" + id + "'");
  return guarded([&]() -> ServiceReply {
    const auto& prepared = *project->prepared;
    const auto& meta = prepared.bundle.meta;
    ordered_json j;
    j["id"] = project->id;
    j["path"] = project->path.string();
    j["project_id"] = meta.project_id;
    j["actor_ids"] = meta.actor_ids;
    j["frame_count"] = meta.frame_count;
    j["fps"] = meta.fps.value();
    j["frame_width"] = meta.frame_width;
    j["frame_height"] = meta.frame_height;
    j["scene_kind"] = to_string(meta.scene_kind);
    ordered_json shots = ordered_json::array();
    for (const auto& shot : prepared.lattice.shots()) shots.push_back(shot_label(shot, meta));
    j["shots"] = std::move(shots);
    j["word_count"] = prepared.bundle.transcript.size();
    j["suggestions"] = prepared.suggestions.size();
    json params;
    to_json(params, prepared.bundle.params);
    j["params"] = params;
    j["warnings"] = project->warnings;
    return {200, j.dump(), false};
  });
}

ServiceReply EditService::solve(const std::string& id, const json& overrides, int stride) {
  auto project = find(id);
  if (!project) return error_reply(404, "service", "unknown project '" + id + "'");
  return guarded([&]() -> ServiceReply {
    check_stride(stride);
    EditParams params = project->prepared->bundle.params;
    merge_params(params, overrides.is_null() ? json::object() : overrides);
    params.validate();

    json params_json;
    to_json(params_json, params);
    const auto key = params_json.dump() + "|" + std::to_string(stride);
    {
      std::lock_guard lock(project->mutex);
      if (auto it = project->payloads.find(key); it != project->payloads.end()) {
        project->last = it->second.second;
        return {200, it->second.first, true};
      }
    }

    const auto start = std::chrono::steady_clock::now();
    const auto& prepared = *project->prepared;
    const auto& meta = prepared.bundle.meta;
    auto rushes = project->rushes_for(params);
    auto ctx = project->context_for(params);
    auto raw = project->saliency_for(params);
    const auto unary = compute_unary(prepared, *raw, params);
    Diagnostics diag;
    auto seq = solve_edit(prepared, unary, *ctx, params, Strategy{}, &diag);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    ordered_json j;
    j["id"] = project->id;
    j["frame_count"] = meta.frame_count;
    j["fps"] = meta.fps.value();
    j["stride"] = stride;
    j["energy"] = seq.energy;
    j["params"] = params_json;
    ordered_json segments = ordered_json::array();
    for (const auto& seg : seq.segments) {
      segments.push_back({{"shot", seg.shot},
                          {"rush", shot_label(prepared.lattice[seg.shot], meta)},
                          {"start_frame", seg.start_frame},
                          {"end_frame", seg.end_frame}});
    }
    j["segments"] = std::move(segments);
    j["selected"] = seq.shots;
    ordered_json catalog = ordered_json::array();
    for (int s = 0; s < prepared.lattice.size(); ++s) {
      ordered_json keyframes = ordered_json::array();
      const auto& series = (*rushes)[static_cast<size_t>(s)].series;
      for (std::size_t t = 0; t < series.size(); t += static_cast<std::size_t>(stride)) {
        auto r = rect_json(series[t]);
        r["frame"] = t;
        keyframes.push_back(r);
      }
      catalog.push_back({{"index", s}, {"label", shot_label(prepared.lattice[s], meta)}, {"keyframes", keyframes}});
    }
    j["rushes"] = std::move(catalog);
    j["potentials"] = {{"U", downsample(unary.u, stride)},
                       {"C", downsample(unary.c, stride)},
                       {"V", downsample(unary.v, stride)},
                       {"S", downsample(unary.s, stride)}};
    j["warnings"] = diag.warnings;
    auto body = j.dump();

    auto solved = std::make_shared<const Project::Solved>(Project::Solved{params, rushes, std::move(seq)});
    std::lock_guard lock(project->mutex);
    auto [it, inserted] = project->payloads.emplace(key, std::make_pair(std::move(body), solved));
    project->last = it->second.second;
    return {200, it->second.first, !inserted, wall_ms};
  });
}

ServiceReply EditService::frame_rects(const std::string& id, std::int64_t frame) {
  auto project = find(id);
  if (!project) return error_reply(404, "service", "unknown project '" + id + "'");
  return guarded([&]() -> ServiceReply {
    const auto& prepared = *project->prepared;
    const auto& meta = prepared.bundle.meta;
    if (frame < 0 || frame >= meta.frame_count) {
      throw Error(ErrorKind::Range, "service",
                  "frame " + std::to_string(frame) + " is outside [0, " + std::to_string(meta.frame_count) + ")");
    }
    const auto last = project->last_solve();
    const auto rushes = last ? last->rushes : project->rushes_for(prepared.bundle.params);
    const auto t = static_cast<std::size_t>(frame);

    ordered_json j;
    j["frame"] = frame;
    if (last) {
      const int s = last->seq.shots[t];
      j["selected"] = s;
      j["selected_label"] = shot_label(prepared.lattice[s], meta);
    } else {
      j["selected"] = nullptr;
      j["selected_label"] = nullptr;
    }
    ordered_json rects = ordered_json::array();
    for (int s = 0; s < prepared.lattice.size(); ++s) {
      auto r = rect_json((*rushes)[static_cast<size_t>(s)].series[t]);
      r["index"] = s;
      r["label"] = shot_label(prepared.lattice[s], meta);
      rects.push_back(r);
    }
    j["rects"] = std::move(rects);
    return {200, j.dump(), false};
  });
}

ServiceReply EditService::potentials(const std::string& id, int stride) {
  auto project = find(id);
  if (!project) return error_reply(404, "service", "unknown project '" + id + "'");
  return guarded([&]() -> ServiceReply {
    check_stride(stride);
    const auto& prepared = *project->prepared;
    const auto& meta = prepared.bundle.meta;
    const auto params = project->current_params();
    const auto unary = compute_unary(prepared, *project->saliency_for(params), params);

    ordered_json j;
    j["stride"] = stride;
    ordered_json frames = ordered_json::array();
    for (std::int64_t t = 0; t < meta.frame_count; t += stride) frames.push_back(t);
    j["frames"] = std::move(frames);
    ordered_json shots = ordered_json::array();
    for (const auto& shot : prepared.lattice.shots()) shots.push_back(shot_label(shot, meta));
    j["shots"] = std::move(shots);
    j["U"] = downsample(unary.u, stride);
    j["C"] = downsample(unary.c, stride);
    j["V"] = downsample(unary.v, stride);
    j["S"] = downsample(unary.s, stride);
    return {200, j.dump(), false};
  });
}

namespace {

void send(httplib::Response& res, const ServiceReply& reply) {
  res.status = reply.status;
  res.set_header("X-Cache", reply.cache_hit ? "hit" : "miss");
  if (reply.elapsed_ms > 0.0) res.set_header("X-Solve-Ms", std::to_string(reply.elapsed_ms));
  res.set_content(reply.body, "application/json");
}

int stride_of(const httplib::Request& req) {
  if (!req.has_param("stride")) return 1;
  const auto text = req.get_param_value("stride");
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return 0;
}

}  // namespace

void EditService::mount(httplib::Server& server) {
  server.Post("/projects", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      return send(res, error_reply(400, "service", std::string("request body is not JSON: ") + e.what()));
    }
    if (!body.is_object() || !body.contains("path") || !body["path"].is_string()) {
      return send(res, error_reply(400, "service", "request needs a string 'path'"));
    }
    send(res, register_project(body["path"].get<std::string>()));
  });

  server.Get(R"(/projects/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, describe(req.matches[1]));
  });

  server.Post(R"(/projects/([^/]+)/solve)", [this](const httplib::Request& req, httplib::Response& res) {
    json overrides = json::object();
    if (!req.body.empty()) {
      try {
        overrides = json::parse(req.body);
      } catch (const json::exception& e) {
        return send(res, error_reply(400, "params", std::string("overrides are not JSON: ") + e.what()));
      }
    }
    send(res, solve(req.matches[1], overrides, stride_of(req)));
  });

  server.Get(R"(/projects/([^/]+)/frames/(-?\d+)/rects)", [this](const httplib::Request& req, httplib::Response& res) {
    std::int64_t frame = 0;
    try {
      frame = std::stoll(req.matches[2]);
    } catch (const std::exception&) {
      return send(res, error_reply(416, "service", "frame index out of range"));
    }
    send(res, frame_rects(req.matches[1], frame));
  });

  server.Get(R"(/projects/([^/]+)/potentials)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, potentials(req.matches[1], stride_of(req)));
  });
}

}  // namespace autoedit
