#include "autoedit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace autoedit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kBoundsTolerance = 1e-6;

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, "ingest", message);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "missing file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Validation, path.filename().string() + ": invalid JSON: " + e.what());
  }
}

double number_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    fail(ErrorKind::Validation, where + ": '" + key + "' must be a number");
  }
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) fail(ErrorKind::Validation, where + ": '" + key + "' must be finite");
  return v;
}

SceneMeta parse_meta(const json& j, const fs::path& root) {
  const std::string where = "meta.json";
  if (!j.is_object()) fail(ErrorKind::Validation, where + ": expected an object");
  SceneMeta meta;
  meta.project_id = j.value("project_id", root.filename().string());
  if (meta.project_id.empty()) meta.project_id = "project";

  if (!j.contains("frame_count") || !j["frame_count"].is_number_integer()) {
    fail(ErrorKind::Validation, where + ": 'frame_count' must be an integer");
  }
  meta.frame_count = j["frame_count"].get<std::int64_t>();

  if (!j.contains("fps")) fail(ErrorKind::Validation, where + ": 'fps' is required");
  const auto& fps = j["fps"];
  if (fps.is_string()) {
    meta.fps = parse_frame_rate(fps.get<std::string>());
  } else if (fps.is_number_integer()) {
    meta.fps = parse_frame_rate(std::to_string(fps.get<std::int64_t>()));
  } else if (fps.is_number()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << std::fixed << fps.get<double>();
    meta.fps = parse_frame_rate(ss.str());
  } else {
    fail(ErrorKind::Validation, where + ": 'fps' must be a number or \"num/den\"");
  }

  for (const char* key : {"frame_width", "frame_height"}) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      fail(ErrorKind::Validation, where + ": '" + key + "' must be an integer");
    }
  }
  meta.frame_width = j["frame_width"].get<int>();
  meta.frame_height = j["frame_height"].get<int>();

  if (!j.contains("actor_ids") || !j["actor_ids"].is_array()) {
    fail(ErrorKind::Validation, where + ": 'actor_ids' must be an array of strings");
  }
  for (const auto& id : j["actor_ids"]) {
    if (!id.is_string()) fail(ErrorKind::Validation, where + ": actor ids must be strings");
    meta.actor_ids.push_back(id.get<std::string>());
  }

  if (j.contains("actor_aliases")) {
    const auto& aliases = j["actor_aliases"];
    if (!aliases.is_object()) fail(ErrorKind::Validation, where + ": 'actor_aliases' must be an object");
    for (const auto& [alias, members] : aliases.items()) {
      if (!members.is_array() || members.empty()) {
        fail(ErrorKind::Validation, where + ": alias '" + alias + "' must list at least one actor");
      }
      ActorMask mask = 0;
      for (const auto& m : members) {
        const auto idx = m.is_string() ? meta.find_actor(m.get<std::string>()) : std::nullopt;
        if (!idx) {
          fail(ErrorKind::Validation, where + ": alias '" + alias + "' names unknown actor " + m.dump());
        }
        mask |= ActorMask{1} << *idx;
      }
      std::string key = alias;
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      meta.actor_aliases[key] = mask;
    }
  }

  if (j.contains("scene_kind")) meta.scene_kind = parse_scene_kind(j["scene_kind"].get<std::string>());
  if (j.contains("quizmaster")) {
    const auto idx = meta.find_actor(j["quizmaster"].get<std::string>());
    if (!idx) fail(ErrorKind::Validation, where + ": 'quizmaster' is not a known actor");
    meta.quizmaster = idx;
  }

  try {
    meta.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Validation, where + ": " + e.what());
  }
  return meta;
}

std::optional<Point> parse_point(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument("keypoint must be [x, y]");
  }
  return Point{j[0].get<double>(), j[1].get<double>()};
}

std::vector<ActorTrack> parse_tracks(const json& j, const SceneMeta& meta) {
  const std::string where = "tracks.json";
  if (!j.is_object()) fail(ErrorKind::Validation, where + ": expected an object keyed by actor id");
  for (const auto& [id, _] : j.items()) {
    if (!meta.find_actor(id)) fail(ErrorKind::Validation, where + ": unknown actor '" + id + "'");
  }

  const auto frames = static_cast<size_t>(meta.frame_count);
  std::vector<ActorTrack> tracks;
  for (const auto& id : meta.actor_ids) {
    if (!j.contains(id)) fail(ErrorKind::Validation, where + ": no track for actor '" + id + "'");
    const auto& entry = j[id];
    const std::string at = where + ": actor '" + id + "'";
    if (!entry.is_object() || !entry.contains("boxes") || !entry["boxes"].is_array()) {
      fail(ErrorKind::Validation, at + ": 'boxes' array is required");
    }
    const auto& boxes = entry["boxes"];
    if (boxes.size() != frames) {
      fail(ErrorKind::Validation, at + ": expected " + std::to_string(frames) + " box entries, got " +
                                      std::to_string(boxes.size()));
    }

    ActorTrack track;
    track.actor_id = id;
    track.boxes.resize(frames);
    for (size_t t = 0; t < frames; ++t) {
      const auto& b = boxes[t];
      if (b.is_null()) continue;
      if (!b.is_array() || b.size() != 4 ||
          !std::all_of(b.begin(), b.end(), [](const json& v) { return v.is_number(); })) {
        fail(ErrorKind::Validation, at + ", frame " + std::to_string(t) + ": box must be [x, y, w, h]");
      }
      const Box box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      const bool inside = box.w > 0 && box.h > 0 && box.x >= -kBoundsTolerance &&
                          box.y >= -kBoundsTolerance &&
                          box.x + box.w <= meta.frame_width + kBoundsTolerance &&
                          box.y + box.h <= meta.frame_height + kBoundsTolerance;
      if (!inside) {
        fail(ErrorKind::Validation,
             at + ", frame " + std::to_string(t) + ": box " + b.dump() + " is empty or outside the frame");
      }
      track.boxes[t] = box;
    }

    if (entry.contains("keypoints")) {
      const auto& kps = entry["keypoints"];
      if (!kps.is_array() || kps.size() != frames) {
        fail(ErrorKind::Validation, at + ": 'keypoints' must have one entry per frame");
      }
      track.keypoints.resize(frames);
      for (size_t t = 0; t < frames; ++t) {
        const auto& k = kps[t];
        if (k.is_null()) continue;
        try {
          if (!k.is_object()) throw std::invalid_argument("keypoints must be an object");
          Keypoints p;
          auto get = [&](const char* name) { return k.contains(name) ? parse_point(k[name]) : std::nullopt; };
          p.nose = get("nose");
          p.left_shoulder = get("left_shoulder");
          p.right_shoulder = get("right_shoulder");
          p.left_hip = get("left_hip");
          p.right_hip = get("right_hip");
          track.keypoints[t] = p;
        } catch (const std::exception& e) {
          fail(ErrorKind::Validation, at + ", frame " + std::to_string(t) + ": " + e.what());
        }
      }
    }

    if (track.coverage() < kMinTrackCoverage) {
      std::ostringstream ss;
      ss << at << ": track covers " << std::lround(track.coverage() * 100.0)
         << "% of frames, at least 50% is required";
      fail(ErrorKind::Validation, ss.str());
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::vector<TranscriptWord> parse_transcript(const json& j, const SceneMeta& meta) {
  const std::string where = "transcript.json";
  const json* words = &j;
  if (j.is_object() && j.contains("words")) words = &j["words"];
  if (!words->is_array()) fail(ErrorKind::Validation, where + ": expected an array of word records");

  const double end_of_scene = meta.duration_s();
  std::vector<TranscriptWord> out;
  out.reserve(words->size());
  for (size_t i = 0; i < words->size(); ++i) {
    const auto& w = (*words)[i];
    const std::string at = where + ": word " + std::to_string(i);
    if (!w.is_object()) fail(ErrorKind::Validation, at + ": expected an object");
    TranscriptWord word;
    if (!w.contains("text") || !w["text"].is_string()) fail(ErrorKind::Validation, at + ": 'text' is required");
    word.text = w["text"].get<std::string>();
    word.start_s = number_at(w, "start_s", at);
    word.end_s = number_at(w, "end_s", at);
    if (w.contains("speaker") && !w["speaker"].is_null()) {
      if (!w["speaker"].is_string()) fail(ErrorKind::Validation, at + ": 'speaker' must be a string");
      const auto name = w["speaker"].get<std::string>();
      if (name != "UNKNOWN" && !name.empty()) {
        word.speaker = meta.find_actor(name);
        if (!word.speaker) fail(ErrorKind::Validation, at + ": unknown speaker '" + name + "'");
      }
    }

    if (word.end_s < word.start_s) fail(ErrorKind::Validation, at + ": end_s is before start_s");
    if (word.start_s < 0.0 || word.end_s > end_of_scene + 1e-9) {
      fail(ErrorKind::Validation, at + ": timestamps fall outside [0, " + std::to_string(end_of_scene) + "] s");
    }
    if (!out.empty() && word.start_s < out.back().start_s) {
      fail(ErrorKind::Validation, at + ": words are not sorted by start_s");
    }
    out.push_back(std::move(word));
  }
  return out;
}

SaliencyScores parse_scores_csv(const fs::path& path, const SceneMeta& meta) {
  const std::string where = path.filename().string();
  std::istringstream in(read_text(path));
  std::string line;
  const auto n = static_cast<size_t>(meta.actor_count());
  const auto frames = static_cast<size_t>(meta.frame_count);
  Grid scores(frames, n, 0.0);
  std::vector<char> seen(frames * n, 0);

  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("frame", 0) == 0) continue;

    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    const std::string at = where + ": line " + std::to_string(line_no);
    if (cells.size() != 3) fail(ErrorKind::Validation, at + ": expected frame,actor_id,score");

    std::int64_t frame = -1;
    double score = 0.0;
    try {
      size_t used = 0;
      frame = std::stoll(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("frame");
      score = std::stod(cells[2], &used);
    } catch (const std::exception&) {
      fail(ErrorKind::Validation, at + ": unparseable frame or score");
    }
    if (frame < 0 || frame >= meta.frame_count) fail(ErrorKind::Validation, at + ": frame out of range");
    const auto actor = meta.find_actor(cells[1]);
    if (!actor) fail(ErrorKind::Validation, at + ": unknown actor '" + cells[1] + "'");
    if (!std::isfinite(score) || score < 0.0) fail(ErrorKind::Validation, at + ": score must be finite and >= 0");

    scores(static_cast<size_t>(frame), static_cast<size_t>(*actor)) = score;
    seen[static_cast<size_t>(frame) * n + static_cast<size_t>(*actor)] = 1;
  }

  for (size_t t = 0; t < frames; ++t) {
    for (size_t a = 0; a < n; ++a) {
      if (!seen[t * n + a]) {
        fail(ErrorKind::Validation, where + ": no score for frame " + std::to_string(t) + ", actor '" +
                                        meta.actor_ids[a] + "'");
      }
    }
  }
  return {std::move(scores)};
}

}  // namespace

double ActorTrack::coverage() const {
  if (boxes.empty()) return 0.0;
  const auto present = std::count_if(boxes.begin(), boxes.end(), [](const auto& b) { return b.has_value(); });
  return static_cast<double>(present) / static_cast<double>(boxes.size());
}

bool ActorTrack::complete() const {
  return std::all_of(boxes.begin(), boxes.end(), [](const auto& b) { return b.has_value(); });
}

EditParams load_params_file(const fs::path& path, LlmConfig* llm) {
  auto j = read_json(path);
  if (!j.is_object()) fail(ErrorKind::Validation, path.filename().string() + ": expected an object");
  if (j.contains("llm")) {
    if (llm) *llm = llm_config_from_json(j["llm"]);
    j.erase("llm");
  }
  try {
    auto params = params_from_json(j);
    params.validate();
    return params;
  } catch (const Error& e) {
    fail(ErrorKind::Validation, path.filename().string() + ": " + e.what());
  }
}

ProjectBundle load_bundle(const fs::path& root, const std::optional<fs::path>& params_path, Diagnostics* diag) {
  if (!fs::is_directory(root)) fail(ErrorKind::Io, "project directory " + root.string() + " does not exist");

  ProjectBundle bundle;
  bundle.root = root;
  const auto meta_json = read_json(root / "meta.json");
  bundle.meta = parse_meta(meta_json, root);
  bundle.tracks = parse_tracks(read_json(root / "tracks.json"), bundle.meta);
  bundle.transcript = parse_transcript(read_json(root / "transcript.json"), bundle.meta);

  const auto scores_path = root / "saliency_scores.csv";
  const auto maps_dir = root / "saliency";
  if (fs::exists(scores_path)) {
    bundle.saliency = parse_scores_csv(scores_path, bundle.meta);
    if (fs::is_directory(maps_dir) && diag) diag->warn("both saliency_scores.csv and saliency/ exist; using the scores");
  } else if (fs::is_directory(maps_dir)) {
    SaliencyMaps maps{maps_dir, meta_json.value("saliency_downscale", 1)};
    if (maps.downscale < 1) fail(ErrorKind::Validation, "meta.json: 'saliency_downscale' must be >= 1");
    bundle.saliency = maps;
  } else if (diag) {
    diag->warn("no saliency source in bundle; saliency potential will be zero");
  }

  if (fs::exists(bundle.llm_cache_path())) {
    bundle.llm_cache = read_text(bundle.llm_cache_path());
  }

  const auto own_params = root / "params.json";
  if (params_path) {
    bundle.params = load_params_file(*params_path, &bundle.llm);
  } else if (fs::exists(own_params)) {
    bundle.params = load_params_file(own_params, &bundle.llm);
  }
  return bundle;
}

ActorTrack fill_track_gaps(const ActorTrack& track) {
  ActorTrack out = track;
  const auto frames = out.boxes.size();
  std::vector<size_t> present;
  for (size_t t = 0; t < frames; ++t) {
    if (out.boxes[t]) present.push_back(t);
  }
  if (present.empty()) return out;

  auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
  auto lerp_point = [&](const std::optional<Point>& a, const std::optional<Point>& b, double s) {
    std::optional<Point> p;
    if (a && b) p = Point{lerp(a->x, b->x, s), lerp(a->y, b->y, s)};
    return p;
  };
  const bool has_keypoints = out.keypoints.size() == frames;

  for (size_t t = 0; t < present.front(); ++t) {
    out.boxes[t] = out.boxes[present.front()];
    if (has_keypoints) out.keypoints[t] = out.keypoints[present.front()];
  }
  for (size_t t = present.back() + 1; t < frames; ++t) {
    out.boxes[t] = out.boxes[present.back()];
    if (has_keypoints) out.keypoints[t] = out.keypoints[present.back()];
  }
  for (size_t k = 0; k + 1 < present.size(); ++k) {
    const size_t a = present[k], b = present[k + 1];
    const Box& ba = *out.boxes[a];
    const Box& bb = *out.boxes[b];
    for (size_t t = a + 1; t < b; ++t) {
      const double s = static_cast<double>(t - a) / static_cast<double>(b - a);
      out.boxes[t] = Box{lerp(ba.x, bb.x, s), lerp(ba.y, bb.y, s), lerp(ba.w, bb.w, s), lerp(ba.h, bb.h, s)};
      if (has_keypoints && out.keypoints[a] && out.keypoints[b]) {
        const auto& ka = *out.keypoints[a];
        const auto& kb = *out.keypoints[b];
        out.keypoints[t] = Keypoints{lerp_point(ka.nose, kb.nose, s),
                                     lerp_point(ka.left_shoulder, kb.left_shoulder, s),
                                     lerp_point(ka.right_shoulder, kb.right_shoulder, s),
                                     lerp_point(ka.left_hip, kb.left_hip, s),
                                     lerp_point(ka.right_hip, kb.right_hip, s)};
      }
    }
  }
  return out;
}

}  // namespace autoedit
