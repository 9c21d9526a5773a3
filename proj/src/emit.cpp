#include "autoedit/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "autoedit/error.hpp"

namespace autoedit {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::Validation, "emit", message); }

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // Avoid "-0.000" so equal crops print identically.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

std::string fps_text(const FrameRate& fps) { return std::to_string(fps.num) + "/" + std::to_string(fps.den); }

void check_selection(const EditSequence& seq, const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                     const SceneMeta& meta) {
  if (seq.shots.empty()) invalid("cannot emit an empty edit");
  if (static_cast<std::int64_t>(seq.shots.size()) != meta.frame_count) {
    invalid("edit covers " + std::to_string(seq.shots.size()) + " frames, the scene has " +
            std::to_string(meta.frame_count));
  }
  if (static_cast<int>(rushes.size()) != lattice.size()) invalid("one rush trajectory per shot is required");
  for (int s : seq.shots) {
    if (s < 0 || s >= lattice.size()) invalid("shot index " + std::to_string(s) + " is outside the lattice");
  }
}

}  // namespace

EditDecisionList make_edl(const EditSequence& seq, const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                          const SceneMeta& meta, const std::string& strategy, const std::string& mode) {
  check_selection(seq, lattice, rushes, meta);
  EditDecisionList edl;
  edl.project_id = meta.project_id;
  edl.fps = meta.fps;
  edl.frame_count = meta.frame_count;
  edl.frame_width = meta.frame_width;
  edl.frame_height = meta.frame_height;
  edl.strategy = strategy;
  edl.mode = mode;
  edl.energy = seq.energy;
  for (const auto& seg : segments_of(seq.shots)) {
    edl.segments.push_back({shot_label(lattice[seg.shot], meta), seg.start_frame, seg.end_frame,
                            rushes[static_cast<size_t>(seg.shot)].series[static_cast<size_t>(seg.start_frame)]});
  }
  check_tiling(edl);
  return edl;
}

void check_tiling(const EditDecisionList& edl) {
  std::int64_t expected = 0;
  for (std::size_t i = 0; i < edl.segments.size(); ++i) {
    const auto& seg = edl.segments[i];
    if (seg.start_frame != expected || seg.end_frame <= seg.start_frame) {
      invalid("segment " + std::to_string(i) + " [" + std::to_string(seg.start_frame) + ", " +
              std::to_string(seg.end_frame) + ") does not continue from frame " + std::to_string(expected));
    }
    expected = seg.end_frame;
  }
  if (expected != edl.frame_count) {
    invalid("segments end at frame " + std::to_string(expected) + ", expected " + std::to_string(edl.frame_count));
  }
}

std::string edl_to_json(const EditDecisionList& edl) {
  ordered_json j;
  j["format"] = "autoedit-edl";
  j["version"] = 1;
  j["project_id"] = edl.project_id;
  j["fps"] = fps_text(edl.fps);
  j["frame_count"] = edl.frame_count;
  j["frame_width"] = edl.frame_width;
  j["frame_height"] = edl.frame_height;
  j["strategy"] = edl.strategy;
  j["mode"] = edl.mode;
  j["energy"] = edl.energy;
  j["segments"] = ordered_json::array();
  for (const auto& seg : edl.segments) {
    ordered_json s;
    s["rush"] = seg.rush;
    s["start_frame"] = seg.start_frame;
    s["end_frame"] = seg.end_frame;
    s["rect"] = {{"cx", seg.rect.cx}, {"cy", seg.rect.cy}, {"h", seg.rect.h}, {"aspect", seg.rect.aspect}};
    j["segments"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

EditDecisionList edl_from_json(const std::string& text) {
  EditDecisionList edl;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "autoedit-edl") invalid("not an autoedit EDL document");
    edl.project_id = j.at("project_id").get<std::string>();
    edl.fps = parse_frame_rate(j.at("fps").get<std::string>());
    edl.frame_count = j.at("frame_count").get<std::int64_t>();
    edl.frame_width = j.at("frame_width").get<int>();
    edl.frame_height = j.at("frame_height").get<int>();
    edl.strategy = j.at("strategy").get<std::string>();
    edl.mode = j.at("mode").get<std::string>();
    edl.energy = j.at("energy").get<double>();
    for (const auto& s : j.at("segments")) {
      const auto& r = s.at("rect");
      edl.segments.push_back({s.at("rush").get<std::string>(), s.at("start_frame").get<std::int64_t>(),
                              s.at("end_frame").get<std::int64_t>(),
                              Rect{r.at("cx").get<double>(), r.at("cy").get<double>(), r.at("h").get<double>(),
                                   r.at("aspect").get<double>()}});
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed EDL: ") + e.what());
  }
  check_tiling(edl);
  return edl;
}

std::string timecode(std::int64_t frame, const FrameRate& fps) {
  const auto base = std::max<std::int64_t>(1, std::llround(fps.value()));
  const auto ff = frame % base;
  const auto total_s = frame / base;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld:%02lld", static_cast<long long>(total_s / 3600),
                static_cast<long long>((total_s / 60) % 60), static_cast<long long>(total_s % 60),
                static_cast<long long>(ff));
  return buf;
}

std::string edl_to_cmx3600(const EditDecisionList& edl) {
  std::ostringstream out;
  out << "TITLE: " << edl.project_id << "\n";
  out << "FCM: NON-DROP FRAME\n\n";
  int event = 1;
  for (const auto& seg : edl.segments) {
    char head[16];
    std::snprintf(head, sizeof head, "%03d", event++);
    const auto in = timecode(seg.start_frame, edl.fps);
    const auto out_tc = timecode(seg.end_frame, edl.fps);
    out << head << "  " << seg.rush << " V     C        " << in << " " << out_tc << " " << in << " " << out_tc << "\n";
    out << "* FROM CLIP NAME: " << seg.rush << "\n";
  }
  return out.str();
}

std::string crops_csv(const EditSequence& seq, const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                      const SceneMeta& meta) {
  check_selection(seq, lattice, rushes, meta);
  std::string out = "frame,rush,cx,cy,w,h\n";
  for (std::size_t t = 0; t < seq.shots.size(); ++t) {
    const int s = seq.shots[t];
    const Rect& r = rushes[static_cast<size_t>(s)].series[t];
    out += std::to_string(t) + "," + shot_label(lattice[s], meta) + "," + fixed3(r.cx) + "," + fixed3(r.cy) + "," +
           fixed3(r.w()) + "," + fixed3(r.h) + "\n";
  }
  return out;
}

CropWindow integer_crop(const Rect& rect, int frame_width, int frame_height) {
  CropWindow c;
  c.x = static_cast<int>(std::floor(rect.left() + 1e-9));
  c.y = static_cast<int>(std::floor(rect.top() + 1e-9));
  c.w = static_cast<int>(std::ceil(rect.w() - 1e-9));
  c.h = static_cast<int>(std::ceil(rect.h - 1e-9));
  c.w = std::clamp(c.w, 1, frame_width);
  c.h = std::clamp(c.h, 1, frame_height);
  c.x = std::clamp(c.x, 0, frame_width - c.w);
  c.y = std::clamp(c.y, 0, frame_height - c.h);
  return c;
}

std::string render_manifest(const EditDecisionList& edl) {
  if (edl.segments.empty()) invalid("cannot write a render manifest for an empty edit");
  check_tiling(edl);
  std::ostringstream out;
  out << "# project " << edl.project_id << " fps " << fps_text(edl.fps) << " frames " << edl.frame_count << " size "
      << edl.frame_width << "x" << edl.frame_height << "\n";
  out << "# start_frame end_frame rush crop_x crop_y crop_w crop_h\n";
  for (const auto& seg : edl.segments) {
    const auto c = integer_crop(seg.rect, edl.frame_width, edl.frame_height);
    out << seg.start_frame << " " << seg.end_frame << " " << seg.rush << " " << c.x << " " << c.y << " " << c.w << " "
        << c.h << "\n";
  }
  return out.str();
}

std::string potentials_csv(const UnaryField& unary, const ShotLattice& lattice, const SceneMeta& meta) {
  std::string out = "frame,shot,C,V,S,U\n";
  for (std::size_t t = 0; t < unary.frames(); ++t) {
    for (int s = 0; s < lattice.size(); ++s) {
      const auto k = static_cast<size_t>(s);
      out += std::to_string(t) + "," + shot_label(lattice[s], meta) + "," + fixed3(unary.c(t, k)) + "," +
             fixed3(unary.v(t, k)) + "," + fixed3(unary.s(t, k)) + "," + fixed3(unary.u(t, k)) + "\n";
    }
  }
  return out;
}

std::string trajectories_csv(const std::vector<RushTrajectory>& rushes, const SceneMeta& meta) {
  std::string out = "frame,rush,cx,cy,h\n";
  for (const auto& rush : rushes) {
    const auto label = shot_label(rush.shot, meta);
    for (std::size_t t = 0; t < rush.series.size(); ++t) {
      const auto& r = rush.series[t];
      out += std::to_string(t) + "," + label + "," + fixed3(r.cx) + "," + fixed3(r.cy) + "," + fixed3(r.h) + "\n";
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "emit", "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "emit", "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "emit", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace autoedit
