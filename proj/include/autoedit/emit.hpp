#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "autoedit/model.hpp"
#include "autoedit/optimizer.hpp"
#include "autoedit/potentials.hpp"
#include "autoedit/rushes.hpp"

namespace autoedit {

struct EdlSegment {
  std::string rush;  // shot label
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // exclusive
  Rect rect;                   // crop at start_frame

  bool operator==(const EdlSegment&) const = default;
};

struct EditDecisionList {
  std::string project_id;
  FrameRate fps;
  std::int64_t frame_count = 0;
  int frame_width = 0;
  int frame_height = 0;
  std::string strategy;  // "optimized" or a baseline name
  std::string mode;      // dp mode
  double energy = 0.0;
  std::vector<EdlSegment> segments;

  bool operator==(const EditDecisionList&) const = default;
};

/// Builds the EDL from a solved sequence; rushes are indexed like the lattice.
EditDecisionList make_edl(const EditSequence& seq, const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                          const SceneMeta& meta, const std::string& strategy, const std::string& mode);

/// Throws Error(Validation) unless the segments tile [0, frame_count).
void check_tiling(const EditDecisionList& edl);

std::string edl_to_json(const EditDecisionList& edl);
EditDecisionList edl_from_json(const std::string& text);

/// SMPTE-style HH:MM:SS:FF with an integer timebase of round(fps).
std::string timecode(std::int64_t frame, const FrameRate& fps);

/// CMX3600-style event list, one event per segment.
std::string edl_to_cmx3600(const EditDecisionList& edl);

/// frame,rush,cx,cy,w,h for every frame of the selected rushes.
std::string crops_csv(const EditSequence& seq, const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                      const SceneMeta& meta);

struct CropWindow {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  bool operator==(const CropWindow&) const = default;
};

/// Floor for the origin, ceil for the size, then clamped inside the frame.
CropWindow integer_crop(const Rect& rect, int frame_width, int frame_height);

/// One line per segment: input range and integer crop.
std::string render_manifest(const EditDecisionList& edl);

/// frame,shot,C,V,S,U rows.
std::string potentials_csv(const UnaryField& unary, const ShotLattice& lattice, const SceneMeta& meta);

/// frame,rush,cx,cy,h for every rush.
std::string trajectories_csv(const std::vector<RushTrajectory>& rushes, const SceneMeta& meta);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace autoedit
