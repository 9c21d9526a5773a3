#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "autoedit/error.hpp"
#include "autoedit/grid.hpp"
#include "autoedit/llm.hpp"
#include "autoedit/model.hpp"

namespace autoedit {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Pose keypoints used for framing. Any of them may be missing.
struct Keypoints {
  std::optional<Point> nose;
  std::optional<Point> left_shoulder;
  std::optional<Point> right_shoulder;
  std::optional<Point> left_hip;
  std::optional<Point> right_hip;
  bool operator==(const Keypoints&) const = default;
};

struct ActorTrack {
  std::string actor_id;
  std::vector<std::optional<Box>> boxes;            // one entry per frame
  std::vector<std::optional<Keypoints>> keypoints;  // empty or one per frame

  double coverage() const;
  bool complete() const;
  bool operator==(const ActorTrack&) const = default;
};

struct TranscriptWord {
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<ActorIndex> speaker;  // nullopt is UNKNOWN
  bool operator==(const TranscriptWord&) const = default;
};

struct SaliencyMaps {
  std::filesystem::path directory;
  int downscale = 1;  // map pixel = frame pixel / downscale
};

/// Pre-reduced scores: rows are frames, columns actors in canonical order.
struct SaliencyScores {
  Grid scores;
};

using SaliencySource = std::variant<std::monostate, SaliencyMaps, SaliencyScores>;

struct ProjectBundle {
  std::filesystem::path root;
  SceneMeta meta;
  std::vector<ActorTrack> tracks;  // indexed by ActorIndex
  std::vector<TranscriptWord> transcript;
  SaliencySource saliency;
  std::optional<std::string> llm_cache;
  EditParams params;
  LlmConfig llm;

  std::filesystem::path llm_cache_path() const { return root / "llm_response.txt"; }
};

inline constexpr double kMinTrackCoverage = 0.5;

/// Loads and validates a project directory. `params_path`, when given,
/// replaces the bundle's own params.json.
ProjectBundle load_bundle(const std::filesystem::path& root,
                          const std::optional<std::filesystem::path>& params_path = std::nullopt,
                          Diagnostics* diag = nullptr);

/// Reads an EditParams JSON file; an optional "llm" object fills `llm`.
EditParams load_params_file(const std::filesystem::path& path, LlmConfig* llm = nullptr);

/// Interpolates interior gaps linearly and holds the nearest box at the ends.
ActorTrack fill_track_gaps(const ActorTrack& track);

/// 8-bit style grayscale image with values scaled to [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// Reads binary or ASCII PGM, or PNG (converted to gray).
GrayImage read_gray_image(const std::filesystem::path& path);

/// Mean over the pixels whose centers fall inside `box` of
/// max(v - tau * max_value, 0), where max_value is the image maximum.
/// `box` is in image pixel coordinates.
double thresholded_box_mean(const GrayImage& image, const Box& box, double tau);

/// Per-frame, per-actor raw saliency. Tracks must be gap-filled. An empty
/// source yields all zeros.
Grid reduce_saliency(const SaliencySource& source, const std::vector<ActorTrack>& tracks,
                     const SceneMeta& meta, double tau_sal);

}  // namespace autoedit
