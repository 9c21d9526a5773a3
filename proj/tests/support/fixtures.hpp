#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "autoedit/optimizer.hpp"
#include "autoedit/penalties.hpp"

namespace fixtures {

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct SceneOptions {
  int actors = 3;
  std::int64_t frames = 500;
  int fps = 25;
  int width = 1920;
  int height = 1080;
  double turn_secs = 4.0;  // length of one speaker turn
  bool llm_cache = true;
  bool saliency_scores = true;
  bool keypoints = true;
  bool group_turns = true;  // every third turn asks for a two-actor shot
  std::uint64_t seed = 1;
  std::string project_id = "fixture";
};

/// Writes meta.json, tracks.json, transcript.json and, per options,
/// saliency_scores.csv and llm_response.txt.
void write_bundle(const std::filesystem::path& dir, const SceneOptions& options);

void write_file(const std::filesystem::path& path, const std::string& text);

/// Random DP instance: unary in [0, 1) with some exact zeros, random crops
/// and misframing flags.
struct DpInstance {
  autoedit::Grid unary;
  autoedit::PenaltyContext ctx;
  autoedit::EditParams params;
};

DpInstance random_instance(std::mt19937_64& rng, int shots, int frames, int fps = 5);

struct OracleResult {
  double energy = 0.0;
  std::vector<int> shots;
  int ties = 0;  // sequences within 1e-9 of the optimum
};

/// Exhaustive minimum of evaluate_edit_cost over all shots^frames sequences,
/// honoring forced frames (-1 means free).
OracleResult brute_force(const autoedit::Grid& unary, const autoedit::PenaltyContext& ctx,
                         const autoedit::EditParams& params, const std::vector<int>& forced = {});

}  // namespace fixtures
