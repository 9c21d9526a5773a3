#include "support/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace autoedit;

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = fs::temp_directory_path() /
          ("autoedit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

namespace {

const char* kWords[] = {"alpha", "bravo",  "charlie", "delta", "echo",   "foxtrot", "golf",  "hotel",
                        "india", "juliet", "kilo",    "lima",  "mike",   "november", "oscar", "papa",
                        "quebec", "romeo", "sierra",  "tango", "uniform", "victor",  "whiskey", "yankee"};

std::string actor_name(int a) { return std::string(1, static_cast<char>('A' + a)); }

}  // namespace

void write_bundle(const fs::path& dir, const SceneOptions& o) {
  fs::create_directories(dir);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  ordered_json meta;
  meta["project_id"] = o.project_id;
  meta["frame_count"] = o.frames;
  meta["fps"] = o.fps;
  meta["frame_width"] = o.width;
  meta["frame_height"] = o.height;
  ordered_json ids = ordered_json::array();
  for (int a = 0; a < o.actors; ++a) ids.push_back(actor_name(a));
  meta["actor_ids"] = ids;
  meta["scene_kind"] = "theatre";
  write_file(dir / "meta.json", meta.dump(2));

  // Actors stand in a row with a slow sway.
  const double slot = static_cast<double>(o.width) / (o.actors + 1);
  ordered_json tracks;
  for (int a = 0; a < o.actors; ++a) {
    ordered_json boxes = ordered_json::array();
    ordered_json keypoints = ordered_json::array();
    const double w = slot * 0.45;
    const double h = o.height * 0.6;
    const double phase = jitter(rng) * 3.0;
    for (std::int64_t t = 0; t < o.frames; ++t) {
      const double sway = 20.0 * std::sin(0.05 * static_cast<double>(t) + phase) + 2.0 * jitter(rng);
      const double cx = slot * (a + 1) + sway;
      const double x = cx - 0.5 * w;
      const double y = o.height * 0.25 + 3.0 * jitter(rng);
      boxes.push_back({x, y, w, h});
      if (o.keypoints) {
        keypoints.push_back({{"nose", {cx, y + 0.08 * h}},
                             {"left_shoulder", {cx - 0.2 * w, y + 0.2 * h}},
                             {"right_shoulder", {cx + 0.2 * w, y + 0.2 * h}},
                             {"left_hip", {cx - 0.15 * w, y + 0.55 * h}},
                             {"right_hip", {cx + 0.15 * w, y + 0.55 * h}}});
      }
    }
    ordered_json track;
    track["boxes"] = std::move(boxes);
    if (o.keypoints) track["keypoints"] = std::move(keypoints);
    tracks[actor_name(a)] = std::move(track);
  }
  write_file(dir / "tracks.json", tracks.dump());

  // Speaker turns: words of 0.3 s separated by 0.1 s, 0.5 s pause between turns.
  const double duration = static_cast<double>(o.frames) / o.fps;
  ordered_json words = ordered_json::array();
  std::ostringstream llm;
  int turn = 0;
  std::size_t word_index = 0;
  double t = 0.5;
  while (t + 0.4 < duration) {
    const int speaker = turn % o.actors;
    const double turn_end = std::min(duration - 0.05, t + o.turn_secs);
    std::string last_word;
    while (t + 0.3 <= turn_end) {
      const auto round = word_index / std::size(kWords);
      last_word = std::string(kWords[word_index % std::size(kWords)]) + (round > 0 ? std::to_string(round) : "");
      words.push_back({{"text", last_word}, {"start_s", t}, {"end_s", t + 0.3}, {"speaker", actor_name(speaker)}});
      ++word_index;
      t += 0.4;
    }
    if (last_word.empty()) break;
    std::string shot = actor_name(speaker);
    if (o.group_turns && o.actors > 1 && turn % 3 == 2) {
      shot = "(" + actor_name(speaker) + " and " + actor_name((speaker + 1) % o.actors) + ")";
    }
    llm << (turn + 1) << ". Shot: " << shot << ", Cut: " << last_word << "\n";
    ++turn;
    t += 0.5;
  }
  write_file(dir / "transcript.json", words.dump(1));
  if (o.llm_cache) write_file(dir / "llm_response.txt", llm.str());

  if (o.saliency_scores) {
    std::ostringstream csv;
    csv << "frame,actor_id,score\n";
    for (std::int64_t f = 0; f < o.frames; ++f) {
      for (int a = 0; a < o.actors; ++a) {
        const double s = 0.5 + 0.4 * std::sin(0.02 * static_cast<double>(f) + a * 1.7);
        csv << f << "," << actor_name(a) << "," << s << "\n";
      }
    }
    write_file(dir / "saliency_scores.csv", csv.str());
  }
}

DpInstance random_instance(std::mt19937_64& rng, int shots, int frames, int fps) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  DpInstance inst;
  inst.unary = Grid(static_cast<size_t>(frames), static_cast<size_t>(shots), 0.0);
  for (int t = 0; t < frames; ++t) {
    for (int s = 0; s < shots; ++s) {
      inst.unary(static_cast<size_t>(t), static_cast<size_t>(s)) = u01(rng) < 0.1 ? 0.0 : u01(rng) * 3.0;
    }
  }

  std::vector<std::vector<Rect>> rects(static_cast<size_t>(shots));
  std::vector<std::vector<char>> poor(static_cast<size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    for (int t = 0; t < frames; ++t) {
      rects[static_cast<size_t>(s)].push_back(
          Rect{20.0 + 60.0 * u01(rng), 20.0 + 60.0 * u01(rng), 10.0 + 50.0 * u01(rng), 1.0});
      poor[static_cast<size_t>(s)].push_back(u01(rng) < 0.15 ? 1 : 0);
    }
  }
  inst.ctx = PenaltyContext(std::move(rects), std::move(poor), FrameRate{fps, 1});

  auto& p = inst.params;
  const double pick = u01(rng);
  p.lambda_trans = pick < 0.2 ? 0.0 : 3.0 * u01(rng);
  p.lambda_mis = u01(rng) < 0.3 ? 0.0 : 2.0 * u01(rng);
  p.alpha = 0.05 + 0.2 * u01(rng);
  p.beta = p.alpha + 0.05 + 0.4 * u01(rng);
  p.mu = u01(rng) < 0.3 ? 0.0 : 2.0 * u01(rng);
  p.nu = u01(rng) < 0.5 ? 1e6 : 5.0 + 10.0 * u01(rng);
  p.l = 0.2 + 0.6 * u01(rng);
  p.m = p.l + 0.2 + 1.0 * u01(rng);
  p.gamma1 = u01(rng) < 0.2 ? 0.0 : 5.0 * u01(rng);
  p.gamma2 = u01(rng) < 0.2 ? 0.0 : 5.0 * u01(rng);
  return inst;
}

OracleResult brute_force(const Grid& unary, const PenaltyContext& ctx, const EditParams& params,
                         const std::vector<int>& forced) {
  const int frames = static_cast<int>(unary.rows());
  const int shots = static_cast<int>(unary.cols());
  std::vector<int> seq(static_cast<size_t>(frames), 0);
  auto fits = [&](int t, int s) { return forced.empty() || forced[static_cast<size_t>(t)] < 0 || forced[static_cast<size_t>(t)] == s; };
  for (int t = 0; t < frames; ++t) {
    while (!fits(t, seq[static_cast<size_t>(t)])) ++seq[static_cast<size_t>(t)];
  }

  OracleResult best;
  best.energy = std::numeric_limits<double>::infinity();
  while (true) {
    const double e = evaluate_edit_cost(seq, unary, ctx, params);
    if (e < best.energy - 1e-9) {
      best.energy = e;
      best.shots = seq;
      best.ties = 1;
    } else if (std::abs(e - best.energy) <= 1e-9) {
      ++best.ties;
    }
    // Odometer increment over allowed shots, last frame fastest.
    int t = frames - 1;
    for (; t >= 0; --t) {
      auto& v = seq[static_cast<size_t>(t)];
      do {
        ++v;
      } while (v < shots && !fits(t, v));
      if (v < shots) break;
      v = 0;
      while (!fits(t, v)) ++v;
    }
    if (t < 0) break;
  }
  return best;
}

}  // namespace fixtures
