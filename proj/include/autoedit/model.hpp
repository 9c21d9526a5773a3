#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace autoedit {

/// Exact frame rate, e.g. 25/1 or 30000/1001.
struct FrameRate {
  std::int64_t num = 25;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const FrameRate&) const = default;
};

/// Parses "25", "29.97" or "30000/1001".
FrameRate parse_frame_rate(std::string_view text);

enum class SceneKind { Quiz, Theatre };

const char* to_string(SceneKind kind);
SceneKind parse_scene_kind(std::string_view text);

/// Index of an actor in SceneMeta::actor_ids. Canonical actor order is index order.
using ActorIndex = int;

/// Bitmask over actor indices; bit i set means actor i is included.
using ActorMask = std::uint32_t;

struct SceneMeta {
  std::string project_id;
  std::int64_t frame_count = 0;
  FrameRate fps;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<std::string> actor_ids;
  // Lower-cased alias -> actor set. Actor ids themselves are resolved separately.
  std::map<std::string, ActorMask> actor_aliases;
  SceneKind scene_kind = SceneKind::Theatre;
  // Quiz host for the prompt's scene description; defaults to the first actor.
  std::optional<ActorIndex> quizmaster;

  int actor_count() const { return static_cast<int>(actor_ids.size()); }
  double duration_s() const { return static_cast<double>(frame_count) / fps.value(); }
  std::optional<ActorIndex> find_actor(std::string_view id) const;

  /// Throws Error(Validation) if an invariant does not hold.
  void validate() const;
};

enum class ShotKind : std::uint8_t { Subset, Master };

/// A rush identity: either the master frame or a non-empty actor subset.
struct ShotId {
  ShotKind kind = ShotKind::Master;
  ActorMask actors = 0;

  static ShotId master() { return {ShotKind::Master, 0}; }
  static ShotId subset(ActorMask mask) { return {ShotKind::Subset, mask}; }
  static ShotId single(ActorIndex actor) { return subset(ActorMask{1} << actor); }

  bool is_master() const { return kind == ShotKind::Master; }
  bool contains(ActorIndex actor) const { return (actors >> actor) & 1u; }
  int actor_count() const;

  bool operator==(const ShotId&) const = default;
};

/// Number of actors framed by the shot; MASTER counts as the n-actor shot.
int shot_order(const ShotId& shot, const SceneMeta& meta);

/// "MASTER" or actor ids joined by '+', in canonical actor order.
std::string shot_label(const ShotId& shot, const SceneMeta& meta);

inline constexpr int kDefaultMaxActors = 8;
inline constexpr int kHardMaxActors = 16;

/// All 2^n - 1 actor subsets ordered by size then lexicographically by actor
/// index, followed by MASTER.
std::vector<ShotId> enumerate_shots(const SceneMeta& meta, int max_actors = kDefaultMaxActors);

/// Canonical shot list with constant-time lookup from actor mask to index.
class ShotLattice {
 public:
  ShotLattice() = default;
  explicit ShotLattice(const SceneMeta& meta, int max_actors = kDefaultMaxActors);

  const std::vector<ShotId>& shots() const { return shots_; }
  int size() const { return static_cast<int>(shots_.size()); }
  const ShotId& operator[](int index) const { return shots_[static_cast<size_t>(index)]; }
  int actor_count() const { return actor_count_; }

  int index_of(const ShotId& shot) const;
  int master_index() const { return size() - 1; }
  int single_index(ActorIndex actor) const { return index_of(ShotId::single(actor)); }
  int full_index() const;  // the n-actor subset

 private:
  int actor_count_ = 0;
  std::vector<ShotId> shots_;
  std::vector<int> by_mask_;
};

/// Crop window. Width is slaved to height through the aspect ratio.
struct Rect {
  double cx = 0.0;
  double cy = 0.0;
  double h = 0.0;
  double aspect = 16.0 / 9.0;

  double w() const { return aspect * h; }
  double left() const { return cx - 0.5 * w(); }
  double top() const { return cy - 0.5 * h; }
  double right() const { return cx + 0.5 * w(); }
  double bottom() const { return cy + 0.5 * h; }
  double area() const { return w() * h; }

  bool operator==(const Rect&) const = default;
};

/// Axis-aligned box given by its top-left corner and size, in pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return w * h; }

  bool operator==(const Box&) const = default;
};

double intersection_area(const Box& a, const Box& b);
double iou(const Rect& a, const Rect& b);
Box to_box(const Rect& r);

/// Shrinks h until the rect fits, then shifts the center inside the frame.
/// The aspect ratio is never altered.
Rect clamp_to_frame(Rect r, double frame_width, double frame_height);

/// Full frame rect, with the aspect of the frame itself.
Rect full_frame_rect(const SceneMeta& meta);

enum class DpMode { Fast, Exact };

const char* to_string(DpMode mode);
DpMode parse_dp_mode(std::string_view text);

struct EditParams {
  // Potential weights.
  double lambda_c = 1.0;
  double lambda_sal = 1.0;
  double lambda_sp = 1.0;
  // Penalty weights.
  double lambda_mis = 20.0;
  double lambda_trans = 5.0;
  // Overlap penalty.
  double alpha = 0.15;
  double beta = 0.3;
  double mu = 50.0;
  double nu = 1e6;
  // Rhythm penalty, durations in seconds.
  double l = 1.0;
  double m = 7.0;
  double gamma1 = 100.0;
  double gamma2 = 10.0;
  // Saliency threshold as a fraction of the per-frame maximum.
  double tau_sal = 0.3;
  double epsilon_u = 1e-6;
  double establish_secs = 2.0;
  // Virtual camera smoothing.
  double lambda_vel = 10.0;
  double lambda_jerk = 3000.0;
  DpMode dp_mode = DpMode::Fast;
  // Duration cap for EXACT mode, in frames. 0 uses the horizon past which the
  // rhythm terms stop changing, so EXACT stays exact.
  std::int64_t d_max = 0;

  // Misframing threshold: fraction of an outside actor's box inside the crop.
  double theta_mis = 0.15;
  double aspect = 16.0 / 9.0;
  // Speaker baseline falls back to the wide shot after this much silence.
  double silence_wide_secs = 10.0;

  std::int64_t effective_d_max(const FrameRate& fps) const;

  /// Throws Error(Validation) naming the first violated invariant.
  void validate() const;

  bool operator==(const EditParams&) const = default;
};

void to_json(nlohmann::json& j, const EditParams& p);
/// Reads the keys present in `j` on top of `p`. Unknown keys and non-finite
/// or wrongly typed values are rejected. Does not validate invariants.
void merge_params(EditParams& p, const nlohmann::json& j);
EditParams params_from_json(const nlohmann::json& j);

}  // namespace autoedit
