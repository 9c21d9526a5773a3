#include "autoedit/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "autoedit/error.hpp"

namespace autoedit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Config: return "config";
    case ErrorKind::Llm: return "llm";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Range: return "range";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

namespace {

[[noreturn]] void invalid(const std::string& stage, const std::string& message) {
  throw Error(ErrorKind::Validation, stage, message);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

FrameRate parse_frame_rate(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      invalid("model", "invalid frame rate '" + std::string(text) + "'");
    }
    return v;
  };

  FrameRate fps;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    fps = {parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
  } else if (text.find('.') != std::string_view::npos) {
    double v = 0.0;
    try {
      v = std::stod(std::string(text));
    } catch (const std::exception&) {
      invalid("model", "invalid frame rate '" + std::string(text) + "'");
    }
    // Decimal rates are kept to three places, 29.97 -> 29970/1000.
    fps = {static_cast<std::int64_t>(std::llround(v * 1000.0)), 1000};
  } else {
    fps = {parse_int(text), 1};
  }
  if (fps.num <= 0 || fps.den <= 0) {
    invalid("model", "frame rate must be positive, got '" + std::string(text) + "'");
  }
  return fps;
}

const char* to_string(SceneKind kind) {
  return kind == SceneKind::Quiz ? "quiz" : "theatre";
}

SceneKind parse_scene_kind(std::string_view text) {
  const auto s = lower(text);
  if (s == "quiz") return SceneKind::Quiz;
  if (s == "theatre" || s == "theater") return SceneKind::Theatre;
  invalid("model", "unknown scene kind '" + std::string(text) + "' (expected quiz or theatre)");
}

std::optional<ActorIndex> SceneMeta::find_actor(std::string_view id) const {
  for (size_t i = 0; i < actor_ids.size(); ++i) {
    if (actor_ids[i] == id) return static_cast<ActorIndex>(i);
  }
  return std::nullopt;
}

void SceneMeta::validate() const {
  if (frame_count < 1) invalid("model", "frame_count must be >= 1");
  if (fps.num <= 0 || fps.den <= 0) invalid("model", "fps must be positive");
  if (frame_width <= 0 || frame_height <= 0) invalid("model", "frame dimensions must be positive");
  if (actor_ids.empty()) invalid("model", "actor_ids must not be empty");
  std::set<std::string> seen;
  for (const auto& id : actor_ids) {
    if (id.empty()) invalid("model", "actor ids must be non-empty strings");
    if (!seen.insert(id).second) invalid("model", "duplicate actor id '" + id + "'");
  }
  const ActorMask all = actor_count() >= 32 ? ~ActorMask{0}
                                            : (ActorMask{1} << actor_count()) - 1;
  for (const auto& [alias, mask] : actor_aliases) {
    if (mask == 0 || (mask & ~all) != 0) {
      invalid("model", "alias '" + alias + "' must map to a non-empty subset of actor_ids");
    }
  }
  if (quizmaster && (*quizmaster < 0 || *quizmaster >= actor_count())) {
    invalid("model", "quizmaster is not a known actor");
  }
}

int ShotId::actor_count() const { return std::popcount(actors); }

int shot_order(const ShotId& shot, const SceneMeta& meta) {
  return shot.is_master() ? meta.actor_count() : shot.actor_count();
}

std::string shot_label(const ShotId& shot, const SceneMeta& meta) {
  if (shot.is_master()) return "MASTER";
  std::string label;
  for (int i = 0; i < meta.actor_count(); ++i) {
    if (!shot.contains(i)) continue;
    if (!label.empty()) label += '+';
    label += meta.actor_ids[static_cast<size_t>(i)];
  }
  return label;
}

std::vector<ShotId> enumerate_shots(const SceneMeta& meta, int max_actors) {
  const int n = meta.actor_count();
  max_actors = std::min(max_actors, kHardMaxActors);
  if (n < 1) invalid("model", "at least one actor is required");
  if (n > max_actors) {
    throw Error(ErrorKind::Capacity, "model",
                std::to_string(n) + " actors exceeds the shot lattice limit of " +
                    std::to_string(max_actors));
  }

  std::vector<ActorMask> masks;
  masks.reserve((size_t{1} << n) - 1);
  for (ActorMask mask = 1; mask < (ActorMask{1} << n); ++mask) masks.push_back(mask);

  // Lexicographic order over ascending actor index lists.
  auto members = [](ActorMask mask) {
    std::vector<int> out;
    for (int i = 0; mask; ++i, mask >>= 1) {
      if (mask & 1u) out.push_back(i);
    }
    return out;
  };
  std::sort(masks.begin(), masks.end(), [&](ActorMask a, ActorMask b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return members(a) < members(b);
  });

  std::vector<ShotId> shots;
  shots.reserve(masks.size() + 1);
  for (auto mask : masks) shots.push_back(ShotId::subset(mask));
  shots.push_back(ShotId::master());
  return shots;
}

ShotLattice::ShotLattice(const SceneMeta& meta, int max_actors)
    : actor_count_(meta.actor_count()), shots_(enumerate_shots(meta, max_actors)) {
  by_mask_.assign(size_t{1} << actor_count_, -1);
  for (int i = 0; i < size(); ++i) {
    if (!shots_[static_cast<size_t>(i)].is_master()) {
      by_mask_[shots_[static_cast<size_t>(i)].actors] = i;
    }
  }
}

int ShotLattice::index_of(const ShotId& shot) const {
  if (shot.is_master()) return master_index();
  if (shot.actors == 0 || shot.actors >= by_mask_.size()) return -1;
  return by_mask_[shot.actors];
}

int ShotLattice::full_index() const {
  return by_mask_[(ActorMask{1} << actor_count_) - 1];
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double h = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

Box to_box(const Rect& r) { return {r.left(), r.top(), r.w(), r.h}; }

double iou(const Rect& a, const Rect& b) {
  const double inter = intersection_area(to_box(a), to_box(b));
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Rect clamp_to_frame(Rect r, double frame_width, double frame_height) {
  r.h = std::min({r.h, frame_height, frame_width / r.aspect});
  const double half_w = 0.5 * r.w();
  const double half_h = 0.5 * r.h;
  r.cx = std::clamp(r.cx, half_w, frame_width - half_w);
  r.cy = std::clamp(r.cy, half_h, frame_height - half_h);
  return r;
}

Rect full_frame_rect(const SceneMeta& meta) {
  const double w = meta.frame_width;
  const double h = meta.frame_height;
  return {0.5 * w, 0.5 * h, h, w / h};
}

const char* to_string(DpMode mode) { return mode == DpMode::Fast ? "fast" : "exact"; }

DpMode parse_dp_mode(std::string_view text) {
  const auto s = lower(text);
  if (s == "fast") return DpMode::Fast;
  if (s == "exact") return DpMode::Exact;
  invalid("params", "unknown dp_mode '" + std::string(text) + "' (expected fast or exact)");
}

std::int64_t EditParams::effective_d_max(const FrameRate& fps) const {
  if (d_max > 0) return d_max;
  // Past max(l, m) + 40 s both rhythm sigmoids round to their limits, so longer runs cost the same.
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((std::max(l, m) + 40.0) * fps.value())));
}

void EditParams::validate() const {
  const std::pair<const char*, double> non_negative[] = {
      {"lambda_c", lambda_c},       {"lambda_sal", lambda_sal}, {"lambda_sp", lambda_sp},
      {"lambda_mis", lambda_mis},   {"lambda_trans", lambda_trans},
      {"mu", mu},                   {"nu", nu},
      {"gamma1", gamma1},           {"gamma2", gamma2},
      {"lambda_vel", lambda_vel},   {"lambda_jerk", lambda_jerk},
      {"establish_secs", establish_secs}, {"l", l}, {"m", m},
      {"silence_wide_secs", silence_wide_secs},
  };
  for (const auto& [name, value] : non_negative) {
    if (!std::isfinite(value)) invalid("params", std::string(name) + " must be finite");
    if (value < 0.0) invalid("params", std::string(name) + " must be >= 0");
  }
  if (!(0.0 <= alpha && alpha < beta && beta <= 1.0)) {
    invalid("params", "overlap thresholds must satisfy 0 <= alpha < beta <= 1");
  }
  if (alpha == 0.0 && mu > 0.0) {
    // mu * gamma / alpha is undefined; the middle branch would divide by zero.
    invalid("params", "alpha must be > 0 when mu > 0");
  }
  if (!(epsilon_u > 0.0) || !std::isfinite(epsilon_u)) invalid("params", "epsilon_u must be > 0");
  if (!(l < m)) invalid("params", "rhythm durations must satisfy l < m");
  if (!(0.0 <= tau_sal && tau_sal <= 1.0)) invalid("params", "tau_sal must lie in [0, 1]");
  if (!(0.0 <= theta_mis && theta_mis <= 1.0)) invalid("params", "theta_mis must lie in [0, 1]");
  if (!(aspect > 0.0) || !std::isfinite(aspect)) invalid("params", "aspect must be > 0");
  if (d_max < 0) invalid("params", "d_max must be >= 0");
}

namespace {

// Single table of numeric fields keeps to_json and merge_params in sync.
template <typename Fn>
void for_each_real(EditParams& p, Fn&& fn) {
  fn("lambda_c", p.lambda_c);
  fn("lambda_sal", p.lambda_sal);
  fn("lambda_sp", p.lambda_sp);
  fn("lambda_mis", p.lambda_mis);
  fn("lambda_trans", p.lambda_trans);
  fn("alpha", p.alpha);
  fn("beta", p.beta);
  fn("mu", p.mu);
  fn("nu", p.nu);
  fn("l", p.l);
  fn("m", p.m);
  fn("gamma1", p.gamma1);
  fn("gamma2", p.gamma2);
  fn("tau_sal", p.tau_sal);
  fn("epsilon_u", p.epsilon_u);
  fn("establish_secs", p.establish_secs);
  fn("lambda_vel", p.lambda_vel);
  fn("lambda_jerk", p.lambda_jerk);
  fn("theta_mis", p.theta_mis);
  fn("aspect", p.aspect);
  fn("silence_wide_secs", p.silence_wide_secs);
}

}  // namespace

void to_json(nlohmann::json& j, const EditParams& p) {
  j = nlohmann::json::object();
  auto copy = p;
  for_each_real(copy, [&](const char* key, double& value) { j[key] = value; });
  j["dp_mode"] = to_string(p.dp_mode);
  j["d_max"] = p.d_max;
}

void merge_params(EditParams& p, const nlohmann::json& j) {
  if (!j.is_object()) invalid("params", "parameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "dp_mode") {
      if (!value.is_string()) invalid("params", "dp_mode must be a string");
      p.dp_mode = parse_dp_mode(value.get<std::string>());
      continue;
    }
    if (key == "d_max") {
      if (!value.is_number_integer()) invalid("params", "d_max must be an integer");
      p.d_max = value.get<std::int64_t>();
      continue;
    }
    bool known = false;
    for_each_real(p, [&](const char* name, double& field) {
      if (key != name) return;
      known = true;
      if (!value.is_number()) invalid("params", key + " must be a number");
      const double v = value.get<double>();
      if (!std::isfinite(v)) invalid("params", key + " must be finite");
      field = v;
    });
    if (!known) invalid("params", "unknown parameter '" + key + "'");
  }
}

EditParams params_from_json(const nlohmann::json& j) {
  EditParams p;
  merge_params(p, j);
  return p;
}

}  // namespace autoedit
