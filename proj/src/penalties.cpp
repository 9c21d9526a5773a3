#include "autoedit/penalties.hpp"

#include <cmath>

#include "autoedit/error.hpp"

namespace autoedit {

double overlap_penalty(double gamma, const EditParams& params) {
  if (gamma <= params.alpha) return 0.0;
  if (gamma <= params.beta) return params.mu * gamma / params.alpha;
  return params.nu;
}

double overlap_penalty(int prev, int next, const Rect& prev_rect, const Rect& next_rect, const EditParams& params) {
  if (prev == next) return 0.0;
  return overlap_penalty(iou(prev_rect, next_rect), params);
}

bool poorly_framed(const ShotId& shot, const Rect& crop, const std::vector<ActorTrack>& tracks, std::size_t t,
                   double theta_mis) {
  if (shot.is_master()) return false;
  const Box window = to_box(crop);
  for (std::size_t a = 0; a < tracks.size(); ++a) {
    if (shot.contains(static_cast<ActorIndex>(a))) continue;
    const auto& box = tracks[a].boxes[t];
    if (!box || box->area() <= 0.0) continue;
    if (intersection_area(*box, window) / box->area() > theta_mis) return true;
  }
  return false;
}

double misframing_penalty(const ShotId& shot, const Rect& crop, const std::vector<ActorTrack>& tracks, std::size_t t,
                          const EditParams& params) {
  return poorly_framed(shot, crop, tracks, t, params.theta_mis) ? params.lambda_mis : 0.0;
}

double rhythm_cut(double tau_s, const EditParams& params) {
  return params.gamma1 * (1.0 - 1.0 / (1.0 + std::exp(params.l - tau_s)));
}

double rhythm_hold(double tau_s, const EditParams& params) {
  return params.gamma2 * (1.0 - 1.0 / (1.0 + std::exp(-params.m + tau_s)));
}

double rhythm_penalty(int curr, int prev, double tau_s, const EditParams& params) {
  return curr != prev ? rhythm_cut(tau_s, params) : rhythm_hold(tau_s, params);
}

double transition_penalty(int prev, int next, const EditParams& params) {
  return prev == next ? 0.0 : params.lambda_trans;
}

PenaltyContext::PenaltyContext(std::vector<std::vector<Rect>> rects, std::vector<std::vector<char>> poor, FrameRate fps)
    : rects_(std::move(rects)), poor_(std::move(poor)), fps_(fps) {
  if (rects_.size() != poor_.size()) {
    throw Error(ErrorKind::Validation, "penalties", "rect and framing tables cover different shot counts");
  }
  for (std::size_t s = 0; s < rects_.size(); ++s) {
    if (rects_[s].size() != frames() || poor_[s].size() != frames()) {
      throw Error(ErrorKind::Validation, "penalties", "penalty context lookups must cover every (shot, frame)");
    }
  }
}

PenaltyContext PenaltyContext::from_rushes(const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                                           const std::vector<ActorTrack>& tracks, const SceneMeta& meta,
                                           double theta_mis) {
  if (static_cast<int>(rushes.size()) != lattice.size()) {
    throw Error(ErrorKind::Validation, "penalties", "one rush trajectory per shot is required");
  }
  std::vector<std::vector<Rect>> rects;
  std::vector<std::vector<char>> poor;
  rects.reserve(rushes.size());
  poor.reserve(rushes.size());
  for (int s = 0; s < lattice.size(); ++s) {
    const auto& rush = rushes[static_cast<size_t>(s)];
    std::vector<char> flags(rush.series.size(), 0);
    for (std::size_t t = 0; t < rush.series.size(); ++t) {
      flags[t] = poorly_framed(lattice[s], rush.series[t], tracks, t, theta_mis) ? 1 : 0;
    }
    rects.push_back(rush.series);
    poor.push_back(std::move(flags));
  }
  return PenaltyContext(std::move(rects), std::move(poor), meta.fps);
}

double PenaltyContext::overlap(int prev, int next, std::size_t t, const EditParams& params) const {
  if (prev == next) return 0.0;
  return overlap_penalty(iou(rect_of(prev, t), rect_of(next, t)), params);
}

}  // namespace autoedit
