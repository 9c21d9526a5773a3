#pragma once

#include <vector>

#include "autoedit/ingest.hpp"
#include "autoedit/model.hpp"
#include "autoedit/rushes.hpp"

namespace autoedit {

/// Overlap penalty for an overlap ratio gamma (IoU) at a cut:
/// 0 up to alpha, mu * gamma / alpha up to beta, nu above.
double overlap_penalty(double gamma, const EditParams& params);

/// 0 when prev == next; otherwise the ratio-based penalty on the IoU of the
/// two crops at the cut frame.
double overlap_penalty(int prev, int next, const Rect& prev_rect, const Rect& next_rect, const EditParams& params);

/// True when some actor outside the shot has more than theta_mis of its box
/// area inside the crop. MASTER is never poorly framed.
bool poorly_framed(const ShotId& shot, const Rect& crop, const std::vector<ActorTrack>& tracks, std::size_t t,
                   double theta_mis);

double misframing_penalty(const ShotId& shot, const Rect& crop, const std::vector<ActorTrack>& tracks, std::size_t t,
                          const EditParams& params);

/// Logistic rhythm penalty. A cut (curr != prev) is penalised while the shot
/// being left has been held for less than l seconds; a hold is penalised once
/// the current shot runs past m seconds.
double rhythm_penalty(int curr, int prev, double tau_s, const EditParams& params);
double rhythm_cut(double tau_s, const EditParams& params);
double rhythm_hold(double tau_s, const EditParams& params);

double transition_penalty(int prev, int next, const EditParams& params);

/// Geometry lookups for the pairwise and framing terms of the edit energy.
class PenaltyContext {
 public:
  PenaltyContext() = default;

  /// rects[shot][frame]; poor[shot][frame] marks misframed crops.
  PenaltyContext(std::vector<std::vector<Rect>> rects, std::vector<std::vector<char>> poor, FrameRate fps);

  static PenaltyContext from_rushes(const ShotLattice& lattice, const std::vector<RushTrajectory>& rushes,
                                    const std::vector<ActorTrack>& tracks, const SceneMeta& meta, double theta_mis);

  std::size_t shots() const { return rects_.size(); }
  std::size_t frames() const { return rects_.empty() ? 0 : rects_.front().size(); }
  double fps() const { return fps_.value(); }
  const FrameRate& frame_rate() const { return fps_; }

  const Rect& rect_of(int shot, std::size_t t) const { return rects_[static_cast<size_t>(shot)][t]; }
  bool poor(int shot, std::size_t t) const { return poor_[static_cast<size_t>(shot)][t] != 0; }

  double overlap(int prev, int next, std::size_t t, const EditParams& params) const;
  double misframing(int shot, std::size_t t, const EditParams& params) const {
    return poor(shot, t) ? params.lambda_mis : 0.0;
  }

 private:
  std::vector<std::vector<Rect>> rects_;
  std::vector<std::vector<char>> poor_;
  FrameRate fps_;
};

}  // namespace autoedit
