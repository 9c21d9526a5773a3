#pragma once

#include <span>
#include <vector>

#include "autoedit/error.hpp"
#include "autoedit/ingest.hpp"
#include "autoedit/model.hpp"

namespace autoedit {

/// Framing constants for per-frame shot estimation.
struct FramingRules {
  double medium_padding = 0.20;   // total vertical padding around head..waist
  double group_padding = 0.10;    // padding around the union of full boxes
  double waist_fraction = 0.55;   // waist below box top, as a fraction of box height
  double head_above_nose = 0.8;   // head top above the nose, in nose-to-shoulder units
};

/// Crop for `shot` at frame t. Tracks must be gap-filled.
Rect frame_shot(const ShotId& shot, const std::vector<ActorTrack>& tracks, const SceneMeta& meta,
                std::size_t t, double aspect, const FramingRules& rules = {});

struct RawFraming {
  ShotId shot;
  std::vector<Rect> series;
};

RawFraming raw_framing(const ShotId& shot, const std::vector<ActorTrack>& tracks, const SceneMeta& meta,
                       double aspect, const FramingRules& rules = {});

struct SolverReport {
  int iterations = 0;
  double objective = 0.0;       // summed over cx, cy, h after projection
  double raw_objective = 0.0;   // objective of the unsmoothed series
  bool converged = true;
};

struct RushTrajectory {
  ShotId shot;
  std::vector<Rect> series;
  SolverReport report;
};

struct SmootherOptions {
  int max_iterations = 5000;
  double rel_tolerance = 1e-6;
  bool record_history = false;
};

/// Result of one scalar smoothing problem.
struct SmoothResult {
  std::vector<double> values;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  std::vector<double> history;  // objective of the kept iterate, per iteration
};

/// sum_t (f_t - raw_t)^2 + w_vel * sum |f_{t+1} - f_t| + w_jerk * sum |third difference of f|
double smoothing_objective(std::span<const double> values, std::span<const double> raw, double w_vel,
                           double w_jerk);

/// Minimizes smoothing_objective with a log-barrier interior-point method. The kept
/// iterate only changes when the objective strictly decreases, so history is
/// non-increasing and the result never scores worse than `raw` itself.
SmoothResult smooth_series(std::span<const double> raw, double w_vel, double w_jerk,
                           const SmootherOptions& options = {});

/// Smooths cx, cy and h independently, then projects each frame inside the
/// master frame. Falls back to the raw series (with a warning) if projection
/// would make the objective worse than the raw one.
RushTrajectory smooth_trajectory(const RawFraming& raw, const SceneMeta& meta, const EditParams& params,
                                 const SmootherOptions& options = {}, Diagnostics* diag = nullptr);

/// One trajectory per shot of the lattice, smoothed in parallel.
std::vector<RushTrajectory> generate_rushes(const std::vector<ShotId>& shots, const std::vector<ActorTrack>& tracks,
                                            const SceneMeta& meta, const EditParams& params,
                                            Diagnostics* diag = nullptr);

}  // namespace autoedit
