#include "autoedit/rushes.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "autoedit/parallel.hpp"

namespace autoedit {

namespace {

double box_top_head(const Box& box, const std::optional<Keypoints>& kp, const FramingRules& rules) {
  if (!kp || !kp->nose || !(kp->left_shoulder || kp->right_shoulder)) return box.y;
  double shoulder_y = 0.0;
  int count = 0;
  for (const auto& s : {kp->left_shoulder, kp->right_shoulder}) {
    if (s) {
      shoulder_y += s->y;
      ++count;
    }
  }
  shoulder_y /= count;
  const double neck = shoulder_y - kp->nose->y;
  if (neck <= 0.0) return box.y;
  return std::clamp(kp->nose->y - rules.head_above_nose * neck, box.y, box.y + box.h);
}

double box_waist(const Box& box, const std::optional<Keypoints>& kp, const FramingRules& rules) {
  if (kp && (kp->left_hip || kp->right_hip)) {
    double y = 0.0;
    int count = 0;
    for (const auto& h : {kp->left_hip, kp->right_hip}) {
      if (h) {
        y += h->y;
        ++count;
      }
    }
    return y / count;
  }
  return box.y + rules.waist_fraction * box.h;
}

}  // namespace

Rect frame_shot(const ShotId& shot, const std::vector<ActorTrack>& tracks, const SceneMeta& meta, std::size_t t,
                double aspect, const FramingRules& rules) {
  if (shot.is_master()) return full_frame_rect(meta);

  Rect rect;
  rect.aspect = aspect;
  if (shot.actor_count() == 1) {
    const int actor = std::countr_zero(shot.actors);
    const auto& track = tracks[static_cast<size_t>(actor)];
    const Box& box = *track.boxes[t];
    const std::optional<Keypoints> kp =
        track.keypoints.size() == track.boxes.size() ? track.keypoints[t] : std::nullopt;

    double top = box_top_head(box, kp, rules);
    double waist = box_waist(box, kp, rules);
    if (waist <= top) {
      top = box.y;
      waist = box.y + rules.waist_fraction * box.h;
    }
    rect.cx = box.cx();
    rect.cy = 0.5 * (top + waist);
    rect.h = (waist - top) * (1.0 + rules.medium_padding);
  } else {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (int a = 0; a < meta.actor_count(); ++a) {
      if (!shot.contains(a)) continue;
      const Box& box = *tracks[static_cast<size_t>(a)].boxes[t];
      x0 = std::min(x0, box.x);
      y0 = std::min(y0, box.y);
      x1 = std::max(x1, box.x + box.w);
      y1 = std::max(y1, box.y + box.h);
    }
    const double w = (x1 - x0) * (1.0 + rules.group_padding);
    const double h = (y1 - y0) * (1.0 + rules.group_padding);
    rect.cx = 0.5 * (x0 + x1);
    rect.cy = 0.5 * (y0 + y1);
    rect.h = std::max(h, w / aspect);
  }
  return clamp_to_frame(rect, meta.frame_width, meta.frame_height);
}

RawFraming raw_framing(const ShotId& shot, const std::vector<ActorTrack>& tracks, const SceneMeta& meta,
                       double aspect, const FramingRules& rules) {
  RawFraming raw{shot, {}};
  raw.series.reserve(static_cast<size_t>(meta.frame_count));
  for (std::size_t t = 0; t < static_cast<size_t>(meta.frame_count); ++t) {
    raw.series.push_back(frame_shot(shot, tracks, meta, t, aspect, rules));
  }
  return raw;
}

namespace {

/// Cholesky factor of a symmetric positive definite band matrix with half
/// bandwidth kBand, stored row-wise as L(i, i - k) for k in [0, kBand].
class BandCholesky {
 public:
  static constexpr int kBand = 3;

  BandCholesky(std::vector<std::array<double, kBand + 1>> lower) : l_(std::move(lower)) {
    const int n = static_cast<int>(l_.size());
    for (int i = 0; i < n; ++i) {
      for (int k = std::min(i, kBand); k >= 1; --k) {
        const int j = i - k;
        double s = l_[i][k];
        for (int m = k + 1; m <= std::min(i, kBand); ++m) {
          if (m - k <= kBand && j - (i - m) >= 0) s -= l_[i][m] * l_[j][m - k];
        }
        l_[i][k] = s / l_[j][0];
      }
      double d = l_[i][0];
      for (int k = 1; k <= std::min(i, kBand); ++k) d -= l_[i][k] * l_[i][k];
      l_[i][0] = std::sqrt(d);
    }
  }

  void solve(std::vector<double>& b) const {
    const int n = static_cast<int>(l_.size());
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int k = 1; k <= std::min(i, kBand); ++k) s -= l_[i][k] * b[i - k];
      b[i] = s / l_[i][0];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = b[i];
      for (int k = 1; k <= kBand && i + k < n; ++k) s -= l_[i + k][k] * b[i + k];
      b[i] = s / l_[i][0];
    }
  }

 private:
  std::vector<std::array<double, kBand + 1>> l_;
};

constexpr double kD3[4] = {-1.0, 3.0, -3.0, 1.0};

void diff1(std::span<const double> f, std::vector<double>& out) {
  out.resize(f.size() > 0 ? f.size() - 1 : 0);
  for (size_t i = 0; i + 1 < f.size(); ++i) out[i] = f[i + 1] - f[i];
}

void diff3(std::span<const double> f, std::vector<double>& out) {
  out.resize(f.size() > 3 ? f.size() - 3 : 0);
  for (size_t i = 0; i + 3 < f.size(); ++i) {
    out[i] = kD3[0] * f[i] + kD3[1] * f[i + 1] + kD3[2] * f[i + 2] + kD3[3] * f[i + 3];
  }
}

// out += scale * D1^T v
void add_diff1_t(const std::vector<double>& v, double scale, std::vector<double>& out) {
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] -= scale * v[i];
    out[i + 1] += scale * v[i];
  }
}

// out += scale * D3^T v
void add_diff3_t(const std::vector<double>& v, double scale, std::vector<double>& out) {
  for (size_t i = 0; i < v.size(); ++i) {
    for (size_t k = 0; k < 4; ++k) out[i + k] += scale * kD3[k] * v[i];
  }
}

// One L1 term w * |D f|_1, carried with slacks s >= |D f| for the barrier.
struct L1Block {
  int order = 1;
  double weight = 0.0;
  std::vector<double> g, s, dg, ds, gs, p, q;
};

void apply_diff(int order, std::span<const double> f, std::vector<double>& out) {
  if (order == 1) {
    diff1(f, out);
  } else {
    diff3(f, out);
  }
}

void add_diff_t(int order, const std::vector<double>& v, double scale, std::vector<double>& out) {
  if (order == 1) {
    add_diff1_t(v, scale, out);
  } else {
    add_diff3_t(v, scale, out);
  }
}

// lower += D^T diag(h) D
void add_normal(int order, const std::vector<double>& h, std::vector<std::array<double, BandCholesky::kBand + 1>>& lower) {
  const double d1[2] = {-1.0, 1.0};
  const double* stencil = order == 1 ? d1 : kD3;
  const size_t width = order == 1 ? 2 : 4;
  for (size_t r = 0; r < h.size(); ++r) {
    for (size_t a = 0; a < width; ++a) {
      for (size_t b = 0; b <= a; ++b) lower[r + a][a - b] += h[r] * stencil[a] * stencil[b];
    }
  }
}

double barrier_value(double t, std::span<const double> f, std::span<const double> raw, const std::vector<L1Block>& blocks,
                     const std::vector<std::vector<double>>& g, const std::vector<std::vector<double>>& s) {
  double fit = 0.0;
  for (size_t i = 0; i < f.size(); ++i) fit += (f[i] - raw[i]) * (f[i] - raw[i]);
  double value = t * fit;
  for (size_t k = 0; k < blocks.size(); ++k) {
    for (size_t i = 0; i < s[k].size(); ++i) {
      const double a = s[k][i] - g[k][i];
      const double b = s[k][i] + g[k][i];
      if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
      value += t * blocks[k].weight * s[k][i] - std::log(a) - std::log(b);
    }
  }
  return value;
}

}  // namespace

double smoothing_objective(std::span<const double> values, std::span<const double> raw, double w_vel,
                           double w_jerk) {
  double fit = 0.0;
  for (size_t i = 0; i < values.size(); ++i) fit += (values[i] - raw[i]) * (values[i] - raw[i]);
  double vel = 0.0;
  for (size_t i = 0; i + 1 < values.size(); ++i) vel += std::abs(values[i + 1] - values[i]);
  double jerk = 0.0;
  for (size_t i = 0; i + 3 < values.size(); ++i) {
    jerk += std::abs(kD3[0] * values[i] + kD3[1] * values[i + 1] + kD3[2] * values[i + 2] + kD3[3] * values[i + 3]);
  }
  return fit + w_vel * vel + w_jerk * jerk;
}

SmoothResult smooth_series(std::span<const double> raw, double w_vel, double w_jerk, const SmootherOptions& options) {
  SmoothResult result;
  result.values.assign(raw.begin(), raw.end());
  result.objective = smoothing_objective(raw, raw, w_vel, w_jerk);
  result.converged = true;
  const size_t n = raw.size();

  std::vector<L1Block> blocks;
  if (w_vel > 0.0 && n >= 2) blocks.push_back({1, w_vel, {}, {}, {}, {}, {}, {}, {}});
  if (w_jerk > 0.0 && n >= 4) blocks.push_back({3, w_jerk, {}, {}, {}, {}, {}, {}, {}});
  // Nothing to trade off, or the input already has no motion to penalize.
  if (blocks.empty() || result.objective == 0.0) return result;

  // Log barrier on s - Df > 0 and s + Df > 0, solved along the central path.
  std::vector<double> f(raw.begin(), raw.end());
  double constraints = 0.0;
  for (auto& blk : blocks) {
    apply_diff(blk.order, f, blk.g);
    blk.s.resize(blk.g.size());
    for (size_t i = 0; i < blk.g.size(); ++i) blk.s[i] = 1.1 * std::abs(blk.g[i]) + 1.0;
    constraints += 2.0 * static_cast<double>(blk.g.size());
  }

  double best = result.objective;
  double t = constraints / std::max(best, 1e-12);
  result.converged = false;
  int iterations = 0;
  constexpr int kMaxNewton = 100;
  constexpr double kGrowth = 8.0;

  std::vector<double> grad(n), coupled(n), step(n), trial_f(n);
  std::vector<std::vector<double>> trial_g(blocks.size()), trial_s(blocks.size()), cur_g(blocks.size()),
      cur_s(blocks.size());
  std::vector<std::array<double, BandCholesky::kBand + 1>> lower;

  while (iterations < options.max_iterations) {
    for (int newton = 0; newton < kMaxNewton && iterations < options.max_iterations; ++newton) {
      for (size_t i = 0; i < n; ++i) grad[i] = 2.0 * t * (f[i] - raw[i]);
      std::fill(coupled.begin(), coupled.end(), 0.0);
      lower.assign(n, {2.0 * t, 0.0, 0.0, 0.0});
      for (auto& blk : blocks) {
        const size_t m = blk.g.size();
        blk.gs.resize(m);
        blk.p.resize(m);
        blk.q.resize(m);
        std::vector<double> h(m), gg(m), slack(m);
        for (size_t i = 0; i < m; ++i) {
          const double ia = 1.0 / (blk.s[i] - blk.g[i]);
          const double ib = 1.0 / (blk.s[i] + blk.g[i]);
          gg[i] = ia - ib;
          blk.gs[i] = t * blk.weight - ia - ib;
          blk.p[i] = ia * ia + ib * ib;
          blk.q[i] = ib * ib - ia * ia;
          // Slack variables are eliminated through their 2x2 blocks.
          h[i] = 4.0 * ia * ia * ib * ib / blk.p[i];
          slack[i] = -blk.q[i] / blk.p[i] * blk.gs[i];
        }
        add_diff_t(blk.order, gg, 1.0, grad);
        add_diff_t(blk.order, slack, 1.0, coupled);
        add_normal(blk.order, h, lower);
      }
      for (size_t i = 0; i < n; ++i) step[i] = -(grad[i] + coupled[i]);
      BandCholesky(lower).solve(step);

      double decrement = 0.0;
      for (size_t i = 0; i < n; ++i) decrement -= grad[i] * step[i];
      for (auto& blk : blocks) {
        apply_diff(blk.order, step, blk.dg);
        blk.ds.resize(blk.g.size());
        for (size_t i = 0; i < blk.g.size(); ++i) {
          blk.ds[i] = -(blk.gs[i] + blk.q[i] * blk.dg[i]) / blk.p[i];
          decrement -= blk.gs[i] * blk.ds[i];
        }
      }
      if (decrement <= 2e-10) break;

      // Largest feasible step, then backtracking on the barrier function.
      double alpha = 1.0;
      for (const auto& blk : blocks) {
        for (size_t i = 0; i < blk.g.size(); ++i) {
          const double da = blk.ds[i] - blk.dg[i];
          const double db = blk.ds[i] + blk.dg[i];
          if (da < 0.0) alpha = std::min(alpha, -0.99 * (blk.s[i] - blk.g[i]) / da);
          if (db < 0.0) alpha = std::min(alpha, -0.99 * (blk.s[i] + blk.g[i]) / db);
        }
      }
      for (size_t k = 0; k < blocks.size(); ++k) {
        cur_g[k] = blocks[k].g;
        cur_s[k] = blocks[k].s;
      }
      const double current = barrier_value(t, f, raw, blocks, cur_g, cur_s);
      bool accepted = false;
      for (int tries = 0; tries < 60; ++tries, alpha *= 0.5) {
        for (size_t i = 0; i < n; ++i) trial_f[i] = f[i] + alpha * step[i];
        for (size_t k = 0; k < blocks.size(); ++k) {
          const auto& blk = blocks[k];
          trial_g[k].resize(blk.g.size());
          trial_s[k].resize(blk.g.size());
          for (size_t i = 0; i < blk.g.size(); ++i) {
            trial_g[k][i] = blk.g[i] + alpha * blk.dg[i];
            trial_s[k][i] = blk.s[i] + alpha * blk.ds[i];
          }
        }
        if (barrier_value(t, trial_f, raw, blocks, trial_g, trial_s) <= current - 0.01 * alpha * decrement) {
          accepted = true;
          break;
        }
      }
      ++iterations;
      if (!accepted) break;
      f.swap(trial_f);
      for (size_t k = 0; k < blocks.size(); ++k) {
        // Recompute D f directly so rounding does not accumulate.
        apply_diff(blocks[k].order, f, blocks[k].g);
        blocks[k].s.swap(trial_s[k]);
        for (size_t i = 0; i < blocks[k].g.size(); ++i) {
          const double floor = std::abs(blocks[k].g[i]) * (1.0 + 1e-12) + 1e-300;
          blocks[k].s[i] = std::max(blocks[k].s[i], floor);
        }
      }

      const double objective = smoothing_objective(f, raw, w_vel, w_jerk);
      if (objective < best) {
        best = objective;
        result.values = f;
      }
      if (options.record_history) result.history.push_back(best);
    }

    // The barrier problem at parameter t is within constraints / t of the optimum.
    if (constraints / t <= options.rel_tolerance * best) {
      result.converged = true;
      break;
    }
    t *= kGrowth;
  }
  result.iterations = iterations;
  result.objective = best;
  return result;
}

namespace {

double total_objective(const std::vector<Rect>& series, const std::vector<Rect>& raw, const EditParams& params) {
  const size_t n = series.size();
  std::vector<double> a(n), b(n);
  double total = 0.0;
  for (auto member : {&Rect::cx, &Rect::cy, &Rect::h}) {
    for (size_t t = 0; t < n; ++t) {
      a[t] = series[t].*member;
      b[t] = raw[t].*member;
    }
    total += smoothing_objective(a, b, params.lambda_vel, params.lambda_jerk);
  }
  return total;
}

}  // namespace

RushTrajectory smooth_trajectory(const RawFraming& raw, const SceneMeta& meta, const EditParams& params,
                                 const SmootherOptions& options, Diagnostics* diag) {
  RushTrajectory out{raw.shot, raw.series, {}};
  const size_t n = raw.series.size();
  out.report.raw_objective = total_objective(raw.series, raw.series, params);
  out.report.objective = out.report.raw_objective;
  if (n == 0) return out;

  std::vector<double> series(n);
  bool converged = true;
  int iterations = 0;
  for (auto member : {&Rect::cx, &Rect::cy, &Rect::h}) {
    for (size_t t = 0; t < n; ++t) series[t] = raw.series[t].*member;
    const auto result = smooth_series(series, params.lambda_vel, params.lambda_jerk, options);
    for (size_t t = 0; t < n; ++t) out.series[t].*member = result.values[t];
    converged = converged && result.converged;
    iterations = std::max(iterations, result.iterations);
  }
  for (auto& r : out.series) {
    r.h = std::max(r.h, 1.0);
    r = clamp_to_frame(r, meta.frame_width, meta.frame_height);
  }

  out.report.iterations = iterations;
  out.report.converged = converged;
  out.report.objective = total_objective(out.series, raw.series, params);
  if (out.report.objective > out.report.raw_objective) {
    if (diag) diag->warn("in-bounds projection worsened the smoothed path; keeping raw framing");
    out.series = raw.series;
    out.report.objective = out.report.raw_objective;
  }
  if (!converged && diag) {
    std::ostringstream ss;
    ss << "trajectory smoother hit the iteration cap (" << options.max_iterations << "); using best iterate";
    diag->warn(ss.str());
  }
  return out;
}

std::vector<RushTrajectory> generate_rushes(const std::vector<ShotId>& shots, const std::vector<ActorTrack>& tracks,
                                            const SceneMeta& meta, const EditParams& params, Diagnostics* diag) {
  std::vector<RushTrajectory> out(shots.size());
  std::vector<Diagnostics> local(shots.size());
  parallel_for(shots.size(), [&](size_t i) {
    const auto raw = raw_framing(shots[i], tracks, meta, params.aspect);
    out[i] = smooth_trajectory(raw, meta, params, {}, &local[i]);
  });
  if (diag) {
    for (size_t i = 0; i < shots.size(); ++i) {
      for (auto& w : local[i].warnings) diag->warn(shot_label(shots[i], meta) + ": " + w);
    }
  }
  return out;
}

}  // namespace autoedit
