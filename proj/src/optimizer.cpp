#include "autoedit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace autoedit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(ErrorKind kind, const std::string& message) { throw Error(kind, "optimizer", message); }

void check_inputs(const Grid& unary, const PenaltyContext& ctx, const SolveOptions& options) {
  if (unary.rows() == 0) fail(ErrorKind::Validation, "cannot solve an empty timeline");
  if (unary.rows() != ctx.frames() || unary.cols() != ctx.shots()) {
    fail(ErrorKind::Validation, "unary field and penalty context cover different (frame, shot) grids");
  }
  if (!options.forced.empty() && options.forced.size() != unary.rows()) {
    fail(ErrorKind::Validation, "forced selection must cover every frame");
  }
}

bool allowed(const SolveOptions& options, std::size_t t, int s) {
  return options.forced.empty() || options.forced[t] < 0 || options.forced[t] == s;
}

EditSequence finish(std::vector<int> shots, const Grid& unary, const PenaltyContext& ctx, const EditParams& params) {
  EditSequence seq;
  seq.segments = segments_of(shots);
  seq.energy = evaluate_edit_cost(shots, unary, ctx, params);
  seq.shots = std::move(shots);
  return seq;
}

EditSequence solve_fast(const Grid& unary, const PenaltyContext& ctx, const EditParams& params,
                        const SolveOptions& options) {
  const std::size_t frames = unary.rows();
  const int shots = static_cast<int>(unary.cols());
  const double fps = ctx.fps();

  std::vector<double> cost(static_cast<size_t>(shots), kInf), next(static_cast<size_t>(shots), kInf);
  std::vector<std::int64_t> run(static_cast<size_t>(shots), 0), next_run(static_cast<size_t>(shots), 0);
  std::vector<int> back(frames * static_cast<size_t>(shots), -1);

  for (int s = 0; s < shots; ++s) {
    if (!allowed(options, 0, s)) continue;
    cost[static_cast<size_t>(s)] = unary_cost(unary(0, static_cast<size_t>(s)), params) + ctx.misframing(s, 0, params);
    run[static_cast<size_t>(s)] = 1;
  }

  for (std::size_t t = 1; t < frames; ++t) {
    for (int s = 0; s < shots; ++s) {
      next[static_cast<size_t>(s)] = kInf;
      if (!allowed(options, t, s)) continue;
      double best = kInf;
      int arg = -1;
      for (int k = 0; k < shots; ++k) {
        const double base = cost[static_cast<size_t>(k)];
        if (base == kInf) continue;
        const auto held = run[static_cast<size_t>(k)];
        double c = base;
        if (k == s) {
          c += rhythm_hold(static_cast<double>(held + 1) / fps, params);
        } else {
          c += ctx.overlap(k, s, t, params) + rhythm_cut(static_cast<double>(held) / fps, params) + params.lambda_trans;
        }
        if (c < best) {
          best = c;
          arg = k;
        }
      }
      if (arg < 0) continue;
      next[static_cast<size_t>(s)] = best + unary_cost(unary(t, static_cast<size_t>(s)), params) + ctx.misframing(s, t, params);
      next_run[static_cast<size_t>(s)] = arg == s ? run[static_cast<size_t>(arg)] + 1 : 1;
      back[t * static_cast<size_t>(shots) + static_cast<size_t>(s)] = arg;
    }
    cost.swap(next);
    run.swap(next_run);
  }

  int s = -1;
  for (int k = 0; k < shots; ++k) {
    if (cost[static_cast<size_t>(k)] < kInf && (s < 0 || cost[static_cast<size_t>(k)] < cost[static_cast<size_t>(s)])) s = k;
  }
  if (s < 0) fail(ErrorKind::Validation, "no feasible shot sequence");

  std::vector<int> path(frames);
  for (std::size_t t = frames; t-- > 0;) {
    path[t] = s;
    if (t > 0) s = back[t * static_cast<size_t>(shots) + static_cast<size_t>(s)];
  }
  return finish(std::move(path), unary, ctx, params);
}

// How the capped-duration cell (shot, d_max) was reached.
enum class CapSource : std::uint8_t { Cut, HoldFromBelow, HoldAtCap };

EditSequence solve_exact(const Grid& unary, const PenaltyContext& ctx, const EditParams& params,
                         const SolveOptions& options) {
  const std::size_t frames = unary.rows();
  const auto shots = static_cast<std::size_t>(unary.cols());
  const double fps = ctx.fps();
  const auto limit = static_cast<std::size_t>(std::max<std::int64_t>(1, params.effective_d_max(ctx.frame_rate())));
  const std::size_t cap = std::max<std::size_t>(1, std::min(frames, limit));

  // cost[s * cap + (d - 1)] for durations d in [1, cap].
  std::vector<double> cost(shots * cap, kInf), next(shots * cap, kInf);
  std::vector<int> cut_from_shot(frames * shots, -1);
  std::vector<std::int32_t> cut_from_duration(frames * shots, 0);
  std::vector<CapSource> cap_source(frames * shots, CapSource::Cut);

  std::vector<double> hold_cost(cap + 1, 0.0), cut_cost(cap + 1, 0.0);
  for (std::size_t d = 1; d <= cap; ++d) {
    hold_cost[d] = rhythm_hold(static_cast<double>(d + 1) / fps, params);
    cut_cost[d] = rhythm_cut(static_cast<double>(d) / fps, params);
  }

  for (std::size_t s = 0; s < shots; ++s) {
    if (!allowed(options, 0, static_cast<int>(s))) continue;
    cost[s * cap] = unary_cost(unary(0, s), params) + ctx.misframing(static_cast<int>(s), 0, params);
  }

  std::vector<double> leave(shots);
  std::vector<std::int32_t> leave_d(shots);
  for (std::size_t t = 1; t < frames; ++t) {
    // Cheapest way to leave each shot, independent of where we cut to.
    for (std::size_t k = 0; k < shots; ++k) {
      leave[k] = kInf;
      leave_d[k] = 0;
      for (std::size_t d = 1; d <= cap; ++d) {
        const double c = cost[k * cap + d - 1];
        if (c == kInf) continue;
        const double v = c + cut_cost[d];
        if (v < leave[k]) {
          leave[k] = v;
          leave_d[k] = static_cast<std::int32_t>(d);
        }
      }
    }

    std::fill(next.begin(), next.end(), kInf);
    for (std::size_t s = 0; s < shots; ++s) {
      if (!allowed(options, t, static_cast<int>(s))) continue;
      const double local = unary_cost(unary(t, s), params) + ctx.misframing(static_cast<int>(s), t, params);
      const std::size_t cell = t * shots + s;

      double cut = kInf;
      int cut_k = -1;
      for (std::size_t k = 0; k < shots; ++k) {
        if (k == s || leave[k] == kInf) continue;
        const double v = leave[k] + ctx.overlap(static_cast<int>(k), static_cast<int>(s), t, params) + params.lambda_trans;
        if (v < cut) {
          cut = v;
          cut_k = static_cast<int>(k);
        }
      }
      if (cut_k >= 0) {
        cut_from_shot[cell] = cut_k;
        cut_from_duration[cell] = leave_d[static_cast<size_t>(cut_k)];
      }

      const double* row = &cost[s * cap];
      double* out = &next[s * cap];
      if (cap == 1) {
        const double hold = row[0] == kInf ? kInf : row[0] + hold_cost[1];
        if (hold < cut) {
          out[0] = hold + local;
          cap_source[cell] = CapSource::HoldAtCap;
        } else if (cut < kInf) {
          out[0] = cut + local;
        }
        continue;
      }

      if (cut < kInf) out[0] = cut + local;
      for (std::size_t d = 2; d < cap; ++d) {
        if (row[d - 2] < kInf) out[d - 1] = row[d - 2] + hold_cost[d - 1] + local;
      }
      // Cap cell: reached from d_max - 1 or by staying at d_max.
      const double from_below = row[cap - 2] == kInf ? kInf : row[cap - 2] + hold_cost[cap - 1];
      const double at_cap = row[cap - 1] == kInf ? kInf : row[cap - 1] + hold_cost[cap];
      if (from_below <= at_cap && from_below < kInf) {
        out[cap - 1] = from_below + local;
        cap_source[cell] = CapSource::HoldFromBelow;
      } else if (at_cap < kInf) {
        out[cap - 1] = at_cap + local;
        cap_source[cell] = CapSource::HoldAtCap;
      }
    }
    cost.swap(next);
  }

  std::size_t best_s = 0, best_d = 0;
  double best = kInf;
  for (std::size_t s = 0; s < shots; ++s) {
    for (std::size_t d = 1; d <= cap; ++d) {
      if (cost[s * cap + d - 1] < best) {
        best = cost[s * cap + d - 1];
        best_s = s;
        best_d = d;
      }
    }
  }
  if (best == kInf) fail(ErrorKind::Validation, "no feasible shot sequence");

  std::vector<int> path(frames);
  std::size_t s = best_s, d = best_d;
  for (std::size_t t = frames; t-- > 0;) {
    path[t] = static_cast<int>(s);
    if (t == 0) break;
    const std::size_t cell = t * shots + s;
    if (d == cap) {
      const auto source = cap_source[cell];
      if (source == CapSource::HoldAtCap) continue;
      if (source == CapSource::HoldFromBelow) {
        d = cap - 1;
        continue;
      }
    } else if (d > 1) {
      --d;
      continue;
    }
    const auto k = static_cast<std::size_t>(cut_from_shot[cell]);
    d = static_cast<std::size_t>(cut_from_duration[cell]);
    s = k;
  }
  return finish(std::move(path), unary, ctx, params);
}

}  // namespace

std::vector<Segment> segments_of(std::span<const int> shots) {
  std::vector<Segment> out;
  for (std::size_t t = 0; t < shots.size(); ++t) {
    if (out.empty() || out.back().shot != shots[t]) {
      out.push_back({shots[t], static_cast<std::int64_t>(t), static_cast<std::int64_t>(t + 1)});
    } else {
      out.back().end_frame = static_cast<std::int64_t>(t + 1);
    }
  }
  return out;
}

double unary_cost(double u, const EditParams& params) { return -std::log(std::max(u, params.epsilon_u)); }

double evaluate_edit_cost(std::span<const int> shots, const Grid& unary, const PenaltyContext& ctx,
                          const EditParams& params) {
  if (shots.size() != unary.rows()) fail(ErrorKind::Validation, "sequence must cover every frame");
  const double fps = ctx.fps();
  double energy = 0.0;
  std::int64_t run = 0;
  for (std::size_t t = 0; t < shots.size(); ++t) {
    const int s = shots[t];
    energy += unary_cost(unary(t, static_cast<size_t>(s)), params) + ctx.misframing(s, t, params);
    if (t == 0) {
      run = 1;
      continue;
    }
    const int prev = shots[t - 1];
    if (s == prev) {
      ++run;
      energy += rhythm_hold(static_cast<double>(run) / fps, params);
    } else {
      energy += ctx.overlap(prev, s, t, params) + rhythm_cut(static_cast<double>(run) / fps, params) +
                transition_penalty(prev, s, params);
      run = 1;
    }
  }
  return energy;
}

EditSequence solve(const Grid& unary, const PenaltyContext& ctx, const EditParams& params,
                   const SolveOptions& options) {
  check_inputs(unary, ctx, options);
  return params.dp_mode == DpMode::Exact ? solve_exact(unary, ctx, params, options)
                                         : solve_fast(unary, ctx, params, options);
}

std::int64_t establishing_frames(std::int64_t frame_count, const FrameRate& fps, const EditParams& params,
                                 Diagnostics* diag) {
  if (params.establish_secs <= 0.0) return 0;
  const double duration = static_cast<double>(frame_count) / fps.value();
  if (!(duration > params.establish_secs)) {
    if (diag) diag->warn("clip is not longer than the establishing shot; skipping it");
    return 0;
  }
  const auto n = static_cast<std::int64_t>(std::ceil(params.establish_secs * fps.value() - 1e-9));
  return std::min(n, frame_count);
}

EditSequence apply_establishing(const Grid& unary, const PenaltyContext& ctx, int master_index,
                                const EditParams& params, Diagnostics* diag) {
  SolveOptions options;
  const auto prefix = establishing_frames(static_cast<std::int64_t>(unary.rows()), ctx.frame_rate(), params, diag);
  if (prefix > 0) {
    options.forced.assign(unary.rows(), -1);
    std::fill_n(options.forced.begin(), prefix, master_index);
  }
  return solve(unary, ctx, params, options);
}

BaselineKind parse_baseline_kind(std::string_view text) {
  if (text == "random") return BaselineKind::Random;
  if (text == "wide") return BaselineKind::Wide;
  if (text == "speaker") return BaselineKind::Speaker;
  throw Error(ErrorKind::Validation, "optimizer",
              "unknown baseline '" + std::string(text) + "' (expected random, wide or speaker)");
}

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Random: return "random";
    case BaselineKind::Wide: return "wide";
    case BaselineKind::Speaker: return "speaker";
  }
  return "unknown";
}

namespace {

// Platform-independent uniform draw in [0, 1).
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

EditSequence random_baseline(const BaselineInputs& in, const EditParams& params, std::uint64_t seed,
                             Diagnostics* diag) {
  const auto frames = static_cast<std::size_t>(in.meta.frame_count);
  const auto shots = static_cast<std::size_t>(in.lattice.size());
  const double fps = in.meta.fps.value();
  std::mt19937_64 rng(seed);

  // Random picks become the only preferred cells; the re-solve then applies
  // the cinematic penalties on top of them.
  Grid preference(frames, shots, 0.0);
  std::size_t t = 0;
  while (t < frames) {
    const double seconds = params.l + (params.m - params.l) * uniform01(rng);
    const auto length = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds * fps)));
    const auto shot = std::min(shots - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(shots)));
    for (std::size_t end = std::min(frames, t + length); t < end; ++t) preference(t, shot) = 1.0;
  }
  auto chosen = apply_establishing(preference, in.ctx, in.lattice.master_index(), params, diag);
  return finish(std::move(chosen.shots), in.unary, in.ctx, params);
}

EditSequence speaker_baseline(const BaselineInputs& in, const EditParams& params, Diagnostics* diag) {
  const auto frames = static_cast<std::size_t>(in.meta.frame_count);
  const double fps = in.meta.fps.value();
  const int wide = in.lattice.full_index();
  const auto min_hold = static_cast<std::int64_t>(std::ceil(params.l * fps - 1e-9));
  const auto prefix = static_cast<std::size_t>(establishing_frames(in.meta.frame_count, in.meta.fps, params, diag));

  std::vector<int> shots(frames, wide);
  int current = prefix > 0 ? in.lattice.master_index() : wide;
  std::int64_t held = static_cast<std::int64_t>(prefix);
  std::fill_n(shots.begin(), prefix, current);

  std::size_t next_word = 0;
  double last_speech_end = 0.0;
  for (std::size_t t = prefix; t < frames; ++t) {
    const double time = static_cast<double>(t) / fps;
    while (next_word < in.transcript.size() && in.transcript[next_word].start_s <= time) ++next_word;
    // The latest word that has started and not yet ended names the speaker.
    std::optional<ActorIndex> speaking;
    bool in_speech = false;
    if (next_word > 0) {
      const auto& word = in.transcript[next_word - 1];
      last_speech_end = std::max(last_speech_end, word.end_s);
      if (time <= word.end_s) {
        in_speech = true;
        speaking = word.speaker;
      }
    }

    int desired = current;
    if (speaking) {
      desired = in.lattice.single_index(*speaking);
    } else if (!in_speech && time - last_speech_end > params.silence_wide_secs) {
      desired = wide;
    }
    if (desired != current && held >= min_hold) {
      current = desired;
      held = 0;
    }
    shots[t] = current;
    ++held;
  }
  return finish(std::move(shots), in.unary, in.ctx, params);
}

}  // namespace

EditSequence baseline(BaselineKind kind, const BaselineInputs& inputs, const EditParams& params, std::uint64_t seed,
                      Diagnostics* diag) {
  switch (kind) {
    case BaselineKind::Random:
      return random_baseline(inputs, params, seed, diag);
    case BaselineKind::Wide:
      return finish(std::vector<int>(static_cast<size_t>(inputs.meta.frame_count), inputs.lattice.full_index()),
                    inputs.unary, inputs.ctx, params);
    case BaselineKind::Speaker:
      return speaker_baseline(inputs, params, diag);
  }
  throw Error(ErrorKind::Validation, "optimizer", "unknown baseline kind");
}

}  // namespace autoedit
