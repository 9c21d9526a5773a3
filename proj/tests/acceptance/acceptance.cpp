#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "autoedit/dialogue.hpp"
#include "autoedit/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace autoedit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run(const std::string& name, const std::function<Outcome()>& fn) {
  try {
    report(name, fn());
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

PreparedProject prepare(const fs::path& dir) {
  PrepareOptions options;
  options.offline = true;
  return prepare_project(load_bundle(dir), options);
}

// Parameter anchors -----------------------------------------------------------

Outcome parameter_anchors() {
  const EditParams p;
  const bool defaults = p.alpha == 0.15 && p.beta == 0.3 && p.nu == 1e6 && p.gamma1 == 100.0 && p.l == 1.0 &&
                        p.m == 7.0;
  struct Anchor {
    const char* what;
    double got;
    double want;
  };
  const std::vector<Anchor> anchors = {
      {"overlap(0.10)", overlap_penalty(0.10, p), 0.0},
      {"overlap(0.30)", overlap_penalty(0.30, p), 50.0 * 0.30 / 0.15},
      {"overlap(0.45)", overlap_penalty(0.45, p), 1e6},
      {"cut(l)", rhythm_cut(p.l, p), 100.0 * (1.0 - 1.0 / (1.0 + std::exp(0.0)))},
      {"hold(m)", rhythm_hold(p.m, p), p.gamma2 / 2.0},
      {"transition(A,B)", transition_penalty(0, 1, p), p.lambda_trans},
      {"transition(A,A)", transition_penalty(0, 0, p), 0.0},
  };
  double worst = 0.0;
  std::string worst_name = "-";
  for (const auto& a : anchors) {
    const double err = std::abs(a.got - a.want);
    if (err > worst) {
      worst = err;
      worst_name = a.what;
    }
  }
  const bool tail = rhythm_cut(p.l + 20.0, p) < 1e-8 * p.gamma1;
  return {defaults && worst <= 1e-9 && tail,
          fmt("defaults %s, %zu anchors, max error %.3g (%s), cut tail %s", defaults ? "exact" : "WRONG",
              anchors.size(), worst, worst_name.c_str(), tail ? "ok" : "too large")};
}

// DP optimality ---------------------------------------------------------------

Outcome dp_optimality() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240501);
  int instances = 0, compared = 0, tied = 0, energy_fail = 0, sequence_fail = 0;
  double worst = 0.0;
  for (int i = 0; i < 160; ++i) {
    const int n = 1 + i % 2;
    const int shots = (1 << n);  // 2^n - 1 subsets plus MASTER
    const int frames = 4 + i % 5;
    auto inst = fixtures::random_instance(rng, shots, frames);
    if (i % 8 == 0) {
      const auto keep = inst.params;
      inst.params = EditParams{};
      inst.params.l = keep.l;
      inst.params.m = keep.m;
    }
    inst.params.dp_mode = DpMode::Exact;
    const auto oracle = fixtures::brute_force(inst.unary, inst.ctx, inst.params);
    const auto seq = solve(inst.unary, inst.ctx, inst.params);
    ++instances;
    const double err = std::abs(seq.energy - oracle.energy);
    worst = std::max(worst, err);
    if (err > 1e-9 * std::max(1.0, std::abs(oracle.energy))) ++energy_fail;
    if (oracle.ties == 1) {
      ++compared;
      if (seq.shots != oracle.shots) ++sequence_fail;
    } else {
      ++tied;
    }
  }
  const double secs = seconds_since(start);
  return {energy_fail == 0 && sequence_fail == 0 && instances >= 100 && secs < 60.0,
          fmt("%d instances (n<=2, T<=8), max |dE| %.3g, %d energy mismatches, %d/%d sequence mismatches "
              "(%d tied optima), %.2f s",
              instances, worst, energy_fail, sequence_fail, compared, tied, secs)};
}

// FAST vs EXACT ---------------------------------------------------------------

Outcome fast_exact_ordering() {
  std::mt19937_64 rng(77);
  std::vector<double> gaps;
  int violations = 0;
  for (int i = 0; i < 600; ++i) {
    const int shots = 2 + i % 7;
    const int frames = 20 + (i * 7) % 41;
    auto inst = fixtures::random_instance(rng, shots, frames);
    inst.params.dp_mode = DpMode::Fast;
    const double fast = solve(inst.unary, inst.ctx, inst.params).energy;
    inst.params.dp_mode = DpMode::Exact;
    const double exact = solve(inst.unary, inst.ctx, inst.params).energy;
    if (exact > fast + 1e-9 * std::max(1.0, std::abs(fast))) ++violations;
    gaps.push_back(fast - exact);
  }
  std::sort(gaps.begin(), gaps.end());
  const auto positive = std::count_if(gaps.begin(), gaps.end(), [](double g) { return g > 1e-9; });
  auto pct = [&](double q) { return gaps[static_cast<size_t>(q * static_cast<double>(gaps.size() - 1))]; };
  const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
  return {violations == 0,
          fmt("%zu instances, %d violations; gap FAST-EXACT: %lld > 0, mean %.4g, p50 %.4g, p90 %.4g, p99 %.4g, "
              "max %.4g",
              gaps.size(), violations, static_cast<long long>(positive), mean, pct(0.5), pct(0.9), pct(0.99),
              gaps.back())};
}

// Potential algebra -----------------------------------------------------------

double lift_oracle(ActorMask mask, const std::vector<double>& single, const std::vector<int>& rank) {
  if (std::popcount(mask) == 1) return single[static_cast<size_t>(std::countr_zero(mask))];
  int left = -1, right = -1;
  for (int a = 0; a < 32; ++a) {
    if (!((mask >> a) & 1u)) continue;
    if (left < 0 || rank[static_cast<size_t>(a)] < rank[static_cast<size_t>(left)]) left = a;
    if (right < 0 || rank[static_cast<size_t>(a)] > rank[static_cast<size_t>(right)]) right = a;
  }
  const double x = lift_oracle(mask & ~(1u << left), single, rank);
  const double y = lift_oracle(mask & ~(1u << right), single, rank);
  return 2.0 * std::min(x, y);
}

Outcome potential_algebra() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  int pair_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = i % 10 == 0 ? a : u(rng);
    const double got = pair_potential(a, b);
    const double want = a + b - std::abs(a - b);
    if (got != 2.0 * std::min(a, b) || std::abs(got - want) > 1e-12 * std::max(1.0, want)) ++pair_fail;
  }

  int cases = 0, selected_fail = 0, others_fail = 0, oracle_fail = 0;
  for (int n = 1; n <= 4; ++n) {
    SceneMeta meta;
    for (int a = 0; a < n; ++a) meta.actor_ids.push_back(std::string(1, static_cast<char>('A' + a)));
    const ShotLattice lattice(meta);
    std::vector<int> rank(static_cast<size_t>(n));
    std::iota(rank.begin(), rank.end(), 0);
    do {
      for (int s = 0; s < lattice.master_index(); ++s) {
        const auto& selected = lattice[s];
        const int p = selected.actor_count();
        if (p > 3) continue;
        for (double lambda_c : {1.0, 0.37, 5.0}) {
          ++cases;
          std::vector<double> c(static_cast<size_t>(lattice.size()));
          contextual_frame(selected, rank, lattice, lambda_c, c);
          if (c[static_cast<size_t>(s)] != lambda_c) ++selected_fail;
          for (int k = 0; k < lattice.size(); ++k) {
            if (k != s && !(c[static_cast<size_t>(k)] < lambda_c)) ++others_fail;
          }
          if (p > 1) {
            std::vector<double> single(static_cast<size_t>(n), 0.0);
            for (int a = 0; a < n; ++a) {
              if (selected.contains(a)) single[static_cast<size_t>(a)] = lambda_c / std::pow(2.0, p - 1);
            }
            for (int k = 0; k < lattice.master_index(); ++k) {
              const double want = lift_oracle(lattice[k].actors, single, rank);
              if (std::abs(c[static_cast<size_t>(k)] - want) > 1e-12) ++oracle_fail;
            }
          }
        }
      }
    } while (std::next_permutation(rank.begin(), rank.end()));
  }
  return {pair_fail == 0 && selected_fail == 0 && others_fail == 0 && oracle_fail == 0,
          fmt("a+b-|a-b| == 2*min on 10000 pairs (%d off); %d selections p in {1,2,3}, n<=4, all screen orders: "
              "%d selected != lambda_c, %d others >= lambda_c, %d differ from recursive oracle",
              pair_fail, cases, selected_fail, others_fail, oracle_fail)};
}

// Smoothing -------------------------------------------------------------------

double objective_oracle(const std::vector<double>& f, const std::vector<double>& raw, double wv, double wj) {
  double fit = 0.0, vel = 0.0, jerk = 0.0;
  for (std::size_t t = 0; t < f.size(); ++t) fit += (f[t] - raw[t]) * (f[t] - raw[t]);
  for (std::size_t t = 0; t + 1 < f.size(); ++t) vel += std::abs(f[t + 1] - f[t]);
  for (std::size_t t = 0; t + 3 < f.size(); ++t) jerk += std::abs(f[t + 3] - 3 * f[t + 2] + 3 * f[t + 1] - f[t]);
  return fit + wv * vel + wj * jerk;
}

Outcome smoothing_properties() {
  const EditParams defaults;
  const std::vector<double> constant(200, 733.25);
  const bool fixed_point = smooth_series(constant, defaults.lambda_vel, defaults.lambda_jerk).values == constant;

  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 6.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> sample(120);
  for (auto& v : sample) v = 400.0 + noise(rng);
  const bool identity = smooth_series(sample, 0.0, 0.0).values == sample;

  int worse = 0, non_monotone = 0, unconverged = 0;
  double mean_ratio = 0.0;
  SmootherOptions options;
  options.record_history = true;
  for (int k = 0; k < 50; ++k) {
    const auto frames = static_cast<std::size_t>(60 + 20 * (k % 10));
    std::vector<double> raw(frames);
    double level = 300.0 + 600.0 * u(rng);
    for (std::size_t t = 0; t < frames; ++t) {
      if (u(rng) < 0.02) level += 150.0 * (u(rng) - 0.5);
      raw[t] = level + noise(rng) + (k % 3 == 0 ? 40.0 * std::sin(0.1 * static_cast<double>(t)) : 0.0);
    }
    const double wv = k % 2 ? defaults.lambda_vel : 1.0 + 50.0 * u(rng);
    const double wj = k % 2 ? defaults.lambda_jerk : 1000.0 * u(rng);
    const auto r = smooth_series(raw, wv, wj, options);
    const double smoothed = objective_oracle(r.values, raw, wv, wj);
    const double original = objective_oracle(raw, raw, wv, wj);
    if (smoothed > original) ++worse;
    mean_ratio += smoothed / original / 50.0;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      if (r.history[i] > r.history[i - 1]) {
        ++non_monotone;
        break;
      }
    }
    if (!r.converged) ++unconverged;
  }
  return {fixed_point && identity && worse == 0 && non_monotone == 0,
          fmt("constant fixed point %s, zero-weight identity %s; 50 noisy fixtures: %d worse than raw, %d "
              "non-monotone histories, %d unconverged, mean objective ratio %.3f",
              fixed_point ? "exact" : "BROKEN", identity ? "exact" : "BROKEN", worse, non_monotone, unconverged,
              mean_ratio)};
}

// Structural rules ------------------------------------------------------------

double mean_segment_frames(const EditSequence& seq) {
  return static_cast<double>(seq.shots.size()) / static_cast<double>(seq.segments.size());
}

Outcome structural_rules() {
  fixtures::TempDir dir("acceptance_structure");
  int bundles = 0, establish_fail = 0, jump_fail = 0, no_alternative = 0, pace_fail = 0, cuts = 0;
  std::string pace;
  for (int k = 0; k < 4; ++k) {
    fixtures::SceneOptions o;
    o.actors = 2 + k % 3;
    o.frames = 750;
    o.turn_secs = 2.5 + k;
    o.seed = 100 + static_cast<std::uint64_t>(k);
    const auto path = dir / ("bundle" + std::to_string(k));
    fixtures::write_bundle(path, o);
    const auto project = prepare(path);
    const auto& lattice = project.lattice;
    ++bundles;

    EditParams params = project.bundle.params;
    const auto result = run_pipeline(project, params, Strategy{});
    const auto& seq = result.seq;
    const auto prefix = static_cast<std::size_t>(std::ceil(2.0 * project.bundle.meta.fps.value()));
    for (std::size_t t = 0; t < prefix; ++t) {
      if (seq.shots[t] != lattice.master_index()) {
        ++establish_fail;
        break;
      }
    }

    // Holding MASTER throughout never cuts, so it is a sub-nu alternative whenever its cost is below nu.
    const std::vector<int> hold(seq.shots.size(), lattice.master_index());
    if (evaluate_edit_cost(hold, result.unary.u, result.ctx, params) >= params.nu) ++no_alternative;
    for (std::size_t t = 1; t < seq.shots.size(); ++t) {
      if (seq.shots[t] == seq.shots[t - 1]) continue;
      ++cuts;
      if (iou(result.ctx.rect_of(seq.shots[t - 1], t), result.ctx.rect_of(seq.shots[t], t)) > params.beta) ++jump_fail;
    }

    params.m = 3.0;
    const auto faster = solve_edit(project, result.unary, result.ctx, params, Strategy{});
    const double before = mean_segment_frames(seq), after = mean_segment_frames(faster);
    if (!(after < before)) ++pace_fail;
    pace += fmt("%s%.1f->%.1f", pace.empty() ? "" : ", ", before, after);
  }
  return {establish_fail == 0 && jump_fail == 0 && no_alternative == 0 && pace_fail == 0,
          fmt("%d bundles: %d without 2 s MASTER opening; %d of %d cuts with IoU > beta (%d bundles lacking a "
              "sub-nu alternative); mean segment frames at m=7 -> m=3: %s",
              bundles, establish_fail, jump_fail, cuts, no_alternative, pace.c_str())};
}

// Parser and cut mapping ------------------------------------------------------

Outcome parser_mapping() {
  SceneMeta meta;
  meta.frame_count = 25 * 30;
  meta.actor_ids = {"Tommy", "Kat", "Stevie", "Grant", "Dawn"};
  meta.actor_aliases["contestants"] = 0b11110;
  meta.scene_kind = SceneKind::Quiz;

  std::vector<TranscriptWord> transcript;
  const std::vector<std::pair<std::string, int>> spoken = {
      {"Hello", 0}, {"and", 0},    {"welcome", 0}, {"to", 0},   {"the", 0},     {"show.", 0}, {"Thanks", 1},
      {"Tommy!", 1}, {"First", 0}, {"question", 0}, {"for", 0}, {"ten", 0},     {"points", 0}, {"Paris?", 3},
      {"Correct,", 0}, {"ten", 0}, {"points", 0},   {"to", 0},  {"Grant.", 0},  {"Yes!", 4},  {"Goodnight", 0}};
  double t = 0.5;
  for (const auto& [text, speaker] : spoken) {
    transcript.push_back({text, t, t + 0.35, speaker});
    t += 0.5;
  }
  auto end_of = [&](std::size_t i) { return transcript[i].end_s; };

  struct Fixture {
    std::string text;
    std::vector<ShotId> targets;
    std::vector<double> times;
    std::size_t warnings;
  };
  const std::vector<Fixture> cases = {
      {"1. Shot: Tommy, Cut: show\n2. Shot: Kat, Cut: Tommy\n3. Shot: Tommy, Cut: points\n"
       "4. Shot: (Grant and Dawn), Cut: Paris\n5. Shot: Tommy, Cut: points\n6. Shot: Contestants, Cut: Goodnight\n",
       {ShotId::single(0), ShotId::single(1), ShotId::single(0), ShotId::subset(0b11000), ShotId::single(0),
        ShotId::subset(0b11110)},
       {end_of(5), end_of(7), end_of(12), end_of(13), end_of(16), end_of(20)},
       0},
      {"1. Shot: Tommy, Cut: welcom, 2. Shot: Contestants, Cut: Tommy, 3. Shot: Grant, Cut: Goodnight",
       {ShotId::single(0), ShotId::subset(0b11110), ShotId::single(3)},
       {end_of(2), end_of(7), end_of(20)},
       1},
      {"Sure! Here is my suggestion:\n1. Shot: (Kat and Stevie), Cut: welcome\n2. Shot: Tommy, Cut: Grant.\n"
       "3. Shot: Dawn, Cut: Yes\n",
       {ShotId::subset(0b00110), ShotId::single(0), ShotId::single(4)},
       {end_of(2), end_of(18), end_of(20)},
       0},
  };

  int failed = 0, round_trip_fail = 0, entries = 0;
  for (const auto& c : cases) {
    Diagnostics diag;
    auto parsed = parse_response(c.text, meta, &diag);
    const auto mapped = map_cuts(parsed, transcript, &diag);
    entries += static_cast<int>(mapped.size());
    bool ok = mapped.size() == c.targets.size() && diag.warnings.size() == c.warnings;
    for (std::size_t i = 0; ok && i < mapped.size(); ++i) {
      ok = mapped[i].target == c.targets[i] && std::abs(mapped[i].cut_time_s - c.times[i]) < 1e-9;
    }
    if (!ok) ++failed;
    const auto again = parse_response(serialize_suggestions(parsed), meta);
    if (again != parsed || serialize_suggestions(again) != serialize_suggestions(parsed)) ++round_trip_fail;
  }
  return {failed == 0 && round_trip_fail == 0,
          fmt("%zu responses (%d entries, group shots, alias, fuzzy cut word): %d mismatched, %d round-trip "
              "failures",
              cases.size(), entries, failed, round_trip_fail)};
}

// Runtime ---------------------------------------------------------------------

Outcome runtime() {
  fixtures::TempDir dir("acceptance_runtime");
  fixtures::SceneOptions o;
  o.actors = 5;
  o.frames = 3000;
  o.seed = 5;
  fixtures::write_bundle(dir.path(), o);
  const auto project = prepare(dir.path());
  EditParams params = project.bundle.params;
  params.dp_mode = DpMode::Fast;

  auto start = std::chrono::steady_clock::now();
  const auto rushes = compute_rushes(project, params);
  const double rush_secs = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const auto raw = compute_raw_saliency(project, params.tau_sal);
  const auto unary = compute_unary(project, raw, params);
  const double potential_secs = seconds_since(start);
  start = std::chrono::steady_clock::now();
  const auto ctx = PenaltyContext::from_rushes(project.lattice, rushes, project.tracks, project.bundle.meta,
                                               params.theta_mis);
  const double penalty_secs = seconds_since(start);
  start = std::chrono::steady_clock::now();
  const auto seq = solve_edit(project, unary, ctx, params, Strategy{});
  const double solve_secs = seconds_since(start);
  const double total = potential_secs + penalty_secs + solve_secs;
  return {rushes.size() == 32 && seq.shots.size() == 3000 && total < 60.0,
          fmt("n=5, %zu rushes, 3000 frames: potentials %.3f s + penalties %.3f s + FAST solve %.3f s = %.3f s "
              "(rush smoothing %.3f s, not counted)",
              rushes.size(), potential_secs, penalty_secs, solve_secs, total, rush_secs)};
}

// Determinism -----------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string command = std::string(AUTOEDIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  fixtures::TempDir dir("acceptance_determinism");
  fixtures::SceneOptions o;
  o.frames = 600;
  o.seed = 9;
  fixtures::write_bundle(dir / "bundle", o);

  int identical = 0, compared = 0;
  std::string failures_seen;
  auto compare = [&](const std::string& label, const fs::path& a, const fs::path& b) {
    ++compared;
    if (fs::exists(a) && read_text_file(a) == read_text_file(b)) {
      ++identical;
    } else {
      failures_seen += " " + label;
    }
  };

  for (const auto& [label, extra] : std::vector<std::pair<std::string, std::string>>{
           {"fast", ""}, {"exact", " --mode exact"}, {"random", " --baseline random --seed 7"}}) {
    for (int run = 0; run < 2; ++run) {
      run_cli("edit --offline --project " + (dir / "bundle").string() + " --out " +
              (dir / (label + std::to_string(run))).string() + extra);
    }
    compare(label, dir / (label + "0") / "edit.json", dir / (label + "1") / "edit.json");
  }

  const auto project = prepare(dir / "bundle");
  for (int run = 0; run < 2; ++run) {
    const auto result = run_pipeline(project, project.bundle.params, Strategy{});
    write_outputs(dir / ("lib" + std::to_string(run)), project, result, project.bundle.params, Strategy{}, {});
  }
  compare("library", dir / "lib0" / "edit.json", dir / "lib1" / "edit.json");
  return {identical == compared,
          fmt("%d/%d edit.json pairs byte-identical (fast, exact, seeded random via CLI; library)%s%s", identical,
              compared, failures_seen.empty() ? "" : "; differing:", failures_seen.c_str())};
}

}  // namespace

int main() {
  run("parameter anchors", parameter_anchors);
  run("dp optimality", dp_optimality);
  run("fast/exact ordering", fast_exact_ordering);
  run("potential algebra", potential_algebra);
  run("smoothing properties", smoothing_properties);
  run("structural edit rules", structural_rules);
  run("parser and cut mapping", parser_mapping);
  run("runtime", runtime);
  run("determinism", determinism);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
