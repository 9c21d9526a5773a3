#include "autoedit/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace autoedit {

namespace fs = std::filesystem;

namespace {

class StageClock {
 public:
  explicit StageClock(StageTimings& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}

  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.emplace_back(stage, std::chrono::duration<double>(now - start_).count());
    start_ = now;
  }

 private:
  StageTimings& sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

PreparedProject prepare_project(ProjectBundle bundle, const PrepareOptions& options, Diagnostics* diag) {
  PreparedProject project;
  project.lattice = ShotLattice(bundle.meta, options.max_actors);
  for (const auto& track : bundle.tracks) project.tracks.push_back(fill_track_gaps(track));
  project.order = screen_order(project.tracks, static_cast<std::size_t>(bundle.meta.frame_count));

  if (options.need_dialogue) {
    if (bundle.transcript.empty()) {
      if (diag) diag->warn("transcript is empty; contextual potential will be zero");
    } else {
      if (options.offline && !bundle.llm_cache) {
        throw Error(ErrorKind::Config, "dialogue", "offline run needs " + bundle.llm_cache_path().string());
      }
      const auto prompt = build_prompt(bundle.meta, bundle.transcript, bundle.meta.scene_kind);
      const auto text = query_llm(prompt, bundle.llm, bundle.llm_cache, bundle.llm_cache_path());
      if (!bundle.llm_cache) bundle.llm_cache = text;
      project.suggestions = map_cuts(parse_response(text, bundle.meta, diag), bundle.transcript, diag);
    }
  }
  project.bundle = std::move(bundle);
  return project;
}

std::vector<RushTrajectory> compute_rushes(const PreparedProject& project, const EditParams& params,
                                           Diagnostics* diag) {
  return generate_rushes(project.lattice.shots(), project.tracks, project.bundle.meta, params, diag);
}

Grid compute_raw_saliency(const PreparedProject& project, double tau_sal) {
  return reduce_saliency(project.bundle.saliency, project.tracks, project.bundle.meta, tau_sal);
}

UnaryField compute_unary(const PreparedProject& project, const Grid& raw_saliency, const EditParams& params) {
  const auto& meta = project.bundle.meta;
  auto c = contextual_potential(project.suggestions, meta, project.lattice, project.order, params).values;
  auto v = lift_higher_order(saliency_potential(raw_saliency, params), project.order, project.lattice);
  auto s = lift_higher_order(speaker_potential(project.bundle.transcript, meta, params), project.order,
                             project.lattice);
  return assemble_unary(std::move(c), std::move(v), std::move(s));
}

EditSequence solve_edit(const PreparedProject& project, const UnaryField& unary, const PenaltyContext& ctx,
                        const EditParams& params, const Strategy& strategy, Diagnostics* diag) {
  if (strategy.baseline) {
    const BaselineInputs inputs{project.bundle.meta, project.lattice, project.bundle.transcript, ctx, unary.u};
    return baseline(*strategy.baseline, inputs, params, strategy.seed, diag);
  }
  return apply_establishing(unary.u, ctx, project.lattice.master_index(), params, diag);
}

bool solver_cap_hit(const std::vector<RushTrajectory>& rushes, const EditSequence& seq, const EditParams& params) {
  for (const auto& rush : rushes) {
    if (!rush.report.converged) return true;
  }
  if (params.dp_mode == DpMode::Exact && params.d_max > 0) {
    const auto cap = std::min(params.d_max, static_cast<std::int64_t>(seq.shots.size()) + 1);
    for (const auto& seg : seq.segments) {
      if (seg.length() >= cap) return true;
    }
  }
  return false;
}

PipelineResult run_pipeline(const PreparedProject& project, const EditParams& params, const Strategy& strategy,
                            Diagnostics* diag) {
  params.validate();
  PipelineResult result;
  StageClock clock(result.timings);

  result.rushes = compute_rushes(project, params, diag);
  clock.lap("rushes");

  const auto raw = compute_raw_saliency(project, params.tau_sal);
  result.unary = compute_unary(project, raw, params);
  clock.lap("potentials");

  result.ctx = PenaltyContext::from_rushes(project.lattice, result.rushes, project.tracks, project.bundle.meta,
                                           params.theta_mis);
  clock.lap("penalties");

  result.seq = solve_edit(project, result.unary, result.ctx, params, strategy, diag);
  clock.lap("solve");

  result.cap_hit = solver_cap_hit(result.rushes, result.seq, params);
  if (result.cap_hit && diag) diag->warn("a solver reached its cap; results may be approximate");
  return result;
}

std::vector<fs::path> write_outputs(const fs::path& out_dir, const PreparedProject& project,
                                    const PipelineResult& result, const EditParams& params, const Strategy& strategy,
                                    const EmitOptions& options) {
  const auto& meta = project.bundle.meta;
  const auto edl =
      make_edl(result.seq, project.lattice, result.rushes, meta, strategy.name(), to_string(params.dp_mode));

  // Render everything before touching the directory so failures leave no partial output.
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(out_dir / "edit.json", edl_to_json(edl));
  files.emplace_back(out_dir / "crops.csv", crops_csv(result.seq, project.lattice, result.rushes, meta));
  files.emplace_back(out_dir / "render_manifest.txt", render_manifest(edl));
  if (options.cmx3600) files.emplace_back(out_dir / "edit.edl", edl_to_cmx3600(edl));
  if (options.diagnostics) {
    files.emplace_back(out_dir / "potentials.csv", potentials_csv(result.unary, project.lattice, meta));
    files.emplace_back(out_dir / "trajectories.csv", trajectories_csv(result.rushes, meta));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "emit", "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (const auto& [path, text] : files) {
    write_text_file(path, text);
    written.push_back(path);
  }
  return written;
}

}  // namespace autoedit
