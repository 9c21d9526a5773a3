#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autoedit/dialogue.hpp"
#include "autoedit/emit.hpp"
#include "autoedit/ingest.hpp"
#include "autoedit/optimizer.hpp"
#include "autoedit/penalties.hpp"
#include "autoedit/potentials.hpp"
#include "autoedit/rushes.hpp"

namespace autoedit {

struct PrepareOptions {
  bool offline = false;  // never contact the LLM endpoint
  bool need_dialogue = true;
  int max_actors = kDefaultMaxActors;
};

/// Bundle plus everything derived from it that no parameter touches.
struct PreparedProject {
  ProjectBundle bundle;
  std::vector<ActorTrack> tracks;  // gap-filled
  ShotLattice lattice;
  ScreenOrder order;
  std::vector<ShotSuggestion> suggestions;  // empty when dialogue was skipped
};

PreparedProject prepare_project(ProjectBundle bundle, const PrepareOptions& options, Diagnostics* diag = nullptr);

std::vector<RushTrajectory> compute_rushes(const PreparedProject& project, const EditParams& params,
                                           Diagnostics* diag = nullptr);

Grid compute_raw_saliency(const PreparedProject& project, double tau_sal);

UnaryField compute_unary(const PreparedProject& project, const Grid& raw_saliency, const EditParams& params);

struct Strategy {
  std::optional<BaselineKind> baseline;  // nullopt solves the full energy
  std::uint64_t seed = 0;

  std::string name() const { return baseline ? to_string(*baseline) : "optimized"; }
};

EditSequence solve_edit(const PreparedProject& project, const UnaryField& unary, const PenaltyContext& ctx,
                        const EditParams& params, const Strategy& strategy, Diagnostics* diag = nullptr);

/// True when a solver ran into one of its caps: a smoother stopped at its
/// iteration limit, or an EXACT run reached an explicit d_max.
bool solver_cap_hit(const std::vector<RushTrajectory>& rushes, const EditSequence& seq, const EditParams& params);

using StageTimings = std::vector<std::pair<std::string, double>>;

struct PipelineResult {
  std::vector<RushTrajectory> rushes;
  UnaryField unary;
  PenaltyContext ctx;
  EditSequence seq;
  StageTimings timings;  // seconds per stage
  bool cap_hit = false;
};

PipelineResult run_pipeline(const PreparedProject& project, const EditParams& params, const Strategy& strategy,
                            Diagnostics* diag = nullptr);

struct EmitOptions {
  bool cmx3600 = true;
  bool diagnostics = false;
};

/// Writes edit.json, crops.csv, render_manifest.txt and optionally edit.edl
/// and the diagnostic CSVs. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out_dir, const PreparedProject& project,
                                                 const PipelineResult& result, const EditParams& params,
                                                 const Strategy& strategy, const EmitOptions& options);

}  // namespace autoedit
