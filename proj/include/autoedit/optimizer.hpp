#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "autoedit/error.hpp"
#include "autoedit/grid.hpp"
#include "autoedit/ingest.hpp"
#include "autoedit/model.hpp"
#include "autoedit/penalties.hpp"

namespace autoedit {

struct Segment {
  int shot = 0;  // lattice index
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // exclusive

  std::int64_t length() const { return end_frame - start_frame; }
  bool operator==(const Segment&) const = default;
};

struct EditSequence {
  std::vector<int> shots;  // lattice index per frame
  std::vector<Segment> segments;
  double energy = 0.0;

  bool operator==(const EditSequence&) const = default;
};

/// Run-length encodes a per-frame selection.
std::vector<Segment> segments_of(std::span<const int> shots);

/// -ln(max(U, epsilon_u)) for one cell.
double unary_cost(double u, const EditParams& params);

/// Total edit energy of a per-frame selection: unary and misframing terms on
/// every frame, overlap, rhythm and transition terms between consecutive frames.
double evaluate_edit_cost(std::span<const int> shots, const Grid& unary, const PenaltyContext& ctx,
                          const EditParams& params);

struct SolveOptions {
  /// Per-frame forced lattice index, or -1 where the solver is free. Empty
  /// means unconstrained.
  std::vector<int> forced;
};

/// Minimises the edit energy. FAST carries the run length of the best
/// incoming path in each cell; EXACT keys cells by (shot, min(run, d_max)),
/// which is exact whenever no run exceeds d_max or d_max is left at 0.
EditSequence solve(const Grid& unary, const PenaltyContext& ctx, const EditParams& params,
                   const SolveOptions& options = {});

/// Number of leading frames forced to MASTER, or 0 (with a warning) when the
/// clip is not longer than the establishing duration.
std::int64_t establishing_frames(std::int64_t frame_count, const FrameRate& fps, const EditParams& params,
                                 Diagnostics* diag = nullptr);

/// Solves with the first establishing_frames() frames held on MASTER; the seam
/// out of MASTER pays the usual cut penalties.
EditSequence apply_establishing(const Grid& unary, const PenaltyContext& ctx, int master_index,
                                const EditParams& params, Diagnostics* diag = nullptr);

enum class BaselineKind { Random, Wide, Speaker };

BaselineKind parse_baseline_kind(std::string_view text);
const char* to_string(BaselineKind kind);

struct BaselineInputs {
  const SceneMeta& meta;
  const ShotLattice& lattice;
  const std::vector<TranscriptWord>& transcript;
  const PenaltyContext& ctx;
  const Grid& unary;  // every baseline reports its energy against this
};

EditSequence baseline(BaselineKind kind, const BaselineInputs& inputs, const EditParams& params,
                      std::uint64_t seed = 0, Diagnostics* diag = nullptr);

}  // namespace autoedit
