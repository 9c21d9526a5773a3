#pragma once

#include <vector>

#include "autoedit/grid.hpp"
#include "autoedit/higher_order.hpp"
#include "autoedit/ingest.hpp"
#include "autoedit/model.hpp"

namespace autoedit {

/// Per-frame, per-shot potentials. U is the unfloored sum C + V + S; the
/// epsilon floor is applied only when taking the logarithm.
struct UnaryField {
  Grid c;
  Grid v;
  Grid s;
  Grid u;

  std::size_t frames() const { return u.rows(); }
  std::size_t shots() const { return u.cols(); }
};

/// Scores divided by their per-frame maximum; all-zero frames stay zero.
Grid normalize_saliency(const Grid& raw_scores);

/// Rank mapping: most salient actor gets lambda_sal, the runner-up half of it.
/// Only actors with a positive score are ranked; ties go to the lower actor index.
Grid saliency_potential(const Grid& raw_scores, const EditParams& params);

/// lambda_sp on the 1-shot of every actor speaking at the frame's timestamp.
Grid speaker_potential(const std::vector<TranscriptWord>& transcript, const SceneMeta& meta, const EditParams& params);

/// Extends single-actor values (frames x actors) to every shot of the lattice.
Grid lift_higher_order(const Grid& single_values, const ScreenOrder& order, const ShotLattice& lattice);

/// Elementwise C + V + S. Throws Error(Validation) on a shape mismatch.
UnaryField assemble_unary(Grid c, Grid v, Grid s);

}  // namespace autoedit
