#pragma once

#include <span>
#include <vector>

#include "autoedit/ingest.hpp"
#include "autoedit/model.hpp"

namespace autoedit {

/// a + b - |a - b|, the pairwise combiner used to build group-shot potentials.
/// Evaluated as 2 * min(a, b), which is the same value without rounding error.
inline double pair_potential(double a, double b) { return 2.0 * (a < b ? a : b); }

/// Left-to-right screen rank of every actor per frame: rank[t][a] = position
/// of actor a when sorted by box center x (ties in canonical order).
using ScreenOrder = std::vector<std::vector<int>>;

ScreenOrder screen_order(const std::vector<ActorTrack>& tracks, std::size_t frame_count);

/// Values for every shot of `lattice`, given single-actor values and the
/// current screen ranks. A group is combined from its two sub-groups that drop
/// its leftmost and its rightmost member: v(Y) = pair(v(Y - left), v(Y - right)).
/// MASTER gets 0.
void lift_frame(std::span<const double> single_values, std::span<const int> rank, const ShotLattice& lattice,
                std::span<double> out);

}  // namespace autoedit
