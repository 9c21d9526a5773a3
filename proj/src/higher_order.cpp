#include "autoedit/higher_order.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace autoedit {

ScreenOrder screen_order(const std::vector<ActorTrack>& tracks, std::size_t frame_count) {
  const auto n = tracks.size();
  ScreenOrder order(frame_count, std::vector<int>(n, 0));
  std::vector<int> by_x(n);
  for (std::size_t t = 0; t < frame_count; ++t) {
    std::iota(by_x.begin(), by_x.end(), 0);
    std::stable_sort(by_x.begin(), by_x.end(), [&](int a, int b) {
      return tracks[static_cast<size_t>(a)].boxes[t]->cx() < tracks[static_cast<size_t>(b)].boxes[t]->cx();
    });
    for (std::size_t pos = 0; pos < n; ++pos) order[t][static_cast<size_t>(by_x[pos])] = static_cast<int>(pos);
  }
  return order;
}

void lift_frame(std::span<const double> single_values, std::span<const int> rank, const ShotLattice& lattice,
                std::span<double> out) {
  const int n = lattice.actor_count();
  std::vector<double> by_mask(std::size_t{1} << n, 0.0);
  for (ActorMask mask = 1; mask < (ActorMask{1} << n); ++mask) {
    if (std::has_single_bit(mask)) {
      by_mask[mask] = single_values[static_cast<size_t>(std::countr_zero(mask))];
      continue;
    }
    int left = -1, right = -1;
    for (int a = 0; a < n; ++a) {
      if (!((mask >> a) & 1u)) continue;
      if (left < 0 || rank[static_cast<size_t>(a)] < rank[static_cast<size_t>(left)]) left = a;
      if (right < 0 || rank[static_cast<size_t>(a)] > rank[static_cast<size_t>(right)]) right = a;
    }
    by_mask[mask] = pair_potential(by_mask[mask & ~(ActorMask{1} << left)], by_mask[mask & ~(ActorMask{1} << right)]);
  }
  for (int s = 0; s < lattice.size(); ++s) {
    const auto& shot = lattice[s];
    out[static_cast<size_t>(s)] = shot.is_master() ? 0.0 : by_mask[shot.actors];
  }
}

}  // namespace autoedit
