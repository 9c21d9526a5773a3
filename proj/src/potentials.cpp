#include "autoedit/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autoedit/error.hpp"

namespace autoedit {

Grid normalize_saliency(const Grid& raw_scores) {
  Grid out(raw_scores.rows(), raw_scores.cols(), 0.0);
  for (std::size_t t = 0; t < raw_scores.rows(); ++t) {
    const auto row = raw_scores.row(t);
    const double max = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
    if (max <= 0.0) continue;
    for (std::size_t a = 0; a < row.size(); ++a) out(t, a) = row[a] / max;
  }
  return out;
}

Grid saliency_potential(const Grid& raw_scores, const EditParams& params) {
  const Grid normalized = normalize_saliency(raw_scores);
  Grid out(normalized.rows(), normalized.cols(), 0.0);
  std::vector<std::size_t> order(normalized.cols());
  for (std::size_t t = 0; t < normalized.rows(); ++t) {
    const auto row = normalized.row(t);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    if (!order.empty() && row[order[0]] > 0.0) out(t, order[0]) = params.lambda_sal;
    if (order.size() > 1 && row[order[1]] > 0.0) out(t, order[1]) = params.lambda_sal / 2.0;
  }
  return out;
}

Grid speaker_potential(const std::vector<TranscriptWord>& transcript, const SceneMeta& meta, const EditParams& params) {
  const auto frames = static_cast<std::size_t>(meta.frame_count);
  Grid out(frames, static_cast<std::size_t>(meta.actor_count()), 0.0);
  const double fps = meta.fps.value();
  for (const auto& word : transcript) {
    if (!word.speaker) continue;
    const auto first = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(word.start_s * fps)) - 1);
    const auto last = std::min<std::int64_t>(meta.frame_count - 1, static_cast<std::int64_t>(std::ceil(word.end_s * fps)) + 1);
    for (auto t = first; t <= last; ++t) {
      // Membership is decided on the frame timestamp itself.
      const double time = static_cast<double>(t) / fps;
      if (time >= word.start_s && time <= word.end_s) {
        out(static_cast<std::size_t>(t), static_cast<std::size_t>(*word.speaker)) = params.lambda_sp;
      }
    }
  }
  return out;
}

Grid lift_higher_order(const Grid& single_values, const ScreenOrder& order, const ShotLattice& lattice) {
  Grid out(single_values.rows(), static_cast<std::size_t>(lattice.size()), 0.0);
  for (std::size_t t = 0; t < single_values.rows(); ++t) {
    lift_frame(single_values.row(t), order[t], lattice, out.row(t));
  }
  return out;
}

UnaryField assemble_unary(Grid c, Grid v, Grid s) {
  if (!c.same_shape(v) || !c.same_shape(s)) {
    throw Error(ErrorKind::Validation, "potentials",
                "potential grids differ in shape: C " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                    ", V " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) + ", S " +
                    std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  }
  Grid u(c.rows(), c.cols(), 0.0);
  for (std::size_t t = 0; t < c.rows(); ++t) {
    for (std::size_t k = 0; k < c.cols(); ++k) u(t, k) = c(t, k) + v(t, k) + s(t, k);
  }
  return {std::move(c), std::move(v), std::move(s), std::move(u)};
}

}  // namespace autoedit
