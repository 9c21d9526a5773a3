#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "autoedit/error.hpp"
#include "autoedit/grid.hpp"
#include "autoedit/higher_order.hpp"
#include "autoedit/ingest.hpp"
#include "autoedit/llm.hpp"
#include "autoedit/model.hpp"

namespace autoedit {

/// One entry of the LLM's shot list.
struct ShotSuggestion {
  int index = 0;  // 1-based, as numbered by the model
  ShotId target = ShotId::master();
  std::string raw_name;
  std::string cut_word;
  double cut_time_s = 0.0;

  bool operator==(const ShotSuggestion&) const = default;
};

Prompt build_prompt(const SceneMeta& meta, const std::vector<TranscriptWord>& transcript, SceneKind kind);

/// Parses "<idx>. Shot: <names>, Cut: <word>" entries. Unresolvable names
/// become MASTER with a warning. Throws Error(Parse) when nothing parses.
std::vector<ShotSuggestion> parse_response(std::string_view text, const SceneMeta& meta,
                                           Diagnostics* diag = nullptr);

/// Inverse of parse_response for well-formed lists.
std::string serialize_suggestions(const std::vector<ShotSuggestion>& suggestions);

/// Lower-cases and strips everything that is not a letter or digit.
std::string fold_word(std::string_view word);

std::size_t edit_distance(std::string_view a, std::string_view b);

inline constexpr std::size_t kMaxFuzzyDistance = 2;

/// Assigns cut_time_s by scanning the transcript with a forward cursor.
std::vector<ShotSuggestion> map_cuts(std::vector<ShotSuggestion> suggestions,
                                     const std::vector<TranscriptWord>& transcript, Diagnostics* diag = nullptr);

struct TimelineSegment {
  int suggestion = 0;  // position in the suggestion list
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // exclusive
};

/// Contextual potential for every frame and shot.
struct ContextualTimeline {
  std::vector<TimelineSegment> segments;
  Grid values;  // frames x shots

  /// Suggestion active at frame t.
  int active(std::int64_t t) const;
};

/// Frame segments induced by mapped cut times; they tile [0, frame_count).
std::vector<TimelineSegment> suggestion_segments(const std::vector<ShotSuggestion>& suggestions, const SceneMeta& meta);

/// Contextual values for one frame, given the selected target.
void contextual_frame(const ShotId& selected, std::span<const int> rank, const ShotLattice& lattice, double lambda_c,
                      std::span<double> out);

ContextualTimeline contextual_potential(const std::vector<ShotSuggestion>& suggestions, const SceneMeta& meta,
                                        const ShotLattice& lattice, const ScreenOrder& order,
                                        const EditParams& params);

}  // namespace autoedit
