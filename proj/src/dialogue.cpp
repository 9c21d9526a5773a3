#include "autoedit/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <sstream>

namespace autoedit {

namespace {

constexpr const char* kSystemMessage =
    "You are an editor who has to perform shot selection in dialogue driven scenes.";

constexpr const char* kTheatreDescription =
    "The scene below contains text transcripts of a scene from a theatre play.";

constexpr const char* kQuizInstruction =
    "For the given text, please suggest which person or set of persons should be shown at each time. "
    "Please explicitly suggest the timing of the cut (after which word cut should happen). For example, "
    "if the first shot is Tommy, second shot is contestants, third shot is Grant then the answer should "
    "in the format: 1. Shot: Tommy, Cut: <after which word cut should happen>, 2. Shot: Contestants, "
    "Cut: <after which word cut should happen>, 3. Shot: Grant, Cut: <after which word cut should happen>. "
    "For the shot at the end of the scene you can give the cut as the last word of the scene.";

constexpr const char* kTheatreInstruction =
    "For the given text, please suggest which person or set of actors should be shown at each time. "
    "Please explicitly suggest the timing of the cut (after which word cut should happen). For example, "
    "if the first shot is actorX, second shot is (actorX and actorY), third shot is actorZ then the answer "
    "should in the format: 1. Shot: actorX, Cut: <after which word cut should happen>, 2. Shot: (actorX and "
    "actorY), Cut: <after which word cut should happen>, 3. Shot: actorZ, Cut: <after which word cut should "
    "happen>. For the shot at the end of the scene you can give the cut as the last word of the scene.";

std::string count_word(std::size_t n) {
  static const char* words[] = {"zero", "one", "two", "three", "four", "five",
                                "six",  "seven", "eight", "nine", "ten"};
  return n < std::size(words) ? words[n] : std::to_string(n);
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::string quiz_description(const SceneMeta& meta) {
  const ActorIndex host = meta.quizmaster.value_or(0);
  std::vector<std::string> contestants;
  for (int a = 0; a < meta.actor_count(); ++a) {
    if (a != host) contestants.push_back(meta.actor_ids[static_cast<size_t>(a)]);
  }
  std::string out = "The scene below contains text transcripts of a quiz show, where the quizmaster is " +
                    meta.actor_ids[static_cast<size_t>(host)];
  if (contestants.size() == 1) {
    out += " and there is one contestant named " + contestants.front();
  } else if (!contestants.empty()) {
    out += " and there are " + count_word(contestants.size()) + " contestants named " + join_names(contestants);
  }
  return out + ".";
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Drops list punctuation and markdown decoration around a field.
std::string clean_field(std::string_view s) {
  std::string out = trim(s);
  auto strip = [](char c) { return c == ',' || c == ';' || c == '*' || c == '"' || c == '\'' || c == '`' ||
                                   c == '<' || c == '>' || std::isspace(static_cast<unsigned char>(c)); };
  while (!out.empty() && strip(out.back())) out.pop_back();
  std::size_t b = 0;
  while (b < out.size() && strip(out[b])) ++b;
  out.erase(0, b);
  // A trailing full stop belongs to the sentence, not the word.
  while (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

std::optional<ActorMask> resolve_name(const std::string& name, const SceneMeta& meta) {
  const auto key = lower(trim(name));
  if (key.empty()) return std::nullopt;
  for (int a = 0; a < meta.actor_count(); ++a) {
    if (lower(meta.actor_ids[static_cast<size_t>(a)]) == key) return ActorMask{1} << a;
  }
  if (auto it = meta.actor_aliases.find(key); it != meta.actor_aliases.end()) return it->second;
  return std::nullopt;
}

ShotId resolve_target(const std::string& raw, const SceneMeta& meta, Diagnostics* diag) {
  std::string name;
  for (char c : raw) {
    if (c != '(' && c != ')' && c != '[' && c != ']') name += c;
  }
  if (auto whole = resolve_name(name, meta)) return ShotId::subset(*whole);

  static const std::regex separators(R"(\s+and\s+|\s*&\s*|\s*,\s*|\s*/\s*|\s*\+\s*)", std::regex::icase);
  ActorMask mask = 0;
  std::vector<std::string> unresolved;
  for (std::sregex_token_iterator it(name.begin(), name.end(), separators, -1), end; it != end; ++it) {
    const auto part = trim(it->str());
    if (part.empty()) continue;
    if (auto m = resolve_name(part, meta)) {
      mask |= *m;
    } else {
      unresolved.push_back(part);
    }
  }
  if (mask == 0) {
    if (diag) diag->warn("shot name '" + raw + "' matches no actor or alias; using MASTER");
    return ShotId::master();
  }
  if (!unresolved.empty() && diag) {
    diag->warn("shot name '" + raw + "': ignoring unknown name(s) '" + join_names(unresolved) + "'");
  }
  return ShotId::subset(mask);
}

std::string last_token(const std::string& phrase) {
  std::istringstream in(phrase);
  std::string token, last;
  while (in >> token) {
    if (!fold_word(token).empty()) last = token;
  }
  return fold_word(last);
}

}  // namespace

Prompt build_prompt(const SceneMeta& meta, const std::vector<TranscriptWord>& transcript, SceneKind kind) {
  std::ostringstream user;
  user << (kind == SceneKind::Quiz ? quiz_description(meta) : std::string(kTheatreDescription)) << "\n\n";

  // Consecutive words of one speaker form one line.
  std::optional<std::optional<ActorIndex>> current;
  for (const auto& word : transcript) {
    if (!current || *current != word.speaker) {
      if (current) user << "\n";
      user << (word.speaker ? meta.actor_ids[static_cast<size_t>(*word.speaker)] : std::string("UNKNOWN")) << ":";
      current = word.speaker;
    }
    user << " " << word.text;
  }
  if (current) user << "\n";
  user << "\n" << (kind == SceneKind::Quiz ? kQuizInstruction : kTheatreInstruction);
  return {kSystemMessage, user.str()};
}

std::vector<ShotSuggestion> parse_response(std::string_view text, const SceneMeta& meta, Diagnostics* diag) {
  static const std::regex entry_head(R"((\d+)\s*[.)]\s*\**\s*Shot\s*\**\s*:)", std::regex::icase);
  static const std::regex cut_marker(R"(\**\s*Cut\s*\**\s*:)", std::regex::icase);

  const std::string body(text);
  std::vector<std::smatch> heads;
  for (std::sregex_iterator it(body.begin(), body.end(), entry_head), end; it != end; ++it) heads.push_back(*it);

  std::vector<ShotSuggestion> out;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const auto begin = static_cast<std::size_t>(heads[i].position(0) + heads[i].length(0));
    const auto stop = i + 1 < heads.size() ? static_cast<std::size_t>(heads[i + 1].position(0)) : body.size();
    const std::string entry = body.substr(begin, stop - begin);

    std::smatch cut;
    if (!std::regex_search(entry, cut, cut_marker)) {
      if (diag) diag->warn("entry " + heads[i][1].str() + " has no 'Cut:' field; skipped");
      continue;
    }
    ShotSuggestion s;
    s.index = std::stoi(heads[i][1].str());
    s.raw_name = clean_field(entry.substr(0, static_cast<std::size_t>(cut.position(0))));
    const auto rest = entry.substr(static_cast<std::size_t>(cut.position(0) + cut.length(0)));
    // The cut field ends at the first line break.
    s.cut_word = clean_field(rest.substr(0, rest.find('\n')));
    s.target = resolve_target(s.raw_name, meta, diag);
    out.push_back(std::move(s));
  }

  if (out.empty()) {
    std::string excerpt(text.substr(0, std::min<std::size_t>(text.size(), 2000)));
    throw Error(ErrorKind::Parse, "dialogue", "no '<n>. Shot: <name>, Cut: <word>' entries in LLM response:\n" + excerpt);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

std::string serialize_suggestions(const std::vector<ShotSuggestion>& suggestions) {
  std::ostringstream out;
  for (const auto& s : suggestions) out << s.index << ". Shot: " << s.raw_name << ", Cut: " << s.cut_word << "\n";
  return out.str();
}

std::string fold_word(std::string_view word) {
  std::string out;
  for (unsigned char c : word) {
    if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<ShotSuggestion> map_cuts(std::vector<ShotSuggestion> suggestions,
                                     const std::vector<TranscriptWord>& transcript, Diagnostics* diag) {
  if (suggestions.empty()) return suggestions;
  if (transcript.empty()) {
    for (auto& s : suggestions) s.cut_time_s = 0.0;
    return suggestions;
  }

  std::vector<std::string> folded;
  folded.reserve(transcript.size());
  for (const auto& w : transcript) folded.push_back(fold_word(w.text));

  const std::size_t last = transcript.size() - 1;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k + 1 < suggestions.size(); ++k) {
    auto& s = suggestions[k];
    const auto target = last_token(s.cut_word);
    std::optional<std::size_t> match;

    if (!target.empty()) {
      for (std::size_t j = cursor; j < folded.size(); ++j) {
        if (folded[j] == target) {
          match = j;
          break;
        }
      }
      if (!match) {
        std::size_t best = kMaxFuzzyDistance + 1;
        for (std::size_t j = cursor; j < folded.size(); ++j) {
          const auto d = edit_distance(folded[j], target);
          if (d < best) {
            best = d;
            match = j;
          }
        }
        if (match && diag) {
          diag->warn("cut word '" + s.cut_word + "' fuzzy-matched '" + transcript[*match].text + "' (distance " +
                     std::to_string(best) + ")");
        }
      }
    }
    if (!match) {
      match = std::min(cursor, last);
      if (diag) diag->warn("cut word '" + s.cut_word + "' not found; cutting after '" + transcript[*match].text + "'");
    }
    s.cut_time_s = transcript[*match].end_s;
    cursor = *match + 1;
  }
  suggestions.back().cut_time_s = transcript.back().end_s;
  return suggestions;
}

int ContextualTimeline::active(std::int64_t t) const {
  for (const auto& seg : segments) {
    if (t >= seg.start_frame && t < seg.end_frame) return seg.suggestion;
  }
  return segments.empty() ? -1 : segments.back().suggestion;
}

std::vector<TimelineSegment> suggestion_segments(const std::vector<ShotSuggestion>& suggestions, const SceneMeta& meta) {
  std::vector<TimelineSegment> segments;
  const double fps = meta.fps.value();
  std::int64_t start = 0;
  for (std::size_t k = 0; k < suggestions.size(); ++k) {
    std::int64_t end = meta.frame_count;
    if (k + 1 < suggestions.size()) {
      // First frame whose timestamp t / fps is at or past the cut.
      end = static_cast<std::int64_t>(std::ceil(suggestions[k].cut_time_s * fps - 1e-9));
      end = std::clamp(end, start, meta.frame_count);
    }
    segments.push_back({static_cast<int>(k), start, end});
    start = end;
  }
  return segments;
}

void contextual_frame(const ShotId& selected, std::span<const int> rank, const ShotLattice& lattice, double lambda_c,
                      std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (selected.is_master()) {
    out[static_cast<size_t>(lattice.master_index())] = lambda_c;
    return;
  }

  const int p = selected.actor_count();
  if (p == 1) {
    // Direct assignment: every group containing the actor gets lambda_c / p.
    const int actor = std::countr_zero(selected.actors);
    for (int s = 0; s < lattice.size(); ++s) {
      const auto& shot = lattice[s];
      if (shot.is_master() || !shot.contains(actor)) continue;
      out[static_cast<size_t>(s)] = lambda_c / shot.actor_count();
    }
    return;
  }

  std::vector<double> singles(static_cast<size_t>(lattice.actor_count()), 0.0);
  const double member_value = lambda_c / std::ldexp(1.0, p - 1);
  for (int a = 0; a < lattice.actor_count(); ++a) {
    if (selected.contains(a)) singles[static_cast<size_t>(a)] = member_value;
  }
  lift_frame(singles, rank, lattice, out);
}

ContextualTimeline contextual_potential(const std::vector<ShotSuggestion>& suggestions, const SceneMeta& meta,
                                        const ShotLattice& lattice, const ScreenOrder& order,
                                        const EditParams& params) {
  ContextualTimeline timeline;
  const auto frames = static_cast<size_t>(meta.frame_count);
  timeline.values = Grid(frames, static_cast<size_t>(lattice.size()), 0.0);
  if (suggestions.empty()) return timeline;

  timeline.segments = suggestion_segments(suggestions, meta);
  for (const auto& seg : timeline.segments) {
    const auto& selected = suggestions[static_cast<size_t>(seg.suggestion)].target;
    for (auto t = seg.start_frame; t < seg.end_frame; ++t) {
      contextual_frame(selected, order[static_cast<size_t>(t)], lattice, params.lambda_c,
                       timeline.values.row(static_cast<size_t>(t)));
    }
  }
  return timeline;
}

}  // namespace autoedit
