#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "autoedit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace autoedit;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kLlm = 3, kCapped = 4 };

struct CliConfig {
  std::string project;
  std::string out = "out";
  std::string params;
  std::string mode;
  std::string baseline;
  std::uint64_t seed = 0;
  bool offline = false;
  bool emit_diagnostics = false;
  bool strict = false;
  int verbosity = 0;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::Config:
    case ErrorKind::Capacity:
    case ErrorKind::Range:
      return kInvalid;
    case ErrorKind::Llm:
    case ErrorKind::Parse:
      return kLlm;
    case ErrorKind::Io:
      return kFailure;
  }
  return kFailure;
}

void print_warnings(const Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
}

ProjectBundle load(const CliConfig& cfg, Diagnostics& diag) {
  std::optional<fs::path> params;
  if (!cfg.params.empty()) params = cfg.params;
  return load_bundle(cfg.project, params, &diag);
}

int run_inspect(const CliConfig& cfg) {
  Diagnostics diag;
  const auto bundle = load(cfg, diag);
  const auto& meta = bundle.meta;
  std::printf("project     %s\n", meta.project_id.c_str());
  std::printf("actors      %d\n", meta.actor_count());
  std::printf("frames      %lld\n", static_cast<long long>(meta.frame_count));
  std::printf("fps         %lld/%lld (%.3f)\n", static_cast<long long>(meta.fps.num),
              static_cast<long long>(meta.fps.den), meta.fps.value());
  std::printf("duration    %.2f s\n", meta.duration_s());
  std::printf("frame size  %dx%d\n", meta.frame_width, meta.frame_height);
  std::printf("scene       %s\n", to_string(meta.scene_kind));
  for (std::size_t a = 0; a < bundle.tracks.size(); ++a) {
    std::printf("coverage    %-12s %.1f%%\n", meta.actor_ids[a].c_str(), bundle.tracks[a].coverage() * 100.0);
  }
  std::printf("words       %zu\n", bundle.transcript.size());
  const char* saliency = std::holds_alternative<SaliencyScores>(bundle.saliency)  ? "scores"
                         : std::holds_alternative<SaliencyMaps>(bundle.saliency) ? "maps"
                                                                                 : "none";
  std::printf("saliency    %s\n", saliency);
  std::printf("llm cache   %s\n", bundle.llm_cache ? "present" : "missing");
  if (cfg.verbosity > 0) print_warnings(diag);
  return kOk;
}

int run_edit(const CliConfig& cfg) {
  const fs::path project_dir(cfg.project);
  Strategy strategy;
  if (!cfg.baseline.empty()) strategy.baseline = parse_baseline_kind(cfg.baseline);
  strategy.seed = cfg.seed;
  const bool need_dialogue = !strategy.baseline;

  if (cfg.offline && !fs::exists(project_dir / "llm_response.txt")) {
    throw Error(ErrorKind::Config, "cli",
                "--offline needs a cached LLM response at " + (project_dir / "llm_response.txt").string());
  }

  const auto start = std::chrono::steady_clock::now();
  Diagnostics diag;
  auto bundle = load(cfg, diag);
  if (!cfg.mode.empty()) bundle.params.dp_mode = parse_dp_mode(cfg.mode);
  bundle.params.validate();
  const auto params = bundle.params;
  const auto loaded = std::chrono::steady_clock::now();

  PrepareOptions options;
  options.offline = cfg.offline;
  options.need_dialogue = need_dialogue;
  const auto project = prepare_project(std::move(bundle), options, &diag);
  const auto prepared = std::chrono::steady_clock::now();

  auto result = run_pipeline(project, params, strategy, &diag);
  const auto emit_start = std::chrono::steady_clock::now();
  EmitOptions emit;
  emit.diagnostics = cfg.emit_diagnostics;
  const auto written = write_outputs(cfg.out, project, result, params, strategy, emit);
  const auto done = std::chrono::steady_clock::now();

  auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
  std::printf("%-12s %8.3f s\n", "ingest", secs(start, loaded));
  std::printf("%-12s %8.3f s\n", "dialogue", secs(loaded, prepared));
  for (const auto& [stage, seconds] : result.timings) std::printf("%-12s %8.3f s\n", stage.c_str(), seconds);
  std::printf("%-12s %8.3f s\n", "emit", secs(emit_start, done));
  std::printf("%-12s %8.3f s\n", "total", secs(start, done));
  std::printf("strategy     %s (%s)\n", strategy.name().c_str(), to_string(params.dp_mode));
  std::printf("segments     %zu\n", result.seq.segments.size());
  std::printf("energy       %.6f\n", result.seq.energy);
  if (cfg.verbosity > 0) {
    for (const auto& path : written) std::printf("wrote        %s\n", path.string().c_str());
  }
  print_warnings(diag);
  if (cfg.strict && result.cap_hit) {
    std::cerr << "error: a solver reached its cap and --strict is set\n";
    return kCapped;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automatic shot selection for static wide-angle recordings"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--project", cfg.project, "Project bundle directory")->required();
    cmd->add_option("--params", cfg.params, "Parameter file (JSON)");
    cmd->add_flag("-v,--verbose", cfg.verbosity, "More output");
  };

  auto* edit = app.add_subcommand("edit", "Compute an edit and write it to --out");
  add_common(edit);
  edit->add_option("--out", cfg.out, "Output directory");
  edit->add_option("--mode", cfg.mode, "Dynamic program variant")->check(CLI::IsMember({"fast", "exact"}));
  edit->add_option("--baseline", cfg.baseline, "Use a baseline strategy instead of the optimizer")
      ->check(CLI::IsMember({"random", "wide", "speaker"}));
  edit->add_option("--seed", cfg.seed, "Seed for the random baseline");
  edit->add_flag("--offline", cfg.offline, "Never contact the LLM endpoint");
  edit->add_flag("--emit-diagnostics", cfg.emit_diagnostics, "Also write potentials and trajectories as CSV");
  edit->add_flag("--strict", cfg.strict, "Exit with status 4 when a solver hits its cap");

  auto* inspect = app.add_subcommand("inspect", "Summarize a project bundle");
  add_common(inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    return edit->parsed() ? run_edit(cfg) : run_inspect(cfg);
  } catch (const Error& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
