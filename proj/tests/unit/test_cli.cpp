#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <sys/wait.h>

#include <json.hpp>

#include "autoedit/emit.hpp"
#include "support/fixtures.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string command = std::string(AUTOEDIT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) { return autoedit::read_text_file(path); }

}  // namespace

TEST_CASE("edit writes the artifacts") {
  fixtures::TempDir dir("cli_edit");
  fixtures::SceneOptions o;
  o.frames = 300;
  fixtures::write_bundle(dir / "bundle", o);
  const auto out = dir / "out";
  const auto log = dir / "log.txt";
  REQUIRE(run_cli("edit --project " + (dir / "bundle").string() + " --out " + out.string() + " --emit-diagnostics",
                  log) == 0);
  for (const char* name : {"edit.json", "crops.csv", "render_manifest.txt", "edit.edl", "potentials.csv",
                           "trajectories.csv"}) {
    CHECK(fs::exists(out / name));
  }
  const auto edl = autoedit::edl_from_json(slurp(out / "edit.json"));
  CHECK(edl.strategy == "optimized");
  CHECK(edl.segments.front().rush == "MASTER");
  CHECK(edl.segments.front().end_frame >= 50);
  const auto text = slurp(log);
  for (const char* stage : {"ingest", "dialogue", "rushes", "potentials", "penalties", "solve", "emit", "total"}) {
    CHECK(text.find(stage) != std::string::npos);
  }
  CHECK(text.find("energy") != std::string::npos);

  SUBCASE("repeat runs are byte identical") {
    const auto again = dir / "again";
    REQUIRE(run_cli("edit --project " + (dir / "bundle").string() + " --out " + again.string(), log) == 0);
    CHECK(slurp(out / "edit.json") == slurp(again / "edit.json"));
    CHECK(slurp(out / "crops.csv") == slurp(again / "crops.csv"));
  }
  SUBCASE("wide baseline") {
    const auto wide = dir / "wide";
    REQUIRE(run_cli("edit --project " + (dir / "bundle").string() + " --out " + wide.string() + " --baseline wide",
                    log) == 0);
    const auto w = autoedit::edl_from_json(slurp(wide / "edit.json"));
    REQUIRE(w.segments.size() == 1);
    CHECK(w.segments[0].rush == "A+B+C");
    CHECK(w.strategy == "wide");
  }
  SUBCASE("exact mode and parameter file") {
    fixtures::write_file(dir / "params.json", R"({"m": 3, "dp_mode": "exact"})");
    const auto exact = dir / "exact";
    REQUIRE(run_cli("edit --project " + (dir / "bundle").string() + " --out " + exact.string() + " --params " +
                        (dir / "params.json").string() + " --offline --strict",
                    log) == 0);
    CHECK(autoedit::edl_from_json(slurp(exact / "edit.json")).mode == "exact");
  }
}

TEST_CASE("edit refusals and exit codes") {
  fixtures::TempDir dir("cli_fail");
  fixtures::SceneOptions o;
  o.frames = 100;
  o.llm_cache = false;
  fixtures::write_bundle(dir / "bundle", o);
  const auto log = dir / "log.txt";
  const auto out = dir / "out";

  CHECK(run_cli("edit --project " + (dir / "bundle").string() + " --out " + out.string() + " --offline", log) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(slurp(log).find("llm_response.txt") != std::string::npos);

  fixtures::write_file(dir / "bad.json", R"({"alpha": 0.9})");
  CHECK(run_cli("edit --project " + (dir / "bundle").string() + " --out " + out.string() + " --params " +
                    (dir / "bad.json").string() + " --baseline wide",
                log) == 2);
  CHECK(run_cli("edit --project " + (dir / "bundle").string() + " --mode slow", log) == 2);
  CHECK(run_cli("edit", log) == 2);
  CHECK(run_cli("edit --project " + (dir / "nothing").string(), log) == 1);
}

TEST_CASE("inspect") {
  fixtures::TempDir dir("cli_inspect");
  fixtures::SceneOptions o;
  o.frames = 100;
  fixtures::write_bundle(dir / "bundle", o);
  const auto log = dir / "log.txt";
  REQUIRE(run_cli("inspect --project " + (dir / "bundle").string(), log) == 0);
  const auto text = slurp(log);
  CHECK(text.find("actors      3") != std::string::npos);
  CHECK(text.find("frames      100") != std::string::npos);
  CHECK(text.find("llm cache   present") != std::string::npos);

  fixtures::write_file(dir / "bundle" / "transcript.json", R"([{"text": "a", "start_s": 1.0, "end_s": 0.5}])");
  CHECK(run_cli("inspect --project " + (dir / "bundle").string(), log) == 2);
  CHECK(slurp(log).find("word 0") != std::string::npos);

  fs::create_directories(dir / "empty");
  CHECK(run_cli("inspect --project " + (dir / "empty").string(), log) == 1);
  CHECK(slurp(log).find("meta.json") != std::string::npos);
}
