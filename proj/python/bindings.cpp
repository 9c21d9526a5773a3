#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "autoedit/higher_order.hpp"
#include "autoedit/pipeline.hpp"

namespace py = pybind11;
using namespace autoedit;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

FrameRate rate_of(double fps) {
  if (!(fps > 0.0)) throw Error(ErrorKind::Validation, "python", "fps must be positive");
  const auto scaled = static_cast<std::int64_t>(std::llround(fps * 1000.0));
  return scaled % 1000 == 0 ? FrameRate{scaled / 1000, 1} : FrameRate{scaled, 1000};
}

EditParams params_of(const std::string& json_text) {
  EditParams p;
  if (!json_text.empty()) merge_params(p, nlohmann::json::parse(json_text));
  p.validate();
  return p;
}

Grid grid_of(const Array& a, const char* name) {
  if (a.ndim() != 2) throw Error(ErrorKind::Validation, "python", std::string(name) + " must be 2-D");
  Grid g(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto v = a.unchecked<2>();
  for (py::ssize_t r = 0; r < a.shape(0); ++r) {
    for (py::ssize_t c = 0; c < a.shape(1); ++c) g(r, c) = v(r, c);
  }
  return g;
}

// rects: (shots, frames, 4) as cx, cy, h, aspect. poor: (shots, frames), nonzero marks misframing.
PenaltyContext context_of(const Array& rects, const Array& poor, double fps) {
  if (rects.ndim() != 3 || rects.shape(2) != 4) {
    throw Error(ErrorKind::Validation, "python", "rects must have shape (shots, frames, 4)");
  }
  if (poor.ndim() != 2 || poor.shape(0) != rects.shape(0) || poor.shape(1) != rects.shape(1)) {
    throw Error(ErrorKind::Validation, "python", "poor must have shape (shots, frames)");
  }
  auto r = rects.unchecked<3>();
  auto m = poor.unchecked<2>();
  std::vector<std::vector<Rect>> table(static_cast<std::size_t>(rects.shape(0)));
  std::vector<std::vector<char>> flags(table.size());
  for (py::ssize_t s = 0; s < rects.shape(0); ++s) {
    for (py::ssize_t t = 0; t < rects.shape(1); ++t) {
      table[s].push_back(Rect{r(s, t, 0), r(s, t, 1), r(s, t, 2), r(s, t, 3)});
      flags[s].push_back(m(s, t) != 0.0 ? 1 : 0);
    }
  }
  return PenaltyContext(std::move(table), std::move(flags), rate_of(fps));
}

py::dict run_project(const std::filesystem::path& project_dir, const std::optional<std::filesystem::path>& out_dir,
                     const std::string& params_json, bool offline, const std::optional<std::string>& baseline_name,
                     std::uint64_t seed, bool diagnostics) {
  Diagnostics diag;
  EditDecisionList edl;
  PipelineResult result;
  std::vector<std::filesystem::path> written;
  EditParams params;
  {
    py::gil_scoped_release release;
    auto bundle = load_bundle(project_dir, std::nullopt, &diag);
    params = bundle.params;
    if (!params_json.empty()) merge_params(params, nlohmann::json::parse(params_json));
    Strategy strategy;
    if (baseline_name) strategy.baseline = parse_baseline_kind(*baseline_name);
    strategy.seed = seed;
    PrepareOptions options;
    options.offline = offline;
    options.need_dialogue = !strategy.baseline;
    const auto project = prepare_project(std::move(bundle), options, &diag);
    result = run_pipeline(project, params, strategy, &diag);
    edl = make_edl(result.seq, project.lattice, result.rushes, project.bundle.meta, strategy.name(),
                   to_string(params.dp_mode));
    if (out_dir) written = write_outputs(*out_dir, project, result, params, strategy, {true, diagnostics});
  }
  py::dict out;
  out["edl"] = edl_to_json(edl);
  out["shots"] = result.seq.shots;
  out["energy"] = result.seq.energy;
  out["cap_hit"] = result.cap_hit;
  out["warnings"] = diag.warnings;
  out["timings"] = result.timings;
  out["written"] = written;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the autoedit shot-selection engine.";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(e.what());
      inst.attr("kind") = to_string(e.kind());
      inst.attr("stage") = e.stage();
      PyErr_SetObject(error.ptr(), inst.ptr());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("default_params", [] {
    nlohmann::json j;
    to_json(j, EditParams{});
    return j.dump();
  }, "Default parameters as a JSON string.");

  m.def("validate_params", [](const std::string& text) {
    nlohmann::json j;
    to_json(j, params_of(text));
    return j.dump();
  }, py::arg("params_json"), "Merges a JSON object over the defaults, validates, returns the result.");

  m.def("pair_potential", &pair_potential, py::arg("a"), py::arg("b"));

  m.def("shot_labels", [](const std::vector<std::string>& actor_ids, int max_actors) {
    SceneMeta meta;
    meta.actor_ids = actor_ids;
    std::vector<std::string> labels;
    for (const auto& shot : enumerate_shots(meta, max_actors)) labels.push_back(shot_label(shot, meta));
    return labels;
  }, py::arg("actor_ids"), py::arg("max_actors") = kDefaultMaxActors);

  m.def("edit_cost", [](const std::vector<int>& shots, const Array& unary, const Array& rects, const Array& poor,
                        double fps, const std::string& params_json) {
    const auto ctx = context_of(rects, poor, fps);
    return evaluate_edit_cost(shots, grid_of(unary, "unary"), ctx, params_of(params_json));
  }, py::arg("shots"), py::arg("unary"), py::arg("rects"), py::arg("poor"), py::arg("fps") = 25.0,
        py::arg("params_json") = "");

  m.def("solve", [](const Array& unary, const Array& rects, const Array& poor, double fps,
                    const std::string& params_json, std::vector<int> forced) {
    const auto grid = grid_of(unary, "unary");
    const auto ctx = context_of(rects, poor, fps);
    const auto params = params_of(params_json);
    EditSequence seq;
    {
      py::gil_scoped_release release;
      seq = solve(grid, ctx, params, SolveOptions{std::move(forced)});
    }
    return py::make_tuple(seq.shots, seq.energy);
  }, py::arg("unary"), py::arg("rects"), py::arg("poor"), py::arg("fps") = 25.0, py::arg("params_json") = "",
        py::arg("forced") = std::vector<int>{},
        "Minimises the edit energy. unary is (frames, shots). Returns (shots per frame, energy).");

  m.def("run", &run_project, py::arg("project"), py::arg("out") = py::none(), py::arg("params_json") = "",
        py::arg("offline") = true, py::arg("baseline") = py::none(), py::arg("seed") = 0,
        py::arg("diagnostics") = false);
}
