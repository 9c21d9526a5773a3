"""Automatic shot selection over virtual-camera rushes."""

import json

from . import _core
from ._core import Error, pair_potential, shot_labels

__all__ = ["Error", "default_params", "edit_cost", "pair_potential", "run", "shot_labels", "solve",
           "validate_params"]


def _dump(params):
    return "" if not params else json.dumps(params)


def default_params():
    return json.loads(_core.default_params())


def validate_params(params):
    """Returns the defaults overlaid with ``params``; raises Error on a bad value."""
    return json.loads(_core.validate_params(_dump(params)))


def solve(unary, rects, poor, fps=25.0, params=None, forced=None):
    """Returns (shot index per frame, energy). ``unary`` is (frames, shots)."""
    shots, energy = _core.solve(unary, rects, poor, fps, _dump(params), list(forced or []))
    return list(shots), energy


def edit_cost(shots, unary, rects, poor, fps=25.0, params=None):
    return _core.edit_cost(list(shots), unary, rects, poor, fps, _dump(params))


def run(project, out=None, params=None, offline=True, baseline=None, seed=0, diagnostics=False):
    """Runs the full pipeline on a project directory. The ``edl`` entry is parsed JSON."""
    result = dict(_core.run(str(project), None if out is None else str(out), _dump(params), offline, baseline,
                            seed, diagnostics))
    result["edl"] = json.loads(result["edl"])
    result["written"] = [str(p) for p in result["written"]]
    return result
