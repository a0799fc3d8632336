"""JSON form of a Morse-Smale complex.

Floats are written with 17 significant digits so a reload reproduces them
bit for bit; key order and list order are fixed, so equal complexes give
equal bytes.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .cellgrid import CellId, Grid
from .morse import CriticalCell, MorseSmaleComplex, Separatrix

__all__ = ["dumps", "msc_to_dict", "msc_to_json", "msc_from_json", "load_msc"]


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite float in JSON output")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj) -> str:
    """Compact JSON with fixed-precision floats."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    return _num(obj)


def msc_to_dict(msc: MorseSmaleComplex) -> dict:
    g = msc.grid
    return {
        "grid": {
            "width": g.width,
            "height": g.height,
            "pixel_w": g.pixel_w,
            "pixel_h": g.pixel_h,
            "origin": list(g.origin),
        },
        "criticals": [
            {"cell": [c.cell.cx, c.cell.cy], "index": c.index, "value": c.value, "pos": list(c.position)}
            for c in msc.criticals
        ],
        "separatrices": [
            {
                "index": s.index,
                "start": s.start,
                "end": s.end,
                "one_sided": s.one_sided,
                "points": s.polyline.tolist(),
            }
            for s in msc.separatrices
        ],
    }


def msc_to_json(msc: MorseSmaleComplex) -> str:
    return dumps(msc_to_dict(msc)) + "\n"


def msc_from_json(text: str) -> MorseSmaleComplex:
    """Rebuild a complex.  Sample values are not stored, so the grid holds zeros."""
    d = json.loads(text)
    g = d["grid"]
    grid = Grid(np.zeros((g["height"], g["width"])), g["pixel_w"], g["pixel_h"], tuple(g["origin"]))
    x0, y0 = grid.origin
    crit = [
        CriticalCell(CellId(*c["cell"]), int(c["index"]), float(c["value"]), tuple(c["pos"]))
        for c in d["criticals"]
    ]
    seps = []
    for s in d["separatrices"]:
        pts = np.asarray(s["points"], dtype=np.float64).reshape(-1, 2)
        cells = np.column_stack([
            np.rint(2 * (pts[:, 0] - x0) / grid.pixel_w),
            np.rint(2 * (pts[:, 1] - y0) / grid.pixel_h),
        ]).astype(np.int64)
        seps.append(Separatrix(int(s["index"]), int(s["start"]), s["end"], cells, pts, bool(s.get("one_sided", False))))
    return MorseSmaleComplex(grid, crit, seps)


def load_msc(path) -> MorseSmaleComplex:
    with open(path) as fh:
        return msc_from_json(fh.read())
