"""Combinatorial gradient fields and Morse-Smale complexes on grids.

The gradient is built one lower star at a time.  Lower stars partition the
cells, each vertex only writes the codes of its own lower star, and the
random stream of a vertex depends only on ``(seed, vertex index)``, so the
result does not depend on how the rows are split between threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .cellgrid import CellId, Grid, cell_dim, cell_value, geometric_center, lattice_shape
from .selection import DIRECTION_STEPS, SelectionStrategy, get_strategy

__all__ = [
    "UNPAIRED_CRITICAL",
    "PAIRED_LEFT",
    "PAIRED_RIGHT",
    "PAIRED_DOWN",
    "PAIRED_UP",
    "GradientField",
    "CriticalCell",
    "Separatrix",
    "MorseSmaleComplex",
    "BranchMissing",
    "lower_star",
    "process_lower_star",
    "compute_gradient",
    "critical_cells",
    "trace_separatrix",
    "extract_ms_complex",
    "resolve_threads",
]

UNPAIRED_CRITICAL, PAIRED_LEFT, PAIRED_RIGHT, PAIRED_DOWN, PAIRED_UP = range(5)

_MASK64 = (1 << 64) - 1


class BranchMissing(LookupError):
    """The requested side of a saddle lies outside the domain."""


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("MSGRAD_THREADS", "0") or 0) or 1
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


@dataclass(eq=False)
class GradientField:
    """Pairing code per lattice cell, indexed ``[cy, cx]``."""

    codes: np.ndarray
    width: int
    height: int

    @classmethod
    def empty(cls, grid: Grid) -> GradientField:
        return cls(np.zeros(lattice_shape(grid), dtype=np.uint8), grid.width, grid.height)

    def __eq__(self, other):
        return isinstance(other, GradientField) and np.array_equal(self.codes, other.codes)

    def freeze(self) -> GradientField:
        self.codes.setflags(write=False)
        return self

    def code(self, c) -> int:
        return int(self.codes[c[1], c[0]])

    def partner(self, c) -> CellId | None:
        code = self.code(c)
        if code == UNPAIRED_CRITICAL:
            return None
        dx, dy = DIRECTION_STEPS[code - 1]
        return CellId(c[0] + dx, c[1] + dy)

    def pairs(self):
        """All V-pairs as ``(lower cell, upper cell)``."""
        ys, xs = np.nonzero(self.codes)
        out = []
        for y, x in zip(ys.tolist(), xs.tolist()):
            p = self.partner((x, y))
            if cell_dim((x, y)) < cell_dim(p):
                out.append((CellId(x, y), p))
        return out

    def is_matching(self) -> bool:
        return K.matching_violations(self.codes) == 0

    def is_acyclic(self) -> bool:
        return not K.has_closed_vpath(self.codes)

    @property
    def nbytes(self) -> int:
        return self.codes.nbytes

    def packed(self) -> np.ndarray:
        """Two 4-bit codes per byte: about two bytes per pixel overall."""
        flat = self.codes.ravel()
        if flat.size % 2:
            flat = np.append(flat, np.uint8(0))
        return (flat[0::2] | (flat[1::2] << 4)).astype(np.uint8)

    @classmethod
    def from_packed(cls, packed: np.ndarray, width: int, height: int) -> GradientField:
        shape = (2 * height - 1, 2 * width - 1)
        flat = np.empty(2 * packed.size, dtype=np.uint8)
        flat[0::2] = packed & 0x0F
        flat[1::2] = packed >> 4
        return cls(flat[: shape[0] * shape[1]].reshape(shape).copy(), width, height)


@dataclass(frozen=True)
class CriticalCell:
    cell: CellId
    index: int
    value: float
    position: tuple[float, float]

    @property
    def kind(self) -> str:
        return ("minimum", "saddle", "maximum")[self.index]


@dataclass(eq=False)
class Separatrix:
    """A V-path from a saddle to a minimum (index 0) or maximum (index 1).

    ``start`` and ``end`` index into the owning complex's ``criticals``;
    ``end`` is None when an ascending path leaves the domain through a
    boundary edge.  ``one_sided`` marks the single 1-separatrix of a saddle
    lying on the domain boundary.
    """

    index: int
    start: int
    end: int | None
    cells: np.ndarray
    polyline: np.ndarray
    one_sided: bool = False

    @property
    def open_end(self) -> bool:
        return self.end is None


@dataclass(eq=False)
class MorseSmaleComplex:
    grid: Grid
    criticals: list[CriticalCell]
    separatrices: list[Separatrix] = field(default_factory=list)

    def counts(self) -> tuple[int, int, int]:
        c = [0, 0, 0]
        for cc in self.criticals:
            c[cc.index] += 1
        return tuple(c)

    def euler(self) -> int:
        c0, c1, c2 = self.counts()
        return c0 - c1 + c2

    def separatrices_of_index(self, p: int) -> list[Separatrix]:
        return [s for s in self.separatrices if s.index == p]


def lower_star(v, grid: Grid) -> list[CellId]:
    """Cells whose highest vertex is ``v``: ``v``, its lower edges and quads."""
    cx, cy = grid.check_cell(v)
    if cx & 1 or cy & 1:
        raise ValueError(f"{(cx, cy)} is not a vertex")
    x, y = cx // 2, cy // 2
    w, h = grid.width, grid.height
    vals = grid.values

    def lower(ax, ay):
        if vals[ay, ax] != vals[y, x]:
            return vals[ay, ax] < vals[y, x]
        return ay * w + ax < y * w + x

    out = [CellId(cx, cy)]
    edges = set()
    for d, (dx, dy) in enumerate(DIRECTION_STEPS):
        if 0 <= x + dx < w and 0 <= y + dy < h and lower(x + dx, y + dy):
            edges.add(d)
            out.append(CellId(cx + dx, cy + dy))
    for sx, sy, eh, ev in ((-1, -1, 0, 2), (1, -1, 1, 2), (-1, 1, 0, 3), (1, 1, 1, 3)):
        if eh in edges and ev in edges and lower(x + sx, y + sy):
            out.append(CellId(cx + sx, cy + sy))
    return out


def process_lower_star(v, strategy, V: GradientField, grid: Grid, seed: int = 0) -> None:
    """Run the homotopic expansion of one lower star, writing into ``V``."""
    strategy = get_strategy(strategy)
    cx, cy = grid.check_cell(v)
    if cx & 1 or cy & 1:
        raise ValueError(f"{(cx, cy)} is not a vertex")
    if not V.codes.flags.writeable:
        raise ValueError("gradient field is frozen")
    K.process_vertex(
        grid.values, grid.pixel_w, grid.pixel_h, cx // 2, cy // 2,
        strategy.kind, np.uint64(int(seed) & _MASK64), V.codes, K.new_scratch(),
    )


def compute_gradient(
    grid: Grid,
    strategy: str | SelectionStrategy = "steepest",
    seed: int = 0,
    threads: int | None = None,
) -> GradientField:
    """Combinatorial gradient of ``grid`` under the given edge-selection strategy.

    Output is bitwise identical for any ``threads``.
    """
    strategy = get_strategy(strategy)
    threads = resolve_threads(threads)
    V = GradientField.empty(grid)
    args = (grid.values, grid.pixel_w, grid.pixel_h, strategy.kind, np.uint64(int(seed) & _MASK64), V.codes)
    h = grid.height
    if threads == 1 or h < 2 * threads:
        K.gradient_rows(*args, 0, h)
    else:
        bounds = np.linspace(0, h, 4 * threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            jobs = [pool.submit(K.gradient_rows, *args, a, b) for a, b in zip(bounds[:-1], bounds[1:])]
            for job in jobs:
                job.result()
    return V.freeze()


def critical_cells(V: GradientField, grid: Grid) -> list[CriticalCell]:
    """Unpaired cells sorted by (index, linear lattice id)."""
    ys, xs = np.nonzero(V.codes == UNPAIRED_CRITICAL)
    found = []
    for y, x in zip(ys.tolist(), xs.tolist()):
        c = CellId(x, y)
        found.append((cell_dim(c), y * V.codes.shape[1] + x, c))
    found.sort()
    return [CriticalCell(c, p, cell_value(c, grid), geometric_center(c, grid)) for p, _, c in found]


def _saddle_sides(saddle: CellId, p: int, shape) -> list[CellId | None]:
    cx, cy = saddle
    if p == 0:
        return [CellId(cx - 1, cy), CellId(cx + 1, cy)] if cx & 1 else [CellId(cx, cy - 1), CellId(cx, cy + 1)]
    ny, nx = shape
    if cx & 1:
        cands = [(cx, cy - 1), (cx, cy + 1)]
    else:
        cands = [(cx - 1, cy), (cx + 1, cy)]
    return [CellId(*c) if 0 <= c[0] < nx and 0 <= c[1] < ny else None for c in cands]


def trace_separatrix(saddle: CriticalCell, side: int, p: int, V: GradientField, grid: Grid):
    """Follow V from ``saddle`` through branch ``side`` (0 or 1).

    Returns ``(cells, polyline, exited)``: lattice coordinates of the
    alternating path starting at the saddle, their physical centres, and
    whether an ascending path left the domain.  Raises ``BranchMissing``
    when the saddle has no cofacet on that side.
    """
    if saddle.index != 1:
        raise ValueError("separatrices start at saddles")
    first = _saddle_sides(saddle.cell, p, V.codes.shape)[side]
    if first is None:
        raise BranchMissing(f"saddle {tuple(saddle.cell)} has no cofacet on side {side}")
    if p == 0:
        tail = K.trace_descending(V.codes, first.cx, first.cy)
        exited = False
    else:
        tail, exited = K.trace_ascending(V.codes, first.cx, first.cy)
    cells = np.vstack([np.array([saddle.cell], dtype=np.int64), tail])
    x0, y0 = grid.origin
    poly = np.column_stack([x0 + 0.5 * cells[:, 0] * grid.pixel_w, y0 + 0.5 * cells[:, 1] * grid.pixel_h])
    return cells, poly, bool(exited)


def extract_ms_complex(grid: Grid, V: GradientField) -> MorseSmaleComplex:
    """Critical cells plus every separatrix of every saddle.

    Separatrices are ordered by saddle, then index (0 before 1), then side.
    """
    crit = critical_cells(V, grid)
    lookup = {cc.cell: i for i, cc in enumerate(crit)}
    seps = []
    for i, cc in enumerate(crit):
        if cc.index != 1:
            continue
        for p in (0, 1):
            sides = _saddle_sides(cc.cell, p, V.codes.shape)
            one_sided = any(s is None for s in sides)
            for side, first in enumerate(sides):
                if first is None:
                    continue
                cells, poly, exited = trace_separatrix(cc, side, p, V, grid)
                end = None if exited else lookup[CellId(int(cells[-1, 0]), int(cells[-1, 1]))]
                seps.append(Separatrix(p, i, end, cells, poly, one_sided=one_sided))
    return MorseSmaleComplex(grid, crit, seps)
