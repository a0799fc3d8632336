"""Implicit cubical cell complex of a sampled 2D scalar field.

Cells live on a doubled-coordinate lattice: a cell ``(cx, cy)`` with
``0 <= cx <= 2*width - 2`` and ``0 <= cy <= 2*height - 2`` is a vertex when
both coordinates are even, an edge when exactly one is odd and a quad when
both are odd.  Vertex ``(cx, cy)`` is the sample ``(cx // 2, cy // 2)``.
Nothing about the cell graph is stored; incidence is pure arithmetic.

Sample values are compared under a strict total order: by value first and
by linear sample index ``y * width + x`` on ties.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "Grid",
    "CellId",
    "InvalidCellError",
    "cell_dim",
    "boundary",
    "coboundary",
    "cell_value",
    "max_vertex",
    "geometric_center",
    "vertex_precedes",
    "cell_counts",
    "lattice_shape",
    "read_msg1",
    "write_msg1",
]

MSG1_MAGIC = b"MSG1"
_HEADER = struct.Struct("<4sIIdddd")


class InvalidCellError(ValueError):
    pass


class CellId(NamedTuple):
    cx: int
    cy: int


@dataclass(frozen=True, eq=False)
class Grid:
    """Scalar samples on a ``width x height`` grid with physical spacing.

    ``values`` has shape ``(height, width)``; ``values[y, x]`` is the sample
    at physical position ``(x0 + x * pixel_w, y0 + y * pixel_h)``.
    """

    values: np.ndarray
    pixel_w: float = 1.0
    pixel_h: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("grid values must be a 2D array")
        h, w = values.shape
        if w < 2 or h < 2:
            raise ValueError(f"grid must be at least 2x2, got {w}x{h}")
        if not (self.pixel_w > 0 and self.pixel_h > 0):
            raise ValueError("pixel spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "pixel_w", float(self.pixel_w))
        object.__setattr__(self, "pixel_h", float(self.pixel_h))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.pixel_w == other.pixel_w
            and self.pixel_h == other.pixel_h
            and self.origin == other.origin
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
        )

    def sample(self, x: int, y: int) -> float:
        return float(self.values[y, x])

    def check_cell(self, c) -> CellId:
        cx, cy = int(c[0]), int(c[1])
        if not (0 <= cx <= 2 * self.width - 2 and 0 <= cy <= 2 * self.height - 2):
            raise InvalidCellError(f"cell {(cx, cy)} outside {self.width}x{self.height} grid")
        return CellId(cx, cy)

    def cells(self, dim: int | None = None):
        """Iterate over all cells (optionally of one dimension) in lattice order."""
        for cy in range(2 * self.height - 1):
            for cx in range(2 * self.width - 1):
                if dim is None or (cx & 1) + (cy & 1) == dim:
                    yield CellId(cx, cy)


def lattice_shape(grid: Grid) -> tuple[int, int]:
    """Shape ``(2H-1, 2W-1)`` of per-cell arrays indexed ``[cy, cx]``."""
    return 2 * grid.height - 1, 2 * grid.width - 1


def cell_counts(width: int, height: int) -> tuple[int, int, int]:
    return (
        width * height,
        (width - 1) * height + width * (height - 1),
        (width - 1) * (height - 1),
    )


def cell_dim(c, grid: Grid | None = None) -> int:
    if grid is not None:
        c = grid.check_cell(c)
    cx, cy = int(c[0]), int(c[1])
    if cx < 0 or cy < 0:
        raise InvalidCellError(f"negative cell coordinates {(cx, cy)}")
    return (cx & 1) + (cy & 1)


def boundary(c, grid: Grid | None = None) -> list[CellId]:
    """Facets of ``c``: endpoints of an edge, the four sides of a quad."""
    if grid is not None:
        c = grid.check_cell(c)
    cx, cy = int(c[0]), int(c[1])
    out = []
    if cx & 1:
        out += [CellId(cx - 1, cy), CellId(cx + 1, cy)]
    if cy & 1:
        out += [CellId(cx, cy - 1), CellId(cx, cy + 1)]
    return out


def coboundary(c, grid: Grid) -> list[CellId]:
    """Cofacets of ``c`` that exist inside the grid."""
    cx, cy = grid.check_cell(c)
    nx, ny = 2 * grid.width - 1, 2 * grid.height - 1
    out = []
    if not cx & 1:
        out += [CellId(x, cy) for x in (cx - 1, cx + 1) if 0 <= x < nx]
    if not cy & 1:
        out += [CellId(cx, y) for y in (cy - 1, cy + 1) if 0 <= y < ny]
    return out


def _vertices(c) -> list[tuple[int, int]]:
    cx, cy = int(c[0]), int(c[1])
    xs = (cx // 2, cx // 2 + 1) if cx & 1 else (cx // 2,)
    ys = (cy // 2, cy // 2 + 1) if cy & 1 else (cy // 2,)
    return [(x, y) for y in ys for x in xs]


def vertex_precedes(grid: Grid, a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Strict total order on samples: value, then linear index."""
    va, vb = grid.values[a[1], a[0]], grid.values[b[1], b[0]]
    if va != vb:
        return bool(va < vb)
    return a[1] * grid.width + a[0] < b[1] * grid.width + b[0]


def max_vertex(c, grid: Grid) -> CellId:
    c = grid.check_cell(c)
    best = None
    for v in _vertices(c):
        if best is None or vertex_precedes(grid, best, v):
            best = v
    return CellId(2 * best[0], 2 * best[1])


def cell_value(c, grid: Grid) -> float:
    """Extension of the sample values to all cells: max over the cell's vertices."""
    m = max_vertex(c, grid)
    return grid.sample(m.cx // 2, m.cy // 2)


def geometric_center(c, grid: Grid) -> tuple[float, float]:
    cx, cy = grid.check_cell(c)
    x0, y0 = grid.origin
    return x0 + 0.5 * cx * grid.pixel_w, y0 + 0.5 * cy * grid.pixel_h


def write_msg1(grid: Grid, path) -> None:
    header = _HEADER.pack(
        MSG1_MAGIC,
        grid.width,
        grid.height,
        grid.pixel_w,
        grid.pixel_h,
        grid.origin[0],
        grid.origin[1],
    )
    payload = grid.values.astype("<f8", copy=False).tobytes(order="C")
    if hasattr(path, "write"):
        path.write(header + payload)
    else:
        Path(path).write_bytes(header + payload)


def read_msg1(path) -> Grid:
    """Load an MSG1 file (path or binary file object)."""
    data = path.read() if hasattr(path, "read") else Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated MSG1 header")
    magic, w, h, pw, ph, ox, oy = _HEADER.unpack_from(data)
    if magic != MSG1_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    n = w * h
    if len(data) != _HEADER.size + 8 * n:
        raise ValueError(f"{path}: expected {n} samples, file size {len(data)}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(h, w)
    return Grid(values.astype(np.float64), pw, ph, (ox, oy))
