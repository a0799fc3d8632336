"""Error of extracted separatrix loops against the analytic reference circle."""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .analytic import DEFAULT_DOMAIN, CircleFn, circle_separatrix, rotate, rotation_angles, sample_to_grid
from .morse import MorseSmaleComplex, compute_gradient, extract_ms_complex
from .selection import get_strategy

__all__ = [
    "FeatureNotFound",
    "LoopExtraction",
    "ConvergenceRecord",
    "DensityEstimate",
    "RotationSlice",
    "extract_circle_loop",
    "hausdorff_to_circle",
    "hausdorff_to_curve",
    "reference_separatrix",
    "circle_pipeline",
    "convergence_study",
    "mean_std",
    "kde",
    "rotation_sweep",
    "write_records_csv",
    "read_records_csv",
    "summarize",
    "format_float",
]

CSV_HEADER = ["resolution", "alpha", "strategy", "run", "seed", "hausdorff"]


class FeatureNotFound(LookupError):
    pass


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    return format(x, ".17g")


@dataclass(eq=False)
class LoopExtraction:
    points: np.ndarray
    closed: bool
    cells: np.ndarray

    def transformed(self, fn) -> LoopExtraction:
        x, y = fn(self.points[:, 0], self.points[:, 1])
        return LoopExtraction(np.column_stack([x, y]), self.closed, self.cells)


@dataclass(frozen=True)
class ConvergenceRecord:
    resolution: int
    alpha: float
    strategy: str
    run: int
    seed: int
    hausdorff: float

    def row(self) -> list[str]:
        return [
            str(self.resolution),
            format_float(self.alpha),
            self.strategy,
            str(self.run),
            str(self.seed),
            format_float(self.hausdorff),
        ]


@dataclass(frozen=True)
class DensityEstimate:
    x: np.ndarray
    density: np.ndarray
    bandwidth: float

    def modes(self) -> int:
        d = self.density
        peaks = (d[1:-1] > d[:-2]) & (d[1:-1] >= d[2:])
        return int(np.count_nonzero(peaks))

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.x))


@dataclass(eq=False)
class RotationSlice:
    theta: float
    loop: LoopExtraction | None
    hausdorff: float


def _two_core(cells: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Strip dangling paths: repeatedly drop cells with fewer than two neighbours."""
    core = set(cells)

    def neighbours(c):
        x, y = c
        return [n for n in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)) if n in core]

    queue = deque(c for c in core if len(neighbours(c)) < 2)
    while queue:
        c = queue.popleft()
        if c not in core:
            continue
        nbs = neighbours(c)
        if len(nbs) >= 2:
            continue
        core.discard(c)
        queue.extend(nbs)
    return core


def extract_circle_loop(msc: MorseSmaleComplex, center=(0.0, 0.0), radius=1.0, half_width=None) -> LoopExtraction:
    """Isolate the closed chain of 0-separatrices running around ``center``.

    Cells of 0-separatrices within ``half_width`` (default ``radius / 2``) of
    the reference circle are kept.  If, after removing dangling branches,
    they enclose ``center``, the returned points are the connected pieces
    of what remains that border the enclosed region and ``closed`` is set.
    Otherwise all kept cells are returned with ``closed`` unset.
    """
    grid = msc.grid
    if half_width is None:
        half_width = radius / 2
    x0, y0 = grid.origin
    cx0, cy0 = center
    kept = set()
    for sep in msc.separatrices:
        if sep.index != 0:
            continue
        dist = np.abs(np.hypot(sep.polyline[:, 0] - cx0, sep.polyline[:, 1] - cy0) - radius)
        for c in sep.cells[dist < half_width]:
            kept.add((int(c[0]), int(c[1])))
    if not kept:
        raise FeatureNotFound("no 0-separatrix near the reference circle")

    def as_extraction(cells, closed):
        arr = np.array(sorted(cells, key=lambda c: (c[1], c[0])), dtype=np.int64)
        pts = np.column_stack([x0 + 0.5 * arr[:, 0] * grid.pixel_w, y0 + 0.5 * arr[:, 1] * grid.pixel_h])
        return LoopExtraction(pts, closed, arr)

    core = _two_core(kept)
    ny, nx = 2 * grid.height - 1, 2 * grid.width - 1
    sx = int(round(2 * (cx0 - x0) / grid.pixel_w))
    sy = int(round(2 * (cy0 - y0) / grid.pixel_h))
    if not core or not (0 <= sx < nx and 0 <= sy < ny):
        return as_extraction(kept, False)
    wall = np.zeros((ny, nx), dtype=bool)
    idx = np.array(list(core))
    wall[idx[:, 1], idx[:, 0]] = True
    if wall[sy, sx]:
        return as_extraction(kept, False)
    labels, _ = ndimage.label(~wall)
    inside = labels == labels[sy, sx]
    if inside[0, :].any() or inside[-1, :].any() or inside[:, 0].any() or inside[:, -1].any():
        return as_extraction(kept, False)
    # keep the pieces of the core that bound the enclosed region
    pieces, _ = ndimage.label(wall)
    touching = ndimage.binary_dilation(inside, structure=np.ones((3, 3), dtype=bool)) & wall
    loop = np.isin(pieces, np.unique(pieces[touching]))
    ys, xs = np.nonzero(loop)
    return as_extraction(set(zip(xs.tolist(), ys.tolist())), True)


def hausdorff_to_circle(points, center=(0.0, 0.0), radius=1.0, samples=4096, tol=1e-6) -> float:
    """Hausdorff distance between a point set and a circle.

    The point-to-circle side is exact.  The circle-to-points side starts
    from ``samples`` equally spaced circle points and bisects every arc
    whose Lipschitz upper bound could still beat the best value by more
    than ``tol``; distance to a point set is 1-Lipschitz along the arc.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.size == 0:
        raise ValueError("Hausdorff distance of an empty point set")
    c = np.asarray(center, dtype=np.float64)
    to_circle = float(np.max(np.abs(np.hypot(*(pts - c).T) - radius)))

    tree = cKDTree(pts)

    def dist(theta):
        q = c + radius * np.column_stack([np.cos(theta), np.sin(theta)])
        return tree.query(q)[0]

    n = max(int(samples), 4096)
    theta = 2 * np.pi * np.arange(n + 1) / n
    d = dist(theta)
    best = float(d.max())
    lo, hi, dlo, dhi = theta[:-1], theta[1:], d[:-1], d[1:]
    while lo.size:
        arc = radius * (hi - lo)
        bound = 0.5 * (dlo + dhi + arc)
        keep = bound > best + tol
        lo, hi, dlo, dhi = lo[keep], hi[keep], dlo[keep], dhi[keep]
        if not lo.size:
            break
        mid = 0.5 * (lo + hi)
        dm = dist(mid)
        best = max(best, float(dm.max()))
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        dlo, dhi = np.concatenate([dlo, dm]), np.concatenate([dm, dhi])
    return max(to_circle, best)


def hausdorff_to_curve(points, curve) -> float:
    """Hausdorff distance between a point set and a densely sampled curve.

    Both directions use nearest-vertex distances, so the result is accurate
    to half the curve's vertex spacing.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    curve = np.asarray(curve, dtype=np.float64).reshape(-1, 2)
    if pts.size == 0 or curve.size == 0:
        raise ValueError("Hausdorff distance of an empty point set")
    forward = cKDTree(curve).query(pts)[0].max()
    backward = cKDTree(pts).query(curve)[0].max()
    return float(max(forward, backward))


@lru_cache(maxsize=16)
def reference_separatrix(alpha: float) -> np.ndarray:
    """Cached continuous separatrix loop of the unrotated circle function."""
    curve = circle_separatrix(float(alpha))
    curve.setflags(write=False)
    return curve


def _loop_error(points, alpha, center, radius, reference):
    if reference == "circle":
        return hausdorff_to_circle(points, center, radius)
    if reference == "separatrix":
        return hausdorff_to_curve(points, reference_separatrix(alpha))
    raise ValueError(f"unknown reference {reference!r}; expected 'circle' or 'separatrix'")


def circle_pipeline(alpha, resolution, strategy, seed=0, theta=0.0, domain=DEFAULT_DOMAIN,
                    center=(0.0, 0.0), radius=1.0, half_width=None, threads=None):
    """Sample, build the gradient, extract the complex and isolate the loop."""
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    grid = sample_to_grid(CircleFn(alpha, theta), domain, resolution)
    V = compute_gradient(grid, strategy, seed=seed, threads=threads)
    msc = extract_ms_complex(grid, V)
    return msc, extract_circle_loop(msc, center, radius, half_width)


def convergence_study(alpha, resolutions, runs, strategy, base_seed=0, domain=DEFAULT_DOMAIN,
                      center=(0.0, 0.0), radius=1.0, half_width=None, threads=None,
                      progress=None, reference="circle") -> list[ConvergenceRecord]:
    """Hausdorff error per (resolution, run); run ``r`` uses seed ``base_seed + r``.

    The steepest strategy is deterministic and gets a single run.  A missing
    feature is recorded as NaN.  ``reference`` selects the ground truth: the
    circle of ``radius`` around ``center``, or the exact separatrix loop of
    the function (computed by integrating its gradient flow).
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    strategy = get_strategy(strategy)
    if strategy.name == "steepest":
        runs = 1
    records = []
    for res in resolutions:
        for run in range(runs):
            seed = base_seed + run
            try:
                _, loop = circle_pipeline(alpha, res, strategy, seed, 0.0, domain, center, radius, half_width, threads)
                hd = _loop_error(loop.points, alpha, center, radius, reference)
            except FeatureNotFound:
                hd = float("nan")
            records.append(ConvergenceRecord(int(res), float(alpha), strategy.name, run, seed, hd))
            if progress is not None:
                progress(records[-1])
    return records


def summarize(records) -> dict[int, tuple[float, float, int]]:
    """Per resolution: mean and std over finite errors, and how many were finite."""
    by_res: dict[int, list[float]] = {}
    for r in records:
        by_res.setdefault(r.resolution, [])
        if not math.isnan(r.hausdorff):
            by_res[r.resolution].append(r.hausdorff)
    out = {}
    for res, vals in by_res.items():
        m, s = mean_std(vals) if vals else (float("nan"), float("nan"))
        out[res] = (m, s, len(vals))
    return out


def mean_std(samples) -> tuple[float, float]:
    """Sample mean and standard deviation (n - 1 denominator; NaN for n = 1)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("mean_std of an empty sample")
    std = float(np.std(x, ddof=1)) if x.size > 1 else float("nan")
    return float(np.mean(x)), std


def silverman_bandwidth(x: np.ndarray) -> float:
    std = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(std, (q75 - q25) / 1.34)
    if spread <= 0:
        spread = std
    return 0.9 * spread * x.size ** (-0.2)


def kde(samples, bandwidth=None, num=256) -> DensityEstimate:
    """Gaussian kernel density on ``num`` points spanning [min - 3b, max + 3b].

    The density is renormalized so that its trapezoid integral over the
    evaluation window is exactly one.
    """
    x = np.asarray(samples, dtype=np.float64)
    x = x[np.isfinite(x)]
    if x.size < 2:
        raise ValueError("kde needs at least two finite samples")
    if np.all(x == x[0]):
        raise ValueError("kde of identical samples is degenerate")
    b = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not (b > 0 and math.isfinite(b)):
        raise ValueError(f"bandwidth must be positive and finite, got {b}")
    grid = np.linspace(x.min() - 3 * b, x.max() + 3 * b, num)
    dens = np.zeros_like(grid)
    for chunk in np.array_split(x, max(1, x.size // 2048)):
        z = (grid[:, None] - chunk[None, :]) / b
        dens += np.exp(-0.5 * z * z).sum(axis=1)
    dens /= x.size * b * math.sqrt(2 * math.pi)
    dens /= np.trapezoid(dens, grid)
    return DensityEstimate(grid, dens, b)


def rotation_sweep(alpha, resolution, steps, strategy, seed=0, domain=DEFAULT_DOMAIN,
                   radius=1.0, half_width=None, threads=None, reference="circle") -> list[RotationSlice]:
    """Loops of the rotated function, mapped back into the frame of the unrotated one.

    Every angle uses the same ``seed``.  A point ``p`` found for angle
    ``theta`` is mapped to ``rotate(p, theta)``, where the unrotated function
    has the same value.
    """
    out = []
    for theta in rotation_angles(steps):
        theta = float(theta)
        try:
            _, loop = circle_pipeline(alpha, resolution, strategy, seed, theta, domain,
                                      (0.0, 0.0), radius, half_width, threads)
        except FeatureNotFound:
            out.append(RotationSlice(theta, None, float("nan")))
            continue
        back = loop.transformed(lambda x, y: rotate(x, y, theta))
        out.append(RotationSlice(theta, back, _loop_error(back.points, alpha, (0.0, 0.0), radius, reference)))
    return out


def write_records_csv(records, path_or_file) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.row())

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def read_records_csv(path) -> list[ConvergenceRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
        return [
            ConvergenceRecord(int(r["resolution"]), float(r["alpha"]), r["strategy"], int(r["run"]),
                              int(r["seed"]), float(r["hausdorff"]))
            for r in reader
        ]
