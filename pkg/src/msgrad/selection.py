"""Edge selection for pairing a vertex with one of its descending edges.

Two policies are provided.  ``SteepestDescent`` takes the edge with the
largest slope.  ``Probabilistic`` draws the edge at random, with each
candidate weighted by its height difference times the squared length of
the dual edge; for two orthogonal candidates the expected displacement is
then collinear with the finite-difference gradient.

Random numbers come from a counter-based generator: the ``counter``-th
draw of stream ``stream`` under ``seed`` is a SplitMix64 hash of the three
integers, so every vertex owns an independent, schedule-free stream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .cellgrid import CellId

__all__ = [
    "LEFT",
    "RIGHT",
    "DOWN",
    "UP",
    "DIRECTION_NAMES",
    "CandidateEdge",
    "EdgePmf",
    "RngStream",
    "rng_uniform",
    "steepest_edge",
    "probabilistic_weights",
    "expected_direction",
    "collinearity_residual",
    "sample_edge",
    "SelectionStrategy",
    "SteepestDescent",
    "Probabilistic",
    "get_strategy",
]

# Direction order doubles as the tie-break order everywhere.
LEFT, RIGHT, DOWN, UP = 0, 1, 2, 3
DIRECTION_NAMES = ("left", "right", "down", "up")
DIRECTION_STEPS = ((-1, 0), (1, 0), (0, -1), (0, 1))

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


@njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def rng_uniform(seed, stream, counter):
    """Uniform double in [0, 1) for draw ``counter`` of ``stream`` under ``seed``."""
    s = np.uint64(seed)
    key = _mix64(s + _GOLDEN * (np.uint64(stream) + np.uint64(1)))
    z = _mix64(key ^ (_GOLDEN * (np.uint64(counter) + np.uint64(1))))
    return np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


class RngStream:
    """Sequential view of one counter-based stream."""

    def __init__(self, seed: int, stream: int = 0, counter: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self.counter = int(counter)

    def uniform(self) -> float:
        u = rng_uniform(np.uint64(self.seed), np.uint64(self.stream), np.uint64(self.counter))
        self.counter += 1
        return float(u)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream}, counter={self.counter})"


@dataclass(frozen=True)
class CandidateEdge:
    """A descending edge ``upper`` leaving vertex ``lower``.

    ``delta`` is the (non-negative) height difference along the edge,
    ``primal_len`` the physical edge length and ``dual_len`` the length of
    the dual edge (pixel height for a horizontal edge, width for a vertical one).
    """

    lower: CellId
    upper: CellId
    direction: int
    delta: float
    primal_len: float
    dual_len: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not (self.dual_len > 0 and self.primal_len > 0):
            raise ValueError("edge lengths must be positive")

    @classmethod
    def from_direction(cls, vertex, direction: int, delta, pixel_w=1.0, pixel_h=1.0):
        dx, dy = DIRECTION_STEPS[direction]
        horizontal = dx != 0
        vertex = CellId(int(vertex[0]), int(vertex[1]))
        return cls(
            lower=vertex,
            upper=CellId(vertex.cx + dx, vertex.cy + dy),
            direction=direction,
            delta=delta,
            primal_len=pixel_w if horizontal else pixel_h,
            dual_len=pixel_h if horizontal else pixel_w,
        )

    @property
    def displacement(self):
        dx, dy = DIRECTION_STEPS[self.direction]
        return dx * self.primal_len, dy * self.primal_len


@dataclass(frozen=True)
class EdgePmf:
    candidates: tuple[CandidateEdge, ...]
    probs: tuple

    def __post_init__(self):
        if len(self.candidates) != len(self.probs) or not self.candidates:
            raise ValueError("pmf needs one probability per candidate")
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1) > 1e-12:
            raise ValueError(f"not a probability mass function: {self.probs}")


def steepest_edge(candidates: Sequence[CandidateEdge]) -> CandidateEdge:
    if not candidates:
        raise ValueError("steepest_edge needs at least one candidate")
    best = None
    for e in sorted(candidates, key=lambda e: e.direction):
        slope = e.delta / e.primal_len
        if best is None or slope > best[0]:
            best = (slope, e)
    return best[1]


def probabilistic_weights(candidates: Sequence[CandidateEdge]) -> EdgePmf:
    """Normalized ``delta * dual_len**2`` weights; uniform if every weight is zero.

    Plain arithmetic only, so exact inputs (``Fraction``) give exact outputs.
    """
    if not candidates:
        raise ValueError("probabilistic_weights needs at least one candidate")
    weights = [e.delta * e.dual_len * e.dual_len for e in candidates]
    total = sum(weights)
    if total == 0:
        # total + 1 keeps the numeric type (Fraction stays exact)
        probs = [(total + 1) / len(candidates)] * len(candidates)
    else:
        probs = [w / total for w in weights]
    return EdgePmf(tuple(candidates), tuple(probs))


def expected_direction(pmf: EdgePmf) -> tuple:
    """Probability-weighted mean of the candidates' physical displacement vectors."""
    ex = ey = 0
    for p, e in zip(pmf.probs, pmf.candidates):
        dx, dy = e.displacement
        ex += p * dx
        ey += p * dy
    return ex, ey


def collinearity_residual(exp_dir, grad) -> float:
    """Determinant of the 2x2 matrix with columns ``exp_dir`` and ``grad``."""
    return exp_dir[0] * grad[1] - exp_dir[1] * grad[0]


def sample_edge(pmf: EdgePmf, rng: RngStream) -> CandidateEdge:
    """Inverse-CDF draw over the candidate order."""
    u = rng.uniform()
    acc = 0.0
    last = 0
    for i, p in enumerate(pmf.probs):
        p = float(p)
        if p > 0:
            last = i
        acc += p
        if u < acc:
            return pmf.candidates[i]
    return pmf.candidates[last]


class SelectionStrategy:
    """Policy for choosing the edge a vertex is paired with."""

    name: str = ""
    kind: int = -1

    def choose(self, candidates: Sequence[CandidateEdge], rng: RngStream | None = None) -> CandidateEdge:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class SteepestDescent(SelectionStrategy):
    name = "steepest"
    kind = 0

    def choose(self, candidates, rng=None):
        return steepest_edge(candidates)


class Probabilistic(SelectionStrategy):
    name = "probabilistic"
    kind = 1

    def choose(self, candidates, rng=None):
        if rng is None:
            raise ValueError("probabilistic selection needs an RngStream")
        ordered = sorted(candidates, key=lambda e: e.direction)
        return sample_edge(probabilistic_weights(ordered), rng)


_STRATEGIES = {"steepest": SteepestDescent, "probabilistic": Probabilistic}


def get_strategy(strategy) -> SelectionStrategy:
    if isinstance(strategy, SelectionStrategy):
        return strategy
    try:
        return _STRATEGIES[strategy]()
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {sorted(_STRATEGIES)}") from None
