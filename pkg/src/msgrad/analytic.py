"""Analytic test functions and their sampling onto grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cellgrid import Grid

__all__ = [
    "CircleFn",
    "RandomFieldCoeffs",
    "eval_circle",
    "eval_rotated",
    "rotate",
    "random_field",
    "gen_coeffs",
    "sample_to_grid",
    "circle_grid",
    "rotation_angles",
    "DEFAULT_DOMAIN",
    "circle_gradient",
    "circle_saddle",
    "circle_separatrix",
]

DEFAULT_DOMAIN = (-2.0, 2.0, -2.0, 2.0)


def eval_circle(x, y, alpha):
    """Circle of radius one engraved on a tilted plane; larger alpha is sharper."""
    r = np.hypot(x, y)
    return -np.exp(-alpha * (r - 1.0) ** 2) - 0.3 * (x + y)


def rotate(x, y, theta):
    c, s = np.cos(theta), np.sin(theta)
    return c * x - s * y, s * x + c * y


def eval_rotated(x, y, theta, alpha):
    return eval_circle(*rotate(x, y, theta), alpha)


@dataclass(frozen=True)
class CircleFn:
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be positive and finite")

    def __call__(self, x, y):
        if self.theta == 0.0:
            return eval_circle(x, y, self.alpha)
        return eval_rotated(x, y, self.theta, self.alpha)


@dataclass(frozen=True)
class RandomFieldCoeffs:
    """``X[m-1, n-1, j-1]`` multiplies the j-th trigonometric factor of term (m, n)."""

    X: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.shape != (2, 2, 4):
            raise ValueError("expected 2x2x4 coefficients")
        if np.any(np.abs(X) > 1):
            raise ValueError("coefficients must lie in [-1, 1]")
        object.__setattr__(self, "X", X)

    def __call__(self, x, y):
        return random_field(self, x, y)


def random_field(coeffs: RandomFieldCoeffs, x, y):
    X = coeffs.X
    total = 0.0
    for m in (1, 2):
        for n in (1, 2):
            a = X[m - 1, n - 1]
            total = total + (a[0] * np.sin(m * x) + a[1] * np.cos(m * x)) * (
                a[2] * np.sin(n * y) + a[3] * np.cos(n * y)
            )
    return total


def gen_coeffs(seed: int) -> RandomFieldCoeffs:
    """16 uniform draws in [-1, 1] from numpy's PCG64 seeded with ``seed``."""
    rng = np.random.default_rng(seed)
    return RandomFieldCoeffs(rng.uniform(-1.0, 1.0, size=(2, 2, 4)), seed)


def sample_to_grid(fn, domain=DEFAULT_DOMAIN, resolution=(64, 64)) -> Grid:
    """Evaluate ``fn(x, y)`` at the nodes of a grid spanning ``domain`` inclusively."""
    xmin, xmax, ymin, ymax = map(float, domain)
    w, h = resolution
    if w < 2 or h < 2:
        raise ValueError("resolution must be at least 2x2")
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate domain {domain}")
    xs = np.linspace(xmin, xmax, w)
    ys = np.linspace(ymin, ymax, h)
    X, Y = np.meshgrid(xs, ys)
    values = np.broadcast_to(np.asarray(fn(X, Y), dtype=np.float64), X.shape)
    return Grid(values, (xmax - xmin) / (w - 1), (ymax - ymin) / (h - 1), (xmin, ymin))


def circle_grid(alpha, resolution, theta=0.0, domain=DEFAULT_DOMAIN) -> Grid:
    return sample_to_grid(CircleFn(alpha, theta), domain, resolution)


def rotation_angles(steps: int) -> np.ndarray:
    """``steps`` uniform samples of [-pi/2, pi/2); contains 0 for even counts."""
    if steps < 1:
        raise ValueError("need at least one rotation step")
    return -np.pi / 2 + np.pi * np.arange(steps) / steps


def circle_gradient(x, y, alpha):
    r = np.hypot(x, y)
    radial = 2.0 * alpha * (r - 1.0) * np.exp(-alpha * (r - 1.0) ** 2) / np.where(r > 0, r, 1.0)
    return radial * x - 0.3, radial * y - 0.3


def circle_saddle(alpha) -> np.ndarray:
    """Saddle of the circle function; it lies on the south-west diagonal."""
    from scipy.optimize import brentq

    c = 0.3 * np.sqrt(2.0)

    def cross(s):  # f along -(1, 1)/sqrt(2) at distance s from the origin
        return -np.exp(-alpha * (s - 1.0) ** 2) + c * s

    def slope(s):
        return 2.0 * alpha * (s - 1.0) * np.exp(-alpha * (s - 1.0) ** 2) + c

    s = np.linspace(1e-6, 1.5, 20001)
    i = int(np.argmin(cross(s)))
    root = brentq(slope, s[max(i - 1, 0)], s[min(i + 1, s.size - 1)], xtol=1e-15)
    return -root / np.sqrt(2.0) * np.ones(2)


def circle_separatrix(alpha, spacing=1e-4) -> np.ndarray:
    """The continuous 0-separatrix loop around the origin as a dense polyline.

    Both descending branches leave the saddle along the ring and are
    integrated with the gradient flow until they settle in the minimum;
    the result is resampled to at most ``spacing`` between vertices.
    """
    from scipy.integrate import solve_ivp

    saddle = circle_saddle(alpha)
    tangent = np.array([1.0, -1.0]) / np.sqrt(2.0)

    def flow(t, p):
        gx, gy = circle_gradient(p[0], p[1], alpha)
        return [-gx, -gy]

    def settled(t, p):
        gx, gy = circle_gradient(p[0], p[1], alpha)
        return np.hypot(gx, gy) - 1e-10

    settled.terminal = True
    branches = []
    for sign in (1.0, -1.0):
        sol = solve_ivp(flow, (0.0, 1e4), saddle + sign * 1e-9 * tangent, events=settled,
                        rtol=1e-10, atol=1e-13, max_step=0.05)
        branches.append(sol.y.T)
    curve = np.vstack([branches[0][::-1], branches[1][1:]])
    seg = np.hypot(*np.diff(curve, axis=0).T)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.linspace(0.0, arc[-1], int(np.ceil(arc[-1] / spacing)) + 1)
    return np.column_stack([np.interp(t, arc, curve[:, 0]), np.interp(t, arc, curve[:, 1])])
