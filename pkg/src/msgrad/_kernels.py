"""Compiled inner loops over the doubled-coordinate cell lattice.

Pairing codes (one uint8 per lattice cell, indexed ``[cy, cx]``):
0 is critical, ``d + 1`` means paired with the neighbouring lattice cell in
direction ``d`` (0 left, 1 right, 2 down, 3 up).  Both cells of a pair carry
reciprocal codes.
"""
import numpy as np
from numba import njit

from .selection import rng_uniform

CRITICAL = 0
UNSET = 255

# lattice steps per direction code - 1
DX = np.array([-1, 1, 0, 0], dtype=np.int64)
DY = np.array([0, 0, -1, 1], dtype=np.int64)
OPPOSITE = np.array([1, 0, 3, 2], dtype=np.int64)

# quad q around a vertex sits at (sx, sy) = (QX[q], QY[q]); its facets through
# the vertex are the horizontal edge QH[q] and the vertical edge QV[q]
QX = np.array([-1, 1, -1, 1], dtype=np.int64)
QY = np.array([-1, -1, 1, 1], dtype=np.int64)
QH = np.array([0, 1, 0, 1], dtype=np.int64)
QV = np.array([2, 2, 3, 3], dtype=np.int64)

# quads incident to the edge leaving the vertex in direction d
EDGE_QUADS = np.array([[0, 2], [1, 3], [0, 1], [2, 3]], dtype=np.int64)

ABSENT, FREE, PAIRED, FLAGGED = 0, 1, 2, 3


@njit(cache=True, nogil=True, inline="always")
def _precedes(values, w, ax, ay, bx, by):
    va = values[ay, ax]
    vb = values[by, bx]
    if va != vb:
        return va < vb
    return ay * w + ax < by * w + bx


@njit(cache=True, nogil=True)
def choose_vertex_edge(deltas, present, pixel_w, pixel_h, kind, seed, stream, weights):
    """Index-0 ChooseEdge.  Mirrors steepest_edge / Probabilistic.choose.

    ``weights`` is a length-4 scratch buffer.
    """
    chosen = -1
    if kind == 0:
        best = -1.0
        for d in range(4):
            if present[d]:
                primal = pixel_w if d < 2 else pixel_h
                slope = deltas[d] / primal
                if chosen < 0 or slope > best:
                    best = slope
                    chosen = d
        return chosen
    total = 0.0
    n = 0
    for d in range(4):
        if present[d]:
            dual = pixel_h if d < 2 else pixel_w
            weights[d] = deltas[d] * dual * dual
            total += weights[d]
            n += 1
        else:
            weights[d] = 0.0
    u = rng_uniform(seed, stream, 0)
    acc = 0.0
    last = -1
    for d in range(4):
        if present[d]:
            p = weights[d] / total if total > 0.0 else 1.0 / n
            if p > 0.0:
                last = d
            acc += p
            if u < acc:
                return d
    return last


@njit(cache=True, nogil=True)
def new_scratch():
    return (np.zeros(4, dtype=np.int64), np.zeros(4, dtype=np.int64), np.zeros(4),
            np.zeros(4, dtype=np.bool_), np.zeros(4))


@njit(cache=True, nogil=True)
def process_vertex(values, pixel_w, pixel_h, x, y, kind, seed, codes, scratch):
    """Expand the lower star of sample (x, y) and write its pairing codes."""
    h, w = values.shape
    cx = 2 * x
    cy = 2 * y
    edge, quad, deltas, present, weights = scratch
    vv = values[y, x]
    n_edges = 0
    for d in range(4):
        edge[d] = ABSENT
        quad[d] = ABSENT
        present[d] = False
        deltas[d] = 0.0
        nx = x + DX[d]
        ny = y + DY[d]
        if 0 <= nx < w and 0 <= ny < h and _precedes(values, w, nx, ny, x, y):
            edge[d] = FREE
            present[d] = True
            deltas[d] = vv - values[ny, nx]
            n_edges += 1
    for q in range(4):
        if edge[QH[q]] != ABSENT and edge[QV[q]] != ABSENT:
            if _precedes(values, w, x + QX[q], y + QY[q], x, y):
                quad[q] = FREE

    codes[cy, cx] = CRITICAL
    for d in range(4):
        if edge[d] != ABSENT:
            codes[cy + DY[d], cx + DX[d]] = CRITICAL
    for q in range(4):
        if quad[q] != ABSENT:
            codes[cy + QY[q], cx + QX[q]] = CRITICAL
    if n_edges == 0:
        return

    d0 = choose_vertex_edge(deltas, present, pixel_w, pixel_h, kind, seed, y * w + x, weights)
    codes[cy, cx] = d0 + 1
    codes[cy + DY[d0], cx + DX[d0]] = OPPOSITE[d0] + 1
    edge[d0] = PAIRED

    while True:
        # index-1 expansions: a free quad whose only free facet is a free edge
        done = False
        for d in range(4):
            if edge[d] != FREE:
                continue
            for k in range(2):
                q = EDGE_QUADS[d, k]
                if quad[q] != FREE:
                    continue
                other = QV[q] if d < 2 else QH[q]
                if edge[other] == FREE:
                    continue
                ex = cx + DX[d]
                ey = cy + DY[d]
                # step from the edge to the quad is along the other facet's direction
                codes[ey, ex] = other + 1
                codes[cy + QY[q], cx + QX[q]] = OPPOSITE[other] + 1
                edge[d] = PAIRED
                quad[q] = PAIRED
                done = True
                break
            if done:
                break
        if done:
            continue
        # flag the lowest-dimensional free cell; among edges the one whose
        # lower endpoint comes first in the total order
        flag = -1
        for d in range(4):
            if edge[d] == FREE:
                if flag < 0 or _precedes(values, w, x + DX[d], y + DY[d], x + DX[flag], y + DY[flag]):
                    flag = d
        if flag >= 0:
            edge[flag] = FLAGGED
            continue
        for q in range(4):
            if quad[q] == FREE:
                flag = q
                break
        if flag >= 0:
            quad[flag] = FLAGGED
            continue
        break


@njit(cache=True, nogil=True)
def gradient_rows(values, pixel_w, pixel_h, kind, seed, codes, y0, y1):
    h, w = values.shape
    scratch = new_scratch()
    for y in range(y0, y1):
        for x in range(w):
            process_vertex(values, pixel_w, pixel_h, x, y, kind, seed, codes, scratch)


@njit(cache=True, nogil=True)
def trace_descending(codes, cx, cy):
    """Cells of the V-path from vertex (cx, cy) down to a critical vertex.

    Returns an (n, 2) array of lattice coordinates starting at (cx, cy).
    """
    n = 1
    x, y = cx, cy
    while codes[y, x] != CRITICAL:
        d = codes[y, x] - 1
        x += 2 * DX[d]
        y += 2 * DY[d]
        n += 2
    out = np.empty((n, 2), dtype=np.int64)
    x, y = cx, cy
    out[0, 0] = x
    out[0, 1] = y
    i = 1
    while codes[y, x] != CRITICAL:
        d = codes[y, x] - 1
        out[i, 0] = x + DX[d]
        out[i, 1] = y + DY[d]
        x += 2 * DX[d]
        y += 2 * DY[d]
        out[i + 1, 0] = x
        out[i + 1, 1] = y
        i += 2
    return out


@njit(cache=True, nogil=True)
def trace_ascending(codes, cx, cy):
    """Cells of the dual V-path from quad (cx, cy) up to a critical quad.

    Returns the (n, 2) path and whether it left the domain through a
    boundary edge instead of ending at a critical quad.
    """
    ny, nx = codes.shape
    n = 1
    x, y = cx, cy
    exited = False
    while codes[y, x] != CRITICAL:
        d = codes[y, x] - 1
        x2 = x + 2 * DX[d]
        y2 = y + 2 * DY[d]
        if not (0 <= x2 < nx and 0 <= y2 < ny):
            n += 1
            exited = True
            break
        x, y = x2, y2
        n += 2
    out = np.empty((n, 2), dtype=np.int64)
    x, y = cx, cy
    out[0, 0] = x
    out[0, 1] = y
    i = 1
    while i < n:
        d = codes[y, x] - 1
        out[i, 0] = x + DX[d]
        out[i, 1] = y + DY[d]
        i += 1
        if i < n:
            x += 2 * DX[d]
            y += 2 * DY[d]
            out[i, 0] = x
            out[i, 1] = y
            i += 1
    return out, exited


@njit(cache=True)
def matching_violations(codes):
    """Number of cells whose code does not name an in-bounds reciprocal partner."""
    ny, nx = codes.shape
    bad = 0
    for y in range(ny):
        for x in range(nx):
            c = codes[y, x]
            if c == CRITICAL:
                continue
            if c > 4:
                bad += 1
                continue
            d = c - 1
            px = x + DX[d]
            py = y + DY[d]
            if not (0 <= px < nx and 0 <= py < ny) or codes[py, px] != OPPOSITE[d] + 1:
                bad += 1
    return bad


@njit(cache=True)
def has_closed_vpath(codes):
    """True if some 0-line or 1-line of the pairing closes on itself."""
    ny, nx = codes.shape
    # 0-lines: every vertex has at most one successor
    color = np.zeros((ny, nx), dtype=np.uint8)
    for sy in range(0, ny, 2):
        for sx in range(0, nx, 2):
            if color[sy, sx] != 0:
                continue
            x, y = sx, sy
            while True:
                color[y, x] = 1
                c = codes[y, x]
                if c == CRITICAL:
                    break
                d = c - 1
                x += 2 * DX[d]
                y += 2 * DY[d]
                if color[y, x] == 1:
                    return True
                if color[y, x] == 2:
                    break
            x, y = sx, sy
            while color[y, x] == 1:
                color[y, x] = 2
                c = codes[y, x]
                if c == CRITICAL:
                    break
                d = c - 1
                x += 2 * DX[d]
                y += 2 * DY[d]
    # 1-lines: edge e paired up with quad q leads to the other facets of q
    # that are themselves paired up; iterative DFS with three colours
    color[:, :] = 0
    stack = np.empty((ny * nx, 3), dtype=np.int64)
    for sy in range(ny):
        for sx in range(nx):
            if (sx & 1) + (sy & 1) != 1 or color[sy, sx] != 0:
                continue
            top = 0
            stack[0, 0] = sx
            stack[0, 1] = sy
            stack[0, 2] = 0
            color[sy, sx] = 1
            while top >= 0:
                x = stack[top, 0]
                y = stack[top, 1]
                k = stack[top, 2]
                c = codes[y, x]
                qx = x
                qy = y
                up = False
                if c != CRITICAL:
                    d = c - 1
                    qx = x + DX[d]
                    qy = y + DY[d]
                    up = (qx & 1) + (qy & 1) == 2
                pushed = False
                while up and k < 4:
                    ex = qx + DX[k]
                    ey = qy + DY[k]
                    k += 1
                    if ex == x and ey == y:
                        continue
                    ce = codes[ey, ex]
                    if ce == CRITICAL:
                        continue
                    de = ce - 1
                    if (ex + DX[de]) & 1 == 0 or (ey + DY[de]) & 1 == 0:
                        continue  # paired down with a vertex
                    if color[ey, ex] == 1:
                        return True
                    if color[ey, ex] == 0:
                        stack[top, 2] = k
                        top += 1
                        stack[top, 0] = ex
                        stack[top, 1] = ey
                        stack[top, 2] = 0
                        color[ey, ex] = 1
                        pushed = True
                        break
                if not pushed:
                    color[y, x] = 2
                    top -= 1
    return False
