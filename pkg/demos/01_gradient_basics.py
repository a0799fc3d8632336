"""
Combinatorial gradients on a tiny grid
======================================

Build the gradient field of a 5x2 grid by hand-picked values and follow a
separatrix from its saddle down to the minima.
"""

import numpy as np

from msgrad import Grid, compute_gradient, critical_cells, extract_ms_complex, trace_separatrix

# two minima, (0, 0) and (4, 1), separated by a low pass on the bottom row
values = np.array([[0.0, 1.0, 4.0, 6.0, 5.0],
                   [3.0, 8.0, 7.0, 9.0, 2.0]])
grid = Grid(values)
V = compute_gradient(grid, "steepest")

# cells live on the doubled lattice: vertices have even coordinates,
# edges one odd coordinate, quads two
for c in critical_cells(V, grid):
    print(f"{c.kind:8s} cell {tuple(c.cell)} value {c.value}")

msc = extract_ms_complex(grid, V)
print("Euler characteristic:", msc.euler())

# each saddle edge sends one V-path down each endpoint
saddle = next(c for c in msc.criticals if c.index == 1)
for side in (0, 1):
    cells, polyline, _ = trace_separatrix(saddle, side, 0, V, grid)
    print(f"side {side}:", [tuple(map(int, c)) for c in cells])

# the matching is compact: one byte per cell, half a byte when packed
print("bytes per pixel:", V.nbytes / values.size, "packed:", V.packed().nbytes / values.size)
