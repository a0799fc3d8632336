"""Probabilistic combinatorial gradients and geometric Morse-Smale complexes on 2D grids."""
from .cellgrid import (
    CellId,
    Grid,
    InvalidCellError,
    boundary,
    cell_dim,
    cell_value,
    coboundary,
    geometric_center,
    max_vertex,
    read_msg1,
    write_msg1,
)
from .morse import (
    GradientField,
    MorseSmaleComplex,
    compute_gradient,
    critical_cells,
    extract_ms_complex,
    lower_star,
    process_lower_star,
    trace_separatrix,
)
from .selection import Probabilistic, SteepestDescent, get_strategy

__version__ = "0.1.0"
