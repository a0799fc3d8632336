import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgrad.cellgrid import (
    CellId,
    Grid,
    InvalidCellError,
    boundary,
    cell_counts,
    cell_dim,
    cell_value,
    coboundary,
    geometric_center,
    max_vertex,
    read_msg1,
    write_msg1,
)


def grid3(values=None, **kw):
    return Grid(np.arange(9.0).reshape(3, 3) if values is None else values, **kw)


@pytest.mark.parametrize("c, p", [((4, 6), 0), ((5, 6), 1), ((5, 7), 2)])
def test_cell_dim(c, p):
    assert cell_dim(c) == p


def test_cell_dim_rejects_out_of_range():
    with pytest.raises(InvalidCellError):
        cell_dim((5, 0), grid3())
    with pytest.raises(InvalidCellError):
        cell_dim((-1, 0))


def test_boundary_examples():
    assert set(boundary((5, 6))) == {(4, 6), (6, 6)}
    assert set(boundary((5, 7))) == {(4, 7), (6, 7), (5, 6), (5, 8)}
    assert boundary((0, 0)) == []


def test_coboundary_examples():
    g = Grid(np.zeros((5, 5)))
    assert set(coboundary((0, 0), grid3())) == {(1, 0), (0, 1)}
    assert set(coboundary((5, 6), g)) == {(5, 5), (5, 7)}
    assert coboundary((1, 1), g) == []
    assert len(coboundary((4, 4), g)) == 4
    assert len(coboundary((4, 0), g)) == 3


def test_values_and_max_vertex():
    g = Grid(np.array([[0.0, 1.0, 3.0], [2.0, 2.0, 5.0]]))
    assert cell_value((2, 0), g) == 1.0
    assert cell_value((3, 0), g) == 3.0
    assert max_vertex((3, 0), g) == (4, 0)
    # equal values: larger linear index wins
    assert max_vertex((1, 2), g) == (2, 2)
    assert cell_value((1, 1), g) == 2.0
    assert max_vertex((4, 4 - 2), g) == (4, 2)


def test_quad_value_is_corner_max():
    g = Grid(np.array([[0.0, 1.0], [2.0, 3.0]]))
    assert cell_value((1, 1), g) == 3.0


def test_geometric_center():
    g = grid3(origin=(-2.0, -2.0))
    assert geometric_center((0, 0), g) == (-2.0, -2.0)
    assert geometric_center((1, 0), g) == (-1.5, -2.0)
    assert geometric_center((1, 1), g) == (-1.5, -1.5)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(np.zeros((1, 5)))
    with pytest.raises(ValueError):
        Grid(np.zeros((3, 3)), pixel_w=0.0)
    with pytest.raises(ValueError):
        Grid(np.array([[0.0, np.nan], [1.0, 2.0]]))
    g = grid3()
    with pytest.raises(ValueError):
        g.values[0, 0] = 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(2, 7))
def test_incidence_symmetry_and_counts(w, h):
    g = Grid(np.zeros((h, w)))
    counts = [0, 0, 0]
    for c in g.cells():
        p = cell_dim(c, g)
        counts[p] += 1
        for f in boundary(c, g):
            assert cell_dim(f) == p - 1
            assert c in coboundary(f, g)
        for f in coboundary(c, g):
            assert c in boundary(f, g)
    assert tuple(counts) == cell_counts(w, h)
    assert counts[0] - counts[1] + counts[2] == 1


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 6),
    st.integers(2, 6),
    st.data(),
)
def test_msg1_round_trip_is_bit_exact(w, h, data):
    floats = st.floats(allow_nan=False, allow_infinity=False, width=64)
    vals = np.array(data.draw(st.lists(floats, min_size=w * h, max_size=w * h))).reshape(h, w)
    pw = data.draw(st.floats(1e-6, 1e6))
    g = Grid(vals, pw, 0.25, (-2.0, 3.5))
    buf = io.BytesIO()
    write_msg1(g, buf)
    assert len(buf.getvalue()) == 44 + 8 * w * h
    back = read_msg1(io.BytesIO(buf.getvalue()))
    assert back == g
    assert back.values.tobytes() == g.values.tobytes()


def test_msg1_rejects_corrupt(tmp_path):
    p = tmp_path / "bad.msg1"
    p.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        read_msg1(p)
    buf = io.BytesIO()
    write_msg1(grid3(), buf)
    p.write_bytes(buf.getvalue()[:-8])
    with pytest.raises(ValueError):
        read_msg1(p)


def test_cellid_is_tuple():
    assert CellId(1, 2) == (1, 2)
