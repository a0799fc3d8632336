import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from msgrad.analytic import circle_grid
from msgrad.cellgrid import CellId, Grid, cell_dim, cell_value, max_vertex
from msgrad.morse import (
    BranchMissing,
    GradientField,
    compute_gradient,
    critical_cells,
    extract_ms_complex,
    lower_star,
    process_lower_star,
    trace_separatrix,
)
from oracle import CellGraph, all_expansions, critical_counts, is_matching, oracle_gradient

STRATEGIES = ("steepest", "probabilistic")


def pair_set(V):
    return {frozenset(map(tuple, p)) for p in V.pairs()}


def test_lower_star_examples():
    mono = Grid(np.arange(12.0).reshape(3, 4))
    assert lower_star((0, 0), mono) == [(0, 0)]
    peak = Grid(np.array([[0, 1, 2], [3, 9, 4], [5, 6, 7]], dtype=float))
    assert len(lower_star((2, 2), peak)) == 9


def test_lower_star_of_linear_ramp():
    xs, ys = np.meshgrid(np.arange(3.0), np.arange(3.0))
    g = Grid(xs + 2 * ys)
    assert set(lower_star((4, 4), g)) == {(4, 4), (3, 4), (4, 3), (3, 3)}
    # same answer by brute force over every cell's highest vertex
    brute = {c for c in g.cells() if max_vertex(c, g) == (4, 4)}
    assert brute == set(lower_star((4, 4), g))


def test_process_lower_star_examples():
    g = Grid(np.array([[0.0, 1.0], [2.0, 3.0]]))
    V = GradientField.empty(g)
    process_lower_star((0, 0), "steepest", V, g)
    assert V.partner((0, 0)) is None and V.code((0, 0)) == 0
    process_lower_star((2, 0), "steepest", V, g)
    assert V.partner((2, 0)) == (1, 0)
    assert V.partner((1, 0)) == (2, 0)


def test_peak_star_gives_one_maximum():
    g = Grid(np.array([[1, 2, 3], [4, 9, 5], [6, 7, 8]], dtype=float))
    for s in STRATEGIES:
        for seed in range(10):
            V = GradientField.empty(g)
            process_lower_star((2, 2), s, V, g, seed)
            star = lower_star((2, 2), g)
            crit = [c for c in star if V.code(c) == 0]
            assert [cell_dim(c) for c in crit] == [2]
            assert all(V.partner(c) in star for c in star if c not in crit)


def test_expansion_order_does_not_change_critical_types():
    # every admissible choice sequence, exhaustively
    for values in ([[1, 2, 3], [4, 9, 5], [6, 7, 8]],
                   [[9, 0, 9], [0, 5, 0], [9, 0, 9]],
                   [[3, 1, 3], [8, 5, 8], [3, 1, 3]],
                   [[0, 6, 1], [7, 5, 2], [3, 8, 4]]):
        G = CellGraph(values)
        outcomes = set()
        for pairs, crit in all_expansions(G, (1, 1)):
            outcomes.add(tuple(sorted(G.dim[c] for c in crit)))
        assert len(outcomes) == 1, (values, outcomes)


def test_constant_grid_has_one_minimum():
    g = Grid(np.zeros((4, 4)))
    for s in STRATEGIES:
        V = compute_gradient(g, s, seed=3)
        crit = critical_cells(V, g)
        assert [(c.cell, c.index) for c in crit] == [((0, 0), 0)]
        msc = extract_ms_complex(g, V)
        assert msc.counts() == (1, 0, 0) and msc.separatrices == []
    G, pairs, ocrit = oracle_gradient(np.zeros((4, 4)))
    assert ocrit == {(0, 0)}


def test_linear_ramp_has_corner_minimum():
    xs, ys = np.meshgrid(np.arange(3.0), np.arange(3.0))
    g = Grid(xs + 2 * ys)
    crit = critical_cells(compute_gradient(g), g)
    assert [(c.cell, c.index) for c in crit] == [((0, 0), 0)]
    _, _, ocrit = oracle_gradient(xs + 2 * ys)
    assert ocrit == {(0, 0)}


def test_circle_function_euler():
    g = circle_grid(2.0**5, (64, 64))
    for s in STRATEGIES:
        msc = extract_ms_complex(g, compute_gradient(g, s, seed=1))
        assert msc.euler() == 1


# 5x2 strip with a saddle on the bottom row; its left branch runs through
# three vertex/edge pairs into the corner minimum (found with the oracle)
STRIP = np.array([[0.0, 1.0, 4.0, 6.0, 5.0], [3.0, 8.0, 7.0, 9.0, 2.0]])


def test_trace_through_chain_of_pairs():
    g = Grid(STRIP)
    V = compute_gradient(g)
    saddles = [c for c in critical_cells(V, g) if c.index == 1]
    sad = next(c for c in saddles if c.cell == (7, 0))
    cells, poly, exited = trace_separatrix(sad, 0, 0, V, g)
    tail = [tuple(c) for c in cells[1:]]
    assert tail == [(6, 0), (5, 0), (4, 0), (3, 0), (2, 0), (1, 0), (0, 0)]
    assert not exited
    np.testing.assert_array_equal(poly[:, 0], 0.5 * cells[:, 0])
    # other side steps up once into the second minimum
    cells, _, _ = trace_separatrix(sad, 1, 0, V, g)
    assert [tuple(c) for c in cells] == [(7, 0), (8, 0), (8, 1), (8, 2)]
    # cross-check against the oracle's pairing
    G, pairs, _ = oracle_gradient(STRIP)
    assert {frozenset(p) for p in pairs} == pair_set(V)


def test_trace_immediate_minimum():
    g = Grid(np.array([[0.0, 5.0, 1.0], [6.0, 7.0, 8.0]]))
    V = compute_gradient(g)
    sad = next(c for c in critical_cells(V, g) if c.index == 1)
    assert sad.cell == (3, 0)
    cells, _, _ = trace_separatrix(sad, 1, 0, V, g)
    assert [tuple(c) for c in cells] == [(3, 0), (4, 0)]
    cells, _, _ = trace_separatrix(sad, 0, 0, V, g)
    assert [tuple(c) for c in cells] == [(3, 0), (2, 0), (1, 0), (0, 0)]


def test_boundary_saddle_branch_missing():
    g = Grid(np.array([[0.0, 5.0, 1.0], [6.0, 7.0, 8.0]]))
    V = compute_gradient(g)
    sad = next(c for c in critical_cells(V, g) if c.index == 1)
    assert sad.cell[1] == 0
    with pytest.raises(BranchMissing):
        trace_separatrix(sad, 0, 1, V, g)
    cells, _, exited = trace_separatrix(sad, 1, 1, V, g)
    msc = extract_ms_complex(g, V)
    ones = msc.separatrices_of_index(1)
    assert len(ones) == 1 and ones[0].one_sided
    assert ones[0].end is None or msc.criticals[ones[0].end].index == 2


def test_trace_rejects_non_saddle():
    g = Grid(np.zeros((3, 3)))
    V = compute_gradient(g)
    with pytest.raises(ValueError):
        trace_separatrix(critical_cells(V, g)[0], 0, 0, V, g)


def random_grids():
    shapes = st.tuples(st.integers(2, 12), st.integers(2, 12))
    return shapes.flatmap(
        lambda s: arrays(np.float64, s, elements=st.integers(0, 5).map(float))
    )


@settings(max_examples=40, deadline=None)
@given(random_grids(), st.sampled_from(STRATEGIES), st.integers(0, 2**64 - 1))
def test_gradient_invariants(values, strategy, seed):
    g = Grid(values)
    V = compute_gradient(g, strategy, seed=seed)
    assert V.is_matching()
    assert V.is_acyclic()
    # pairs never straddle two lower stars
    for a, b in V.pairs():
        assert max_vertex(a, g) == max_vertex(b, g)
        assert abs(cell_dim(a) - cell_dim(b)) == 1
    msc = extract_ms_complex(g, V)
    assert msc.euler() == 1
    for sep in msc.separatrices_of_index(0):
        vals = [cell_value(tuple(c), g) for c in sep.cells[1::2]]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert msc.criticals[sep.end].index == 0


@settings(max_examples=25, deadline=None)
@given(random_grids(), st.sampled_from(STRATEGIES), st.integers(0, 1000))
def test_matches_oracle(values, strategy, seed):
    G, pairs, crit = oracle_gradient(values, strategy, seed)
    assert is_matching(pairs, crit, G.cells)
    g = Grid(values)
    V = compute_gradient(g, strategy, seed=seed)
    assert {frozenset(p) for p in pairs} == pair_set(V)
    counts = critical_counts(G, crit)
    assert counts == extract_ms_complex(g, V).counts()


def test_lower_stars_partition_cells():
    rng = np.random.default_rng(5)
    g = Grid(rng.integers(0, 3, (6, 7)).astype(float))
    seen = []
    for v in g.cells(0):
        seen += lower_star(v, g)
    assert sorted(seen) == sorted(g.cells())


def test_threads_do_not_change_output():
    g = circle_grid(1.0, (96, 80))
    for s in STRATEGIES:
        a = compute_gradient(g, s, seed=11, threads=1)
        b = compute_gradient(g, s, seed=11, threads=4)
        assert a.codes.tobytes() == b.codes.tobytes()


def test_seed_changes_probabilistic_only():
    g = circle_grid(1.0, (64, 64))
    assert compute_gradient(g, "steepest", seed=1) == compute_gradient(g, "steepest", seed=2)
    assert compute_gradient(g, "probabilistic", seed=1) != compute_gradient(g, "probabilistic", seed=2)


def test_packed_round_trip_and_size():
    g = circle_grid(1.0, (33, 20))
    V = compute_gradient(g, "probabilistic", seed=4)
    packed = V.packed()
    assert packed.nbytes <= 2 * g.width * g.height
    assert V.nbytes <= 4 * g.width * g.height
    assert GradientField.from_packed(packed, g.width, g.height) == V


def test_gradient_field_is_frozen():
    g = Grid(np.zeros((3, 3)))
    V = compute_gradient(g)
    with pytest.raises(ValueError):
        V.codes[0, 0] = 1
    with pytest.raises(ValueError):
        process_lower_star((2, 2), "steepest", V, g)


def test_partner_accessors():
    g = Grid(np.array([[0.0, 1.0], [2.0, 3.0]]))
    V = compute_gradient(g)
    for a, b in V.pairs():
        assert V.partner(a) == b and V.partner(b) == a
    assert isinstance(V.partner((2, 0)), CellId)
