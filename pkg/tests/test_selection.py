from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgrad.selection import (
    DOWN,
    LEFT,
    RIGHT,
    UP,
    CandidateEdge,
    EdgePmf,
    Probabilistic,
    RngStream,
    SteepestDescent,
    collinearity_residual,
    expected_direction,
    get_strategy,
    probabilistic_weights,
    rng_uniform,
    sample_edge,
    steepest_edge,
)

V = (4, 4)


def edge(d, delta, w=1, h=1):
    return CandidateEdge.from_direction(V, d, delta, w, h)


def test_steepest_examples():
    assert steepest_edge([edge(RIGHT, 3), edge(UP, 1)]).direction == RIGHT
    assert steepest_edge([edge(UP, 2), edge(RIGHT, 2)]).direction == RIGHT
    assert steepest_edge([edge(RIGHT, 1, w=0.5), edge(UP, 1, w=0.5)]).direction == RIGHT
    with pytest.raises(ValueError):
        steepest_edge([])


def test_weights_exact():
    pmf = probabilistic_weights([edge(RIGHT, Fraction(3)), edge(UP, Fraction(1))])
    assert pmf.probs == (Fraction(3, 4), Fraction(1, 4))
    pmf = probabilistic_weights([edge(RIGHT, Fraction(1), w=Fraction(2)), edge(UP, Fraction(1), w=Fraction(2))])
    assert pmf.probs == (Fraction(1, 5), Fraction(4, 5))
    pmf = probabilistic_weights([edge(RIGHT, 2.5), edge(UP, 2.5)])
    assert pmf.probs == (0.5, 0.5)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_flat_region_is_uniform(n):
    pmf = probabilistic_weights([edge(d, Fraction(0)) for d in range(n)])
    assert pmf.probs == (Fraction(1, n),) * n


def test_expected_direction_examples():
    cands = [edge(RIGHT, 1), edge(UP, 1)]
    assert expected_direction(EdgePmf(tuple(cands), (0.5, 0.5))) == (0.5, 0.5)
    assert expected_direction(EdgePmf(tuple(cands), (0.75, 0.25))) == (0.75, 0.25)
    assert expected_direction(EdgePmf(tuple(cands), (1.0, 0.0))) == (1.0, 0.0)


def test_collinearity_examples():
    assert collinearity_residual((0.75, 0.25), (3, 1)) == 0
    assert collinearity_residual((1, 0), (0, 1)) == 1
    assert collinearity_residual((0.5, 0.5), (2, 2)) == 0


@settings(max_examples=300, deadline=None)
@given(
    st.floats(0.1, 10), st.floats(0.1, 10),
    st.floats(0, 10), st.floats(0, 10),
)
def test_expected_direction_follows_gradient(w, h, W, H):
    if W == 0 and H == 0:
        return
    pmf = probabilistic_weights([edge(RIGHT, W, w, h), edge(UP, H, w, h)])
    ex, ey = expected_direction(pmf)
    grad = (W / w, H / h)
    scale = np.hypot(ex, ey) * np.hypot(*grad)
    assert abs(collinearity_residual((ex, ey), grad)) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=1, max_size=4), st.floats(0.01, 100))
def test_weights_are_scale_invariant(deltas, k):
    a = probabilistic_weights([edge(d, x) for d, x in enumerate(deltas)]).probs
    b = probabilistic_weights([edge(d, k * x) for d, x in enumerate(deltas)]).probs
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    assert abs(sum(a) - 1) < 1e-12


def _reference_uniform(seed, stream, counter):
    # SplitMix64 finalizer in Python integers, keyed by stream then counter
    mask = (1 << 64) - 1
    golden = 0x9E3779B97F4A7C15

    def mix(z):
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    key = mix((seed + golden * (stream + 1)) & mask)
    z = mix(key ^ ((golden * (counter + 1)) & mask))
    return (z >> 11) * 2.0**-53


def test_rng_is_reproducible():
    a = [RngStream(42, 0).uniform() for _ in range(3)]
    s = RngStream(42, 0)
    b = [s.uniform() for _ in range(5)]
    assert a[0] == b[0]
    assert b == [rng_uniform(np.uint64(42), np.uint64(0), np.uint64(i)) for i in range(5)]
    assert all(0 <= u < 1 for u in b)
    assert len(set(b)) == 5
    assert RngStream(42, 1).uniform() != b[0]


def test_rng_matches_reference_mixer():
    for seed, stream, counter in [(0, 0, 0), (42, 0, 3), (2**64 - 1, 17, 9), (7, 2**40, 2**33)]:
        u = rng_uniform(np.uint64(seed), np.uint64(stream), np.uint64(counter))
        assert u == _reference_uniform(seed, stream, counter)


def test_sample_edge_degenerate_and_frequency():
    cands = (edge(RIGHT, 1), edge(UP, 1))
    rng = RngStream(1)
    assert all(sample_edge(EdgePmf(cands, (1.0, 0.0)), rng) is cands[0] for _ in range(1000))
    assert all(sample_edge(EdgePmf(cands, (0.0, 1.0)), rng) is cands[1] for _ in range(1000))
    n = 10**6
    u = np.array([rng_uniform(np.uint64(42), np.uint64(0), np.uint64(i)) for i in range(n)])
    freq = np.mean(u < 0.5)
    assert 0.498 <= freq <= 0.502


def test_strategy_lookup():
    assert isinstance(get_strategy("steepest"), SteepestDescent)
    assert isinstance(get_strategy("probabilistic"), Probabilistic)
    with pytest.raises(ValueError):
        get_strategy("bogus")
    with pytest.raises(ValueError):
        Probabilistic().choose([edge(LEFT, 1)])


def test_probabilistic_ignores_candidate_order():
    cands = [edge(UP, 1), edge(DOWN, 2), edge(LEFT, 3)]
    for seed in range(50):
        a = Probabilistic().choose(cands, RngStream(seed))
        b = Probabilistic().choose(cands[::-1], RngStream(seed))
        assert a == b


def test_candidate_validation():
    with pytest.raises(ValueError):
        edge(RIGHT, -1)
    with pytest.raises(ValueError):
        EdgePmf((edge(RIGHT, 1),), (0.5,))
