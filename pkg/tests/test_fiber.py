import dataclasses
import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcfqkd.fiber import (
    NT_MCF_2018, SMF_BASELINE, TA_MCF_2018, FiberSpec, FiberVariant, adjacency, fiber_loss,
    neighbours, xt_isolation,
)


@pytest.mark.parametrize("a, b, expected", [(0, 3, True), (1, 2, True), (1, 4, False), (6, 1, True), (2, 5, False)])
def test_adjacency_examples(a, b, expected):
    assert adjacency(a, b) is expected


def test_adjacency_rejects_same_core():
    with pytest.raises(ValueError):
        adjacency(2, 2)


def test_adjacency_structure():
    for a, b in itertools.permutations(range(7), 2):
        assert adjacency(a, b) == adjacency(b, a)
    assert len(neighbours(0)) == 6
    assert all(len(neighbours(k)) == 3 for k in range(1, 7))


def test_xt_isolation_per_pair(nt_pair, ta_pair):
    assert xt_isolation(nt_pair, 1, 0, 2.5) == 45.0
    assert xt_isolation(nt_pair, 1, 0, 5.0) == pytest.approx(41.98970004336019, abs=1e-12)
    assert xt_isolation(ta_pair, 3, 0, 2.5) == 65.0
    assert xt_isolation(nt_pair, 1, 4, 2.5) is None


def test_xt_isolation_aggregate_presets():
    # total into the center core from its 6 neighbours is the quoted XT
    per_pair = xt_isolation(NT_MCF_2018, 1, 0, 2.5)
    assert per_pair == pytest.approx(45 + 10 * math.log10(6))
    total = 10 * math.log10(sum(10 ** (-xt_isolation(NT_MCF_2018, s, 0, 2.5) / 10) for s in range(1, 7)))
    assert total == pytest.approx(-45.0, abs=1e-12)
    # side core: 3 neighbours
    assert xt_isolation(TA_MCF_2018, 0, 1, 2.5) == pytest.approx(65 + 10 * math.log10(3))


def test_xt_isolation_errors(nt_pair):
    with pytest.raises(ValueError):
        xt_isolation(nt_pair, 1, 0, 0.0)
    with pytest.raises(ValueError):
        xt_isolation(nt_pair, 1, 0, -1.0)
    with pytest.raises(ValueError):
        xt_isolation(nt_pair, 2, 2, 1.0)


def test_single_mode_has_no_crosstalk():
    assert xt_isolation(SMF_BASELINE, 1, 0, 10.0) is None


def test_isolation_matrix_override(nt_pair):
    m = [[None] * 7 for _ in range(7)]
    m[4][0] = 70.0
    fiber = dataclasses.replace(nt_pair, isolation_matrix=m)
    assert xt_isolation(fiber, 4, 0, 5.0) == pytest.approx(70 - 10 * math.log10(2))
    assert xt_isolation(fiber, 1, 0, 5.0) is None
    with pytest.raises(ValueError):
        dataclasses.replace(nt_pair, isolation_matrix=[[None] * 7] * 6)


def test_fiber_loss_examples(nt_pair):
    assert fiber_loss(nt_pair, 2.5) == pytest.approx(0.5)
    assert fiber_loss(nt_pair, 0.0) == 0.0
    assert fiber_loss(SMF_BASELINE, 122.0) == pytest.approx(24.4)
    with pytest.raises(ValueError):
        fiber_loss(nt_pair, -0.1)


@pytest.mark.parametrize("kwargs", [
    dict(length_km=0.0), dict(attenuation_db_per_km=-0.1), dict(xt_adjacent_db=-45.0),
    dict(xt_reference_length_km=0.0),
])
def test_fiber_spec_invariants(kwargs):
    base = dict(variant=FiberVariant.NON_TRENCH, length_km=2.5, attenuation_db_per_km=0.2,
                xt_adjacent_db=45.0, xt_reference_length_km=2.5)
    with pytest.raises(ValueError):
        FiberSpec(**{**base, **kwargs})


@given(st.floats(min_value=0.01, max_value=500), st.sampled_from([(1, 0), (0, 2), (3, 4)]))
def test_xt_doubling_law(length, pair):
    for fiber in (NT_MCF_2018, TA_MCF_2018):
        a = xt_isolation(fiber, *pair, length)
        b = xt_isolation(fiber, *pair, 2 * length)
        assert a - b == pytest.approx(10 * math.log10(2), abs=1e-9)
        assert xt_isolation(TA_MCF_2018, *pair, length) > xt_isolation(NT_MCF_2018, *pair, length)


def test_reference_length_exact(nt_pair, ta_pair):
    for fiber in (nt_pair, ta_pair):
        for src in range(1, 7):
            assert xt_isolation(fiber, src, 0, fiber.xt_reference_length_km) == fiber.xt_adjacent_db
