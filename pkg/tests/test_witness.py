"""Witness-set containers, interval merging, and density profiles."""

import numpy as np
import pytest

from zetalab import (
    ContinuousWitnessSet,
    DiscreteWitnessSet,
    empirical_density,
    merge_intervals,
    witness_from_json,
)


def sweep_line_measure(intervals):
    """Oracle: measure of a union via event sweep."""
    events = []
    for a, b in intervals:
        events.append((a, 1))
        events.append((b, -1))
    events.sort()
    depth, total, last = 0, 0.0, None
    for x, d in events:
        if depth > 0:
            total += x - last
        depth += d
        last = x
    return total


def test_merge_example_by_hand():
    # {1, 2} at alpha = 1 expanded by 0.6 merges into [0.4, 2.6]
    out = merge_intervals([(0.4, 1.6), (1.4, 2.6)])
    assert out == ((0.4, 2.6),)
    assert sum(b - a for a, b in out) == pytest.approx(2.2)


def test_merge_random_against_sweep_line():
    rng = np.random.default_rng(31)
    for _ in range(200):
        n = int(rng.integers(1, 60))
        starts = rng.uniform(0, 100, n)
        lens = rng.uniform(0, 5, n)
        ivs = list(zip(starts, starts + lens))
        merged = merge_intervals(ivs)
        assert sum(b - a for a, b in merged) == pytest.approx(
            sweep_line_measure(ivs), abs=1e-12
        )
        # canonical: sorted, strictly separated
        for (a1, b1), (a2, b2) in zip(merged, merged[1:]):
            assert b1 < a2


def test_merge_clipping():
    out = merge_intervals([(-1.0, 0.5), (2.0, 9.0)], lo=0.0, hi=3.0)
    assert out == ((0.0, 0.5), (2.0, 3.0))
    assert merge_intervals([(5.0, 6.0)], lo=0.0, hi=1.0) == ()


def test_discrete_validation():
    w = DiscreteWitnessSet(1.0, (3, 1, 1), 10, 0.5)
    assert w.members == (1, 3)  # sorted, deduplicated
    with pytest.raises(ValueError):
        DiscreteWitnessSet(1.0, (11,), 10, 0.5)
    with pytest.raises(ValueError):
        DiscreteWitnessSet(0.0, (1,), 10, 0.5)
    with pytest.raises(ValueError):
        DiscreteWitnessSet(1.0, (1,), 10, 0.5, kind="X")


def test_continuous_validation():
    with pytest.raises(ValueError):
        ContinuousWitnessSet(((0.0, 1.0), (0.5, 2.0)), 10.0, 0.5)  # overlap
    with pytest.raises(ValueError):
        ContinuousWitnessSet(((1.0, 1.0),), 10.0, 0.5)  # empty interval
    with pytest.raises(ValueError):
        ContinuousWitnessSet(((5.0, 11.0),), 10.0, 0.5)  # outside window
    w = ContinuousWitnessSet(((0.0, 1.0), (2.0, 3.5)), 10.0, 0.5)
    assert w.measure == pytest.approx(2.5)
    assert w.measure_leq(2.5) == pytest.approx(1.5)


def test_density_full_and_empty():
    full = DiscreteWitnessSet(1.0, tuple(range(1, 101)), 100, 0.5)
    assert empirical_density(full).value == pytest.approx(1.0)
    empty = DiscreteWitnessSet(1.0, (), 100, 0.5)
    assert empirical_density(empty).value == 0.0


def test_density_alternating_profile():
    members = tuple(n for n in range(1, 1001) if n % 2 == 0)
    w = DiscreteWitnessSet(1.0, members, 1000, 0.5)
    prof = empirical_density(w)
    assert prof.value == pytest.approx(0.5, abs=1e-3)
    # suffix minima converge to 1/2 from below
    assert prof.running_min[-1] == pytest.approx(0.5, abs=1e-3)
    assert all(m <= 0.5 + 1e-9 for m in prof.running_min)


def test_density_continuous():
    w = ContinuousWitnessSet(((0.0, 2.0), (8.0, 10.0)), 10.0, 0.5)
    prof = empirical_density(w)
    assert prof.value == pytest.approx(0.4)


def test_density_short_window_normalization():
    w = DiscreteWitnessSet(
        1.0, (100, 101, 102), 110, 0.5, window_start=100, density_norm=10.0
    )
    assert empirical_density(w).value == pytest.approx(0.3)


def test_witness_json_roundtrip():
    d = DiscreteWitnessSet(1.25, (0, 3, 77), 100, 0.4, kind="W")
    c = ContinuousWitnessSet(((0.5, 1.0),), 50.0, 0.2, window_start=0.25)
    for w in (d, c):
        assert witness_from_json(w.to_json()) == w
    with pytest.raises(ValueError):
        witness_from_json({"format": "something-else"})
