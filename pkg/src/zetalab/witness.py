"""Witness sets: which shifts achieved the approximation, and how densely.

Discrete sets record integers n (shifts n*alpha), continuous sets record
disjoint closed intervals of t. Both carry the horizon they were scanned
to, the strict threshold epsilon their predicate used, and the
normalization for density (the plain definitions divide by the horizon,
short-interval variants by the window length).

A finite scan can never exhibit a liminf; empirical_density therefore
reports the full-window density together with a profile of prefix
densities at dyadic checkpoints and its running (suffix) minimum, which
is the honest finite-horizon surrogate.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np


def merge_intervals(intervals, lo: float = -math.inf, hi: float = math.inf) -> tuple:
    """Sort, merge touching/overlapping intervals, clip to [lo, hi], and
    drop zero-length leftovers. Producers use this to canonicalize."""
    clipped = []
    for a, b in intervals:
        a2, b2 = max(float(a), lo), min(float(b), hi)
        if a2 < b2:
            clipped.append((a2, b2))
    clipped.sort()
    out: list[tuple[float, float]] = []
    for a, b in clipped:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class DiscreteWitnessSet:
    """Integers n in [window_start, horizon] passing the scan predicate."""

    alpha: float
    members: tuple
    horizon: int
    epsilon: float
    kind: str = "S"
    window_start: int = 0
    density_norm: float | None = None

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be positive and finite")
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive")
        if self.kind not in ("S", "U", "W"):
            raise ValueError(f"kind must be one of S, U, W, got {self.kind!r}")
        if self.horizon < self.window_start:
            raise ValueError("horizon must be >= window_start")
        ms = tuple(sorted({int(n) for n in self.members}))
        if ms and (ms[0] < self.window_start or ms[-1] > self.horizon):
            raise ValueError("members must lie within [window_start, horizon]")
        object.__setattr__(self, "members", ms)
        if self.density_norm is None:
            object.__setattr__(
                self, "density_norm", float(self.horizon - self.window_start or 1)
            )
        elif not (self.density_norm > 0.0):
            raise ValueError("density_norm must be positive")

    @property
    def count(self) -> int:
        return len(self.members)

    def count_leq(self, x) -> int:
        """Number of members n <= x; x may be a Fraction for exactness."""
        return bisect_right(self.members, x)

    def count_in(self, lo, hi) -> int:
        """Number of members with lo < n <= hi (exact for Fraction bounds)."""
        return bisect_right(self.members, hi) - bisect_right(self.members, lo)

    def to_json(self) -> dict:
        return {
            "format": "zetalab/witness/v1",
            "type": "discrete",
            "kind": self.kind,
            "alpha": self.alpha,
            "horizon": self.horizon,
            "window_start": self.window_start,
            "epsilon": self.epsilon,
            "density_norm": self.density_norm,
            "members": list(self.members),
        }


@dataclass(frozen=True)
class ContinuousWitnessSet:
    """Disjoint closed intervals of passing shifts t within the window."""

    intervals: tuple
    horizon: float
    epsilon: float
    window_start: float = 0.0
    density_norm: float | None = None

    def __post_init__(self):
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive")
        if not (self.horizon >= self.window_start):
            raise ValueError("horizon must be >= window_start")
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        prev_end = None
        for a, b in ivs:
            if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
                raise ValueError(f"bad interval [{a}, {b}]")
            if a < self.window_start - 1e-12 or b > self.horizon + 1e-12:
                raise ValueError(f"interval [{a}, {b}] outside the window")
            if prev_end is not None and a <= prev_end:
                raise ValueError("intervals must be sorted and disjoint")
            prev_end = b
        object.__setattr__(self, "intervals", ivs)
        if self.density_norm is None:
            object.__setattr__(
                self, "density_norm", float(self.horizon - self.window_start) or 1.0
            )
        elif not (self.density_norm > 0.0):
            raise ValueError("density_norm must be positive")

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def measure_leq(self, x: float) -> float:
        """Measure of the set intersected with (-inf, x]."""
        total = 0.0
        for a, b in self.intervals:
            if a >= x:
                break
            total += min(b, x) - a
        return total

    def clipped(self, lo: float, hi: float) -> tuple:
        return merge_intervals(self.intervals, lo, hi)

    def to_json(self) -> dict:
        return {
            "format": "zetalab/witness/v1",
            "type": "continuous",
            "horizon": self.horizon,
            "window_start": self.window_start,
            "epsilon": self.epsilon,
            "density_norm": self.density_norm,
            "intervals": [list(iv) for iv in self.intervals],
        }


def witness_from_json(obj: dict):
    if obj.get("format") != "zetalab/witness/v1":
        raise ValueError("not a zetalab witness file")
    if obj["type"] == "discrete":
        return DiscreteWitnessSet(
            alpha=float(obj["alpha"]),
            members=tuple(obj["members"]),
            horizon=int(obj["horizon"]),
            epsilon=float(obj["epsilon"]),
            kind=obj.get("kind", "S"),
            window_start=int(obj.get("window_start", 0)),
            density_norm=obj.get("density_norm"),
        )
    if obj["type"] == "continuous":
        return ContinuousWitnessSet(
            intervals=tuple(tuple(iv) for iv in obj["intervals"]),
            horizon=float(obj["horizon"]),
            epsilon=float(obj["epsilon"]),
            window_start=float(obj.get("window_start", 0.0)),
            density_norm=obj.get("density_norm"),
        )
    raise ValueError(f"unknown witness type {obj['type']!r}")


@dataclass(frozen=True)
class DensityProfile:
    """Finite-horizon density with a dyadic prefix profile.

    value is mass/norm over the whole window. checkpoints are window
    prefixes of dyadically growing length; running_min[i] is the minimum
    of the densities from checkpoint i onward (a liminf proxy: it shows
    whether late prefixes keep the density up). Never read value as a
    statement about the liminf itself.
    """

    value: float
    checkpoints: tuple
    densities: tuple
    running_min: tuple


def empirical_density(ws) -> DensityProfile:
    """Density of a witness set at its recorded horizon, plus profile."""
    start = float(ws.window_start)
    norm = float(ws.density_norm)
    if isinstance(ws, DiscreteWitnessSet):
        def mass(upto: float) -> float:
            return float(ws.count_leq(upto))
    else:
        def mass(upto: float) -> float:
            return ws.measure_leq(upto)

    spans = []
    span = norm
    while span >= 1.0 and len(spans) < 40:
        spans.append(span)
        span /= 2.0
    spans.reverse()
    if not spans:
        spans = [norm]
    checkpoints = tuple(start + s for s in spans)
    densities = tuple(mass(c) / (c - start) for c in checkpoints)
    running = []
    cur = math.inf
    for d in reversed(densities):
        cur = min(cur, d)
        running.append(cur)
    running.reverse()
    return DensityProfile(
        value=mass(start + norm) / norm,
        checkpoints=checkpoints,
        densities=densities,
        running_min=tuple(running),
    )
