"""Specifications of candidate universal functions Z(s).

A ZSpec is a small expression tree over two leaves, the Riemann and
Hurwitz zeta-functions, combined by ratios against an affine argument
map (e.g. zeta(s)/zeta(2s)), products, and tuples for joint scans.

Every node can be bound to a fixed evaluation grid, which returns an
object exposing values(shifts) -> array of shape (arity, B, m). Binding
is what scans use: it keeps per-grid state (the power matrix of the
Euler-Maclaurin driver) alive across shift batches. Any object with the
same bind/arity surface can stand in for a ZSpec in a scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionNearZero
from .zeta import DEFAULT_CONFIG, EvalConfig, HurwitzShiftEvaluator

# Ratio denominators with modulus below this guard abort the evaluation.
DIVISION_GUARD = 1e-8


class ZSpec:
    """Base class; concrete nodes implement arity and bind."""

    arity: int = 1

    def bind(self, grid, cfg: EvalConfig):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class RiemannZeta(ZSpec):
    def bind(self, grid, cfg: EvalConfig):
        return _LeafBound(HurwitzShiftEvaluator(grid, 1.0, cfg))

    def to_json(self) -> dict:
        return {"type": "riemann"}


@dataclass(frozen=True)
class HurwitzZeta(ZSpec):
    beta: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"Hurwitz beta must lie in (0, 1], got {self.beta}")

    def bind(self, grid, cfg: EvalConfig):
        return _LeafBound(HurwitzShiftEvaluator(grid, self.beta, cfg))

    def to_json(self) -> dict:
        return {"type": "hurwitz", "beta": self.beta}


@dataclass(frozen=True)
class Ratio(ZSpec):
    """numerator(s) / numerator(a*s + b) for an affine map with a > 0.

    Covers the zeta(s)/zeta(2s) and zeta(s)/zeta(s+1) style combinations;
    the affine image must stay inside the evaluability region.
    """

    numerator: ZSpec
    denom_scale: float
    denom_offset: float

    def __post_init__(self):
        if self.numerator.arity != 1:
            raise ValueError("ratio parts must be scalar")
        if not (self.denom_scale > 0.0 and math.isfinite(self.denom_scale)):
            raise ValueError("denominator map scale must be positive and finite")
        if not math.isfinite(self.denom_offset):
            raise ValueError("denominator map offset must be finite")

    def bind(self, grid, cfg: EvalConfig):
        grid = np.asarray(grid, dtype=complex).ravel()
        num = self.numerator.bind(grid, cfg)
        den = self.numerator.bind(self.denom_scale * grid + self.denom_offset, cfg)
        return _RatioBound(num, den, self.denom_scale)

    def to_json(self) -> dict:
        return {
            "type": "ratio",
            "numerator": self.numerator.to_json(),
            "denominator_map": [self.denom_scale, self.denom_offset],
        }


@dataclass(frozen=True)
class Product(ZSpec):
    factors: tuple

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ValueError("product needs at least one factor")
        if any(f.arity != 1 for f in self.factors):
            raise ValueError("product factors must be scalar")

    def bind(self, grid, cfg: EvalConfig):
        return _ProductBound([f.bind(grid, cfg) for f in self.factors])

    def to_json(self) -> dict:
        return {"type": "product", "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True)
class ZTuple(ZSpec):
    components: tuple

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("tuple arity must be >= 1")
        if any(isinstance(c, ZTuple) or c.arity != 1 for c in self.components):
            raise ValueError("tuple components must be scalar (no nesting)")
        object.__setattr__(self, "arity", len(self.components))

    def bind(self, grid, cfg: EvalConfig):
        return _TupleBound([c.bind(grid, cfg) for c in self.components])

    def to_json(self) -> dict:
        return {"type": "tuple", "components": [c.to_json() for c in self.components]}


class _LeafBound:
    def __init__(self, ev: HurwitzShiftEvaluator):
        self._ev = ev

    def values(self, shifts) -> np.ndarray:
        v = self._ev.values(shifts)
        return v[None, :, :]


class _RatioBound:
    def __init__(self, num, den, scale: float):
        self._num = num
        self._den = den
        self._scale = scale

    def values(self, shifts) -> np.ndarray:
        shifts = np.asarray(shifts, dtype=float)
        nv = self._num.values(shifts)
        dv = self._den.values(self._scale * shifts)
        small = np.abs(dv) < DIVISION_GUARD
        if np.any(small):
            raise DivisionNearZero(
                f"denominator modulus below guard {DIVISION_GUARD} at "
                f"{int(small.sum())} evaluation points"
            )
        return nv / dv


class _ProductBound:
    def __init__(self, parts):
        self._parts = parts

    def values(self, shifts) -> np.ndarray:
        acc = self._parts[0].values(shifts)
        for p in self._parts[1:]:
            acc = acc * p.values(shifts)
        return acc


class _TupleBound:
    def __init__(self, parts):
        self._parts = parts

    def values(self, shifts) -> np.ndarray:
        return np.concatenate([p.values(shifts) for p in self._parts], axis=0)


def eval_zspec(z, s: complex, cfg: EvalConfig = DEFAULT_CONFIG):
    """Evaluate a ZSpec at one point; tuples return a tuple of values."""
    bound = z.bind(np.array([s], dtype=complex), cfg)
    vals = bound.values(np.zeros(1))[:, 0, 0]
    if z.arity == 1:
        return complex(vals[0])
    return tuple(complex(v) for v in vals)


def zspec_from_json(obj: dict) -> ZSpec:
    """Inverse of to_json; raises ValueError on malformed input."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError("zspec JSON must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "riemann":
        _expect_keys(obj, {"type"})
        return RiemannZeta()
    if kind == "hurwitz":
        _expect_keys(obj, {"type", "beta"})
        return HurwitzZeta(float(obj["beta"]))
    if kind == "ratio":
        _expect_keys(obj, {"type", "numerator", "denominator_map"})
        a, b = obj["denominator_map"]
        return Ratio(zspec_from_json(obj["numerator"]), float(a), float(b))
    if kind == "product":
        _expect_keys(obj, {"type", "factors"})
        return Product(tuple(zspec_from_json(f) for f in obj["factors"]))
    if kind == "tuple":
        _expect_keys(obj, {"type", "components"})
        return ZTuple(tuple(zspec_from_json(c) for c in obj["components"]))
    raise ValueError(f"unknown zspec type {kind!r}")


def _expect_keys(obj: dict, allowed: set):
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown zspec fields {sorted(extra)}")
