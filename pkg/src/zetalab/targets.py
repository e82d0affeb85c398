"""Target functions for universality scans and their continuity moduli.

Targets come in three families: plain polynomials (strong universality,
zeros allowed), exp-polynomials e^{p(s)} (zero-free by construction), and
mixed tuples of both. A Mergelyan-style approximation step is realized
constructively: least-squares fitting of f (or of a continuous branch of
log f) on a region grid, with the achieved sup-grid error reported so
every claim is auditable.

All targets expose values_on(points) -> (arity, n) array and are
immutable; sup norms of tuples are componentwise maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import BranchCutFailure, FitBoundNotMet, NoPositiveDelta
from .regions import CompactRegion, Rect, Disc, ShiftedUnion, region_gap

# Factor applied wherever a strict inequality is turned into a returned value.
SAFETY = 0.9

_HALVING_STEPS = 60


@dataclass(frozen=True)
class PolynomialTarget:
    """p(s) = sum_k c_k (s - center)^k, coefficients ascending."""

    coefficients: tuple
    center: complex = 0.0 + 0.0j

    arity = 1

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("need at least one coefficient")
        if any(not (math.isfinite(c.real) and math.isfinite(c.imag)) for c in coeffs):
            raise ValueError("coefficients must be finite")
        # canonical form: no trailing zero coefficients beyond degree 0
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "center", complex(self.center))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def values_on(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=complex).ravel()
        vals = npoly.polyval(pts - self.center, np.asarray(self.coefficients))
        return np.atleast_1d(vals)[None, :]

    def evaluate(self, s: complex) -> complex:
        return complex(self.values_on([s])[0, 0])

    def to_json(self) -> dict:
        return {
            "kind": "polynomial",
            "version": 1,
            "center": [self.center.real, self.center.imag],
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
        }


@dataclass(frozen=True)
class ExpPolynomialTarget:
    """g(s) = e^{p(s)}; never zero, which the proofs rely on."""

    exponent: PolynomialTarget

    arity = 1

    def values_on(self, points) -> np.ndarray:
        return np.exp(self.exponent.values_on(points))

    def evaluate(self, s: complex) -> complex:
        return complex(self.values_on([s])[0, 0])

    def to_json(self) -> dict:
        inner = self.exponent.to_json()
        return {
            "kind": "exp_polynomial",
            "version": 1,
            "center": inner["center"],
            "coefficients": inner["coefficients"],
        }


@dataclass(frozen=True)
class MixedTarget:
    """Tuple target (e^{p_1},...,e^{p_i}, q_1,...,q_j) under the sup-norm."""

    zero_free: tuple
    free: tuple

    def __post_init__(self):
        if len(self.zero_free) + len(self.free) < 1:
            raise ValueError("mixed target needs at least one component")
        if any(not isinstance(g, ExpPolynomialTarget) for g in self.zero_free):
            raise ValueError("zero_free components must be exp-polynomials")
        if any(not isinstance(p, PolynomialTarget) for p in self.free):
            raise ValueError("free components must be polynomials")

    @property
    def arity(self) -> int:
        return len(self.zero_free) + len(self.free)

    @property
    def components(self) -> tuple:
        return tuple(self.zero_free) + tuple(self.free)

    def values_on(self, points) -> np.ndarray:
        return np.concatenate([c.values_on(points) for c in self.components], axis=0)

    def evaluate(self, s: complex) -> tuple:
        return tuple(complex(v) for v in self.values_on([s])[:, 0])

    def to_json(self) -> dict:
        return {
            "kind": "mixed",
            "version": 1,
            "zero_free": [g.to_json() for g in self.zero_free],
            "free": [p.to_json() for p in self.free],
        }


@dataclass(frozen=True)
class TowerLift(object):
    """The piecewise target h on a tower: h(s + i*offset(m,l)) = g(s).

    Evaluation locates the copy containing each point and pulls back to
    the base target; points outside every copy are an error.
    """

    base: object
    tower: ShiftedUnion

    def __post_init__(self):
        if self.tower.tower is None:
            raise ValueError("TowerLift needs a tower-built shifted union")

    @property
    def arity(self) -> int:
        return getattr(self.base, "arity", 1)

    def values_on(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=complex).ravel()
        idx = self.tower.piece_index_batch(pts)
        if np.any(idx < 0):
            bad = pts[idx < 0][0]
            raise ValueError(f"point {bad} lies in no tower copy")
        shifts = np.asarray(self.tower.shifts, dtype=float)
        return self.base.values_on(pts - 1j * shifts[idx])

    def evaluate(self, s: complex):
        vals = self.values_on([s])[:, 0]
        return complex(vals[0]) if self.arity == 1 else tuple(map(complex, vals))


@dataclass(frozen=True)
class HybridConstraint:
    """Targets |a_j| = 1 for the rotations lambda_j^{-it}, lambdas > 1."""

    lambdas: tuple
    targets: tuple
    epsilon: float

    def __post_init__(self):
        lams = tuple(float(x) for x in self.lambdas)
        if not lams:
            raise ValueError("need at least one lambda")
        if any(not (x > 1.0 and math.isfinite(x)) for x in lams):
            raise ValueError("all lambdas must be finite and > 1")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambdas must be strictly increasing")
        tgts = tuple(complex(a) for a in self.targets)
        if len(tgts) != len(lams):
            raise ValueError("one unit target per lambda required")
        normed = []
        for a in tgts:
            r = abs(a)
            if abs(r - 1.0) > 1e-12:
                raise ValueError(f"target {a} has modulus {r}, expected 1")
            normed.append(a / r)
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "lambdas", lams)
        object.__setattr__(self, "targets", tuple(normed))

    @property
    def k(self) -> int:
        return len(self.lambdas)

    def log_lambdas(self) -> np.ndarray:
        return np.log(np.asarray(self.lambdas, dtype=float))

    def chord_max(self, ts) -> np.ndarray:
        """max_j |lambda_j^{-it} - a_j| for an array of shifts t.

        Uses the exact chord metric 2|sin((t log(lambda_j) + arg a_j)/2)|.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        args = np.angle(np.asarray(self.targets, dtype=complex))
        half = 0.5 * (np.multiply.outer(ts, self.log_lambdas()) + args)
        return np.max(2.0 * np.abs(np.sin(half)), axis=-1)

    def to_json(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "targets": [[a.real, a.imag] for a in self.targets],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HybridConstraint":
        return cls(
            tuple(float(x) for x in obj["lambdas"]),
            tuple(complex(re, im) for re, im in obj["targets"]),
            float(obj["epsilon"]),
        )


@dataclass(frozen=True)
class FitResult:
    """A fitted target plus the sup-grid error it achieved on the samples."""

    target: object
    sup_error: float
    degree: int


def sample_on_region(func, region: CompactRegion) -> list:
    """(s, func(s)) pairs over the region grid, in canonical grid order."""
    return [(complex(s), complex(func(s))) for s in region.grid()]


def _split_samples(f_samples):
    svals = np.array([complex(s) for s, _ in f_samples])
    fvals = np.array([complex(v) for _, v in f_samples])
    if svals.size == 0:
        raise ValueError("no samples")
    if not np.all(np.isfinite(svals.view(float))) or not np.all(
        np.isfinite(fvals.view(float))
    ):
        raise ValueError("non-finite sample")
    return svals, fvals


def _basis_geometry(region: CompactRegion):
    re_lo, re_hi, im_lo, im_hi = region.bbox()
    center = complex((re_lo + re_hi) / 2, (im_lo + im_hi) / 2)
    scale = max((re_hi - re_lo) / 2, (im_hi - im_lo) / 2, 1e-12)
    return center, scale


def _lstsq_poly(svals, wvals, degree: int, center: complex, scale: float):
    x = (svals - center) / scale
    design = np.vander(x, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, wvals, rcond=None)
    coef = coef / scale ** np.arange(degree + 1)
    return PolynomialTarget(tuple(coef), center)


def _residue_check(svals, phases, region: CompactRegion):
    """2D plaquette residue test: a nonzero winding around any grid cell
    means log f has no continuous branch on the region (f winds a zero)."""
    if isinstance(region, ShiftedUnion):
        return
    mesh, mask = region.grid_layout()
    order = []
    for r in range(mesh.shape[0]):
        cols = np.nonzero(mask[r])[0]
        order.extend((r, c) for c in (cols if r % 2 == 0 else cols[::-1]))
    if len(order) != svals.size:
        return
    flat = np.array([mesh[r, c] for r, c in order])
    if np.max(np.abs(flat - svals)) > 1e-9:
        return  # samples not on the canonical grid; sequential unwrap only
    ph = np.full(mesh.shape, np.nan)
    for (r, c), p in zip(order, phases):
        ph[r, c] = p

    def wrap(d):
        return (d + np.pi) % (2 * np.pi) - np.pi

    loop = (
        wrap(ph[:-1, 1:] - ph[:-1, :-1])
        + wrap(ph[1:, 1:] - ph[:-1, 1:])
        + wrap(ph[1:, :-1] - ph[1:, 1:])
        + wrap(ph[:-1, :-1] - ph[1:, :-1])
    )
    cells = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, :-1] & mask[1:, 1:]
    bad = cells & (np.abs(loop) > np.pi)
    if np.any(bad):
        r, c = np.argwhere(bad)[0]
        raise BranchCutFailure(
            f"phase winding of +-2pi around grid cell at {mesh[r, c]}; "
            "the sampled function has a zero inside the region"
        )


def fit_polynomial(f_samples, region: CompactRegion, degree: int, bound: float) -> FitResult:
    """Least-squares polynomial fit of the samples with certified sup error.

    Tries degrees 0..degree in order and returns the first fit whose
    sup-grid error over the samples is < bound; zeros are permitted.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if not bound > 0.0:
        raise ValueError("bound must be positive")
    svals, fvals = _split_samples(f_samples)
    center, scale = _basis_geometry(region)
    best, best_deg = math.inf, 0
    for d in range(min(degree, svals.size - 1) + 1):
        target = _lstsq_poly(svals, fvals, d, center, scale)
        err = float(np.max(np.abs(target.values_on(svals)[0] - fvals)))
        if err < bound:
            return FitResult(target, err, d)
        if err < best:
            best, best_deg = err, d
    raise FitBoundNotMet(best, best_deg)


def fit_exp_polynomial(f_samples, region: CompactRegion, degree: int, bound: float) -> FitResult:
    """Fit g = e^p to nonvanishing samples via a continuous branch of log f.

    The phase of f is unwrapped along the sample order (the canonical
    region grid is serpentine, so consecutive samples are adjacent); when
    the samples sit on the region grid, a plaquette residue check rejects
    inputs whose phase winds around a zero. The reported sup error is of
    |e^p - f|, not of the log residual.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if not bound > 0.0:
        raise ValueError("bound must be positive")
    svals, fvals = _split_samples(f_samples)
    mods = np.abs(fvals)
    if np.min(mods) == 0.0:
        raise ValueError("zero-free samples required for an exp-polynomial fit")
    phases = np.angle(fvals)
    _residue_check(svals, phases, region)
    logf = np.log(mods) + 1j * np.unwrap(phases)
    center, scale = _basis_geometry(region)
    best, best_deg = math.inf, 0
    for d in range(min(degree, svals.size - 1) + 1):
        exponent = _lstsq_poly(svals, logf, d, center, scale)
        target = ExpPolynomialTarget(exponent)
        err = float(np.max(np.abs(target.values_on(svals)[0] - fvals)))
        if err < bound:
            return FitResult(target, err, d)
        if err < best:
            best, best_deg = err, d
    raise FitBoundNotMet(best, best_deg)


def continuity_modulus(target, K: CompactRegion, K0: CompactRegion, bound: float) -> float:
    """Largest halving-search delta with grid-sup variation under the bound.

    Candidates are SAFETY * delta0 * 2^-j where delta0 = d(K, complement
    of K0); a candidate wins when

        max over grid(K) x grid([-delta, delta]) of |g(s+i tau) - g(s)|

    stays below SAFETY * bound (the margin is what keeps the strict
    inequality valid on finer verification grids), and delta < delta0, so
    K + i*tau stays inside K0 throughout. Tuple targets use the
    componentwise sup-norm.
    """
    if not bound > 0.0:
        raise ValueError("bound must be positive")
    delta0 = region_gap(K, K0)
    if delta0 <= 0.0:
        raise ValueError("K must sit strictly inside K0")
    grid = K.grid()
    cand = SAFETY * delta0
    # overflow to inf just means a candidate fails; keep halving
    with np.errstate(over="ignore", invalid="ignore"):
        base = target.values_on(grid)
        for _ in range(_HALVING_STEPS):
            taus = _axis_odd(cand, K.grid_density)
            pts = (grid[None, :] + 1j * taus[:, None]).ravel()
            vals = target.values_on(pts).reshape(base.shape[0], taus.size, grid.size)
            variation = float(np.max(np.abs(vals - base[:, None, :])))
            if variation < SAFETY * bound:
                return cand
            cand *= 0.5
    raise NoPositiveDelta(
        f"no positive delta under {SAFETY * delta0:g} meets the bound {bound:g}"
    )


def _axis_odd(c: float, density: float) -> np.ndarray:
    n = max(9, int(math.ceil(2 * c * density)) + 1)
    if n % 2 == 0:
        n += 1
    return np.linspace(-c, c, n)


def lambda_modulus(constraint: HybridConstraint, bound: float, cap: float | None = None) -> float:
    """Closed-form delta1 with sup_t max_j |lambda_j^{-it} - lambda_j^{-i(t+tau)}| < bound.

    The chord equals 2|sin(tau log(lambda_j)/2)| <= |tau| log(lambda_j),
    maximal at the largest lambda, so delta1 = SAFETY * bound / log(max
    lambda) suffices; an optional cap (the continuity modulus delta of
    the proof chain) clips the result to SAFETY * cap.
    """
    if not bound > 0.0:
        raise ValueError("bound must be positive")
    delta1 = SAFETY * bound / math.log(constraint.lambdas[-1])
    if cap is not None:
        if not cap > 0.0:
            raise ValueError("cap must be positive")
        delta1 = min(delta1, SAFETY * cap)
    return delta1


def target_from_json(obj: dict):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("target JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "polynomial":
        return PolynomialTarget(
            tuple(complex(re, im) for re, im in obj["coefficients"]),
            complex(*obj.get("center", [0.0, 0.0])),
        )
    if kind == "exp_polynomial":
        return ExpPolynomialTarget(
            PolynomialTarget(
                tuple(complex(re, im) for re, im in obj["coefficients"]),
                complex(*obj.get("center", [0.0, 0.0])),
            )
        )
    if kind == "mixed":
        return MixedTarget(
            tuple(target_from_json(g) for g in obj["zero_free"]),
            tuple(target_from_json(p) for p in obj["free"]),
        )
    raise ValueError(f"unknown target kind {kind!r}")
