"""Compact subsets of a strip and the shifted-copy towers built from them.

Regions are immutable and hashable; their deterministic evaluation grids
are derived from a points-per-unit density and cached. Grid order is
serpentine (rows of increasing imaginary part, alternating sweep
direction) so that consecutive grid points are always spatially adjacent,
which the log-fit phase unwrapping relies on.

All sup norms downstream are grid suprema; every region reports its grid
so a verifier can refine and audit.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import MarginTooSmall, OverlapDetected
from .zeta import DEFAULT_CONFIG, EvalConfig, Strip

DEFAULT_GRID_DENSITY = 200.0

# Membership slack for point-in-region tests, absolute.
CONTAINS_TOL = 1e-12


def _axis(lo: float, hi: float, density: float, odd: bool = False) -> np.ndarray:
    n = max(2, int(math.ceil((hi - lo) * density - 1e-9)) + 1)
    if odd and n % 2 == 0:
        n += 1
    return np.linspace(lo, hi, n)


class CompactRegion:
    """Base class for closed regions with a deterministic grid."""

    grid_density: float
    strip: Strip

    def bbox(self) -> tuple[float, float, float, float]:
        """(re_lo, re_hi, im_lo, im_hi) of the closed bounding box."""
        raise NotImplementedError

    def contains(self, z: complex, tol: float = CONTAINS_TOL) -> bool:
        raise NotImplementedError

    def grid_layout(self):
        """(mesh, mask) with mesh an (R, C) complex array, mask boolean."""
        raise NotImplementedError

    def grid(self) -> np.ndarray:
        """Flat serpentine-ordered grid of the region, cached."""
        return _grid_cache(self)

    def im_extent(self) -> tuple[float, float]:
        _, _, lo, hi = self.bbox()
        return lo, hi

    def _validate_strip(self):
        re_lo, re_hi, _, _ = self.bbox()
        if self.strip.margin(re_lo, re_hi) <= 0.0:
            raise ValueError(
                f"region [{re_lo}, {re_hi}] not inside strip "
                f"({self.strip.sigma1}, {self.strip.sigma2}) with positive margin"
            )

    def to_json(self) -> dict:
        raise NotImplementedError


@lru_cache(maxsize=128)
def _grid_cache(region: CompactRegion) -> np.ndarray:
    mesh, mask = region.grid_layout()
    rows = []
    for r in range(mesh.shape[0]):
        pts = mesh[r][mask[r]]
        rows.append(pts if r % 2 == 0 else pts[::-1])
    out = np.concatenate(rows) if rows else np.empty(0, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Disc(CompactRegion):
    center: complex
    radius: float
    grid_density: float = DEFAULT_GRID_DENSITY
    strip: Strip = field(default_factory=Strip)

    def __post_init__(self):
        c = complex(self.center)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("disc center must be finite")
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError("disc radius must be positive and finite")
        if self.grid_density <= 0.0:
            raise ValueError("grid density must be positive")
        self._validate_strip()

    def bbox(self):
        c, r = complex(self.center), self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def contains(self, z, tol: float = CONTAINS_TOL) -> bool:
        return abs(complex(z) - complex(self.center)) <= self.radius + tol

    def grid_layout(self):
        re_lo, re_hi, im_lo, im_hi = self.bbox()
        # odd axis counts keep the center on the mesh, so tiny discs
        # always carry at least one grid point
        xs = _axis(re_lo, re_hi, self.grid_density, odd=True)
        ys = _axis(im_lo, im_hi, self.grid_density, odd=True)
        mesh = xs[None, :] + 1j * ys[:, None]
        mask = np.abs(mesh - complex(self.center)) <= self.radius * (1 + 1e-12)
        return mesh, mask

    def to_json(self) -> dict:
        c = complex(self.center)
        return {
            "shape": "disc",
            "center": [c.real, c.imag],
            "radius": self.radius,
            "grid_density": self.grid_density,
            "strip": [self.strip.sigma1, self.strip.sigma2],
        }


@dataclass(frozen=True)
class Rect(CompactRegion):
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float
    grid_density: float = DEFAULT_GRID_DENSITY
    strip: Strip = field(default_factory=Strip)

    def __post_init__(self):
        vals = (self.sigma_min, self.sigma_max, self.t_min, self.t_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle corners must be finite")
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise ValueError("rectangle must have positive extent on both axes")
        if self.grid_density <= 0.0:
            raise ValueError("grid density must be positive")
        self._validate_strip()

    def bbox(self):
        return self.sigma_min, self.sigma_max, self.t_min, self.t_max

    def contains(self, z, tol: float = CONTAINS_TOL) -> bool:
        z = complex(z)
        return (
            self.sigma_min - tol <= z.real <= self.sigma_max + tol
            and self.t_min - tol <= z.imag <= self.t_max + tol
        )

    def grid_layout(self):
        xs = _axis(self.sigma_min, self.sigma_max, self.grid_density)
        ys = _axis(self.t_min, self.t_max, self.grid_density)
        mesh = xs[None, :] + 1j * ys[:, None]
        return mesh, np.ones(mesh.shape, dtype=bool)

    def boundary_grid(self) -> np.ndarray:
        """Grid points on the four edges, for distance audits."""
        mesh, _ = self.grid_layout()
        edge = np.zeros(mesh.shape, dtype=bool)
        edge[0, :] = edge[-1, :] = True
        edge[:, 0] = edge[:, -1] = True
        return mesh[edge]

    def to_json(self) -> dict:
        return {
            "shape": "rect",
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "grid_density": self.grid_density,
            "strip": [self.strip.sigma1, self.strip.sigma2],
        }


@dataclass(frozen=True)
class TowerParams:
    """Constants of the shifted-copy tower; M1 and L1 are derived exactly.

    M1 = 3N + 1/M (as the float of that expression) and L1 = 4MN; the
    constructor rejects any other value so serialized params can be
    rebuilt from (M, N) without drift.
    """

    alpha: float
    M: int
    N: int
    L: int
    M1: float
    L1: int

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be positive and finite")
        if self.M < 1 or self.N < 1 or self.L < 0:
            raise ValueError("need M >= 1, N >= 1, L >= 0")
        if self.M1 != 3 * self.N + 1.0 / self.M:
            raise ValueError("M1 must equal 3N + 1/M exactly as constructed")
        if self.L1 != 4 * self.M * self.N:
            raise ValueError("L1 must equal 4MN")

    @classmethod
    def build(cls, alpha: float, M: int, N: int, L: int) -> "TowerParams":
        return cls(alpha, M, N, L, 3 * N + 1.0 / M, 4 * M * N)

    def offsets(self) -> list[float]:
        """Vertical offsets (m*M1 + l*L1)*alpha, l-major then m, ascending."""
        return [
            (m * self.M1 + l * self.L1) * self.alpha
            for l in range(self.L + 1)
            for m in range(1, self.M + 1)
        ]

    def offset_of(self, m: int, l: int) -> float:
        return (m * self.M1 + l * self.L1) * self.alpha

    def to_json(self) -> dict:
        # M1 serialized as its exact rational components (3N, 1/M)
        return {
            "alpha": self.alpha,
            "M": self.M,
            "N": self.N,
            "L": self.L,
            "M1_parts": [3 * self.N, [1, self.M]],
            "L1": self.L1,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TowerParams":
        p = cls.build(float(obj["alpha"]), int(obj["M"]), int(obj["N"]), int(obj["L"]))
        whole, (num, den) = obj.get("M1_parts", [3 * p.N, [1, p.M]])
        if whole != 3 * p.N or (num, den) != (1, p.M) or int(obj.get("L1", p.L1)) != p.L1:
            raise ValueError("tower JSON fields inconsistent with (M, N)")
        return p


@dataclass(frozen=True)
class ShiftedUnion(CompactRegion):
    """Finite disjoint union of vertically shifted copies of a base region."""

    base: CompactRegion
    shifts: tuple
    tower: TowerParams | None = None

    def __post_init__(self):
        if isinstance(self.base, ShiftedUnion):
            raise ValueError("nested shifted unions are not supported")
        if len(self.shifts) < 1:
            raise ValueError("need at least one shift")
        if any(not math.isfinite(d) for d in self.shifts):
            raise ValueError("shifts must be finite")
        if list(self.shifts) != sorted(self.shifts):
            raise ValueError("shifts must be ascending")
        _check_disjoint(self.base.im_extent(), self.shifts)
        self._validate_strip()

    @property
    def grid_density(self) -> float:
        return self.base.grid_density

    @property
    def strip(self) -> Strip:
        return self.base.strip

    def bbox(self):
        re_lo, re_hi, im_lo, im_hi = self.base.bbox()
        return re_lo, re_hi, im_lo + self.shifts[0], im_hi + self.shifts[-1]

    def contains(self, z, tol: float = CONTAINS_TOL) -> bool:
        return self.piece_index(z, tol) is not None

    def piece_index(self, z, tol: float = CONTAINS_TOL) -> int | None:
        """Flat index of the piece containing z, or None."""
        z = complex(z)
        im_lo, im_hi = self.base.im_extent()
        # candidate shifts d with im_lo + d <= Im(z) <= im_hi + d
        lo = bisect_left(self.shifts, z.imag - im_hi - tol)
        for idx in range(lo, len(self.shifts)):
            d = self.shifts[idx]
            if im_lo + d > z.imag + tol:
                break
            if self.base.contains(z - 1j * d, tol):
                return idx
        return None

    def piece_index_batch(self, zs) -> np.ndarray:
        """Vectorized piece_index; -1 marks points in no piece."""
        zs = np.asarray(zs, dtype=complex).ravel()
        im_lo, im_hi = self.base.im_extent()
        shifts = np.asarray(self.shifts, dtype=float)
        # nearest piece whose band could contain the point
        idx = np.searchsorted(shifts, zs.imag - im_hi - CONTAINS_TOL)
        idx = np.minimum(idx, len(shifts) - 1)
        out = np.full(zs.shape, -1, dtype=int)
        for k in (idx, np.minimum(idx + 1, len(shifts) - 1)):
            cand = zs - 1j * shifts[k]
            ok = (out < 0) & _contains_batch(self.base, cand)
            out[ok] = k[ok]
        return out

    def grid_layout(self):
        raise NotImplementedError("unions have no single rectangular layout")

    def grid(self) -> np.ndarray:
        return _union_grid_cache(self)

    def to_json(self) -> dict:
        obj = {
            "shape": "shifted_union",
            "base": self.base.to_json(),
            "shifts": list(self.shifts),
        }
        if self.tower is not None:
            obj["tower"] = self.tower.to_json()
        return obj


@lru_cache(maxsize=32)
def _union_grid_cache(region: ShiftedUnion) -> np.ndarray:
    base = region.base.grid()
    out = np.concatenate([base + 1j * d for d in region.shifts])
    out.setflags(write=False)
    return out


def _contains_batch(region: CompactRegion, zs: np.ndarray) -> np.ndarray:
    if isinstance(region, Disc):
        return np.abs(zs - complex(region.center)) <= region.radius + CONTAINS_TOL
    if isinstance(region, Rect):
        return (
            (zs.real >= region.sigma_min - CONTAINS_TOL)
            & (zs.real <= region.sigma_max + CONTAINS_TOL)
            & (zs.imag >= region.t_min - CONTAINS_TOL)
            & (zs.imag <= region.t_max + CONTAINS_TOL)
        )
    return np.array([region.contains(z) for z in zs])


def _check_disjoint(base_extent: tuple[float, float], shifts) -> None:
    """Exact rational disjointness check of the shifted imaginary extents.

    Closed extents must be strictly separated; ties are rejected. Floats
    convert to rationals without loss, so the verdict is exact for the
    actual stored geometry.
    """
    lo, hi = Fraction(base_extent[0]), Fraction(base_extent[1])
    prev_hi = None
    prev_d = None
    for d in sorted(shifts):
        dfrac = Fraction(d)
        if prev_hi is not None and lo + dfrac <= prev_hi:
            raise OverlapDetected(
                f"imaginary extents of shifts {prev_d} and {d} intersect"
            )
        prev_hi = hi + dfrac
        prev_d = d


def enlarge(K: CompactRegion, delta0: float, strip: Strip) -> Rect:
    """Padded filled bounding rectangle of K, the enlargement K0.

    Pads by delta0 on all four sides. The strip must leave strictly more
    than delta0 of room on both vertical boundaries, otherwise the result
    could not keep distance delta0 from its complement while staying
    inside the strip with positive margin.
    """
    if not (delta0 > 0.0 and math.isfinite(delta0)):
        raise MarginTooSmall(f"padding must be strictly positive, got {delta0}")
    re_lo, re_hi, im_lo, im_hi = K.bbox()
    if strip.margin(re_lo, re_hi) <= delta0:
        raise MarginTooSmall(
            f"strip ({strip.sigma1}, {strip.sigma2}) leaves no room for "
            f"padding {delta0} around [{re_lo}, {re_hi}]"
        )
    return Rect(
        re_lo - delta0,
        re_hi + delta0,
        im_lo - delta0,
        im_hi + delta0,
        grid_density=K.grid_density,
        strip=strip,
    )


def region_gap(K: CompactRegion, K0: CompactRegion) -> float:
    """Distance from K to the complement of K0 (0 if K sticks out).

    K0 must be a rectangle or a disc. For rectangular K0 the distance is
    the smallest side clearance of K's bounding box, which is exact for
    disc and rectangle K.
    """
    re_lo, re_hi, im_lo, im_hi = K.bbox()
    if isinstance(K0, Rect):
        gap = min(
            re_lo - K0.sigma_min,
            K0.sigma_max - re_hi,
            im_lo - K0.t_min,
            K0.t_max - im_hi,
        )
        return max(gap, 0.0)
    if isinstance(K0, Disc):
        c0 = complex(K0.center)
        if isinstance(K, Disc):
            reach = abs(complex(K.center) - c0) + K.radius
        else:
            corners = [
                complex(re_lo, im_lo), complex(re_lo, im_hi),
                complex(re_hi, im_lo), complex(re_hi, im_hi),
            ]
            reach = max(abs(c - c0) for c in corners)
        return max(K0.radius - reach, 0.0)
    raise ValueError("enclosing region must be a rectangle or a disc")


def build_tower(K0: CompactRegion, p: TowerParams) -> ShiftedUnion:
    """The union of copies K0 + i(m*M1 + l*L1)*alpha, m=1..M, l=0..L.

    Verifies that K0 lies in the band |Im| <= N*alpha and that all
    (L+1)*M copies are pairwise disjoint (exact rational check).
    """
    im_lo, im_hi = K0.im_extent()
    band = p.N * p.alpha
    if im_lo < -band - CONTAINS_TOL or im_hi > band + CONTAINS_TOL:
        raise ValueError(
            f"K0 imaginary extent [{im_lo}, {im_hi}] outside band |Im| <= {band}"
        )
    return ShiftedUnion(base=K0, shifts=tuple(p.offsets()), tower=p)


def locate(K1: ShiftedUnion, z: complex) -> tuple[int, int] | None:
    """Indices (m, l) of the tower copy containing z, or None if outside."""
    if not isinstance(K1, ShiftedUnion) or K1.tower is None:
        raise ValueError("locate needs a tower-built shifted union")
    idx = K1.piece_index(z)
    if idx is None:
        return None
    return idx % K1.tower.M + 1, idx // K1.tower.M


def sup_distance(zspec, shift: float, target, K: CompactRegion,
                 cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Grid sup of the sup-norm |Z(s + i*shift) - target(s)| over K."""
    grid = K.grid()
    tvals = np.atleast_2d(target.values_on(grid))
    if getattr(zspec, "arity", 1) != tvals.shape[0]:
        raise ValueError(
            f"arity mismatch: Z has {getattr(zspec, 'arity', 1)} components, "
            f"target has {tvals.shape[0]}"
        )
    zvals = zspec.bind(grid, cfg).values(np.array([float(shift)]))
    return float(np.max(np.abs(zvals[:, 0, :] - tvals)))


def region_from_json(obj: dict) -> CompactRegion:
    if not isinstance(obj, dict) or "shape" not in obj:
        raise ValueError("region JSON must be an object with a 'shape' field")
    shape = obj["shape"]
    strip = Strip(*[float(v) for v in obj.get("strip", [-math.inf, math.inf])])
    density = float(obj.get("grid_density", DEFAULT_GRID_DENSITY))
    if shape == "disc":
        re, im = obj["center"]
        return Disc(complex(re, im), float(obj["radius"]), density, strip)
    if shape == "rect":
        return Rect(
            float(obj["sigma_min"]), float(obj["sigma_max"]),
            float(obj["t_min"]), float(obj["t_max"]), density, strip,
        )
    if shape == "shifted_union":
        base = region_from_json(obj["base"])
        tower = TowerParams.from_json(obj["tower"]) if "tower" in obj else None
        return ShiftedUnion(base, tuple(float(d) for d in obj["shifts"]), tower)
    raise ValueError(f"unknown region shape {shape!r}")
