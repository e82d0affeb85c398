"""Synthetic test function with witness windows known by construction.

SyntheticWindowZ is vertically periodic with period P and equals the
lifted base target near every lattice offset: at height y it evaluates
the base target pulled back by the nearest point of {offsets} + P*Z.
Scanning a tower built from the same offsets therefore produces witness
windows around every shift t that is a multiple of P, and discrete scans
of the base region see witnesses where n*alpha falls near the lattice.

build_campaign assembles a full proof-faithful parameter chain around
such a function (enlarged region, continuity moduli, tower, Kronecker
covering number, constants ledger) for the transfer-direction tests.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from zetalab import (
    Disc,
    ExpPolynomialTarget,
    HybridConstraint,
    PolynomialTarget,
    Strip,
    TorusAngles,
    TowerParams,
    TransferConstants,
    build_tower,
    continuity_modulus,
    covering_number,
    enlarge,
    lambda_modulus,
)


class SyntheticWindowZ:
    """Deterministic numpy-vectorized stand-in for a universal function."""

    arity = 1

    def __init__(self, base_target, offsets, period: float):
        offsets = tuple(sorted(float(d) for d in offsets))
        if offsets[-1] - offsets[0] >= period:
            raise ValueError("period must exceed the offset span")
        self.base = base_target
        self.offsets = offsets
        self.period = float(period)

    def nearest_lattice_residual(self, y: np.ndarray) -> np.ndarray:
        """y minus the nearest element of {offsets} + period*Z."""
        r = np.mod(y, self.period)
        ext = np.array(
            (self.offsets[-1] - self.period,) + self.offsets + (self.offsets[0] + self.period,)
        )
        idx = np.searchsorted(ext, r)
        idx = np.clip(idx, 1, len(ext) - 1)
        left = ext[idx - 1]
        right = ext[idx]
        nearest = np.where(r - left <= right - r, left, right)
        return r - nearest

    def values_at(self, pts: np.ndarray) -> np.ndarray:
        res = self.nearest_lattice_residual(pts.imag)
        return self.base.values_on(pts.real + 1j * res)

    def bind(self, grid, cfg=None):
        return _BoundSynthetic(self, np.asarray(grid, dtype=complex).ravel())


class _BoundSynthetic:
    def __init__(self, z: SyntheticWindowZ, grid: np.ndarray):
        self._z = z
        self._grid = grid

    def values(self, shifts) -> np.ndarray:
        shifts = np.asarray(shifts, dtype=float).ravel()
        pts = self._grid[None, :] + 1j * shifts[:, None]
        vals = self._z.values_at(pts.ravel())
        return vals.reshape(vals.shape[0], shifts.size, self._grid.size)


@dataclass
class Campaign:
    """Everything the transfer-direction tests need, built consistently."""

    strip: Strip
    K: Disc
    K0: object
    g: ExpPolynomialTarget
    epsilon: float
    alpha: float
    delta0: float
    delta: float
    delta1: float
    params: TowerParams
    tower: object
    angles: TorusAngles
    hybrid_full: HybridConstraint     # budget epsilon (W-sets)
    hybrid_half: HybridConstraint     # budget epsilon/2 (U-sets)
    constants: TransferConstants
    Z: SyntheticWindowZ
    period: float
    horizon: int                      # slab count N for the counting check
    t_end: float                      # alpha * horizon
    w_horizon: int                    # W must be scanned to horizon + C + 1


def build_campaign(grid_density: float = 20.0, horizon_periods: float = 2.2) -> Campaign:
    strip = Strip(0.5, 1.0)
    K = Disc(0.75 + 0j, 0.05, grid_density=grid_density, strip=strip)
    delta0 = 0.15
    K0 = enlarge(K, delta0, strip)
    # g = exp(2(s - 3/4)): variation 2|g||sin(tau)| is large enough that
    # witness windows have width well below the lattice spacing
    g = ExpPolynomialTarget(PolynomialTarget((0j, 2.0 + 0j), center=0.75 + 0j))
    epsilon = 1.2
    alpha = 1.25

    delta = continuity_modulus(g, K, K0, epsilon / 4.0)
    lambdas = (2.0,)
    unit_targets = (cmath.exp(0.7j),)
    hybrid_full = HybridConstraint(lambdas, unit_targets, epsilon)
    hybrid_half = HybridConstraint(lambdas, unit_targets, epsilon / 2.0)
    delta1 = lambda_modulus(hybrid_half, epsilon / 2.0, cap=delta)

    M = int(math.floor(alpha / delta)) + 1
    im_lo, im_hi = K0.im_extent()
    N = max(1, int(math.ceil(max(abs(im_lo), abs(im_hi)) / alpha)))
    L1 = 4 * M * N
    angles = TorusAngles.from_lambdas(lambdas, L1, alpha)
    L = covering_number(angles, epsilon, 10**5).L
    params = TowerParams(alpha, M, N, L, 3 * N + 1.0 / M, L1)
    tower = build_tower(K0, params)

    span = params.offset_of(M, L)
    period = float(math.ceil(span + 30.0))
    Z = SyntheticWindowZ(g, tower.shifts, period)

    horizon = int(round(horizon_periods * period / alpha))
    t_end = alpha * horizon
    constants = TransferConstants.build(delta0, delta, delta1, params)
    w_horizon = horizon + int(math.ceil(constants.C + 1.0 + delta)) + 1
    return Campaign(
        strip=strip, K=K, K0=K0, g=g, epsilon=epsilon, alpha=alpha,
        delta0=delta0, delta=delta, delta1=delta1, params=params, tower=tower,
        angles=angles, hybrid_full=hybrid_full, hybrid_half=hybrid_half,
        constants=constants, Z=Z, period=period, horizon=horizon,
        t_end=t_end, w_horizon=w_horizon,
    )
