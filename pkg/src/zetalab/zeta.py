"""Riemann and Hurwitz zeta evaluation by Euler-Maclaurin summation.

One code path serves both functions: zeta(s, beta) is the shifted sum
sum_{n>=0} (n+beta)^(-s), and beta = 1 gives the Riemann zeta-function.
The truncated sum over n < N is corrected by

    (N+b)^(1-s)/(s-1) + (N+b)^(-s)/2
        + sum_{k=1..K} B_{2k}/(2k)! * (s)_{2k-1} * (N+b)^(-s-2k+1)

with (s)_m the rising factorial, and the remainder after K correction
terms is bounded (Backlund) by

    |R_K| <= |B_{2K+2}/(2K+2)!| * |(s)_{2K+1}| * (N+b)^(-sigma-2K-1)
             * |s+2K+1| / (sigma+2K+1),

valid for sigma = Re(s) > -2K-1; we restrict to sigma > -1. The cutoff N
is doubled until the bound certifies the requested absolute tolerance, so
every returned value carries a rigorous error estimate.

Two evaluation drivers share the formula:

  * a direct elementwise driver for scalar calls, and
  * a factored grid-times-shifts driver for scans, which computes the
    main sums as one matrix product A @ U with A[q,n] = (n+b)^(-s_q) and
    U[n,j] = (n+b)^(-i t_j), refreshing U by incremental phase rotation.

Both are pure functions of their inputs; results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import PoleAtOne, ToleranceUnreachable

# Inside this radius around s = 1 evaluation is an error, never a number.
POLE_GUARD = 1e-9

# Smallest honest absolute tolerance for float64 at desk heights.
MIN_TOLERANCE = 5e-16

_N_START = 32


@dataclass(frozen=True)
class Strip:
    """Vertical strip sigma1 < Re(s) < sigma2; infinities allowed."""

    sigma1: float = -math.inf
    sigma2: float = math.inf

    def __post_init__(self):
        if math.isnan(self.sigma1) or math.isnan(self.sigma2):
            raise ValueError("strip bounds must not be NaN")
        if not self.sigma1 < self.sigma2:
            raise ValueError(f"need sigma1 < sigma2, got {self.sigma1}, {self.sigma2}")

    def contains_re(self, re: float) -> bool:
        return self.sigma1 < re < self.sigma2

    def margin(self, re_lo: float, re_hi: float) -> float:
        """Distance from [re_lo, re_hi] to the strip boundary (inf if open)."""
        lo = re_lo - self.sigma1 if math.isfinite(self.sigma1) else math.inf
        hi = self.sigma2 - re_hi if math.isfinite(self.sigma2) else math.inf
        return min(lo, hi)


@dataclass(frozen=True)
class EvalConfig:
    """Accuracy contract for one evaluation call.

    abs_tolerance: certified absolute error bound per returned value.
    max_terms: hard cap on the Euler-Maclaurin cutoff N.
    em_order: number K of Bernoulli correction terms.
    """

    abs_tolerance: float = 1e-10
    max_terms: int = 2_000_000
    em_order: int = 12

    def __post_init__(self):
        if not (self.abs_tolerance >= MIN_TOLERANCE):
            raise ValueError(f"abs_tolerance must be >= {MIN_TOLERANCE}")
        if self.max_terms < _N_START:
            raise ValueError(f"max_terms must be >= {_N_START}")
        if not 1 <= self.em_order <= 30:
            raise ValueError("em_order must be in [1, 30]")


DEFAULT_CONFIG = EvalConfig()


@lru_cache(maxsize=None)
def bernoulli_even(count: int) -> tuple[float, ...]:
    """B_2, B_4, ..., B_{2*count} as floats, from the exact recurrence."""
    top = 2 * count
    b = [Fraction(0)] * (top + 1)
    b[0] = Fraction(1)
    for m in range(1, top + 1):
        acc = Fraction(0)
        c = 1  # binomial(m+1, j) built incrementally
        for j in range(m):
            acc += c * b[j]
            c = c * (m + 1 - j) // (j + 1)
        b[m] = -acc / (m + 1)
    return tuple(float(b[2 * k]) for k in range(1, count + 1))


def _check_point(s: complex) -> complex:
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise ValueError(f"non-finite evaluation point {s!r}")
    if abs(s - 1.0) < POLE_GUARD:
        raise PoleAtOne(f"point {s!r} within guard radius {POLE_GUARD} of the pole")
    if s.real <= -1.0:
        raise ValueError(f"Re(s) = {s.real} outside supported region Re(s) > -1")
    return s


def _remainder_log_bound(s_abs: float, sigma_min: float, w: float, order: int) -> float:
    """log of the Backlund remainder bound at the worst point of a batch."""
    b2 = bernoulli_even(order + 1)[order]  # B_{2K+2}
    lg = math.log(abs(b2)) - math.lgamma(2 * order + 3)
    for i in range(2 * order + 1):
        lg += math.log(max(s_abs + i, 1e-300))  # s_abs may be 0 at s = 0
    lg -= (sigma_min + 2 * order + 1) * math.log(w)
    lg += math.log(s_abs + 2 * order + 1) - math.log(sigma_min + 2 * order + 1)
    return lg


def choose_cutoff(s_abs: float, sigma_min: float, beta: float, cfg: EvalConfig) -> int:
    """Smallest doubling cutoff N with a certified remainder <= tolerance."""
    log_tol = math.log(cfg.abs_tolerance)
    n = _N_START
    while True:
        if _remainder_log_bound(s_abs, sigma_min, n + beta, cfg.em_order) <= log_tol:
            return n
        if n >= cfg.max_terms:
            raise ToleranceUnreachable(
                f"cutoff > max_terms={cfg.max_terms} needed for |s| ~ {s_abs:.3g} "
                f"at tolerance {cfg.abs_tolerance:g}"
            )
        n = min(2 * n, cfg.max_terms)


def _em_tail(s, w: float, order: int):
    """Integral + half-term + Bernoulli corrections at cutoff point w.

    s may be any complex ndarray (or scalar); returns matching shape.
    """
    s = np.asarray(s, dtype=complex)
    b2k = bernoulli_even(order)
    w_ms = np.exp(-s * math.log(w))  # w^(-s)
    total = w_ms * w / (s - 1.0) + 0.5 * w_ms
    # p = (s)_{2k-1} * w^(-s-2k+1), built by the two-factor recurrence
    p = s * w_ms / w
    fact = 2.0
    for k in range(1, order + 1):
        total = total + (b2k[k - 1] / fact) * p
        p = p * ((s + (2 * k - 1)) * (s + 2 * k)) / (w * w)
        fact *= (2 * k + 1) * (2 * k + 2)
    return total, p  # p = (s)_{2K+1} * w^(-s-2K-1), reused by remainder checks


def _em_direct(s, beta: float, n_cut: int, order: int):
    """Direct Euler-Maclaurin evaluation, elementwise over s."""
    s = np.asarray(s, dtype=complex)
    base = np.log(beta + np.arange(n_cut, dtype=float))  # log(n+beta), n < N
    # sum over n of exp(-s * log(n+beta)); modest sizes only
    main = np.exp(-np.multiply.outer(s, base)).sum(axis=-1)
    tail, _ = _em_tail(s, n_cut + beta, order)
    return main + tail


def eval_hurwitz_zeta(s: complex, beta: float, cfg: EvalConfig = DEFAULT_CONFIG) -> complex:
    """Hurwitz zeta(s, beta) with certified absolute error <= cfg.abs_tolerance.

    Requires beta in (0, 1], Re(s) > -1, and s outside the pole guard.
    """
    if not (0.0 < beta <= 1.0) or not math.isfinite(beta):
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    s = _check_point(s)
    n_cut = choose_cutoff(abs(s), s.real, beta, cfg)
    return complex(_em_direct(s, beta, n_cut, cfg.em_order))


def eval_riemann_zeta(s: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> complex:
    """Riemann zeta(s) with certified absolute error <= cfg.abs_tolerance."""
    return eval_hurwitz_zeta(s, 1.0, cfg)


class HurwitzShiftEvaluator:
    """Evaluates zeta(s_q + i t, beta) for a fixed grid and many shifts t.

    The main sums factor as (n+b)^(-s_q) * (n+b)^(-it); the first factor
    lives in a column-extendable matrix A, the second in a per-call phase
    matrix U built from one exactly-anchored column and incremental
    rotations when the shifts are uniformly spaced. Values match the
    direct driver to within the configured tolerance.
    """

    # grid rows per gemm chunk, bounds peak memory for tall grids
    _CHUNK = 4096

    def __init__(self, grid, beta: float = 1.0, cfg: EvalConfig = DEFAULT_CONFIG):
        if not (0.0 < beta <= 1.0) or not math.isfinite(beta):
            raise ValueError(f"beta must lie in (0, 1], got {beta}")
        grid = np.asarray(grid, dtype=complex).ravel()
        if grid.size == 0:
            raise ValueError("empty evaluation grid")
        if not np.all(np.isfinite(grid.view(float))):
            raise ValueError("non-finite grid point")
        if np.min(grid.real) <= -1.0:
            raise ValueError("grid extends to Re(s) <= -1")
        self.grid = grid
        self.beta = beta
        self.cfg = cfg
        self._log_base = np.empty(0)
        self._a = np.empty((grid.size, 0), dtype=complex)

    def _extend(self, n_cut: int):
        have = self._log_base.size
        if n_cut <= have:
            return
        new_log = np.log(self.beta + np.arange(have, n_cut, dtype=float))
        new_cols = np.exp(-np.multiply.outer(self.grid, new_log))
        self._log_base = np.concatenate([self._log_base, new_log])
        self._a = np.concatenate([self._a, new_cols], axis=1)

    def _phase_matrix(self, shifts, n_cut: int):
        """U[n, j] = exp(-i * shifts[j] * log(n+beta)) for n < n_cut."""
        base = self._log_base[:n_cut]
        u = np.empty((n_cut, len(shifts)), dtype=complex)
        phase = -shifts[0] * base
        u[:, 0].real = np.cos(phase)
        u[:, 0].imag = np.sin(phase)
        if len(shifts) == 1:
            return u
        steps = np.diff(shifts)
        if np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
            rot_phase = -steps[0] * base
            rot = np.empty(n_cut, dtype=complex)
            rot.real = np.cos(rot_phase)
            rot.imag = np.sin(rot_phase)
            for j in range(1, len(shifts)):
                np.multiply(u[:, j - 1], rot, out=u[:, j])
        else:
            for j in range(1, len(shifts)):
                phase = -shifts[j] * base
                u[:, j].real = np.cos(phase)
                u[:, j].imag = np.sin(phase)
        return u

    def values(self, shifts) -> np.ndarray:
        """Array of shape (len(shifts), grid size) of zeta(s_q + i t_j, beta)."""
        shifts = np.asarray(shifts, dtype=float).ravel()
        if shifts.size == 0:
            return np.empty((0, self.grid.size), dtype=complex)
        if not np.all(np.isfinite(shifts)):
            raise ValueError("non-finite shift")
        pts = self.grid[None, :] + 1j * shifts[:, None]
        if np.min(np.abs(pts - 1.0)) < POLE_GUARD:
            raise PoleAtOne("a shifted grid point falls inside the pole guard")
        s_abs = float(np.max(np.abs(pts)))
        sigma_min = float(np.min(self.grid.real))
        n_cut = choose_cutoff(s_abs, sigma_min, self.beta, self.cfg)
        self._extend(n_cut)
        u = self._phase_matrix(shifts, n_cut)
        out = np.empty((shifts.size, self.grid.size), dtype=complex)
        for lo in range(0, self.grid.size, self._CHUNK):
            hi = min(lo + self._CHUNK, self.grid.size)
            tail, _ = _em_tail(pts[:, lo:hi], n_cut + self.beta, self.cfg.em_order)
            out[:, lo:hi] = (self._a[lo:hi, :n_cut] @ u).T + tail
        return out


def hurwitz_values(points, beta: float = 1.0, cfg: EvalConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Vectorized one-off evaluation of zeta(., beta) over an array of points."""
    points = np.asarray(points, dtype=complex)
    flat = points.ravel()
    if flat.size == 0:
        return np.zeros(points.shape, dtype=complex)
    if not np.all(np.isfinite(flat.view(float))):
        raise ValueError("non-finite evaluation point")
    if np.min(np.abs(flat - 1.0)) < POLE_GUARD:
        raise PoleAtOne("a point falls inside the pole guard")
    if np.min(flat.real) <= -1.0:
        raise ValueError("Re(s) <= -1 not supported")
    n_cut = choose_cutoff(float(np.max(np.abs(flat))), float(np.min(flat.real)), beta, cfg)
    return _em_direct(flat, beta, n_cut, cfg.em_order).reshape(points.shape)
