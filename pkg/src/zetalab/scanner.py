"""Universality scans over continuous t-windows and discrete n*alpha lattices.

Discrete scans are exact: the predicate is evaluated at every lattice
point and the witness set is precisely the passing set. Continuous scans
are conservative: a grid point t contributes the cell
[t - step/2, t + step/2] only when its sup-distance clears the threshold
by a Lipschitz margin (estimated from adjacent difference quotients,
times a safety factor of 2); near-threshold cells get one level of step
halving. Hybrid chord constraints use their exact Lipschitz constant
log(lambda_max).

Scans accept any object with the ZSpec bind/arity surface, so synthetic
functions can drive the same machinery the zeta-functions use.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import IndependenceViolated
from .kronecker import independence_check
from .regions import CompactRegion, ShiftedUnion
from .targets import TowerLift
from .witness import ContinuousWitnessSet, DiscreteWitnessSet, merge_intervals
from .zeta import DEFAULT_CONFIG, EvalConfig

BATCH = 256

# Safety factor on observed difference quotients in the margin estimate.
LIP_SAFETY = 2.0

# Height for the number-theoretic prechecks of hybrid discrete scans.
INDEPENDENCE_HEIGHT = 30


@dataclass(frozen=True)
class ContinuousMode:
    t_start: float
    t_end: float
    step: float

    def __post_init__(self):
        if not (self.step > 0.0 and math.isfinite(self.step)):
            raise ValueError("step must be positive")
        if not (math.isfinite(self.t_start) and self.t_end >= self.t_start >= 0.0):
            raise ValueError("need 0 <= t_start <= t_end")


@dataclass(frozen=True)
class DiscreteMode:
    alpha: float
    n_start: int
    n_end: int

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be positive")
        if not 0 <= self.n_start <= self.n_end:
            raise ValueError("need 0 <= n_start <= n_end")


@dataclass(frozen=True)
class OmegaSpec:
    """Short-interval window growth omega(T): linear or T^a (log T)^b."""

    form: str
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.form not in ("linear", "powerlog"):
            raise ValueError("form must be 'linear' or 'powerlog'")

    def omega(self, t: float) -> float:
        if self.form == "linear":
            return float(t)
        if t <= 1.0:
            raise ValueError("powerlog omega needs t > 1")
        return t ** self.a * math.log(t) ** self.b

    def growth_infimum(self, alpha: float, grid=None) -> float:
        """inf over the test grid of omega(alpha*t)/omega(t)."""
        if not alpha > 0.0:
            raise ValueError("alpha must be positive")
        if grid is None:
            lo = 10.0 if self.form == "linear" else max(10.0, 1.5 / alpha)
            grid = np.geomspace(lo, 1e6, 600)
        vals = [self.omega(alpha * t) / self.omega(t) for t in grid]
        return float(min(vals))

    def to_json(self) -> dict:
        return {"form": self.form, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ScanConfig:
    zspec: object
    target: object
    region: CompactRegion
    epsilon: float
    mode: object
    hybrid: object | None = None
    short_interval: tuple | None = None
    eval_config: EvalConfig = field(default_factory=lambda: DEFAULT_CONFIG)

    def __post_init__(self):
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive")
        if not isinstance(self.mode, (ContinuousMode, DiscreteMode)):
            raise ValueError("mode must be ContinuousMode or DiscreteMode")
        za = getattr(self.zspec, "arity", 1)
        ta = getattr(self.target, "arity", 1)
        if za != ta:
            raise ValueError(f"zspec arity {za} != target arity {ta}")
        if self.short_interval is not None:
            t0, w = self.short_interval
            if not (t0 >= 0.0 and w >= 0.0):
                raise ValueError("short_interval must be (T >= 0, omega(T) >= 0)")


@dataclass(frozen=True)
class ScanOutcome:
    """Witness set plus the per-shift evaluation rows behind it.

    rows are (shift, sup_distance, hybrid_max, passed) sorted by shift;
    hybrid_max is NaN when no hybrid constraint was active. threshold is
    the strict bound the predicate used (epsilon/2 for tower scans).
    """

    witness: object
    rows: tuple
    threshold: float
    hybrid_threshold: float | None
    refined: int = 0


class _Distances:
    """Batched sup-norm distances |Z(. + it) - target| over a region grid."""

    def __init__(self, zspec, region, target, cfg: EvalConfig, threads: int = 1):
        grid = region.grid()
        if grid.size == 0:
            raise ValueError("region grid is empty")
        tvals = np.atleast_2d(target.values_on(grid))
        za = getattr(zspec, "arity", 1)
        if za != tvals.shape[0]:
            raise ValueError(f"zspec arity {za} != target arity {tvals.shape[0]}")
        self._grid = grid
        self._tvals = tvals
        self._zspec = zspec
        self._cfg = cfg
        self._threads = max(1, int(threads))
        self._local = threading.local()

    def _bound(self):
        b = getattr(self._local, "bound", None)
        if b is None:
            b = self._zspec.bind(self._grid, self._cfg)
            self._local.bound = b
        return b

    def _one(self, shifts: np.ndarray) -> np.ndarray:
        vals = self._bound().values(shifts)
        return np.max(np.abs(vals - self._tvals[:, None, :]), axis=(0, 2))

    def __call__(self, shifts: np.ndarray) -> np.ndarray:
        shifts = np.asarray(shifts, dtype=float)
        batches = [shifts[i : i + BATCH] for i in range(0, len(shifts), BATCH)]
        if not batches:
            return np.empty(0)
        if self._threads == 1 or len(batches) == 1:
            parts = [self._one(b) for b in batches]
        else:
            with ThreadPoolExecutor(max_workers=self._threads) as pool:
                parts = list(pool.map(self._one, batches))
        return np.concatenate(parts)


def _precheck_hybrid(cfg: ScanConfig):
    """Defs of hybrid universality demand log-independence, and for
    discrete shifts also irrationality of alpha*log(lambda_j)/pi."""
    hyb = cfg.hybrid
    if hyb is None:
        return
    alpha = cfg.mode.alpha if isinstance(cfg.mode, DiscreteMode) else 1.0
    report = independence_check(hyb.lambdas, alpha, INDEPENDENCE_HEIGHT)
    if report.verdict == "relation_found":
        raise IndependenceViolated(
            f"log lambdas admit the integer relation {report.relation}"
        )
    if isinstance(cfg.mode, DiscreteMode) and report.rational_angles:
        raise IndependenceViolated(
            f"alpha*log(lambda_j)/pi rational for indices "
            f"{[r[0] for r in report.rational_angles]}"
        )


def _scan_discrete(cfg, threshold, kind, window, norm, threads) -> ScanOutcome:
    n_start, n_end, window_start = window
    alpha = cfg.mode.alpha
    ns = np.arange(n_start, n_end + 1, dtype=int)
    shifts = alpha * ns.astype(float)
    dist = _Distances(cfg.zspec, cfg.region, cfg.target, cfg.eval_config, threads)
    d = dist(shifts)
    if cfg.hybrid is not None:
        h = cfg.hybrid.chord_max(shifts)
        hyb_threshold = cfg.hybrid.epsilon
        passed = (d < threshold) & (h < hyb_threshold)
    else:
        h = np.full(len(shifts), math.nan)
        hyb_threshold = None
        passed = d < threshold
    witness = DiscreteWitnessSet(
        alpha=alpha,
        members=tuple(int(n) for n in ns[passed]),
        horizon=n_end,
        epsilon=threshold,
        kind=kind,
        window_start=window_start,
        density_norm=norm,
    )
    rows = tuple(zip(shifts.tolist(), d.tolist(), h.tolist(), passed.tolist()))
    return ScanOutcome(witness, rows, threshold, hyb_threshold)


def _scan_continuous(cfg, threshold, window, norm, threads) -> ScanOutcome:
    t_start, t_end = window
    step = cfg.mode.step
    count = int(math.floor((t_end - t_start) / step + 1e-9)) + 1
    shifts = t_start + step * np.arange(count)
    dist = _Distances(cfg.zspec, cfg.region, cfg.target, cfg.eval_config, threads)
    d = dist(shifts)

    if cfg.hybrid is not None:
        h = cfg.hybrid.chord_max(shifts)
        hyb_threshold = cfg.hybrid.epsilon
        hyb_lip = float(np.log(cfg.hybrid.lambdas[-1]))
    else:
        h = np.full(count, math.nan)
        hyb_threshold = None
        hyb_lip = 0.0

    # local Lipschitz estimate from adjacent difference quotients
    lip = np.zeros(count)
    if count > 1:
        q = np.abs(np.diff(d)) / step
        lip[:-1] = q
        lip[1:] = np.maximum(lip[1:], q)
    lip *= LIP_SAFETY
    margin = lip * (step / 2.0)

    pass_d = d < threshold - margin
    near_d = d < threshold + margin
    if cfg.hybrid is not None:
        hyb_margin = hyb_lip * (step / 2.0)
        pass_h = h < hyb_threshold - hyb_margin
        near_h = h < hyb_threshold + hyb_margin
    else:
        pass_h = np.ones(count, dtype=bool)
        near_h = pass_h
    passed = pass_d & pass_h
    near = ~passed & near_d & near_h

    cells = [(t - step / 2, t + step / 2) for t in shifts[passed]]
    rows = list(zip(shifts.tolist(), d.tolist(), h.tolist(), passed.tolist()))

    refined = 0
    if np.any(near):
        centers = shifts[near]
        sub = np.concatenate([centers - step / 4, centers + step / 4])
        d_r = dist(sub)
        lip_r = np.tile(lip[near], 2)  # parent estimate reused for both halves
        margin_r = lip_r * (step / 4.0)
        if cfg.hybrid is not None:
            h_r = cfg.hybrid.chord_max(sub)
            ok_r = (d_r < threshold - margin_r) & (
                h_r < hyb_threshold - hyb_lip * (step / 4.0)
            )
        else:
            h_r = np.full(len(sub), math.nan)
            ok_r = d_r < threshold - margin_r
        refined = len(sub)
        cells.extend(
            (t - step / 4, t + step / 4) for t in sub[ok_r]
        )
        rows.extend(zip(sub.tolist(), d_r.tolist(), h_r.tolist(), ok_r.tolist()))

    intervals = merge_intervals(cells, t_start, t_end)
    witness = ContinuousWitnessSet(
        intervals=intervals,
        horizon=t_end,
        epsilon=threshold,
        window_start=t_start,
        density_norm=norm,
    )
    rows.sort(key=lambda r: r[0])
    return ScanOutcome(witness, tuple(rows), threshold, hyb_threshold, refined)


def scan(cfg: ScanConfig, kind: str | None = None, threads: int = 1) -> ScanOutcome:
    """Run the universality predicate over the configured shift window.

    Discrete mode returns the exact passing lattice set; continuous mode
    returns the conservative interval union described in the module
    docstring. A hybrid constraint is conjoined when present, after the
    number-theoretic prechecks.
    """
    if cfg.short_interval is not None:
        raise ValueError("config declares a short interval; use scan_short_interval")
    _precheck_hybrid(cfg)
    if isinstance(cfg.mode, DiscreteMode):
        k = kind or ("U" if cfg.hybrid is not None else "S")
        window = (cfg.mode.n_start, cfg.mode.n_end, 0)
        return _scan_discrete(cfg, cfg.epsilon, k, window, float(cfg.mode.n_end or 1),
                              threads)
    window = (cfg.mode.t_start, cfg.mode.t_end)
    norm = cfg.mode.t_end - cfg.mode.t_start
    return _scan_continuous(cfg, cfg.epsilon, window, norm or 1.0, threads)


def scan_short_interval(cfg: ScanConfig, omega: OmegaSpec, kind: str | None = None,
                        threads: int = 1) -> ScanOutcome:
    """Scan restricted to the short window [T, T+omega(T)], density
    normalized by omega(T). The declared (T, omega(T)) pair must match
    the OmegaSpec, and the growth condition inf omega(alpha t)/omega(t)
    must be positive for the scan's alpha."""
    if cfg.short_interval is None:
        raise ValueError("config lacks a short_interval declaration")
    t0, w = cfg.short_interval
    want = omega.omega(t0) if (omega.form == "linear" or t0 > 1.0) else w
    if abs(want - w) > 1e-9 * max(1.0, abs(want)):
        raise ValueError(f"declared omega(T)={w} but OmegaSpec gives {want}")
    alpha = cfg.mode.alpha if isinstance(cfg.mode, DiscreteMode) else 2.0
    growth = omega.growth_infimum(alpha)
    if not growth > 0.0:
        raise ValueError(f"omega growth infimum {growth} not positive")
    _precheck_hybrid(cfg)
    norm = w if w > 0 else 1.0
    if isinstance(cfg.mode, DiscreteMode):
        k = kind or ("U" if cfg.hybrid is not None else "S")
        n0 = int(math.ceil(t0))
        n1 = int(math.floor(t0 + w))
        return _scan_discrete(cfg, cfg.epsilon, k, (n0, n1, n0), norm, threads)
    return _scan_continuous(cfg, cfg.epsilon, (t0, t0 + w), norm, threads)


def scan_tower(cfg: ScanConfig, kind: str | None = None, threads: int = 1) -> ScanOutcome:
    """Scan a tower region against the lifted target h, threshold eps/2.

    cfg.target is the base target g; it is lifted to every tower copy via
    piece location, and the predicate is the sup over all copies of
    |Z(s+it) - h(s)| < epsilon/2.
    """
    region = cfg.region
    if not isinstance(region, ShiftedUnion) or region.tower is None:
        raise ValueError("scan_tower needs a tower-built region")
    lifted = TowerLift(cfg.target, region)
    inner = ScanConfig(
        zspec=cfg.zspec,
        target=lifted,
        region=region,
        epsilon=cfg.epsilon,
        mode=cfg.mode,
        hybrid=cfg.hybrid,
        eval_config=cfg.eval_config,
    )
    _precheck_hybrid(inner)
    threshold = cfg.epsilon / 2.0
    if isinstance(cfg.mode, DiscreteMode):
        k = kind or ("U" if cfg.hybrid is not None else "S")
        window = (cfg.mode.n_start, cfg.mode.n_end, 0)
        return _scan_discrete(inner, threshold, k, window,
                              float(cfg.mode.n_end or 1), threads)
    window = (cfg.mode.t_start, cfg.mode.t_end)
    norm = cfg.mode.t_end - cfg.mode.t_start
    return _scan_continuous(inner, threshold, window, norm or 1.0, threads)
