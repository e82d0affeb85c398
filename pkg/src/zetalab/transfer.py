"""Transfer maps between discrete, continuous, and hybrid witness sets.

This is the constructive core of the equivalence chain: expanding a
discrete witness set into delta-neighborhoods (discrete -> continuous),
decomposing a continuous shift t into lattice data (m0, n0, tau), the
Kronecker correction that turns a tower witness into a discrete hybrid
witness n = n0 + l0*L1, and exact verification of the two counting
inequalities that convert measures into counts.

Counting arithmetic runs over exact rationals built from the stored
float endpoints, so every reported comparison is a true statement about
the data; a violation is surfaced, never smoothed over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import KroneckerNotFound, ZetalabError
from .kronecker import TorusAngles, find_shift
from .regions import TowerParams
from .witness import (
    ContinuousWitnessSet,
    DiscreteWitnessSet,
    empirical_density,
    merge_intervals,
)

__all__ = [
    "TransferConstants",
    "neighborhood_expand",
    "density_lower_bound_discrete_to_continuous",
    "decompose_shift",
    "continuous_to_discrete_witness",
    "counting_inequality_check",
    "CountingReport",
    "empirical_density",
]


@dataclass(frozen=True)
class TransferConstants:
    """The full constants ledger of one transfer campaign.

    The chain 0 < delta1 < delta < delta0 and the exact formulas

        C    = delta + (M^2 + L*L1) * alpha
        xi2  = xi1 * min(alpha, 2*delta) / alpha
        xi4  = xi3 * min(alpha, 2*delta1) / alpha
        xi6  = xi5 / (C + 1 + delta)

    are enforced on construction. c_tightened is the sharper constant
    delta + ((3MN+1) + L*L1) * alpha implied by m0*M1 <= M*M1 = 3MN+1;
    it is reported for diagnostics while every check uses C itself.
    """

    delta0: float
    delta: float
    delta1: float
    tower: TowerParams
    xi1: float
    xi2: float
    xi3: float
    xi4: float
    xi5: float
    xi6: float
    C: float
    c_tightened: float

    def __post_init__(self):
        if not (0.0 < self.delta1 < self.delta < self.delta0):
            raise ValueError(
                f"need 0 < delta1 < delta < delta0, got "
                f"{self.delta1}, {self.delta}, {self.delta0}"
            )
        p = self.tower
        if not (p.alpha / p.M < self.delta):
            raise ValueError(
                f"need alpha/M < delta, got {p.alpha}/{p.M} >= {self.delta}"
            )
        if self.C != self.delta + (p.M**2 + p.L * p.L1) * p.alpha:
            raise ValueError("C must equal delta + (M^2 + L*L1)*alpha exactly")
        tight = self.delta + ((3 * p.M * p.N + 1) + p.L * p.L1) * p.alpha
        if self.c_tightened != tight:
            raise ValueError("c_tightened inconsistent with tower params")
        for name, want in (
            ("xi2", self.xi1 * min(p.alpha, 2 * self.delta) / p.alpha),
            ("xi4", self.xi3 * min(p.alpha, 2 * self.delta1) / p.alpha),
            ("xi6", self.xi5 / (self.C + 1 + self.delta)),
        ):
            if getattr(self, name) != want:
                raise ValueError(f"{name} violates its defining formula")
        for name in ("xi1", "xi3", "xi5"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0 and math.isfinite(v)):
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def alpha(self) -> float:
        return self.tower.alpha

    @property
    def xi(self) -> dict:
        return {i: getattr(self, f"xi{i}") for i in range(1, 7)}

    @classmethod
    def build(
        cls,
        delta0: float,
        delta: float,
        delta1: float,
        tower: TowerParams,
        xi1: float = 0.0,
        xi3: float = 0.0,
        xi5: float = 0.0,
    ) -> "TransferConstants":
        c = delta + (tower.M**2 + tower.L * tower.L1) * tower.alpha
        tight = delta + ((3 * tower.M * tower.N + 1) + tower.L * tower.L1) * tower.alpha
        return cls(
            delta0=delta0,
            delta=delta,
            delta1=delta1,
            tower=tower,
            xi1=xi1,
            xi2=xi1 * min(tower.alpha, 2 * delta) / tower.alpha,
            xi3=xi3,
            xi4=xi3 * min(tower.alpha, 2 * delta1) / tower.alpha,
            xi5=xi5,
            xi6=xi5 / (c + 1 + delta),
            C=c,
            c_tightened=tight,
        )

    def to_json(self) -> dict:
        return {
            "delta0": self.delta0,
            "delta": self.delta,
            "delta1": self.delta1,
            "tower": self.tower.to_json(),
            "xi": {str(i): v for i, v in self.xi.items()},
            "C": self.C,
            "C_tightened": self.c_tightened,
        }


def neighborhood_expand(S: DiscreteWitnessSet, delta: float) -> ContinuousWitnessSet:
    """Union of [n*alpha - delta, n*alpha + delta] over members, merged
    into disjoint intervals and clipped to the scaled window."""
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValueError("delta must be positive")
    a = S.alpha
    lo, hi = a * S.window_start, a * S.horizon
    intervals = merge_intervals(
        ((n * a - delta, n * a + delta) for n in S.members), lo, hi
    )
    return ContinuousWitnessSet(
        intervals=intervals,
        horizon=hi,
        epsilon=S.epsilon,
        window_start=lo,
        density_norm=a * S.density_norm,
    )


def density_lower_bound_discrete_to_continuous(xi1: float, alpha: float, delta: float) -> float:
    """xi2 = xi1 * min(alpha, 2*delta) / alpha, the measure lower bound
    transferred by delta-neighborhood expansion."""
    if not 0.0 < xi1 <= 1.0:
        raise ValueError("xi1 must lie in (0, 1]")
    if not (alpha > 0.0 and delta > 0.0):
        raise ValueError("alpha and delta must be positive")
    return xi1 * min(alpha, 2.0 * delta) / alpha


def decompose_shift(t: float, tc: TransferConstants, alpha: float | None = None):
    """(m0, n0, tau) with n0*alpha = t + tau + m0*M1*alpha and |tau| small.

    Because m*M1*alpha is congruent to m*alpha/M modulo alpha, the M
    candidate residues are alpha/M-spaced and some m0 lands within
    alpha/(2M) of the lattice; tau is evaluated in exact rational
    arithmetic from the defining formula, so the returned triple
    satisfies it to the last bit.
    """
    p = tc.tower
    if alpha is None:
        alpha = p.alpha
    elif alpha != p.alpha:
        raise ValueError(f"alpha {alpha} disagrees with tower alpha {p.alpha}")
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    best_m, best_n, best_d = 1, 0, math.inf
    for m in range(1, p.M + 1):
        x = (t + m * p.M1 * alpha) / alpha
        n = round(x)
        d = abs(x - n)
        if d < best_d:
            best_m, best_n, best_d = m, n, d
    tau = float(
        Fraction(best_n) * Fraction(alpha)
        - Fraction(t)
        - Fraction(best_m) * Fraction(p.M1) * Fraction(alpha)
    )
    return best_m, best_n, tau


def continuous_to_discrete_witness(
    t: float,
    tc: TransferConstants,
    angles: TorusAngles | None,
    targets,
    epsilon: float,
) -> int:
    """The discrete hybrid witness n = n0 + l0*L1 produced from t.

    l0 comes from find_shift against the rotated targets
    a_j * lambda_j^(i*n0*alpha); rotating by the n0-part of the shift is
    what makes the chord bound close for the combined index. The output
    always satisfies the bracket t - delta <= n*alpha <= t + C, which is
    re-verified on every call.
    """
    p = tc.tower
    m0, n0, tau = decompose_shift(t, tc)
    if angles is None or not targets:
        l0 = 0
    else:
        if angles.lambdas is None:
            raise ValueError("angles must carry their generating lambdas")
        rotated = [
            a * complex(math.cos(n0 * p.alpha * math.log(lam)),
                        math.sin(n0 * p.alpha * math.log(lam)))
            for a, lam in zip(targets, angles.lambdas)
        ]
        l0 = find_shift(angles, rotated, epsilon, p.L)
        if l0 is None:
            raise KroneckerNotFound(
                f"no orbit index l <= L={p.L} matches the rotated targets at "
                f"epsilon={epsilon}; L was probably certified for a different epsilon"
            )
    n = n0 + l0 * p.L1
    if not (t - tc.delta - 1e-9 <= n * p.alpha <= t + tc.C + 1e-9):
        raise ZetalabError(
            f"bracket violated: n*alpha = {n * p.alpha} outside "
            f"[t - delta, t + C] = [{t - tc.delta}, {t + tc.C}] "
            f"(tightened C' = {tc.c_tightened})"
        )
    return n


@dataclass(frozen=True)
class CountingReport:
    """Exact verdicts of the two counting inequalities.

    rows hold (j, lhs_count, rhs_measure_over_alpha, ok) for the per-slab
    inequality; the aggregate compares (C+1+delta)*#W_{N+C+1} against
    meas(V_{alpha*N})/alpha. boundary_members quantifies how many W
    members live in (N, N+C+1], the finite-horizon slack between the
    horizon the inequality needs and the horizon the density statement
    wants.
    """

    rows: tuple
    violations: tuple
    aggregate_lhs: float
    aggregate_rhs: float
    aggregate_ok: bool
    w_count_at_horizon: int
    w_count_extended: int
    boundary_members: int
    v_measure: float
    v_density: float
    xi6_implied: float

    @property
    def all_ok(self) -> bool:
        return not self.violations and self.aggregate_ok

    def to_csv_rows(self):
        yield ("j", "lhs_count", "rhs_measure_over_alpha", "ok")
        for j, lhs, rhs, ok in self.rows:
            yield (j, lhs, repr(rhs), int(ok))

    def to_json(self) -> dict:
        return {
            "violations": list(self.violations),
            "aggregate": {
                "lhs": self.aggregate_lhs,
                "rhs": self.aggregate_rhs,
                "ok": self.aggregate_ok,
            },
            "w_count_at_horizon": self.w_count_at_horizon,
            "w_count_extended": self.w_count_extended,
            "boundary_members": self.boundary_members,
            "v_measure": self.v_measure,
            "v_density": self.v_density,
            "xi6_implied": self.xi6_implied,
            "all_ok": self.all_ok,
        }


def counting_inequality_check(
    V: ContinuousWitnessSet,
    W: DiscreteWitnessSet,
    tc: TransferConstants,
    alpha: float,
    N: int,
) -> CountingReport:
    """Evaluate the per-slab and aggregate counting inequalities exactly.

    For j = 0..N:  #{n in W : j - delta < n <= j + C + 1}
                     >= meas(V intersect (alpha*j, alpha*(j+1)]) / alpha
    and aggregate: (C + 1 + delta) * #W_{N+C+1} >= meas(V_{alpha*N}) / alpha.

    Interval endpoints and constants enter as exact rationals, so each
    verdict is exact for the stored data. Violations are reported, not
    repaired; they falsify the premises of the transfer chain.
    """
    if alpha != W.alpha:
        raise ValueError(f"alpha {alpha} disagrees with the witness alpha {W.alpha}")
    if N < 0:
        raise ValueError("N must be >= 0")
    a = Fraction(alpha)
    delta = Fraction(tc.delta)
    big_c = Fraction(tc.C)
    ivs = [(Fraction(p), Fraction(q)) for p, q in V.intervals]

    def v_measure_between(lo: Fraction, hi: Fraction) -> Fraction:
        total = Fraction(0)
        for p, q in ivs:
            if q <= lo:
                continue
            if p >= hi:
                break
            total += min(q, hi) - max(p, lo)
        return total

    rows = []
    violations = []
    for j in range(N + 1):
        lhs = W.count_in(Fraction(j) - delta, Fraction(j) + big_c + 1)
        rhs = v_measure_between(a * j, a * (j + 1)) / a
        ok = Fraction(lhs) >= rhs
        rows.append((j, lhs, float(rhs), ok))
        if not ok:
            violations.append(j)

    w_ext = W.count_leq(Fraction(N) + big_c + 1)
    w_hor = W.count_leq(N)
    agg_lhs = (big_c + 1 + delta) * w_ext
    agg_rhs = v_measure_between(Fraction(0), a * N) / a
    v_meas = v_measure_between(Fraction(0), a * N)
    v_density = float(v_meas / (a * N)) if N else 0.0
    return CountingReport(
        rows=tuple(rows),
        violations=tuple(violations),
        aggregate_lhs=float(agg_lhs),
        aggregate_rhs=float(agg_rhs),
        aggregate_ok=agg_lhs >= agg_rhs,
        w_count_at_horizon=w_hor,
        w_count_extended=w_ext,
        boundary_members=w_ext - w_hor,
        v_measure=float(v_meas),
        v_density=v_density,
        xi6_implied=v_density / float(big_c + 1 + delta),
    )
