"""Simultaneous Diophantine approximation on the k-torus.

The rotations here are l |-> (exp(-2*pi*i*l*theta_j))_j with angles
theta_j in [0,1) turns. find_shift locates the first orbit index whose
chord distance to prescribed unit targets beats epsilon; covering_number
certifies the smallest L whose orbit prefix is epsilon-dense against all
unit targets, by reducing the continuum statement to a mesh statement
with a strictly smaller budget plus Lipschitz slack.

Distances use the exact chord metric |e^{ia} - e^{ib}| = 2|sin((a-b)/2)|.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .errors import CapExceeded

_BLOCK = 1 << 16

# Relation-search tolerance scale and rationality detection tolerance.
_RELATION_TOL = 1e-10
_RATIONAL_TOL = 1e-12

_MESH_WARN = 10_000_000


@dataclass(frozen=True)
class TorusAngles:
    """Rotation angles theta_j in [0, 1) turns, one per lambda.

    When built from lambdas the generators are kept alongside, because
    transfer maps need the actual log(lambda_j), which the reduced angles
    no longer determine.
    """

    thetas: tuple
    lambdas: tuple | None = None

    def __post_init__(self):
        ths = tuple(float(t) for t in self.thetas)
        if not ths:
            raise ValueError("need at least one angle")
        if any(not (0.0 <= t < 1.0) for t in ths):
            raise ValueError("angles must lie in [0, 1)")
        object.__setattr__(self, "thetas", ths)
        if self.lambdas is not None:
            lams = tuple(float(x) for x in self.lambdas)
            if len(lams) != len(ths):
                raise ValueError("one lambda per angle required")
            object.__setattr__(self, "lambdas", lams)

    @property
    def k(self) -> int:
        return len(self.thetas)

    @classmethod
    def from_lambdas(cls, lambdas, l1: int, alpha: float) -> "TorusAngles":
        """theta_j = (L1 * alpha * log lambda_j) / (2 pi) mod 1."""
        return cls(
            tuple(
                (l1 * alpha * math.log(lam) / (2 * math.pi)) % 1.0 for lam in lambdas
            ),
            tuple(float(x) for x in lambdas),
        )

    def to_json(self) -> dict:
        return {
            "thetas": list(self.thetas),
            "lambdas": list(self.lambdas) if self.lambdas else None,
        }


class OrbitAccumulator:
    """Orbit angles frac(l * theta) by compensated accumulation mod 1.

    The mod-1 reduction subtracts 1.0 from a value in [1, 2), which is
    exact, so the compensation term survives reductions; drift after 1e6
    steps stays far below the 1e-9 contract.
    """

    def __init__(self, theta: float):
        self.theta = float(theta) % 1.0
        self._s = 0.0
        self._c = 0.0

    @property
    def value(self) -> float:
        v = self._s + self._c
        if v >= 1.0:
            v -= 1.0
        return v if v >= 0.0 else v + 1.0

    def step(self) -> float:
        s, x = self._s, self.theta
        t = s + x
        if abs(s) >= abs(x):
            self._c += (s - t) + x
        else:
            self._c += (x - t) + s
        if t >= 1.0:
            t -= 1.0
        self._s = t
        return self.value


def orbit_angles(theta: float, count: int) -> np.ndarray:
    """frac(l * theta) for l = 0..count-1 via compensated accumulation."""
    acc = OrbitAccumulator(theta)
    out = np.empty(count)
    for l in range(count):
        out[l] = acc.value
        acc.step()
    return out


def _unit_targets(targets) -> np.ndarray:
    arr = np.asarray([complex(a) for a in targets])
    mods = np.abs(arr)
    if np.any(np.abs(mods - 1.0) > 1e-12):
        raise ValueError("targets must have unit modulus (within 1e-12)")
    return arr / mods


def chord_to_targets(angles: TorusAngles, l: int, targets) -> float:
    """max_j |exp(-2 pi i l theta_j) - a_j| by direct evaluation."""
    arr = _unit_targets(targets)
    orbit = np.exp(-2j * math.pi * l * np.asarray(angles.thetas))
    return float(np.max(np.abs(orbit - arr)))


def find_shift(angles: TorusAngles, targets, epsilon: float, l_max: int) -> int | None:
    """Smallest l in [0, l_max] with max_j |exp(-2 pi i l theta_j) - a_j|
    < epsilon, or None. Every hit is re-verified by direct evaluation
    before being returned."""
    if not (0.0 < epsilon < 2.0):
        raise ValueError("epsilon must lie in (0, 2)")
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    arr = _unit_targets(targets)
    if len(arr) != angles.k:
        raise ValueError("one target per angle required")
    thetas = np.asarray(angles.thetas)
    psi = np.angle(arr) / (2 * math.pi)  # target angles in turns
    # chord < eps iff circle distance (turns) < asin(eps/2)/pi
    dist_cap = math.asin(epsilon / 2.0) / math.pi if epsilon < 2.0 else 0.5
    start = 0
    while start <= l_max:
        ls = np.arange(start, min(start + _BLOCK, l_max + 1))
        w = (np.multiply.outer(ls, thetas) + psi) % 1.0
        hit = np.all(np.minimum(w, 1.0 - w) < dist_cap, axis=1)
        for idx in np.nonzero(hit)[0]:
            l = int(ls[idx])
            if chord_to_targets(angles, l, arr) < epsilon:
                return l
        start += _BLOCK
    return None


@dataclass(frozen=True)
class CoveringResult:
    """Covering number plus the mesh certificate parameters."""

    L: int
    mesh_per_axis: int
    mesh_step: float      # radians between adjacent mesh angles
    orbit_budget: float   # chord budget used against mesh points (0.9 eps)
    slack: float          # worst mesh-to-continuum chord slack, < eps/10

    def certifies(self, epsilon: float) -> bool:
        return self.orbit_budget + self.slack < epsilon


def covering_number(angles: TorusAngles, epsilon: float, l_cap: int) -> CoveringResult:
    """Smallest L <= l_cap whose orbit prefix covers the torus mesh.

    Every point of a gamma-mesh (gamma = epsilon/10 radians per axis)
    must be within chord distance 0.9*epsilon of the orbit {l <= L}; any
    unit target is then within chord (0.9 + 1/20)*epsilon < epsilon of
    the orbit, which certifies the continuum statement at budget epsilon.
    Cost grows like (2 pi / gamma)^k mesh points, so small k only.
    """
    if not (0.0 < epsilon < 2.0):
        raise ValueError("epsilon must lie in (0, 2)")
    if l_cap < 0:
        raise ValueError("l_cap must be >= 0")
    k = angles.k
    mesh_n = int(math.ceil(20 * math.pi / epsilon))
    if mesh_n ** k > _MESH_WARN:
        warnings.warn(
            f"torus mesh has {mesh_n ** k} points (k={k}); expect a long sweep",
            RuntimeWarning,
            stacklevel=2,
        )
    # per-axis angular radius (turns) equivalent to chord 0.9*eps
    r_turns = math.asin(0.45 * epsilon) / math.pi
    mesh = np.arange(mesh_n) / mesh_n  # axis angles in turns
    covered = np.zeros((mesh_n,) * k, dtype=bool)
    remaining = covered.size
    accs = [OrbitAccumulator(t) for t in angles.thetas]
    for l in range(l_cap + 1):
        axis_hits = []
        for acc in accs:
            d = np.abs(((mesh - acc.value) + 0.5) % 1.0 - 0.5)
            axis_hits.append(d < r_turns)
            acc.step()
        hit = axis_hits[0]
        for a in axis_hits[1:]:
            hit = np.logical_and.outer(hit, a)
        fresh = hit & ~covered
        n_new = int(np.count_nonzero(fresh))
        if n_new:
            covered |= hit
            remaining -= n_new
            if remaining == 0:
                slack = 2.0 * math.sin(math.pi / (2 * mesh_n))
                return CoveringResult(l, mesh_n, 2 * math.pi / mesh_n, 0.45 * epsilon * 2, slack)
    raise CapExceeded(l_cap, remaining)


@dataclass(frozen=True)
class IndependenceReport:
    """Outcome of the bounded rational-independence checks.

    verdict is one of 'independent_by_primality' (a proof via unique
    factorization), 'no_relation_found_up_to_height' (bounded search
    only), or 'relation_found' (relation holds to within tolerance).
    rational_angles lists indices j where alpha*log(lambda_j)/pi matched
    a rational p/q with q <= checked_height.
    """

    checked_height: int
    verdict: str
    relation: tuple | None = None
    rational_angles: tuple = ()

    def to_json(self) -> dict:
        return {
            "checked_height": self.checked_height,
            "verdict": self.verdict,
            "relation": list(self.relation) if self.relation else None,
            "rational_angles": [list(r) for r in self.rational_angles],
        }


def _prime_power_base(n: int) -> int | None:
    """Base prime if n = p^k (k >= 1), else None."""
    if n < 2:
        return None
    for p in range(2, int(math.isqrt(n)) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return p if n == 1 else None
    return n  # n itself prime


def convergents(x: float, max_q: int):
    """Continued-fraction convergents p/q of x with q <= max_q."""
    out = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = int(math.floor(x)), 1
    out.append((p_cur, q_cur))
    rem = x - math.floor(x)
    for _ in range(64):
        if rem < 1e-15:
            break
        x = 1.0 / rem
        a = int(math.floor(x))
        rem = x - a
        p_cur, p_prev = a * p_cur + p_prev, p_cur
        q_cur, q_prev = a * q_cur + q_prev, q_cur
        if q_cur > max_q:
            break
        out.append((p_cur, q_cur))
    return out


def independence_check(lambdas, alpha: float, height: int) -> IndependenceReport:
    """Bounded verification of the hybrid-scan number-theoretic premises.

    Distinct prime (or prime-power) lambdas are independent by unique
    factorization. Otherwise integer relations sum_j c_j log lambda_j = 0
    with |c_j| <= height are searched exhaustively, smallest max-norm
    first. Separately, each alpha*log(lambda_j)/pi is tested for
    rationality through continued-fraction convergents with q <= height.
    """
    lams = [float(x) for x in lambdas]
    if not lams or any(not (x > 1.0 and math.isfinite(x)) for x in lams):
        raise ValueError("lambdas must be finite and > 1")
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambdas must be strictly increasing")
    if height < 1:
        raise ValueError("height must be >= 1")

    rational = []
    for j, lam in enumerate(lams):
        x = alpha * math.log(lam) / math.pi
        for p, q in convergents(x, height):
            if abs(x - p / q) <= _RATIONAL_TOL * max(1.0, abs(x)):
                rational.append((j, p, q))
                break
    rational = tuple(rational)

    bases = []
    for lam in lams:
        n = round(lam)
        if abs(lam - n) > 1e-12:
            bases = None
            break
        base = _prime_power_base(int(n))
        if base is None:
            bases = None
            break
        bases.append(base)
    if bases is not None and len(set(bases)) == len(bases):
        return IndependenceReport(height, "independent_by_primality",
                                  rational_angles=rational)

    logs = np.log(np.asarray(lams))
    k = len(lams)
    for h in range(1, height + 1):
        for c in iter_product(range(-h, h + 1), repeat=k):
            if max(abs(ci) for ci in c) != h:
                continue
            nz = next((ci for ci in c if ci != 0), 0)
            if nz < 0:
                continue  # sign-normalized: first nonzero positive
            total = float(np.dot(c, logs))
            tol = _RELATION_TOL * (1.0 + float(np.dot(np.abs(c), logs)))
            if abs(total) < tol:
                return IndependenceReport(height, "relation_found", relation=tuple(c),
                                          rational_angles=rational)
    return IndependenceReport(height, "no_relation_found_up_to_height",
                              rational_angles=rational)
