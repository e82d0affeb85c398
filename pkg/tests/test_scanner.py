"""Scan semantics: exactness, conservativeness, conjunctions, windows."""

import cmath
import math

import numpy as np
import pytest

from zetalab import (
    Disc,
    ExpPolynomialTarget,
    HybridConstraint,
    IndependenceViolated,
    MixedTarget,
    PolynomialTarget,
    Rect,
    RiemannZeta,
    Strip,
    TowerParams,
    ZTuple,
    build_tower,
    empirical_density,
    fit_exp_polynomial,
    sample_on_region,
    sup_distance,
)
from zetalab.scanner import (
    ContinuousMode,
    DiscreteMode,
    OmegaSpec,
    ScanConfig,
    scan,
    scan_short_interval,
    scan_tower,
)

from synthetic import SyntheticWindowZ, build_campaign

STRIP = Strip(0.5, 1.0)
ONE = PolynomialTarget((1.0 + 0j,))


def zeta_selfish_target(K, t0):
    """Fit of zeta(. + i t0) on K: the canonical self-approximation."""
    from zetalab import eval_riemann_zeta

    samples = sample_on_region(lambda s: eval_riemann_zeta(s + 1j * t0), K)
    return fit_exp_polynomial(samples, K, 8, 1e-4).target


def test_self_approximation_witness():
    K = Disc(0.8 + 0j, 0.02, grid_density=100.0, strip=STRIP)
    t0 = 12.0
    target = zeta_selfish_target(K, t0)
    cfg = ScanConfig(
        RiemannZeta(), target, K, 0.05, ContinuousMode(11.5, 12.5, 0.01)
    )
    w = scan(cfg).witness
    assert any(a <= t0 <= b for a, b in w.intervals)


def test_vacuous_epsilon_all_shifts_pass():
    K = Disc(0.8 + 0j, 0.02, grid_density=60.0, strip=STRIP)
    cfg = ScanConfig(RiemannZeta(), ONE, K, 50.0, DiscreteMode(0.7, 1, 60))
    w = scan(cfg).witness
    assert w.members == tuple(range(1, 61))
    assert empirical_density(w).value == 1.0


def test_discrete_scan_exact_and_deterministic():
    K = Disc(0.8 + 0j, 0.02, grid_density=60.0, strip=STRIP)
    cfg = ScanConfig(RiemannZeta(), ONE, K, 0.3, DiscreteMode(1.3, 1, 150))
    o1, o2 = scan(cfg), scan(cfg)
    assert o1.witness == o2.witness
    assert repr(o1.rows) == repr(o2.rows)
    # exactness: membership iff the sup-distance predicate holds
    for n in range(1, 151):
        d = sup_distance(RiemannZeta(), 1.3 * n, ONE, K)
        assert (n in o1.witness.members) == (d < 0.3)


def test_continuous_refinement_soundness():
    # halving the step never invalidates a previously reported hit
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    base = ScanConfig(c.Z, c.g, c.K0, c.epsilon, ContinuousMode(0.0, 2.0, 0.08))
    fine = ScanConfig(c.Z, c.g, c.K0, c.epsilon, ContinuousMode(0.0, 2.0, 0.04))
    w1 = scan(base).witness
    w2 = scan(fine).witness
    # every coarse grid point reported inside an interval stays a witness
    for t in np.arange(0.0, 2.0 + 1e-9, 0.08):
        if any(a <= t <= b for a, b in w1.intervals):
            assert any(a - 1e-9 <= t <= b + 1e-9 for a, b in w2.intervals)


def test_hybrid_conjunction_subset():
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    plain = scan(
        ScanConfig(c.Z, c.g, c.K0, c.epsilon, DiscreteMode(c.alpha, 1, 400))
    ).witness
    hybrid = scan(
        ScanConfig(
            c.Z, c.g, c.K0, c.epsilon, DiscreteMode(c.alpha, 1, 400),
            hybrid=c.hybrid_full,
        )
    ).witness
    assert hybrid.kind == "U" and plain.kind == "S"
    assert set(hybrid.members) <= set(plain.members)


def test_tuple_scan_is_componentwise_intersection():
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    other = SyntheticWindowZ(c.g, [d + 0.5 * c.period for d in c.tower.shifts], c.period)
    pair = _TupleOfSynthetics((c.Z, other))
    target = MixedTarget((c.g, c.g), ())
    mode = DiscreteMode(c.alpha, 1, 500)
    both = scan(ScanConfig(pair, target, c.K0, c.epsilon, mode)).witness
    first = scan(ScanConfig(c.Z, c.g, c.K0, c.epsilon, mode)).witness
    second = scan(ScanConfig(other, c.g, c.K0, c.epsilon, mode)).witness
    assert set(both.members) == set(first.members) & set(second.members)


class _TupleOfSynthetics:
    """Minimal tuple wrapper over scan-protocol objects."""

    def __init__(self, parts):
        self.parts = tuple(parts)
        self.arity = len(self.parts)

    def bind(self, grid, cfg=None):
        bound = [p.bind(grid, cfg) for p in self.parts]

        class _B:
            def values(self, shifts, _bound=bound):
                return np.concatenate([b.values(shifts) for b in _bound], axis=0)

        return _B()


def test_tower_scan_single_piece_identity():
    # an M=1, L=0 tower is K0 shifted by M1*alpha; with a constant target
    # the tower scan equals the plain scan of the shifted rectangle
    K0 = Rect(0.6, 0.9, -0.3, 0.3, grid_density=20.0, strip=STRIP)
    p = TowerParams.build(0.4, 1, 1, 0)
    tw = build_tower(K0, p)
    g = ExpPolynomialTarget(PolynomialTarget((0.1 + 0j,)))
    mode = ContinuousMode(0.0, 15.0, 0.05)
    t_out = scan_tower(ScanConfig(RiemannZeta(), g, tw, 0.6, mode))
    d = p.M1 * p.alpha
    K0s = Rect(0.6, 0.9, -0.3 + d, 0.3 + d, grid_density=20.0, strip=STRIP)
    p_out = scan(ScanConfig(RiemannZeta(), g, K0s, 0.3, mode))
    assert t_out.threshold == 0.3
    assert t_out.witness.intervals == p_out.witness.intervals


def test_tower_scan_windows_of_synthetic():
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    out = scan_tower(
        ScanConfig(c.Z, c.g, c.tower, c.epsilon, ContinuousMode(0.0, c.t_end, 0.1))
    )
    w = out.witness
    assert w.measure > 0
    # witnesses cluster at multiples of the period
    for a, b in w.intervals:
        t = (a + b) / 2
        assert min(t % c.period, c.period - (t % c.period)) < 1.0
    # and the window at t = period is found
    assert any(a <= c.period <= b for a, b in w.intervals)


def test_tower_scan_epsilon_zero_like():
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    out = scan_tower(
        ScanConfig(c.Z, c.g, c.tower, 1e-15, ContinuousMode(0.0, 5.0, 0.1))
    )
    assert out.witness.intervals == ()


def test_short_interval_linear_at_zero_degenerates():
    K = Disc(0.8 + 0j, 0.02, grid_density=30.0, strip=STRIP)
    om = OmegaSpec("linear")
    cfg = ScanConfig(
        RiemannZeta(), ONE, K, 0.5, ContinuousMode(0.0, 10.0, 0.05),
        short_interval=(0.0, 0.0),
    )
    short = scan_short_interval(cfg, om).witness
    plain = scan(
        ScanConfig(RiemannZeta(), ONE, K, 0.5, ContinuousMode(0.0, 0.0, 0.05))
    ).witness
    assert short.intervals == plain.intervals == ()


def test_short_interval_is_windowed_plain_scan():
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    t0, w = 100.0, 120.0
    om = OmegaSpec("powerlog", 1.0, 0.04337)  # ~ t (log t)^0.04, w(100) ~ 120
    w_exact = om.omega(t0)
    cfg = ScanConfig(
        c.Z, c.g, c.K0, c.epsilon, DiscreteMode(c.alpha, 0, 1000),
        short_interval=(t0, w_exact),
    )
    short = scan_short_interval(cfg, om).witness
    plain = scan(
        ScanConfig(c.Z, c.g, c.K0, c.epsilon, DiscreteMode(c.alpha, 0, 1000))
    ).witness
    want = tuple(
        n for n in plain.members if t0 <= n <= t0 + w_exact
    )
    assert short.members == want
    assert short.window_start == int(math.ceil(t0))
    assert short.density_norm == pytest.approx(w_exact)


def test_short_interval_growth_check():
    om = OmegaSpec("powerlog", 1 / 3, 26 / 15)
    for alpha in (0.5, 2.0):
        assert om.growth_infimum(alpha, np.geomspace(10, 1e6, 300)) > 0
    with pytest.raises(ValueError):
        OmegaSpec("powerlog").omega(0.5)


def test_short_interval_mismatched_declaration():
    K = Disc(0.8 + 0j, 0.02, grid_density=30.0, strip=STRIP)
    cfg = ScanConfig(
        RiemannZeta(), ONE, K, 0.5, ContinuousMode(0.0, 10.0, 0.05),
        short_interval=(100.0, 3.0),  # omega(100) = 100 for linear
    )
    with pytest.raises(ValueError):
        scan_short_interval(cfg, OmegaSpec("linear"))


def test_hybrid_independence_precondition():
    K = Disc(0.8 + 0j, 0.02, grid_density=30.0, strip=STRIP)
    bad = HybridConstraint((2.0, 4.0), (1 + 0j, 1 + 0j), 0.5)
    cfg = ScanConfig(
        RiemannZeta(), ONE, K, 0.5, DiscreteMode(1.0, 1, 10), hybrid=bad
    )
    with pytest.raises(IndependenceViolated):
        scan(cfg)
    # rational alpha*log(lambda)/pi in discrete mode
    rational_alpha = math.pi / math.log(2.0)
    cfg2 = ScanConfig(
        RiemannZeta(), ONE, K, 0.5,
        DiscreteMode(rational_alpha, 1, 10),
        hybrid=HybridConstraint((2.0,), (1 + 0j,), 0.5),
    )
    with pytest.raises(IndependenceViolated):
        scan(cfg2)


def test_arity_mismatch_rejected():
    K = Disc(0.8 + 0j, 0.02, grid_density=30.0, strip=STRIP)
    with pytest.raises(ValueError):
        ScanConfig(
            ZTuple((RiemannZeta(), RiemannZeta())), ONE, K, 0.5,
            DiscreteMode(1.0, 1, 10),
        )


def test_scan_rejects_short_interval_config():
    K = Disc(0.8 + 0j, 0.02, grid_density=30.0, strip=STRIP)
    cfg = ScanConfig(
        RiemannZeta(), ONE, K, 0.5, ContinuousMode(0.0, 1.0, 0.05),
        short_interval=(0.0, 1.0),
    )
    with pytest.raises(ValueError):
        scan(cfg)


def test_threads_do_not_change_results():
    c = build_campaign(grid_density=12.0, horizon_periods=1.2)
    cfg = ScanConfig(c.Z, c.g, c.K0, c.epsilon, ContinuousMode(0.0, 30.0, 0.05))
    w1 = scan(cfg, threads=1).witness
    w2 = scan(cfg, threads=3).witness
    assert w1 == w2
