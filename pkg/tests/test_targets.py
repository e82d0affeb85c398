"""Target fitting, phase unwrapping, and continuity moduli."""

import cmath
import math

import numpy as np
import pytest

from zetalab import (
    BranchCutFailure,
    Disc,
    ExpPolynomialTarget,
    FitBoundNotMet,
    HybridConstraint,
    MixedTarget,
    NoPositiveDelta,
    PolynomialTarget,
    Rect,
    RiemannZeta,
    Strip,
    TowerLift,
    TowerParams,
    build_tower,
    continuity_modulus,
    enlarge,
    fit_exp_polynomial,
    fit_polynomial,
    lambda_modulus,
    sample_on_region,
    target_from_json,
)
from zetalab.targets import SAFETY

STRIP = Strip(0.5, 1.0)
FREE = Strip()


def test_fit_constant_one():
    D = Disc(0.2 + 0j, 0.1, grid_density=40.0, strip=FREE)
    res = fit_exp_polynomial(sample_on_region(lambda s: 1.0, D), D, 0, 1e-12)
    assert res.sup_error == 0.0
    assert res.target.exponent.coefficients == (0j,)


def test_fit_exp_s_degree_one():
    D = Disc(0.75 + 0j, 0.1, grid_density=50.0, strip=FREE)
    res = fit_exp_polynomial(sample_on_region(cmath.exp, D), D, 1, 1e-10)
    p = res.target.exponent
    # recentered expansion of p(s) = s
    assert abs(p.coefficients[1] - 1.0) < 1e-12
    assert abs(p.coefficients[0] - p.center) < 1e-12
    assert res.sup_error < 1e-10


def test_fit_zeta_shifted_with_dense_grid_oracle():
    # f(s) = zeta(s+2) on |s - 0.75| <= 0.1; oracle = dense-grid sup after fit
    from zetalab import eval_riemann_zeta

    D = Disc(0.75 + 0j, 0.1, grid_density=40.0, strip=FREE)
    f = lambda s: eval_riemann_zeta(s + 2.0)
    res = fit_exp_polynomial(sample_on_region(f, D), D, 6, 1e-3)
    assert res.sup_error < 1e-3
    fine = Disc(0.75 + 0j, 0.1, grid_density=120.0, strip=FREE)
    worst = max(
        abs(res.target.evaluate(s) - f(s)) for s in fine.grid()
    )
    assert worst < 1e-3


def test_fit_polynomial_square():
    D = Disc(0.0j, 0.3, grid_density=20.0, strip=FREE)
    res = fit_polynomial(sample_on_region(lambda s: s * s, D), D, 2, 1e-10)
    # center is 0, so raw coefficients are (0, 0, 1)
    assert res.target.center == 0
    np.testing.assert_allclose(
        np.array(res.target.coefficients, dtype=complex),
        np.array([0, 0, 1.0]), atol=1e-12,
    )


def test_fit_polynomial_zero_target():
    D = Disc(0.0j, 0.3, grid_density=20.0, strip=FREE)
    res = fit_polynomial(sample_on_region(lambda s: 0.0, D), D, 0, 1e-15)
    assert res.target.coefficients == (0j,)
    assert res.sup_error == 0.0


def test_fit_sin_with_taylor_remainder_oracle():
    # on radius 0.1 the degree-5 Taylor remainder of sin is < 1.4e-10;
    # the least-squares fit must do at least that well on the grid
    D = Disc(0.0j, 0.1, grid_density=60.0, strip=FREE)
    res = fit_polynomial(sample_on_region(cmath.sin, D), D, 5, 1e-8)
    bound = 0.1**7 / math.factorial(7) * math.cosh(0.1)
    assert res.sup_error < min(1e-8, 10 * bound)


def test_fit_bound_not_met_reports_achieved():
    D = Disc(0.0j, 0.5, grid_density=20.0, strip=FREE)
    with pytest.raises(FitBoundNotMet) as exc:
        fit_polynomial(sample_on_region(cmath.exp, D), D, 1, 1e-12)
    assert 0.0 < exc.value.achieved < 0.2


def test_branch_cut_detection():
    # f(s) = s winds once around its zero inside the disc (zero off-grid)
    D = Disc(0.0005 + 0.0007j, 0.1, grid_density=60.0, strip=FREE)
    samples = sample_on_region(lambda s: s, D)
    with pytest.raises(BranchCutFailure):
        fit_exp_polynomial(samples, D, 3, 10.0)


def test_zero_sample_rejected():
    D = Disc(0.0j, 0.1, grid_density=30.0, strip=FREE)
    with pytest.raises(ValueError):
        fit_exp_polynomial(sample_on_region(lambda s: s, D), D, 3, 10.0)


def test_exp_target_structurally_nonzero():
    rng = np.random.default_rng(2)
    for _ in range(20):
        coeffs = tuple(complex(a, b) for a, b in rng.normal(0, 2, (4, 2)))
        g = ExpPolynomialTarget(PolynomialTarget(coeffs))
        pts = rng.normal(0, 1, 50) + 1j * rng.normal(0, 1, 50)
        assert np.all(np.abs(g.values_on(pts)) > 0)


def test_continuity_modulus_constant():
    K = Disc(0.75 + 0j, 0.05, grid_density=60.0, strip=STRIP)
    K0 = enlarge(K, 0.05, STRIP)
    d = continuity_modulus(PolynomialTarget((2.0 + 0j,)), K, K0, 0.01)
    assert d == pytest.approx(SAFETY * 0.05)


def test_continuity_modulus_identity():
    # variation of g(s)=s is exactly |tau|, so delta lands just below b
    K = Disc(0.75 + 0j, 0.05, grid_density=60.0, strip=STRIP)
    K0 = enlarge(K, 0.05, STRIP)
    b = 0.01
    d = continuity_modulus(PolynomialTarget((0j, 1.0 + 0j)), K, K0, b)
    assert d < b
    assert d > b / 4  # halving search cannot undershoot by more than half


def test_continuity_modulus_fine_grid_oracle():
    # re-verify the returned delta on a 4x finer grid pair
    K = Disc(0.75 + 0j, 0.05, grid_density=30.0, strip=STRIP)
    K0 = enlarge(K, 0.1, STRIP)
    g = ExpPolynomialTarget(PolynomialTarget((0j, 1.0 + 0j), center=0.75 + 0j))
    bound = 0.01
    d = continuity_modulus(g, K, K0, bound)
    K_fine = Disc(0.75 + 0j, 0.05, grid_density=120.0, strip=STRIP)
    taus = np.linspace(-d, d, 201)
    grid = K_fine.grid()
    base = g.values_on(grid)
    pts = (grid[None, :] + 1j * taus[:, None]).ravel()
    worst = np.max(np.abs(g.values_on(pts).reshape(1, 201, -1) - base[:, None, :]))
    assert worst < bound


def test_continuity_modulus_tuple_supnorm():
    K = Disc(0.75 + 0j, 0.05, grid_density=30.0, strip=STRIP)
    K0 = enlarge(K, 0.05, STRIP)
    fast = ExpPolynomialTarget(PolynomialTarget((0j, 3.0 + 0j), center=0.75 + 0j))
    slow = PolynomialTarget((1.0 + 0j,))
    mixed = MixedTarget((fast,), (slow,))
    d_mixed = continuity_modulus(mixed, K, K0, 0.02)
    d_fast = continuity_modulus(MixedTarget((fast,), ()), K, K0, 0.02)
    assert d_mixed == d_fast  # the varying component dominates the sup-norm


def test_no_positive_delta():
    K = Disc(0.75 + 0j, 0.05, grid_density=30.0, strip=STRIP)
    K0 = enlarge(K, 0.05, STRIP)
    steep = ExpPolynomialTarget(PolynomialTarget((0j, 1e9 + 0j), center=0.75 + 0j))
    with pytest.raises(NoPositiveDelta):
        continuity_modulus(steep, K, K0, 1e-9)


def test_lambda_modulus_unit_log():
    hc = HybridConstraint((math.e,), (1.0 + 0j,), 0.1)
    assert lambda_modulus(hc, 0.1) == pytest.approx(SAFETY * 0.1)


def test_lambda_modulus_two_lambdas_grid_oracle():
    hc = HybridConstraint((2.0, 3.0), (1.0 + 0j, 1.0 + 0j), 0.2)
    d1 = lambda_modulus(hc, 0.2)
    assert d1 == pytest.approx(SAFETY * 0.2 / math.log(3.0))
    # grid sup over a full period of t and tau in [-d1, d1]
    ts = np.linspace(0.0, 2 * math.pi / math.log(2.0), 400)
    taus = np.linspace(-d1, d1, 41)
    for lam in (2.0, 3.0):
        a = np.exp(-1j * math.log(lam) * ts)[:, None]
        b = np.exp(-1j * math.log(lam) * (ts[:, None] + taus[None, :]))
        assert np.max(np.abs(a - b)) < 0.2


def test_lambda_modulus_random_t_property():
    rng = np.random.default_rng(17)
    hc = HybridConstraint((2.0, 3.0, 5.0), (1.0 + 0j,) * 3, 0.15)
    bound = 0.15
    d1 = lambda_modulus(hc, bound)
    ts = rng.uniform(0.0, 1e6, 20000)
    taus = rng.uniform(-d1, d1, 20000)
    for lam in hc.lambdas:
        chord = 2.0 * np.abs(np.sin(taus * math.log(lam) / 2.0))
        assert chord.max() < bound


def test_lambda_modulus_respects_cap():
    hc = HybridConstraint((2.0,), (1.0 + 0j,), 1.0)
    assert lambda_modulus(hc, 1.0, cap=0.01) <= 0.01


def test_hybrid_constraint_validation():
    with pytest.raises(ValueError):
        HybridConstraint((3.0, 2.0), (1 + 0j, 1 + 0j), 0.1)  # not increasing
    with pytest.raises(ValueError):
        HybridConstraint((0.5,), (1 + 0j,), 0.1)  # not > 1
    with pytest.raises(ValueError):
        HybridConstraint((2.0,), (0.5 + 0j,), 0.1)  # not unit modulus
    with pytest.raises(ValueError):
        HybridConstraint((2.0,), (1 + 0j,), 0.0)  # epsilon


def test_tower_lift_pullback():
    K0 = Rect(0.6, 0.9, -0.5, 0.5, grid_density=10.0, strip=STRIP)
    tw = build_tower(K0, TowerParams.build(0.7, 2, 1, 1))
    g = ExpPolynomialTarget(PolynomialTarget((0j, 1.0 + 0j), center=0.75 + 0j))
    h = TowerLift(g, tw)
    z = complex(0.7, 0.1)
    for d in tw.shifts:
        # pullback is exact up to the float rounding of (Im z + d) - d
        assert abs(h.evaluate(z + 1j * d) - g.evaluate(z)) < 1e-12
    with pytest.raises(ValueError):
        h.values_on([complex(0.7, -50.0)])


def test_target_json_roundtrip():
    p = PolynomialTarget((1 + 2j, 0.5 - 1j), center=0.75 + 0j)
    g = ExpPolynomialTarget(p)
    m = MixedTarget((g,), (p,))
    for t in (p, g, m):
        assert target_from_json(t.to_json()) == t
