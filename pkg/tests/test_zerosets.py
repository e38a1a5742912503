import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dzeros import series as S
from dzeros.blaschke import ZeroSequence, blaschke_sum
from dzeros.circle_sets import (TWO_PI, CircleSet, cantor_level, distance, log_distance,
                                perfect_symmetric)
from dzeros.zerosets import (
    DecayProfile, ModulusOmega, accumulation_diagnostic, antidiagonal, assign_arguments,
    blas_condition, capacity_omega, conditionII_check, corollary1_sum, corollary2_sum,
    corollary3_sum, cantor_t_gamma, eta_alpha, example2_eps, example2_sequence, lemma_sum,
    log_square_sum, omega_regularity, prop2_levels, prop2_sequence, remark_omega_bound,
    shapiro_shields, solve_depth, t_gamma_integral, theorem1_sum,
)

ONE = CircleSet.points([0.0])


def radial(log_depth_fn, theta=0.0, tag="radial"):
    return ZeroSequence(lambda i: (log_depth_fn(i.astype(float)), np.full(len(i), theta)), None, tag)


# ----- moduli


@pytest.mark.parametrize("make", [
    lambda: ModulusOmega.power(1.5), lambda: ModulusOmega.power(0.3),
    lambda: ModulusOmega.exp_inv(0.5), ModulusOmega.log_square,
    ModulusOmega.exp_exp_eta, ModulusOmega.zero,
])
def test_omega_families_valid(make):
    om = make()
    t = np.logspace(-300, math.log10(2), 2000)
    v = om(t)
    assert om(0.0) == 0.0
    assert np.all(np.diff(v) >= -1e-12)


def test_invalid_omega_rejected():
    with pytest.raises(ValueError):
        ModulusOmega.tabulated([1e-3, 1e-2, 1.0], [0.3, 0.2, 0.1])


@pytest.mark.parametrize("make", [
    lambda: ModulusOmega.power(1.5), lambda: ModulusOmega.power(1.0), lambda: ModulusOmega.power(0.4),
    lambda: ModulusOmega.exp_inv(0.3), lambda: ModulusOmega.exp_inv(0.9), ModulusOmega.log_square,
])
def test_scaled_tail_closed_forms_match_quadrature(make):
    om = make()
    la = np.log(np.logspace(-250, 0, 60))
    assert np.allclose(om.K(la), om._K_quad(la), rtol=1e-10, atol=1e-300)


def test_tail_integral_power_closed_form():
    om = ModulusOmega.power(2.0)
    for d in (1e-8, 1e-3, 0.5):
        assert om.tail_integral(d) == pytest.approx(2 - d, rel=1e-12)


def test_regularity_borderline():
    rep = omega_regularity(ModulusOmega.power(1.5))
    # R = 2 (sqrt2 - sqrt(delta)) / (1 + sqrt(delta)) < 2 sqrt2
    assert rep.passed and rep.sup_ratio <= 2 * math.sqrt(2) * (1 + 1e-9)
    rep = omega_regularity(ModulusOmega.power(1.0))
    assert not rep.passed
    assert rep.slope == pytest.approx(0.5, rel=0.1)
    d = rep.deltas
    assert np.allclose(rep.ratios, np.log(2 / d) / 2, rtol=1e-10)
    assert omega_regularity(ModulusOmega.zero()).passed


def test_decay_profile_and_capacity_omega():
    psi = DecayProfile.power(3.0)
    assert psi.moment() == pytest.approx(1.0)
    assert psi.inverse(0.125) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        DecayProfile.power(2.0)
    c = 0.05
    ts = np.logspace(-6, 0, 12)
    val = capacity_omega(None, psi, list(zip(ts, np.full(12, c))), 1e-3)
    assert val == pytest.approx(math.exp(-math.exp(c ** (-1 / 3))), rel=1e-9)
    exp = DecayProfile.exponential()
    assert float(exp.inverse(math.exp(-4.0))) == pytest.approx(4.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(1e-3, 5.0), min_size=4, max_size=12))
def test_capacity_omega_monotone(caps):
    caps = np.sort(caps)
    ts = np.logspace(-8, 0, len(caps))
    if np.any(np.diff(caps) <= 0):
        return
    grid = np.logspace(-8, 0, 200)
    w = capacity_omega(None, DecayProfile.power(3.0), list(zip(ts, caps)), grid)
    assert np.all(np.diff(w) >= -1e-12)


def test_remark_omega_bound():
    t_star, ok = remark_omega_bound()
    assert ok
    assert t_star == pytest.approx(math.exp(-math.e ** 2), rel=0.02)
    om = ModulusOmega.exp_exp_eta()
    t = np.logspace(-12, math.log10(t_star), 500)
    assert np.all(om(t) <= np.log(1 / t) ** -2.0 * (1 + 1e-12))


# ----- conditions


def test_shapiro_shields_examples():
    s = shapiro_shields(radial(lambda n: -n ** 2), 1 << 16)
    assert s.verdict == S.CONVERGES and s.value == pytest.approx(math.pi ** 2 / 6, abs=1e-4)
    assert shapiro_shields(radial(lambda n: -n), 1 << 20).verdict == S.DIVERGES
    with pytest.raises(ZeroDivisionError):
        shapiro_shields(ZeroSequence.from_points([0.0]))


def test_lemma_examples():
    Z = radial(lambda n: -n * math.log(2.0))
    om = ModulusOmega.power(2.0)
    s = lemma_sum(Z, ONE, om, 200)
    n = np.arange(1, 201, dtype=float)
    d = 2.0 ** -n
    ref = np.sum(4 * d ** 2 + d * (2 - 2 * d))
    assert s.verdict == S.CONVERGES and s.value == pytest.approx(ref, rel=1e-12)
    assert lemma_sum(Z, ONE, ModulusOmega.zero(), 64).value == 0.0
    single = ZeroSequence.from_polar([0.3], [1.0])
    assert math.isfinite(lemma_sum(single, ONE, om).value)


def test_theorem1_examples():
    Z = assign_arguments(np.linspace(0.5, 0.99, 40), cantor_level(perfect_symmetric(1 / 3, 3), 3))
    # radial zeros over E: d(z, E) = 1 - r, arguments in E
    assert corollary1_sum(Z, cantor_level(perfect_symmetric(1 / 3, 3), 3), 0.75).value == 0.0
    far = ZeroSequence.from_polar([0.0001], [math.pi])
    v = theorem1_sum(far, ONE, ModulusOmega.power(2.0)).value
    assert v == pytest.approx(4.0, rel=1e-12)  # 2d clipped to 2


def test_blas_examples():
    Z = radial(lambda n: -n ** 2 * 0 - 2.0 * np.log(n + 1.0))
    ls = blas_condition(Z, ModulusOmega.log_square(), 1 << 14)
    sq = log_square_sum(Z, 1 << 14)
    assert ls.verdict == sq.verdict
    geo = radial(lambda n: -n * math.log(2.0))
    b = blas_condition(geo, ModulusOmega.power(2.0), 200)
    n = np.arange(1, 201, dtype=float)
    d = 2.0 ** -n
    assert b.value == pytest.approx(np.sum(d * (2 - 2 * d)), rel=1e-12)
    assert blas_condition([0.5], ModulusOmega.power(2.0)).value == pytest.approx(0.5 * 1.0)


def test_blas_tracks_log_square():
    # K(2 delta)/2 ~ c/log^2(1/delta): the ratio to the log^2 term stays bounded
    om = ModulusOmega.log_square()
    ld = -np.logspace(0.5, 2.5, 40)
    ratio = 0.5 * om.K(math.log(2.0) + ld) * ld ** 2
    assert np.all(ratio < 3.0)
    assert np.ptp(ratio[-5:]) < 0.01


def test_assign_arguments_exact_distance():
    E = cantor_level(perfect_symmetric(1 / 3, 4), 4)
    r = 1 - np.logspace(-1, -12, 300)
    Z = assign_arguments(r, E)
    ld, th = Z.chunk(1, 301)
    z = (1 - np.exp(ld)) * np.exp(1j * th)
    assert np.allclose(distance(z, E), np.exp(ld), rtol=0, atol=4e-16)
    assert np.allclose(log_distance(ld, th, E), ld, atol=1e-9)
    K = len(E.endpoints())
    assert len(np.unique(th)) == min(K, 300)
    with pytest.raises(ValueError):
        assign_arguments(r, CircleSet.full())


def test_accumulation_diagnostic():
    E = CircleSet.points([0.0, math.pi])
    Z = assign_arguments(1 - 1 / np.arange(2, 1002), E)
    assert accumulation_diagnostic(Z, E, 1000) <= 1e-3


def test_corollary1_examples():
    Z = ZeroSequence(lambda i: (np.full(len(i), -5.0), 2 * np.arcsin(0.5 / i.astype(float) ** 2)), None, "c1")
    s = corollary1_sum(Z, ONE, 0.75, 1 << 12)
    n = np.arange(1, (1 << 12) + 1, dtype=float)
    assert s.verdict == S.CONVERGES
    assert s.value == pytest.approx(np.sum(n ** -3.0), rel=1e-9)
    with pytest.warns(UserWarning):
        corollary1_sum(Z, ONE, 0.5, 8)


def test_corollary2_examples():
    gamma = 0.5
    n = np.arange(3, 3 + (1 << 12), dtype=float)
    # radial zeros with d = (1/log n)^(1/gamma) give terms 1/n^2
    d = (1 / np.log(n)) ** (1 / gamma)
    keep = d < 1
    Z = ZeroSequence.from_log_depth(np.log(d[keep]), 0.0)
    s = corollary2_sum(Z, ONE, gamma)
    assert s.value == pytest.approx(np.sum(n[keep] ** -2.0), rel=1e-9)
    far = ZeroSequence.from_polar([0.1] * 5, [math.pi] * 5)
    assert math.isfinite(corollary2_sum(far, ONE, gamma).value)
    with pytest.raises(ValueError):
        corollary2_sum(far, ONE, 1.0)


def test_corollary3_examples():
    Z = radial(lambda n: -n)
    s = corollary3_sum(Z, ONE, 0.4, 1 << 10)
    ld = -np.arange(1, (1 << 10) + 1, dtype=float)
    # |E_s| between 2s and pi s brackets the inner integral
    lo = np.exp(-(0.5 * (math.log(2) - (math.log(2) + ld))) ** 0.4)
    hi = np.exp(-((math.log(2) - (math.log(2) + ld)) / math.pi) ** 0.4)
    assert np.sum(lo) * (1 - 1e-9) <= s.value <= np.sum(hi) * (1 + 1e-9)
    bounded = ZeroSequence.from_polar([0.1, 0.2, 0.3], [1.0, 2.0, 3.0])
    assert math.isfinite(corollary3_sum(bounded, ONE, 0.3).value)
    with pytest.raises(ValueError):
        corollary3_sum(Z, ONE, 0.5)
    t = np.logspace(-10, math.log10(2), 100)
    assert np.all(np.diff(eta_alpha(ONE, 0.3, t)) <= 0)


def test_t_gamma_examples():
    sp = perfect_symmetric(1 / 3, 400)
    assert cantor_t_gamma(sp, 0.3, 400).verdict == S.CONVERGES
    assert cantor_t_gamma(sp, 0.45, 400).verdict == S.DIVERGES
    r = t_gamma_integral(ONE, 0.5)
    from scipy.integrate import quad
    ref = quad(lambda p: (2 * math.sin(p / 2)) ** -0.5, 0, TWO_PI, limit=200, points=[math.pi])[0]
    assert r.integral == pytest.approx(ref, rel=1e-9)
    v = [t_gamma_integral(ONE, g).integral * (1 - g) for g in (0.99, 0.999, 0.9999)]
    assert np.ptp(v) < 0.05 * v[0]
    with pytest.raises(ValueError):
        t_gamma_integral(ONE, 1.0)
    _, E = example2_sequence(0.3, 1 << 12)
    tg = t_gamma_integral(E, 0.3)
    assert math.isfinite(tg.integral) and math.isfinite(tg.series_value)


def test_condition_ii_examples():
    r1 = conditionII_check(ONE, 1.0)
    r01 = conditionII_check(ONE, 0.1)
    assert r1.passed
    assert r1.values[-1] < r01.values[-1]
    assert np.allclose(r1.values, r1.closed_form, rtol=1e-7)
    fat = CircleSet.from_pairs([[0.0, 1.0]])
    assert not conditionII_check(fat, 1.0).passed


# ----- sequences


def test_antidiagonal_order():
    n, k = antidiagonal(np.arange(1, 11))
    assert list(zip(n.tolist(), k.tolist())) == [
        (2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (4, 2), (2, 5), (3, 4), (4, 3), (5, 2)]
    m = np.arange(1, 200001)
    n, k = antidiagonal(m)
    assert len(set(zip(n.tolist(), k.tolist()))) == len(m)
    assert np.all(np.diff(n + k) >= 0)


def test_example2_values():
    assert example2_eps(0.3, 2) == pytest.approx(2 ** (-13 / 7))
    Z, E = example2_sequence(0.3, 16)
    ld, th = Z.chunk(1, 2)
    assert math.exp(ld[0]) == pytest.approx(1 / 16)
    assert blaschke_sum(Z, 1 << 16).verdict == S.CONVERGES
    with pytest.raises(ValueError):
        example2_sequence(1.0, 10)


def test_solve_depth():
    u = solve_depth(math.log(1e-6))
    x = math.exp(u)
    assert x * math.log(1 / x) == pytest.approx(1e-6, rel=1e-12)
    assert x == pytest.approx(6.01449e-8, rel=1e-5)
    assert x < 1 / math.e


def test_prop2_levels():
    sp = perfect_symmetric(1 / 3, 64)
    with pytest.warns(UserWarning):
        lv = prop2_levels(sp, 10)
    assert lv.k0 == 3
    with pytest.warns(UserWarning):
        Z, lv = prop2_sequence(sp, 10)
    assert Z.length == (1 << 11) - (1 << 3)
    r, th = Z.materialize()
    k, l = lv.level_of(np.arange(1, Z.length + 1))
    ell = np.exp(sp.log_ell(k))
    d = 1 - r
    assert np.allclose(d * np.log(1 / d), ell ** 2, rtol=1e-10)
    # every argument is the midpoint of an interval of its level
    for kk in range(3, 11):
        Ek = cantor_level(sp, kk)
        m = k == kk
        assert np.all(Ek.contains(th[m]))
        assert np.all(Ek.angular_distance(th[m] + 0.5 * ell[m][0] * (1 - 1e-9)) == 0)
