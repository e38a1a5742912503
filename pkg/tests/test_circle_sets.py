import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dzeros.circle_sets import (
    TWO_PI, Arc, CircleSet, cantor_criteria, cantor_from_ell, cantor_level,
    cantor_left_endpoints, cantor_spec_from_json, carleson_criterion, distance,
    inverse_measure_integral, neighborhood, neighborhood_measure, perfect_symmetric,
    remark_cantor,
)
from dzeros import series as S

arc_lists = st.lists(
    st.tuples(st.floats(0, TWO_PI, exclude_max=True), st.floats(0, 2.0)),
    min_size=1, max_size=6,
)


def make_set(pairs):
    return CircleSet([Arc(s, l) for s, l in pairs])


def test_perfect_symmetric_examples():
    sp = perfect_symmetric(1 / 3, 6)
    assert sp.ell[1] == pytest.approx(TWO_PI / 3, rel=1e-15)
    assert sp.lam[0] == pytest.approx(TWO_PI / 3, rel=1e-15)
    assert perfect_symmetric(0.25, 3).lam[1] == pytest.approx(math.pi / 4, rel=1e-15)
    for r in (0.1, 0.3, 0.49):
        sp = perfect_symmetric(r, 20)
        ell, lam = sp.ell, sp.lam
        assert np.max(np.abs(2 * ell[1:] + lam - ell[:-1])) <= 1e-12
    with pytest.raises(ValueError):
        perfect_symmetric(0.5, 3)


def test_cantor_level_examples():
    sp = perfect_symmetric(1 / 3, 8)
    E0 = cantor_level(sp, 0)
    assert E0.is_full and E0.measure == pytest.approx(TWO_PI)
    E2 = cantor_level(sp, 2)
    assert len(E2) == 4
    assert np.allclose(E2.ends - E2.starts, TWO_PI / 9, rtol=1e-14)
    with pytest.raises(IndexError):
        cantor_level(sp, 9)


@pytest.mark.parametrize("ratio", [0.1, 1 / 3, 0.45])
def test_cantor_nesting_and_measure(ratio):
    sp = perfect_symmetric(ratio, 10)
    prev = cantor_level(sp, 0)
    for k in range(1, 11):
        E = cantor_level(sp, k)
        assert E.measure == pytest.approx(2 ** k * sp.ell[k], rel=1e-12)
        mids = 0.5 * (E.starts + E.ends)
        assert np.all(prev.contains(E.starts, 1e-12)) and np.all(prev.contains(E.ends - 1e-15, 1e-12))
        assert np.all(prev.contains(mids))
        prev = E


def test_left_endpoints_match_levels():
    sp = perfect_symmetric(0.3, 9)
    E = cantor_level(sp, 9)
    assert np.allclose(cantor_left_endpoints(sp, 9, np.arange(2 ** 9)), E.starts, atol=1e-13)


def test_distance_examples():
    one = CircleSet.points([0.0])
    assert float(distance(np.exp(1j * math.pi), one)) == pytest.approx(2.0)
    th = np.linspace(0, TWO_PI, 17)
    assert np.allclose(distance(np.exp(1j * th), one), 2 * np.abs(np.sin(th / 2)), atol=1e-15)
    assert float(distance(0.5 + 0j, one)) == pytest.approx(0.5)


def test_neighborhood_examples():
    one = CircleSet.points([0.0])
    for t in (1e-6, 0.1, 1.0, 1.9):
        assert neighborhood(one, t).measure == pytest.approx(4 * math.asin(t / 2), rel=1e-13)
    E = make_set([(1.0, 0.5), (3.0, 0.2)])
    assert neighborhood(E, 0.0) is E
    assert neighborhood(E, 2.0).measure == pytest.approx(TWO_PI)
    with pytest.raises(ValueError):
        neighborhood(E, -1.0)


def test_complementary_intervals_examples():
    E = make_set([(0.0, math.pi)])
    ci = E.complementary_intervals()
    assert len(ci) == 1 and ci[0].length == pytest.approx(math.pi)
    E1 = cantor_level(perfect_symmetric(1 / 3, 3), 1)
    assert sum(a.length for a in E1.complementary_intervals()) == pytest.approx(TWO_PI - 2 * TWO_PI / 3)
    pt = CircleSet.points([0.0])
    assert pt.complementary_intervals()[0].length == pytest.approx(TWO_PI)
    assert CircleSet.full().complementary_intervals() == []


@settings(max_examples=60, deadline=None)
@given(arc_lists, st.floats(0, 2.0), st.floats(0, 2.0))
def test_neighborhoods_nested(pairs, t1, t2):
    t1, t2 = sorted((t1, t2))
    E = make_set(pairs)
    A, B = neighborhood(E, t1), neighborhood(E, t2)
    pts = np.concatenate((A.starts, A.ends - 1e-13, 0.5 * (A.starts + A.ends)))
    assert np.all(B.contains(pts, 1e-12))
    assert A.measure <= B.measure + 1e-12


@settings(max_examples=60, deadline=None)
@given(arc_lists, st.floats(1e-3, 1.99))
def test_membership_matches_distance(pairs, t):
    E = make_set(pairs)
    Et = neighborhood(E, t)
    th = np.linspace(0, TWO_PI, 4001, endpoint=False)
    d = distance(np.exp(1j * th), E)
    inside = Et.contains(th)
    clear = np.abs(d - t) > 1e-10
    assert np.array_equal((d <= t)[clear], inside[clear])


@settings(max_examples=60, deadline=None)
@given(arc_lists)
def test_measure_plus_gaps(pairs):
    E = make_set(pairs)
    total = E.measure + sum(a.length for a in E.complementary_intervals())
    assert abs(total - TWO_PI) <= 1e-12
    assert 0.0 <= E.measure <= TWO_PI


@settings(max_examples=40, deadline=None)
@given(arc_lists)
def test_inverse_measure_integral_monotone(pairs):
    E = make_set(pairs)
    t = np.logspace(-8, math.log10(2.0), 60)
    v = inverse_measure_integral(E, t)
    assert np.all(np.diff(v) <= 1e-12)
    assert v[-1] == 0.0


def test_inverse_measure_integral_oracles():
    one = CircleSet.points([0.0])
    for t in (1e-6, 1e-3, 0.1):
        v = inverse_measure_integral(one, t)
        # 2s <= 4 arcsin(s/2) <= pi s
        assert math.log(2 / t) / math.pi <= v <= 0.5 * math.log(2 / t)
        from scipy.integrate import quad
        ref = quad(lambda s: 1 / (4 * math.asin(s / 2)), t, 2, limit=200, epsrel=1e-12)[0]
        assert v == pytest.approx(ref, rel=1e-9)
    assert inverse_measure_integral(CircleSet.full(), 0.5) == pytest.approx(1.5 / TWO_PI, rel=1e-13)
    assert inverse_measure_integral(one, 2.0) == 0.0
    with pytest.raises(ValueError):
        inverse_measure_integral(one, 0.0)


def test_inverse_measure_integral_against_quadrature_on_cantor_level():
    from scipy.integrate import quad
    E = cantor_level(perfect_symmetric(0.3, 5), 5)
    f = lambda s: 1.0 / float(neighborhood_measure(E, s))
    kinks = sorted({2 * math.sin(min(g / 4, math.pi / 2)) for g in E.gaps()})
    pts = [p for p in kinks if 1e-3 < p < 2]
    ref = quad(f, 1e-3, 2, points=pts, limit=400, epsrel=1e-12)[0]
    assert inverse_measure_integral(E, 1e-3) == pytest.approx(ref, rel=1e-9)


def test_carleson_criterion_examples():
    s = carleson_criterion(perfect_symmetric(1 / 3, 200), 200)
    n = np.arange(1, 201)
    lam = TWO_PI * 3.0 ** -(n - 1) / 3
    assert s.verdict == S.CONVERGES
    assert s.value == pytest.approx(np.sum(2.0 ** n * lam * np.log(1 / lam)), rel=1e-12)
    single = CircleSet([Arc(0.0, 1.0)])
    assert carleson_criterion(single).verdict == S.CONVERGES
    assert carleson_criterion(perfect_symmetric(1 / 2.2, 400), 400).verdict == S.CONVERGES


def test_cantor_criteria_examples():
    c = cantor_criteria(perfect_symmetric(1 / 3, 10), 1024)
    assert c["measure_zero"] and c["measure_limit"] == pytest.approx(TWO_PI, rel=1e-14)
    assert c["capacity_positive"] and c["carleson"]
    r = cantor_criteria(remark_cantor(1.0, 12), 1024)
    assert r["capacity_zero"]
    with pytest.raises(ValueError):
        cantor_from_ell([3.0, 2.0])


def test_spec_json_roundtrip():
    for obj in ({"ratio": 0.25, "depth": 5}, {"family": "remark", "s": 1.0, "depth": 9}):
        sp = cantor_spec_from_json(obj)
        sp2 = cantor_spec_from_json(sp.to_dict())
        assert np.allclose(sp.ell, sp2.ell)
    with pytest.raises(ValueError):
        cantor_spec_from_json({"nope": 1})
