import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dzeros import config
from dzeros.capacity import (
    DiscreteMeasure, arc_capacity_bound, arc_capacity_from_chord, capacity,
    capacity_curve, capacity_upper_bound, curve_to_csv, energy_fourier, energy_kernel,
    equilibrium_measure, fourier_coefficient, kkt_residual, project_simplex,
)
from dzeros.circle_sets import TWO_PI, Arc, CircleSet, cantor_level, neighborhood, perfect_symmetric


def random_measure(rng, k_max=12, min_len=0.05):
    k = int(rng.integers(1, k_max + 1))
    cuts = np.sort(rng.uniform(0, TWO_PI, 2 * k))
    starts, lengths = cuts[0::2], cuts[1::2] - cuts[0::2]
    keep = lengths >= min_len
    if not keep.any():
        return DiscreteMeasure.uniform([0.0], [1.0])
    w = rng.random(int(keep.sum())) + 0.05
    return DiscreteMeasure(starts[keep], lengths[keep], w / w.sum())


def test_fourier_coefficient_examples():
    full = DiscreteMeasure.uniform(np.linspace(0, TWO_PI, 9)[:-1], np.full(8, TWO_PI / 8))
    assert abs(fourier_coefficient(full, 3)) < 1e-15
    spike = DiscreteMeasure([-1e-9], [2e-9], [1.0])
    assert fourier_coefficient(spike, 17) == pytest.approx(1.0, abs=1e-12)
    th = 0.7
    cell = DiscreteMeasure([-th], [2 * th], [1.0])
    for n in (1, 2, 5, 40):
        assert fourier_coefficient(cell, n) == pytest.approx(math.sin(n * th) / (n * th), abs=1e-14)


def test_uniform_energy_vanishes():
    mu = DiscreteMeasure.uniform([0.0], [TWO_PI])
    assert abs(energy_kernel(mu)) <= 1e-10
    assert energy_fourier(mu, 4096).value <= 1e-20
    mu8 = DiscreteMeasure.uniform(np.arange(8) * TWO_PI / 8, np.full(8, TWO_PI / 8))
    assert abs(energy_kernel(mu8)) <= 1e-10


def test_semicircle_forms_agree():
    mu = DiscreteMeasure.uniform([-math.pi / 2], [math.pi])
    ref = energy_fourier(mu, 10 ** 4).value
    assert energy_kernel(mu) == pytest.approx(ref, abs=1e-4)


def test_antipodal_cells_energy_grows():
    vals = []
    for h in (1e-1, 1e-2, 1e-3, 1e-4):
        mu = DiscreteMeasure([-h, math.pi - h], [2 * h, 2 * h], [0.5, 0.5])
        vals.append(energy_kernel(mu))
    assert np.all(np.diff(vals) > 0)
    # cross term tends to (1/2) log(1/2); self terms carry log(1/h)/2
    assert vals[-1] == pytest.approx(0.5 * math.log(0.5) + 0.5 * (math.log(1 / 2e-4) + 1.5), abs=1e-3)


def test_quad_order_domain():
    mu = DiscreteMeasure.uniform([0.0], [1.0])
    with pytest.raises(ValueError):
        energy_kernel(mu, quad_order=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_energy_forms_agree_and_nonnegative(seed):
    mu = random_measure(np.random.default_rng(seed))
    ef = energy_fourier(mu, 4096)
    ek = energy_kernel(mu)
    assert ef.value >= 0.0 and ek >= -1e-10
    assert abs(ek - ef.value) <= ef.tail_bound + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 2000), st.integers(1, 2000))
def test_fourier_energy_monotone_in_N(seed, n1, n2):
    mu = random_measure(np.random.default_rng(seed))
    n1, n2 = sorted((n1, n2))
    assert energy_fourier(mu, n2).value >= energy_fourier(mu, n1).value


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 24), st.integers(0, 2 ** 32 - 1))
def test_perturbing_uniform_increases_energy(k, seed):
    rng = np.random.default_rng(seed)
    starts = np.arange(k) * TWO_PI / k
    lengths = np.full(k, TWO_PI / k)
    w = np.full(k, 1.0 / k) + 0.1 / k * rng.standard_normal(k)
    w = np.clip(w, 0, None)
    w /= w.sum()
    if np.allclose(w, 1.0 / k, atol=1e-6):
        return
    assert energy_kernel(DiscreteMeasure(starts, lengths, w)) > 1e-12


def test_project_simplex():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.standard_normal(int(rng.integers(1, 30))) * 3
        p = project_simplex(v)
        assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-14)
        # optimality: p is the closest simplex point
        q = rng.dirichlet(np.ones(len(v)))
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-12


def test_full_circle_equilibrium():
    r = equilibrium_measure(CircleSet.full(), cells=64)
    assert abs(r.energy.value) <= 1e-10
    assert np.allclose(r.measure.weights, 1 / 64, atol=1e-8)
    assert math.isinf(capacity(CircleSet.full(), cells=64))


def test_semicircle_equilibrium_and_capacity():
    E = CircleSet([Arc(0.0, math.pi)])
    r = equilibrium_measure(E, cells=200)
    exact = math.log(1 / math.sin(math.pi / 4))
    assert r.energy.value == pytest.approx(exact, rel=2e-2)
    assert r.kkt_residual <= 1e-6
    assert 1 / r.energy.value == pytest.approx(2.885, rel=2e-2)


def test_symmetric_arcs_give_symmetric_weights():
    E = CircleSet([Arc(0.2, 0.6), Arc(math.pi + 0.2, 0.6)])
    r = equilibrium_measure(E, cells=80)
    w = r.measure.weights
    assert np.allclose(w[:40], w[40:], atol=1e-7)


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0, 4.0])
def test_arc_capacity_closed_form(w):
    E = CircleSet([Arc(0.0, w)])
    exact = 1 / math.log(1 / math.sin(w / 4))
    assert capacity(E, cells=120) == pytest.approx(exact, rel=2e-3)
    if w <= math.pi:  # a chord determines the minor arc only
        assert arc_capacity_from_chord(2 * math.sin(w / 2)) == pytest.approx(exact, rel=1e-13)


def test_capacity_monotone_under_inclusion():
    E = CircleSet([Arc(0.0, 0.3)])
    F = CircleSet([Arc(0.0, 0.3), Arc(2.0, 0.5)])
    assert capacity(E, cells=100) <= capacity(F, cells=100) * (1 + 1e-6)


def test_point_curve_respects_bound_and_decreases():
    E = CircleSet.points([0.0])
    pts = capacity_curve(E, np.logspace(-3, -1, 5), cells=100)
    caps = [p.cap for p in pts]
    assert np.all(np.diff(caps) > 0)
    assert all(p.bound_ok for p in pts)
    for p in pts:
        # E_t is an arc of angular width 4 arcsin(t/2)
        chord = 2 * math.sin(2 * math.asin(p.t / 2))
        assert p.cap == pytest.approx(arc_capacity_from_chord(chord), rel=1e-3)
    csv = curve_to_csv(pts)
    assert csv.splitlines()[0] == "t,cap,upper_bound"


def test_full_circle_curve_is_infinite():
    pts = capacity_curve(CircleSet.full(), [0.5, 1.0], cells=32)
    assert all(math.isinf(p.cap) for p in pts)
    assert "inf" in curve_to_csv(pts)


def test_upper_bound_examples():
    E = CircleSet.points([0.0])
    b = capacity_upper_bound(E, 0.1)
    # 2s <= |E_s| <= pi s brackets the integral
    assert 1 / (0.5 * math.log(20)) <= b <= 1 / (math.log(20) / math.pi)
    assert math.isinf(capacity_upper_bound(E, 2.0))
    assert capacity_upper_bound(E, 1.999) > capacity_upper_bound(E, 1.5)


def test_arc_capacity_bound():
    assert arc_capacity_bound(math.exp(-10)) == pytest.approx(config.C1_ARC_CAPACITY / 10)
    assert arc_capacity_bound(1e-6) < arc_capacity_bound(1e-3)
    with pytest.raises(ValueError):
        arc_capacity_bound(1.0)
    w = 2 * math.asin(1e-3 / 2)
    assert capacity(CircleSet([Arc(0.0, w)]), cells=64) <= arc_capacity_bound(1e-3)


def test_kkt_residual_zero_at_uniform_for_full_circle():
    from dzeros.capacity import cells_on_set, energy_matrix
    s, l = cells_on_set(CircleSet.full(), 32)
    A = energy_matrix(s, l)
    assert kkt_residual(A, np.full(32, 1 / 32)) <= 1e-10


def test_integral_bound_needs_a_constant():
    # the integral bound is sharp only up to a set-dependent factor: a
    # fattened four-point set and a finite Cantor level both exceed it
    four = CircleSet.points([0.0, 1.5, 3.0, 4.5])
    q = capacity_curve(four, [0.1], 100)[0]
    assert q.kkt_residual <= 1e-6 and not q.bound_ok
    lev = cantor_level(perfect_symmetric(1 / 3, 6), 6)
    q = capacity_curve(lev, [1e-3], 100)[0]
    assert q.kkt_residual <= 1e-6 and q.cap > 1.5 * q.upper_bound
    # finite sets approach half the bound as t -> 0
    q = capacity_curve(four, [1e-6], 100)[0]
    assert q.bound_ok


def test_tiny_separated_arcs():
    # fourth roots of unity fattened by t: equal weights by symmetry, and the
    # cross terms give -log 4 since prod |1 - zeta| over the other roots is 4.
    # The cell discretization error is a fixed offset, independent of t.
    err = []
    for t in (1e-3, 1e-6, 1e-8, 1e-10):
        E = neighborhood(CircleSet.points(np.arange(4) * math.pi / 2), t)
        w = 4.0 * math.asin(t / 2.0)
        ref = (math.log(1.0 / math.sin(w / 4.0)) - math.log(4.0)) / 4.0
        err.append(equilibrium_measure(E, 100).energy.value - ref)
    assert 0.0 <= err[0] <= 1e-3
    # at t = 1e-10 the cell lengths carry ~1e-3 relative rounding in absolute angle
    assert np.ptp(err) <= 1e-5
    with pytest.raises(FloatingPointError):
        equilibrium_measure(neighborhood(CircleSet.points([math.pi / 2]), 1e-13), 100)
