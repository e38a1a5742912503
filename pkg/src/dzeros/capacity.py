"""Logarithmic energy, equilibrium measures and capacity on the circle.

Capacity uses the reciprocal-energy normalization
``cap(E) = 1 / inf I(mu)``; for an arc of angular width ``w`` the minimal
energy is ``log(1 / sin(w/4))``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .circle_sets import TWO_PI, Arc, CircleSet, inverse_measure_integral, neighborhood


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with constant density on each cell arc.

    Cell ``i`` covers ``[starts[i], starts[i] + lengths[i]]`` (angles may be
    negative for cells crossing 0) and carries mass ``weights[i]``.
    """

    starts: np.ndarray
    lengths: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("starts", "lengths", "weights"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (len(self.starts) == len(self.lengths) == len(self.weights)):
            raise ValueError("cell arrays differ in length")
        if np.any(self.lengths <= 0):
            raise ValueError("cells must have positive arclength")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    @classmethod
    def from_cells(cls, cells) -> "DiscreteMeasure":
        cells = list(cells)
        return cls([c[0].start for c in cells], [c[0].length for c in cells],
                   [c[1] for c in cells])

    @classmethod
    def uniform(cls, starts, lengths) -> "DiscreteMeasure":
        lengths = np.asarray(lengths, dtype=float)
        return cls(starts, lengths, lengths / lengths.sum())

    @property
    def cells(self) -> list[tuple[Arc, float]]:
        return [(Arc(s, l), w) for s, l, w in zip(self.starts, self.lengths, self.weights)]

    @property
    def centers(self) -> np.ndarray:
        return self.starts + self.lengths / 2.0

    @property
    def density(self) -> np.ndarray:
        return self.weights / self.lengths

    def total_variation(self) -> float:
        """Total variation of the density around the circle."""
        order = np.argsort(np.mod(self.starts, TWO_PI))
        s = np.mod(self.starts[order], TWO_PI)
        e = s + self.lengths[order]
        rho = self.density[order]
        prev_e = np.roll(e, 1) - np.where(np.arange(len(s)) == 0, TWO_PI, 0.0)
        prev_rho = np.roll(rho, 1)
        adj = np.abs(prev_e - s) < 1e-12
        nxt_s = np.roll(s, -1) + np.where(np.arange(len(s)) == len(s) - 1, TWO_PI, 0.0)
        adj_next = np.abs(e - nxt_s) < 1e-12
        tv = np.where(adj, np.abs(rho - prev_rho), rho).sum()
        tv += np.where(adj_next, 0.0, rho).sum()
        return float(tv)


@dataclass(frozen=True)
class EnergyReport:
    value: float
    truncation: int
    tail_bound: float

    def to_dict(self) -> dict:
        return {"value": self.value, "truncation": self.truncation, "tail_bound": self.tail_bound}


def fourier_coefficient(mu: DiscreteMeasure, n):
    """``int exp(-i n theta) dmu`` in closed form per cell."""
    n = np.asarray(n, dtype=float)
    h = mu.lengths / 2.0
    nn = n[..., None]
    phase = np.exp(-1j * nn * mu.centers)
    sinc = np.sinc(nn * h / math.pi)
    return (phase * sinc * mu.weights).sum(axis=-1)


def energy_fourier(mu: DiscreteMeasure, N: int = config.ENERGY_FOURIER_N) -> EnergyReport:
    """``sum_{n=1}^N |mu^(n)|^2 / n`` with a bound on the omitted tail."""
    if N < 1:
        raise ValueError("N must be at least 1")
    total = 0.0
    for lo in range(1, N + 1, 1024):
        n = np.arange(lo, min(lo + 1024, N + 1))
        c = fourier_coefficient(mu, n)
        total += float(np.sum(np.abs(c) ** 2 / n))
    tv = mu.total_variation()
    tail = tv * tv / (2.0 * N * N)
    return EnergyReport(total, N, tail)


# --------------------------------------------------------------------------
# kernel form


def _F0(v):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = v * np.log(np.abs(v)) - v
    return np.where(v == 0, 0.0, r)


def _F1(v):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = 0.5 * v * v * np.log(np.abs(v)) - 0.25 * v * v
    return np.where(v == 0, 0.0, r)


def _log_sinc(v):
    # log(2 sin(v/2) / v), analytic for |v| < 2pi
    return np.log(np.sinc(v / TWO_PI))


def pair_integrals(a1, a2, b1, b2, order: int = 16) -> np.ndarray:
    """``int_A int_B -log|2 sin((x - y)/2)| dx dy`` for arcs ``A=[a1,a2]``, ``B=[b1,b2]``.

    The double integral is a 1-D integral in ``u = x - y`` against the
    trapezoidal overlap length ``g(u)``.  Near each singular point ``2 pi m``
    the ``-log|u - 2 pi m|`` part is integrated exactly against the linear
    pieces of ``g``; the smooth remainder uses Gauss-Legendre with ``order``
    nodes per piece.
    """
    a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a1, a2, b1, b2)))
    lo = a1 - b2
    hi = a2 - b1
    knots = [a1 - b1, a2 - b2]
    fixed = [k * math.pi for k in range(-5, 6)]
    pts = np.stack([lo, hi] + knots + [np.clip(np.full(lo.shape, f), lo, hi) for f in fixed], axis=-1)
    pts = np.sort(pts, axis=-1)
    p, q = pts[..., :-1], pts[..., 1:]

    def g(u):
        top = np.minimum(b2[..., None], a2[..., None] - u)
        bot = np.maximum(b1[..., None], a1[..., None] - u)
        return np.maximum(top - bot, 0.0)

    gp, gq = g(p), g(q)
    width = q - p
    mid = 0.5 * (p + q)
    s = TWO_PI * np.round(mid / TWO_PI)
    vp, vq = p - s, q - s
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(width > 0, (gq - gp) / width, 0.0)
    # split off the log exactly only near the singularity; far away the
    # antiderivative differences cancel catastrophically for tiny cells
    near = np.minimum(np.abs(vp), np.abs(vq)) <= width
    near |= (vp <= 0.0) & (vq >= 0.0)
    c0 = gp - slope * vp
    with np.errstate(invalid="ignore"):
        log_part = np.where(near, -(c0 * (_F0(vq) - _F0(vp)) + slope * (_F1(vq) - _F1(vp))), 0.0)
    x, w = np.polynomial.legendre.leggauss(order)
    u = mid[..., None] + 0.5 * width[..., None] * x
    gu = gp[..., None] + slope[..., None] * (u - p[..., None])
    v = u - s[..., None]
    with np.errstate(divide="ignore"):
        far_log = np.where(near[..., None], 0.0, np.log(np.abs(v)))
    smooth = -(0.5 * width * np.sum(w * gu * (_log_sinc(v) + far_log), axis=-1))
    total = np.where(width > 0, log_part + smooth, 0.0)
    return total.sum(axis=-1)


def energy_matrix(starts, lengths, order: int = 16) -> np.ndarray:
    """Symmetric ``A`` with ``I(mu) = w^T A w`` for cell weights ``w``."""
    s = np.asarray(starts, dtype=float)
    L = np.asarray(lengths, dtype=float)
    n = len(s)
    iu, ju = np.triu_indices(n)
    vals = np.empty(len(iu))
    chunk = 20000
    for k in range(0, len(iu), chunk):
        i, j = iu[k:k + chunk], ju[k:k + chunk]
        vals[k:k + chunk] = pair_integrals(s[i], s[i] + L[i], s[j], s[j] + L[j], order) / (L[i] * L[j])
    A = np.empty((n, n))
    A[iu, ju] = vals
    A[ju, iu] = vals
    return A


def energy_kernel(mu: DiscreteMeasure, quad_order: int = 16) -> float:
    """``int int log 1/|zeta - xi| dmu dmu`` by exact log-singularity splitting."""
    if quad_order < 2:
        raise ValueError("quad_order must be at least 2")
    A = energy_matrix(mu.starts, mu.lengths, quad_order)
    return float(mu.weights @ A @ mu.weights)


# --------------------------------------------------------------------------
# equilibrium measure


def _logical_arcs(E: CircleSet) -> tuple[np.ndarray, np.ndarray, bool]:
    """Arcs of ``E`` with the pieces split at angle 0 joined again."""
    s, e = np.array(E.starts), np.array(E.ends)
    if E.is_full:
        return s, e - s, True
    if len(s) > 1 and s[0] == 0.0 and e[-1] >= TWO_PI:
        L = e - s
        L0 = L[0] + L[-1]
        s = np.concatenate(([s[-1] - TWO_PI], s[1:-1]))
        L = np.concatenate(([L0], L[1:-1]))
        return s, L, False
    return s, e - s, False


def cells_on_set(E: CircleSet, cells: int, graded: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Subdivide the arcs of ``E`` into about ``cells`` cells.

    Cells are Chebyshev-graded toward arc endpoints (where the equilibrium
    density blows up); the full circle is split uniformly.
    """
    starts, lengths, full = _logical_arcs(E)
    keep = lengths > 0
    starts, lengths = starts[keep], lengths[keep]
    if len(starts) == 0:
        raise ValueError("set has zero measure; probe it through neighborhoods or Cantor levels")
    counts = np.maximum(1, np.round(cells * lengths / lengths.sum()).astype(int))
    cs, cl = [], []
    for s0, L, k in zip(starts, lengths, counts):
        if full or not graded:
            x = np.linspace(0.0, 1.0, k + 1)
        else:
            x = 0.5 * (1.0 - np.cos(np.pi * np.arange(k + 1) / k))
        b = s0 + L * x
        b[-1] = s0 + L
        cs.append(b[:-1])
        cl.append(np.diff(b))
    cl = np.concatenate(cl)
    if cl.min() < 100.0 * np.spacing(TWO_PI):
        raise FloatingPointError("cells shorter than the angle resolution; use fewer cells or a wider set")
    return np.concatenate(cs), cl


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum w = 1}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def kkt_residual(A: np.ndarray, w: np.ndarray, support_tol: float = 1e-14) -> float:
    """Violation of the simplex-QP optimality conditions at ``w``.

    With ``g = 2 A w`` and ``lam = w . g``: ``g_i = lam`` on the support and
    ``g_i >= lam`` elsewhere.  Scaled by ``max(1, |lam|)``.
    """
    g = 2.0 * A @ w
    lam = float(w @ g)
    on = w > support_tol
    r_on = np.max(np.abs(g[on] - lam)) if np.any(on) else 0.0
    r_off = np.max(np.maximum(lam - g[~on], 0.0)) if np.any(~on) else 0.0
    return float(max(r_on, r_off) / max(1.0, abs(lam)))


@dataclass(frozen=True)
class EquilibriumResult:
    measure: DiscreteMeasure
    energy: EnergyReport
    kkt_residual: float
    iterations: int
    converged: bool
    polished: bool = False
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy.to_dict(),
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "polished": self.polished,
            "cells": len(self.measure.weights),
        }


def _polish(A: np.ndarray, w: np.ndarray, support_tol: float = 1e-12):
    on = w > support_tol
    k = int(on.sum())
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = 2.0 * A[np.ix_(on, on)]
    M[:k, k] = -1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    if np.any(sol[:k] < 0):
        return None
    out = np.zeros_like(w)
    out[on] = sol[:k]
    out /= out.sum()
    return out


def minimize_energy(A: np.ndarray, iters: int = 20000, tol: float = 1e-10):
    """Accelerated projected gradient for ``min w^T A w`` on the simplex.

    Starts from uniform weights with step ``1 / (2 lambda_max(A))``; a final
    equality-constrained solve on the detected support sharpens the
    iterate when it stays feasible and lowers the KKT residual.
    Returns ``(w, residual, iterations, converged, polished)``.
    """
    n = A.shape[0]
    w = np.full(n, 1.0 / n)
    lmax = float(np.linalg.eigvalsh(A)[-1])
    step = 1.0 / (2.0 * max(lmax, 1e-300))
    y, t = w.copy(), 1.0
    res = kkt_residual(A, w)
    it = 0
    for it in range(1, iters + 1):
        w_new = project_simplex(y - step * 2.0 * (A @ y))
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = w_new + ((t - 1.0) / t_new) * (w_new - w)
        # restart keeps the energy monotone
        if w_new @ A @ w_new > w @ A @ w:
            y, t_new = w_new.copy(), 1.0
        w, t = w_new, t_new
        if it % 50 == 0:
            res = kkt_residual(A, w)
            if res <= tol:
                break
    res = kkt_residual(A, w)
    polished = False
    if res > tol:
        p = _polish(A, w)
        if p is not None:
            rp = kkt_residual(A, p)
            if rp < res and p @ A @ p <= w @ A @ w + 1e-14:
                w, res, polished = p, rp, True
    return w, res, it, res <= tol, polished


def equilibrium_measure(E: CircleSet, cells: int = 200, iters: int = 20000,
                        tol: float = 1e-10, quad_order: int = 16) -> EquilibriumResult:
    """Energy-minimizing piecewise-constant probability measure on ``E``."""
    starts, lengths = cells_on_set(E, cells)
    A = energy_matrix(starts, lengths, quad_order)
    w, res, it, ok, polished = minimize_energy(A, iters, tol)
    w = np.maximum(w, 0.0)
    w /= w.sum()
    mu = DiscreteMeasure(starts, lengths, w)
    energy = EnergyReport(float(w @ A @ w), 0, 0.0)
    return EquilibriumResult(mu, energy, res, it, ok, polished, A)


def capacity(E: CircleSet, cells: int = 200, iters: int = 20000, tol: float = 1e-10,
             zero_energy_tol: float = 1e-10) -> float:
    """``1 / min energy``; ``math.inf`` when the minimal energy vanishes."""
    r = equilibrium_measure(E, cells, iters, tol)
    if r.energy.value <= zero_energy_tol:
        return math.inf
    return 1.0 / r.energy.value


def capacity_upper_bound(E: CircleSet, t: float) -> float:
    """``(int_t^2 ds / |E_s|)^-1``; infinite at ``t = 2``."""
    if not (0.0 < t <= 2.0):
        raise ValueError("need 0 < t <= 2")
    v = inverse_measure_integral(E, t, 2.0)
    return math.inf if v <= 0.0 else 1.0 / v


@dataclass(frozen=True)
class CapacityPoint:
    t: float
    cap: float
    upper_bound: float
    kkt_residual: float
    converged: bool

    @property
    def bound_ok(self) -> bool:
        if math.isinf(self.upper_bound):
            return True
        return self.cap <= self.upper_bound * (1.0 + 1e-9)


def capacity_curve(E: CircleSet, ts, cells: int = 200, iters: int = 20000,
                   tol: float = 1e-10) -> list[CapacityPoint]:
    """Capacity of ``E_t`` on an increasing grid with the matching upper bound."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
        raise ValueError("t grid must be positive and increasing")
    out = []
    for t in ts:
        Et = neighborhood(E, float(t))
        r = equilibrium_measure(Et, cells, iters, tol)
        cap = math.inf if r.energy.value <= 1e-10 else 1.0 / r.energy.value
        ub = capacity_upper_bound(E, float(t)) if t < 2.0 else math.inf
        out.append(CapacityPoint(float(t), cap, ub, r.kkt_residual, r.converged))
    return out


def curve_to_csv(points: list[CapacityPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "cap", "upper_bound"])
    for p in points:
        w.writerow([f"{p.t:.17g}", _fmt(p.cap), _fmt(p.upper_bound)])
    return buf.getvalue()


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.17g}"


def arc_capacity_from_chord(chord: float) -> float:
    """Exact capacity of an arc with the given chordal length."""
    w = 2.0 * math.asin(chord / 2.0)
    return 1.0 / math.log(1.0 / math.sin(w / 4.0))


def arc_capacity_bound(I, c1: float = config.C1_ARC_CAPACITY) -> float:
    """``c1 / log(1/|I|)`` with ``|I|`` the chordal length of the arc."""
    chord = I.chord if isinstance(I, Arc) else float(I)
    if not (0.0 < chord < 1.0):
        raise ValueError("bound needs 0 < |I| < 1")
    return c1 / math.log(1.0 / chord)


def calibrate_c1(chords=None, cells: int = 64) -> float:
    """Smallest ``c1`` with solver ``cap(I) <= c1 / log(1/|I|)`` on the given arcs."""
    chords = np.logspace(-6, -1, 11) if chords is None else np.asarray(chords)
    worst = 0.0
    for c in chords:
        w = 2.0 * math.asin(c / 2.0)
        E = CircleSet([Arc(0.0, w)])
        cap = capacity(E, cells=cells)
        worst = max(worst, cap * math.log(1.0 / c))
    return worst


def cantor_capacity_sequence(spec, levels, cells: int = 400) -> list[tuple[int, float]]:
    """Capacities of the nested levels ``E_k`` (decreasing supersets of ``E``)."""
    from .circle_sets import cantor_level

    return [(int(k), capacity(cantor_level(spec, int(k)), cells=cells)) for k in levels]
