"""Zero sequences, Blaschke products, Frostman sums and Carleson's formula.

Radii are stored through ``log(1 - r)`` so sequences whose depths underflow
double precision (``1 - r = n^-n k^-k`` and the like) stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import config
from . import series as _series
from .circle_sets import TWO_PI, Arc, CircleSet
from .dirichlet import BoundaryGrid, PowerSeries, dirichlet_norm

CHUNK = 1 << 18


class GridResolutionError(ValueError):
    """Boundary grid too coarse for the Poisson kernels of the zeros."""

    def __init__(self, required_M: int, M: int):
        super().__init__(f"grid of size {M} too coarse; need M >= {required_M}")
        self.required_M = required_M
        self.M = M


@dataclass(frozen=True)
class ZeroSequence:
    """Points ``z_n = r_n exp(i theta_n)``, ``n = 1, 2, ...``.

    ``generator(idx)`` maps an integer array of 1-based indices to
    ``(log(1 - r), theta)`` arrays.  ``length`` is ``None`` for infinite
    sequences.  ``blaschke_tail(N)``, when given, bounds
    ``sum_{n > N} (1 - r_n)``.
    """

    generator: Callable
    length: int | None = None
    tag: str = "explicit"
    params: dict = field(default_factory=dict)
    blaschke_tail: Callable | None = None

    @classmethod
    def from_polar(cls, radii, thetas, tag: str = "explicit") -> "ZeroSequence":
        r = np.asarray(radii, dtype=float)
        th = np.mod(np.asarray(thetas, dtype=float), TWO_PI)
        if np.any(r < 0) or np.any(r >= 1):
            raise ValueError("radii must lie in [0, 1)")
        ld = np.log1p(-r)
        return cls(lambda idx: (ld[idx - 1], th[idx - 1]), len(r), tag,
                   {"points": [[float(a), float(b)] for a, b in zip(r, th)]})

    @classmethod
    def from_points(cls, z) -> "ZeroSequence":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls.from_polar(np.abs(z), np.angle(z))

    @classmethod
    def from_log_depth(cls, log_depth, thetas, tag: str = "explicit", params=None) -> "ZeroSequence":
        ld = np.asarray(log_depth, dtype=float)
        th = np.mod(np.broadcast_to(np.asarray(thetas, dtype=float), ld.shape), TWO_PI)
        if np.any(ld > 0):
            raise ValueError("log(1 - r) must be <= 0")
        return cls(lambda idx: (ld[idx - 1], th[idx - 1]), len(ld), tag, dict(params or {}))

    def prefix_length(self, N: int | None) -> int:
        if N is None:
            if self.length is None:
                raise ValueError("infinite sequence needs an explicit N")
            return self.length
        if N < 1:
            raise ValueError("N must be at least 1")
        return N if self.length is None else min(N, self.length)

    def chunk(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """``(log(1 - r), theta)`` for indices ``lo..hi-1`` (1-based)."""
        idx = np.arange(lo, hi, dtype=np.int64)
        ld, th = self.generator(idx)
        return (np.broadcast_to(np.asarray(ld, dtype=float), idx.shape).copy(),
                np.broadcast_to(np.asarray(th, dtype=float), idx.shape).copy())

    def materialize(self, N: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Radii and angles of the first ``N`` points."""
        n = self.prefix_length(N)
        ld, th = self.chunk(1, n + 1)
        return -np.expm1(ld), th

    def points(self, N: int | None = None) -> np.ndarray:
        r, th = self.materialize(N)
        return r * np.exp(1j * th)

    def is_finite_prefix(self, N: int | None) -> bool:
        return self.length is not None and (N is None or N >= self.length)

    def to_json(self) -> dict:
        if self.tag == "explicit":
            return {"points": self.params.get("points", [])}
        return {"generator": self.tag, "params": self.params}


def block_series(Z: ZeroSequence, N: int | None, term_fn, chunk: int = CHUNK,
                 finite: bool | None = None) -> _series.PartialSumSeries:
    """Dyadic partial sums of ``term_fn(log_depth, theta)`` without materializing all terms."""
    n = Z.prefix_length(N)
    cuts = _series.dyadic_cutoffs(n)
    blocks = []
    lo = 1
    for c in cuts:
        parts = []
        for a in range(lo, int(c) + 1, chunk):
            b = min(a + chunk, int(c) + 1)
            ld, th = Z.chunk(a, b)
            t = np.asarray(term_fn(ld, th), dtype=float)
            if np.any(t < 0) or np.any(np.isnan(t)):
                raise ValueError("terms must be nonnegative numbers")
            parts.append(float(np.sum(t)))
        blocks.append(math.fsum(parts))
        lo = int(c) + 1
    if finite is None:
        finite = Z.is_finite_prefix(N)
    return _series.from_blocks(cuts, blocks, finite=finite)


def blaschke_sum(Z: ZeroSequence, N: int | None = None) -> _series.PartialSumSeries:
    """Partial sums of ``sum (1 - r_n)``."""
    return block_series(Z, N, lambda ld, th: np.exp(ld))


def factor(a: complex, z):
    """``b_a(z) = (|a|/a)(a - z)/(1 - conj(a) z)``; ``b_0(z) = z``."""
    z = np.asarray(z, dtype=complex)
    if a == 0:
        return z
    # |a|/a from the angle keeps modulus one even for subnormal a
    return np.exp(-1j * np.angle(a)) * (a - z) / (1.0 - np.conj(a) * z)


def evaluate_product(Z: ZeroSequence, z, N: int | None = None):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("product is evaluated inside the open disk only")
    pts = Z.points(N)
    out = np.ones_like(z)
    for a in pts:
        out = out * factor(complex(a), z)
    return out if out.ndim else complex(out)


def _frostman_terms(ld, th, phi):
    # (1 - |z|^2) / |zeta - z|^2 with zeta = exp(i phi), in log space
    delta = np.exp(ld)
    with np.errstate(divide="ignore"):
        lin = np.log(4.0 * (1.0 - delta)) + 2.0 * np.log(np.abs(np.sin((th - phi) / 2.0)))
    log_d2 = np.logaddexp(2.0 * ld, lin)
    with np.errstate(over="ignore"):
        return np.exp(np.log1p(1.0 - delta) + ld - log_d2)


def frostman_sum(Z: ZeroSequence, zeta, N: int | None = None) -> _series.PartialSumSeries:
    """Partial sums of ``sum (1 - |z_n|^2) / |zeta - z_n|^2`` at a circle point."""
    phi = float(np.angle(zeta)) if isinstance(zeta, complex) else float(zeta)
    return block_series(Z, N, lambda ld, th: _frostman_terms(ld, th, phi))


def frostman_grid(Z: ZeroSequence, angles, N: int | None = None, chunk: int = 1 << 16) -> np.ndarray:
    """Partial Frostman sums over the first ``N`` zeros at each angle."""
    phi = np.asarray(angles, dtype=float)
    n = Z.prefix_length(N)
    acc = np.zeros(len(phi))
    for a in range(1, n + 1, chunk):
        ld, th = Z.chunk(a, min(a + chunk, n + 1))
        acc += _frostman_terms(ld[None, :], th[None, :], phi[:, None]).sum(axis=1)
    return acc


def lambda0(Z: ZeroSequence, N: int | None = None) -> tuple[float, float]:
    """``(1/4) sum (1 - r_n^2)`` over the prefix and a bound on the rest."""
    s = block_series(Z, N, lambda ld, th: np.exp(ld) * (2.0 - np.exp(ld)))
    tail = 0.0
    if not Z.is_finite_prefix(N):
        tail = 0.5 * Z.blaschke_tail(Z.prefix_length(N)) if Z.blaschke_tail else math.nan
    return 0.25 * s.value, tail


def exceptional_level_set(Z: ZeroSequence, lam, M: int, N: int | None = None):
    """Grid estimate of ``|{zeta : Frostman partial sum >= lam}|``.

    Returns ``(measure, CircleSet of flagged grid cells)`` for scalar
    ``lam``; for an array of levels, an array of measures.
    """
    theta = TWO_PI * np.arange(M) / M
    sums = frostman_grid(Z, theta, N)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ValueError("lambda must be positive")
    if lam_arr.ndim:
        return TWO_PI / M * np.array([np.count_nonzero(sums >= l) for l in lam_arr])
    hit = sums >= float(lam_arr)
    return TWO_PI / M * int(hit.sum()), _runs_to_set(hit)


def _runs_to_set(hit: np.ndarray) -> CircleSet:
    # one arc per cyclic run of flagged cells, so neighbors merge exactly
    M = len(hit)
    h = TWO_PI / M
    if hit.all():
        return CircleSet.full()
    if not hit.any():
        return CircleSet([])
    shift = int(np.argmin(hit))  # start scanning at an unflagged cell
    rolled = np.roll(hit, -shift).astype(np.int8)
    d = np.diff(np.concatenate(([0], rolled, [0])))
    first = np.nonzero(d == 1)[0]
    last = np.nonzero(d == -1)[0]
    starts = ((first + shift) % M - 0.5) * h
    return CircleSet.from_arrays(starts, (last - first) * h)


def required_grid(Z: ZeroSequence, N: int | None = None) -> int:
    r, _ = Z.materialize(N)
    need = config.GRID_FACTOR / (1.0 - float(r.max()))
    return 1 << int(math.ceil(math.log2(max(need, 4.0))))


def carleson_rhs(Z: ZeroSequence, f_boundary: BoundaryGrid, N: int | None = None) -> float:
    """``(1/2pi) int sum_n P_n |f|^2`` by the trapezoid rule on the grid.

    ``f_boundary`` holds the values of ``f`` (or of ``|f|``) on the grid.
    """
    M = f_boundary.M
    need = config.GRID_FACTOR / (1.0 - float(Z.materialize(N)[0].max()))
    if M < need:
        raise GridResolutionError(1 << int(math.ceil(math.log2(need))), M)
    poisson = frostman_grid(Z, f_boundary.theta, N)
    return float(np.mean(poisson * np.abs(f_boundary.values) ** 2))


def blaschke_series(Z: ZeroSequence, N: int | None = None) -> PowerSeries:
    """Taylor coefficients of the finite product, truncated where they fall
    below ``SERIES_REL_CUTOFF`` relative to the largest."""
    radii, thetas = Z.materialize(N)
    pts = radii * np.exp(1j * thetas)
    rmax = float(radii.max()) if len(radii) else 0.0
    if rmax == 0.0:
        K = len(pts) + 1
    else:
        K = int(math.ceil(math.log(config.SERIES_REL_CUTOFF) / math.log(rmax))) + 40 * len(pts)
    coeffs = np.zeros(K + 1, dtype=complex)
    coeffs[0] = 1.0
    k = np.arange(1, K + 1)
    for r, th in zip(radii, thetas):
        if r == 0:
            c = np.zeros(K + 1, dtype=complex)
            c[1] = 1.0
        else:
            # b_a = |a| + sum_k (|a|/a) conj(a)^(k-1) (|a|^2 - 1) z^k
            c = np.empty(K + 1, dtype=complex)
            c[0] = r
            with np.errstate(under="ignore"):
                c[1:] = np.exp(-1j * k * th) * r ** (k - 1) * (r * r - 1.0)
        coeffs = np.fft.ifft(np.fft.fft(coeffs, 2 * K + 2) * np.fft.fft(c, 2 * K + 2))[: K + 1] \
            if K > 256 else np.convolve(coeffs, c)[: K + 1]
    top = np.abs(coeffs).max()
    if np.abs(coeffs[-16:]).max() > 1e3 * config.SERIES_REL_CUTOFF * max(top, 1.0) and rmax > 0:
        raise ArithmeticError("product coefficients did not decay within the truncation")
    return PowerSeries(coeffs)


@dataclass(frozen=True)
class CarlesonCheck:
    lhs: float
    rhs: float
    rel_error: float
    M: int

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "rel_error": self.rel_error, "M": self.M}


def carleson_check(Z: ZeroSequence, f: PowerSeries, M: int | None = None) -> CarlesonCheck:
    """Both sides of ``D(Bf) = D(f) + (1/2pi) int sum P_n |f|^2`` for finite ``Z``."""
    if Z.length is None:
        raise ValueError("Carleson check needs a finite zero set")
    Bf = blaschke_series(Z) * f
    lhs = dirichlet_norm(Bf)
    if M is None:
        M = max(required_grid(Z), 1 << int(math.ceil(math.log2(4 * (f.degree + 1)))))
    th = TWO_PI * np.arange(M) / M
    fv = np.polynomial.polynomial.polyval(np.exp(1j * th), f.coeffs)
    rhs = dirichlet_norm(f) + carleson_rhs(Z, BoundaryGrid(fv))
    scale = abs(lhs) if lhs != 0 else 1.0
    return CarlesonCheck(lhs, rhs, abs(lhs - rhs) / scale, M)


def frostman_arc(z: complex) -> Arc:
    """Arc centered at ``z/|z|`` with chordal length ``((1-|z|) log 1/(1-|z|))^(1/2)``."""
    r = abs(z)
    if not (0.0 < r < 1.0):
        raise ValueError("need 0 < |z| < 1")
    d = 1.0 - r
    chord = math.sqrt(d * math.log(1.0 / d))
    if chord > 2.0:
        raise ValueError("chordal length exceeds the diameter")
    w = 2.0 * math.asin(chord / 2.0)
    return Arc(math.fmod(math.atan2(z.imag, z.real) - w / 2.0, TWO_PI) % TWO_PI, w)


@dataclass(frozen=True)
class CoverBound:
    """Capacity tails ``c2 sum_{n >= N_s} 1/|log(1 - r_n)|`` for dyadic ``N_s``."""

    starts: np.ndarray
    tails: np.ndarray
    shapiro: _series.PartialSumSeries
    vacuous: bool
    c2: float

    def to_dict(self) -> dict:
        return {
            "starts": [int(s) for s in self.starts],
            "tails": [float(t) for t in self.tails],
            "shapiro_verdict": self.shapiro.verdict,
            "vacuous": self.vacuous,
            "c2": self.c2,
        }


def shapiro_terms(ld, th):
    if np.any(ld == 0):
        raise ZeroDivisionError("r_n = 0 gives log(1 - r_n) = 0")
    return -1.0 / ld


def exceptional_cover_bound(Z: ZeroSequence, N_start: int, N: int,
                            c2: float = config.C2_COVER) -> CoverBound:
    """Tails of the cover bound from ``N_start`` (doubling) up to ``N``."""
    n = Z.prefix_length(N)
    ss = block_series(Z, n, shapiro_terms)
    total = ss.value
    cuts = ss.cutoffs
    sums = ss.sums
    starts = []
    s = max(1, N_start)
    while s <= n:
        starts.append(s)
        s *= 2
    tails = []
    for s in starts:
        # sum over n >= s = total - S(s - 1)
        if s - 1 == 0:
            before = 0.0
        else:
            ld, th = Z.chunk(1, s)
            before = math.fsum(shapiro_terms(ld, th))
        tails.append(c2 * max(total - before, 0.0))
    if not starts:
        # nothing materialized from N_start on
        starts, tails = [max(1, N_start)], [0.0]
    vacuous = ss.verdict != _series.CONVERGES
    return CoverBound(np.asarray(starts, dtype=np.int64), np.asarray(tails), ss, vacuous, c2)
