"""Truncated power series on the disk: Dirichlet integrals, outer functions,
the saturating composition and the distribution-function identity.

Area integrals use the normalized measure ``dA = dx dy / pi``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import config
from . import series as _series
from .circle_sets import CircleSet, TWO_PI, distance

SAT_CONST = 4.0 / math.e ** 2  # sup_{x >= 0} x^2 e^{-x}, attained at x = 2


@dataclass(frozen=True)
class PowerSeries:
    """Taylor coefficients ``a_0 .. a_N`` of a function on the disk."""

    coeffs: np.ndarray
    declared_radius_hint: float | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("need a nonempty 1-D coefficient array")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self) -> "PowerSeries":
        if self.degree == 0:
            return PowerSeries([0.0])
        n = np.arange(1, len(self.coeffs))
        return PowerSeries(n * self.coeffs[1:])

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        return PowerSeries(np.convolve(self.coeffs, other.coeffs))

    def to_json(self) -> list[list[float]]:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @classmethod
    def from_json(cls, obj) -> "PowerSeries":
        arr = np.asarray(obj, dtype=float)
        if arr.ndim == 1:
            return cls(arr)
        return cls(arr[:, 0] + 1j * arr[:, 1])


@dataclass(frozen=True)
class BoundaryGrid:
    """Samples at ``exp(2 pi i j / M)``, ``M`` a power of two."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        M = len(v)
        if M < 4 or M & (M - 1):
            raise ValueError("grid size must be a power of two >= 4")
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> int:
        return len(self.values)

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.M) / self.M

    @classmethod
    def from_function(cls, fn, M: int) -> "BoundaryGrid":
        th = TWO_PI * np.arange(M) / M
        return cls(np.asarray(fn(th)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "value"])
        for t, v in zip(self.theta, self.values):
            w.writerow([f"{t:.17g}", f"{float(np.real(v)):.17g}"])
        return buf.getvalue()


def dirichlet_norm(f: PowerSeries) -> float:
    """``sum n |a_n|^2``."""
    n = np.arange(len(f.coeffs))
    return float(np.sum(n * np.abs(f.coeffs) ** 2))


def dirichlet_partial_sums(f: PowerSeries, cutoffs=None) -> _series.PartialSumSeries:
    n = np.arange(len(f.coeffs))
    terms = n * np.abs(f.coeffs) ** 2
    return _series.from_terms(terms[1:], cutoffs=cutoffs)


def evaluate(f: PowerSeries, z, r_max: float = 1.0):
    """Horner evaluation of the truncated series; ``|z| <= r_max <= 1``."""
    z = np.asarray(z, dtype=complex)
    if r_max > 1.0:
        raise ValueError("r_max must not exceed 1")
    if np.any(np.abs(z) > r_max * (1.0 + 1e-15)):
        raise ValueError("evaluation point outside the closed disk")
    out = np.zeros_like(z)
    for c in f.coeffs[::-1]:
        out = out * z + c
    return out if out.ndim else complex(out)


def evaluate_circle(f: PowerSeries, r: float, M: int) -> np.ndarray:
    """Values at ``r exp(2 pi i j / M)`` by FFT, folding coefficients mod ``M``."""
    if not (0.0 <= r <= 1.0):
        raise ValueError("need 0 <= r <= 1")
    n = np.arange(len(f.coeffs))
    with np.errstate(under="ignore"):
        scaled = f.coeffs * np.power(r, n) if r > 0 else np.where(n == 0, f.coeffs, 0)
    folded = np.zeros(M, dtype=complex)
    np.add.at(folded, n % M, scaled)
    return np.fft.ifft(folded) * M


def dirichlet_area(f: PowerSeries, radial_nodes: int | None = None,
                   angular_nodes: int | None = None, r_max: float = 1.0) -> float:
    """``int_{|z| < r_max} |f'|^2 dA`` by tensor quadrature.

    Gauss-Legendre in ``r`` (weight ``r`` included) and the trapezoid rule in
    angle.  The defaults make the rule exact for the truncated polynomial:
    ``|f'|^2`` is a trigonometric polynomial of degree ``2(N-1)`` in angle and
    ``r |f'|^2`` averaged in angle is a polynomial of degree ``2N - 1`` in ``r``.
    """
    N = max(f.degree, 1)
    if radial_nodes is None:
        radial_nodes = max(4, N + 1)
    if angular_nodes is None:
        angular_nodes = max(4, 1 << int(math.ceil(math.log2(2 * N + 1))))
    if radial_nodes < 4 or angular_nodes < 4:
        raise ValueError("quadrature sizes must be at least 4")
    df = f.derivative()
    x, w = np.polynomial.legendre.leggauss(radial_nodes)
    r = 0.5 * r_max * (x + 1.0)
    w = 0.5 * r_max * w
    total = 0.0
    for ri, wi in zip(r, w):
        vals = evaluate_circle(df, float(ri), angular_nodes)
        # (1/pi) int_0^{2pi} |f'|^2 d theta = 2 * mean
        total += wi * ri * 2.0 * float(np.mean(np.abs(vals) ** 2))
    return total


def exp_series(g: PowerSeries, N: int | None = None) -> PowerSeries:
    """``exp(g)`` truncated at degree ``N`` from ``n f_n = sum_k k g_k f_{n-k}``."""
    if N is None:
        N = g.degree
    gc = np.zeros(N + 1, dtype=complex)
    m = min(N, g.degree)
    gc[: m + 1] = g.coeffs[: m + 1]
    kg = np.arange(N + 1) * gc
    out = np.zeros(N + 1, dtype=complex)
    out[0] = np.exp(gc[0])
    for n in range(1, N + 1):
        # sum_{k=1}^n k g_k f_{n-k}
        out[n] = np.dot(kg[1:n + 1], out[n - 1::-1][:n]) / n
        if not np.isfinite(out[n]):
            raise OverflowError(f"series exponentiation overflowed at degree {n}")
    return PowerSeries(out)


def outer_function(log_modulus: BoundaryGrid, N: int) -> PowerSeries:
    """Outer function whose boundary modulus approximates ``exp(log_modulus)``.

    ``g = c_0 + 2 sum_{n=1}^N c_n z^n`` with ``c_n`` the discrete Fourier
    coefficients of the samples, then ``f = exp(g)``.
    """
    v = np.asarray(log_modulus.values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("log-modulus samples must be finite")
    M = log_modulus.M
    if N < 0 or N >= M // 2:
        raise ValueError("need 0 <= N < M/2 to avoid aliasing")
    c = np.fft.fft(v) / M
    g = np.empty(N + 1, dtype=complex)
    g[0] = c[0].real
    g[1:] = 2.0 * c[1:N + 1]
    return exp_series(PowerSeries(g), N)


def log_sigma_grid(E: CircleSet, log_sigma, M: int) -> tuple[BoundaryGrid, dict]:
    """Samples of ``log sigma(d(zeta, E))`` with distances clipped below at ``2 pi / M``."""
    th = TWO_PI * np.arange(M) / M
    d = distance(np.exp(1j * th), E)
    eps = TWO_PI / M
    clipped = d < eps
    vals = np.asarray(log_sigma(np.maximum(d, eps)), dtype=float)
    return BoundaryGrid(vals), {"clip_distance": eps, "clipped_points": int(clipped.sum())}


@dataclass(frozen=True)
class SaturationReport:
    f: PowerSeries
    dirichlet_f: float
    dirichlet_phi: float
    bound: float
    holds: bool
    max_abs_im_phi: float
    hypothesis_ok: bool
    r: float

    def to_dict(self) -> dict:
        return {
            "dirichlet_f": self.dirichlet_f,
            "dirichlet_phi": self.dirichlet_phi,
            "bound": self.bound,
            "holds": self.holds,
            "max_abs_im_phi": self.max_abs_im_phi,
            "hypothesis_ok": self.hypothesis_ok,
            "r": self.r,
        }


def saturating_composition(phi: PowerSeries, N: int, r: float = 0.999,
                           slack: float = 1e-8, grid: int = 256) -> SaturationReport:
    """``exp(-(sqrt2/2) exp(phi))`` and the check ``D(f) <= (4/e^2) D(phi)``.

    Both Dirichlet integrals are area integrals over ``|z| < r``.  The
    hypothesis ``|Im phi| <= pi/4`` is scanned on a polar grid and reported.
    """
    f = exp_series(PowerSeries(-math.sqrt(0.5) * exp_series(phi, N).coeffs), N)
    Df = dirichlet_area(f, r_max=r)
    Dphi = dirichlet_area(phi, r_max=r)
    radii = np.linspace(0.0, r, 33)
    im_max = max(float(np.max(np.abs(evaluate_circle(phi, float(rr), grid).imag))) for rr in radii)
    bound = SAT_CONST * Dphi
    return SaturationReport(f, Df, Dphi, bound, Df <= bound + slack, im_max,
                            im_max <= math.pi / 4, r)


def distribution_function(values: BoundaryGrid, lam: float) -> float:
    """``(2 pi / M) #{j : |v_j| > lam}``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    a = np.abs(values.values)
    return TWO_PI * int(np.count_nonzero(a > lam)) / values.M


def log_integral_identity_check(values: BoundaryGrid, lambda_max: float | None = None):
    """Both sides of ``int log|f| = int_1^inf m_f(lam) / lam d lam`` on a grid.

    The left side is the trapezoid rule.  The right side integrates the
    grid distribution function, a step function in ``lam`` that jumps at the
    sorted sample moduli, exactly over each step.  Returns ``(lhs, rhs, gap)``.
    """
    a = np.abs(np.asarray(values.values))
    if np.any(a < 1.0):
        raise ValueError("identity needs |f| >= 1 on the grid")
    M = values.M
    top = float(a.max())
    if lambda_max is None:
        lambda_max = top
    if lambda_max < top:
        raise ValueError("lambda_max must be at least max |f|")
    lhs = TWO_PI / M * math.fsum(np.log(a))
    u = np.unique(a)
    edges = np.concatenate(([1.0], u[u > 1.0]))
    # m on (edges[i], edges[i+1]) counts samples above edges[i]
    counts = M - np.searchsorted(np.sort(a), edges[:-1], side="right")
    pieces = TWO_PI / M * counts * np.log(edges[1:] / edges[:-1])
    rhs = math.fsum(pieces)
    return lhs, rhs, abs(lhs - rhs)
