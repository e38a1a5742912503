"""Closed subsets of the unit circle as finite unions of arcs.

Angles are radians.  A :class:`CircleSet` stores its arcs as sorted,
pairwise-disjoint closed intervals of ``[0, 2*pi]``; an arc that crosses
angle 0 is stored as two pieces ``[a, 2*pi]`` and ``[0, b]``.  Distances are
Euclidean (chordal) in the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import sici

from . import series as _series

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Arc:
    """Closed arc from ``start`` counterclockwise over ``length`` radians."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 <= self.length <= TWO_PI):
            raise ValueError(f"arc length {self.length} outside [0, 2pi]")
        object.__setattr__(self, "start", float(self.start) % TWO_PI)

    @classmethod
    def from_endpoints(cls, theta_start: float, theta_end: float) -> "Arc":
        s = float(theta_start) % TWO_PI
        return cls(s, (float(theta_end) - s) % TWO_PI)

    @property
    def end(self) -> float:
        return self.start + self.length

    @property
    def arclength(self) -> float:
        return self.length

    @property
    def chord(self) -> float:
        return 2.0 * math.sin(self.length / 2.0)

    @property
    def midpoint(self) -> float:
        return (self.start + self.length / 2.0) % TWO_PI


def _normalize(starts: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    starts = np.asarray(starts, dtype=float).ravel()
    lengths = np.asarray(lengths, dtype=float).ravel()
    if len(starts) == 0:
        return np.empty(0), np.empty(0)
    if np.any(lengths < 0):
        raise ValueError("negative arc length")
    if np.any(lengths >= TWO_PI):
        return np.array([0.0]), np.array([TWO_PI])
    s = np.mod(starts, TWO_PI)
    e = s + lengths
    wrap = e > TWO_PI
    s = np.concatenate((s, np.zeros(np.count_nonzero(wrap))))
    e = np.concatenate((np.where(wrap, TWO_PI, e), e[wrap] - TWO_PI))
    order = np.lexsort((e, s))
    s, e = s[order], e[order]
    run = np.maximum.accumulate(e)
    new = np.ones(len(s), dtype=bool)
    new[1:] = s[1:] > run[:-1]
    idx = np.nonzero(new)[0]
    last = np.concatenate((idx[1:] - 1, [len(s) - 1]))
    return s[idx], run[last]


class CircleSet:
    """Finite union of closed arcs (points allowed) of the unit circle."""

    __slots__ = ("starts", "ends")

    def __init__(self, arcs: Iterable[Arc] = ()):
        arcs = list(arcs)
        s, e = _normalize(np.array([a.start for a in arcs]),
                          np.array([a.length for a in arcs]))
        self._set(s, e)

    def _set(self, starts, ends):
        self.starts = np.asarray(starts, dtype=float)
        self.ends = np.asarray(ends, dtype=float)
        self.starts.setflags(write=False)
        self.ends.setflags(write=False)

    @classmethod
    def _sorted(cls, starts, ends) -> "CircleSet":
        obj = cls.__new__(cls)
        obj._set(starts, ends)
        return obj

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "CircleSet":
        """Build from ``[start, end]`` radian pairs (counterclockwise arcs)."""
        arcs = []
        for p in pairs:
            if len(p) != 2:
                raise ValueError("each arc must be a [start, end] pair")
            a, b = float(p[0]), float(p[1])
            if b - a >= TWO_PI:
                arcs.append(Arc(a, TWO_PI))
            else:
                arcs.append(Arc.from_endpoints(a, b))
        return cls(arcs)

    @classmethod
    def from_arrays(cls, starts, lengths) -> "CircleSet":
        s, e = _normalize(starts, lengths)
        return cls._sorted(s, e)

    @classmethod
    def full(cls) -> "CircleSet":
        return cls._sorted([0.0], [TWO_PI])

    @classmethod
    def points(cls, angles) -> "CircleSet":
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        return cls.from_arrays(angles, np.zeros_like(angles))

    def to_pairs(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.starts, self.ends)]

    @property
    def arcs(self) -> list[Arc]:
        return [Arc(a, b - a) for a, b in zip(self.starts, self.ends)]

    def __len__(self) -> int:
        return len(self.starts)

    def __repr__(self) -> str:
        return f"CircleSet({len(self)} arcs, measure={self.measure:.6g})"

    @property
    def is_empty(self) -> bool:
        return len(self.starts) == 0

    @property
    def is_full(self) -> bool:
        return len(self.starts) == 1 and self.starts[0] == 0.0 and self.ends[0] >= TWO_PI

    @property
    def measure(self) -> float:
        return float(np.sum(self.ends - self.starts))

    def gaps(self) -> np.ndarray:
        """Lengths of the open complementary arcs, in angular order."""
        if self.is_empty:
            return np.array([TWO_PI])
        g = self.starts[1:] - self.ends[:-1]
        wrap = self.starts[0] + TWO_PI - self.ends[-1]
        g = np.concatenate((g, [wrap]))
        return g[g > 0]

    def complementary_intervals(self) -> list[Arc]:
        """Open arcs of the complement, sorted by start angle."""
        if self.is_empty:
            raise ValueError("complement of the empty set is the whole circle")
        out = [Arc(e, s - e) for e, s in zip(self.ends[:-1], self.starts[1:]) if s > e]
        # rounding can push the gap past 2pi when E is a single point
        wrap = min(self.starts[0] + TWO_PI - self.ends[-1], TWO_PI)
        if wrap > 0:
            out.append(Arc(self.ends[-1] % TWO_PI, wrap))
        return sorted(out, key=lambda a: a.start)

    def endpoints(self) -> np.ndarray:
        """Distinct arc endpoints as angles in ``[0, 2pi)``."""
        pts = np.mod(np.concatenate((self.starts, self.ends)), TWO_PI)
        return np.unique(pts)

    def angular_distance(self, theta) -> np.ndarray:
        """Smallest angular distance (in ``[0, pi]``) from ``theta`` to the set."""
        if self.is_empty:
            raise ValueError("distance to the empty set")
        th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        s, e = self.starts, self.ends
        i = np.searchsorted(s, th, side="right") - 1
        ic = np.clip(i, 0, len(s) - 1)
        inside = (i >= 0) & (th <= e[ic])
        back = np.where(i >= 0, th - e[ic], th + TWO_PI - e[-1])
        nxt = i + 1
        fwd = np.where(nxt < len(s), s[np.clip(nxt, 0, len(s) - 1)] - th, s[0] + TWO_PI - th)
        d = np.minimum(back, fwd)
        d = np.minimum(d, TWO_PI - d)
        d = np.clip(d, 0.0, math.pi)
        return np.where(inside, 0.0, d)

    def contains(self, theta, tol: float = 0.0) -> np.ndarray:
        return self.angular_distance(theta) <= tol


def distance(z, E: CircleSet) -> np.ndarray:
    """Euclidean distance from points of the closed disk to ``E``."""
    z = np.asarray(z, dtype=complex)
    rho = np.abs(z)
    delta = E.angular_distance(np.angle(z))
    s = np.sin(delta / 2.0)
    return np.sqrt((1.0 - rho) ** 2 + 4.0 * rho * s * s)


def log_distance(log_depth, theta, E: CircleSet) -> np.ndarray:
    """``log d(z, E)`` for ``z = (1 - exp(log_depth)) * exp(i theta)``.

    Stays finite when ``1 - |z|`` underflows.
    """
    log_depth = np.asarray(log_depth, dtype=float)
    depth = np.exp(log_depth)
    s = np.sin(E.angular_distance(theta) / 2.0)
    with np.errstate(divide="ignore"):
        lin = np.log(4.0 * np.maximum(1.0 - depth, 0.0)) + 2.0 * np.log(s)
    return 0.5 * np.logaddexp(2.0 * log_depth, lin)


def neighborhood(E: CircleSet, t: float) -> CircleSet:
    """``{zeta : d(zeta, E) <= t}`` for chordal distance ``t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if E.is_empty:
        raise ValueError("neighborhood of the empty set")
    if t == 0:
        return E
    if t >= 2.0:
        return CircleSet.full()
    a = 2.0 * math.asin(t / 2.0)
    lengths = (E.ends - E.starts) + 2.0 * a
    return CircleSet.from_arrays(E.starts - a, np.minimum(lengths, TWO_PI))


def neighborhood_measure(E: CircleSet, s) -> np.ndarray:
    """``|E_s|`` without building the set: each gap fills at rate ``2a(s)``."""
    s = np.asarray(s, dtype=float)
    a = 2.0 * np.arcsin(np.clip(s, 0.0, 2.0) / 2.0)
    g = E.gaps() if not E.is_full else np.empty(0)
    out = np.full(s.shape, E.measure)
    for gi in g:
        out = out + np.minimum(gi, 2.0 * a)
    return np.minimum(out, TWO_PI)


# --------------------------------------------------------------------------
# generalized Cantor sets


@dataclass(frozen=True)
class CantorSpec:
    """Level lengths ``l_n`` (``l_0 = 2pi``) of a generalized Cantor set.

    ``log_ell(n)`` and ``log_lambda(n)`` are vectorized in ``n`` and work in
    log space so that long generator families do not underflow.
    ``depth`` bounds :func:`cantor_level`; series criteria may run past it
    for generator families.
    """

    depth: int
    kind: str
    params: dict
    log_ell_fn: Callable[[np.ndarray], np.ndarray]
    log_lambda_fn: Callable[[np.ndarray], np.ndarray] | None = None
    max_index: int | None = None

    def log_ell(self, n) -> np.ndarray:
        n = np.asarray(n)
        self._check_index(n)
        return np.where(n == 0, math.log(TWO_PI), self.log_ell_fn(np.maximum(n, 1)))

    def log_lambda(self, n) -> np.ndarray:
        n = np.asarray(n)
        if np.any(n < 1):
            raise ValueError("gap lengths start at n = 1")
        self._check_index(n)
        if self.log_lambda_fn is not None:
            return self.log_lambda_fn(n)
        lo, hi = self.log_ell(n), self.log_ell(n - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return hi + np.log1p(-2.0 * np.exp(lo - hi))

    def _check_index(self, n):
        if self.max_index is not None and np.any(n > self.max_index):
            raise IndexError(f"level beyond the {self.max_index} supplied lengths")

    @property
    def ell(self) -> np.ndarray:
        return np.exp(self.log_ell(np.arange(self.depth + 1)))

    @property
    def lam(self) -> np.ndarray:
        return np.exp(self.log_lambda(np.arange(1, self.depth + 1)))

    def capacity_terms(self, n) -> np.ndarray:
        """``2^-n log(1/l_n)``."""
        n = np.asarray(n, dtype=float)
        if self.kind == "remark":
            s, n0 = self.params["s"], self.params["shift"]
            h0 = 2.0 ** n0 / n0 ** s
            return 2.0 ** n0 / (n + n0) ** s - 2.0 ** (-n) * (h0 + math.log(TWO_PI))
        return -self.log_ell(n.astype(np.int64)) * np.exp2(-n)

    def validate(self, upto: int | None = None) -> None:
        """Raise ``ValueError`` unless ``l`` decreases and every gap is positive."""
        upto = self.depth if upto is None else upto
        if upto < 1:
            raise ValueError("depth must be at least 1")
        n = np.arange(1, upto + 1)
        le = self.log_ell(n)
        prev = self.log_ell(n - 1)
        if np.any(~np.isfinite(le[: min(upto, 60)])):
            raise ValueError("non-finite level length")
        with np.errstate(invalid="ignore"):
            bad = np.nonzero(~(le - prev < -math.log(2.0)) & np.isfinite(le))[0]
        if len(bad):
            k = int(n[bad[0]])
            raise ValueError(f"2 l_{k} + lambda_{k} = l_{k-1} needs lambda_{k} > 0 (l_{k} >= l_{k-1}/2)")

    def to_dict(self) -> dict:
        if self.kind == "ratio":
            return {"ratio": self.params["ratio"], "depth": self.depth}
        if self.kind == "remark":
            return {"family": "remark", "s": self.params["s"], "depth": self.depth}
        return {"ell": [float(x) for x in self.ell[1:]], "depth": self.depth}


def perfect_symmetric(ratio: float, depth: int) -> CantorSpec:
    """Constant-ratio Cantor set: ``l_n = 2pi ratio^n``."""
    if not (0.0 < ratio < 0.5):
        raise ValueError("ratio must lie in (0, 1/2)")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    lr, l2p, lg = math.log(ratio), math.log(TWO_PI), math.log1p(-2.0 * ratio)
    spec = CantorSpec(
        depth, "ratio", {"ratio": ratio},
        lambda n: l2p + n * lr,
        lambda n: l2p + (n - 1) * lr + lg,
    )
    return spec


def cantor_from_ell(ell: Sequence[float], depth: int | None = None) -> CantorSpec:
    """Explicit lengths ``l_1..l_K`` (a leading ``2pi`` is accepted and dropped)."""
    ell = np.asarray(ell, dtype=float)
    if len(ell) and abs(ell[0] - TWO_PI) < 1e-12:
        ell = ell[1:]
    if len(ell) == 0:
        raise ValueError("need at least one level length")
    if np.any(ell <= 0):
        raise ValueError("level lengths must be positive")
    depth = len(ell) if depth is None else int(depth)
    if depth > len(ell):
        raise ValueError("depth exceeds the number of supplied lengths")
    logs = np.log(ell)
    spec = CantorSpec(depth, "explicit", {}, lambda n: logs[np.asarray(n) - 1],
                      max_index=len(ell))
    spec.validate(depth)
    return spec


def cantor_from_log_ell(log_ell: Callable, depth: int, log_lambda: Callable | None = None,
                        name: str = "custom", params: dict | None = None) -> CantorSpec:
    """Generator family given by a vectorized ``n -> log l_n`` (``n >= 1``)."""
    return CantorSpec(depth, name, params or {}, log_ell, log_lambda)


def remark_cantor(s: float = 1.0, depth: int = 8) -> CantorSpec:
    """``l_n = 2pi exp(-(h(n + n0) - h(n0)))`` with ``h(m) = 2^m / m^s``.

    The shift ``n0`` is the smallest one giving ``l_n < l_{n-1}/2`` for all
    ``n``; the tail behaves like ``exp(-2^n / n^s)``.
    """
    if not (0.0 < s <= 1.0):
        raise ValueError("s must lie in (0, 1]")

    def h(m):
        return np.exp2(np.asarray(m, dtype=float)) / np.asarray(m, dtype=float) ** s

    m = np.arange(2, 80)
    ok = np.diff(h(np.arange(1, 80))) > math.log(2.0)
    # differences increase eventually; find the last failure
    fails = m[~ok]
    n0 = int(fails[-1]) if len(fails) else 1
    h0 = float(h(n0))
    l2p = math.log(TWO_PI)

    def log_ell(n):
        with np.errstate(over="ignore"):
            return l2p - (h(np.asarray(n) + n0) - h0)

    return CantorSpec(depth, "remark", {"s": s, "shift": n0}, log_ell)


def cantor_spec_from_json(obj: dict) -> CantorSpec:
    if not isinstance(obj, dict):
        raise ValueError("Cantor spec must be a JSON object")
    if "ratio" in obj:
        return perfect_symmetric(float(obj["ratio"]), int(obj.get("depth", 8)))
    if "ell" in obj:
        return cantor_from_ell(obj["ell"], obj.get("depth"))
    if obj.get("family") == "remark":
        return remark_cantor(float(obj.get("s", 1.0)), int(obj.get("depth", 8)))
    raise ValueError("Cantor spec needs 'ratio', 'ell' or family 'remark'")


def cantor_level(spec: CantorSpec, k: int) -> CircleSet:
    """Level ``E_k``: ``2^k`` closed arcs of length ``l_k``, nested in ``E_{k-1}``."""
    if k < 0 or k > spec.depth:
        raise IndexError(f"level {k} outside 0..{spec.depth}")
    ell = spec.ell
    if k and not np.all(ell[1:k + 1] > 0):
        raise ValueError("level lengths underflow at this depth")
    starts = np.array([0.0])
    ends = np.array([TWO_PI])
    for j in range(1, k + 1):
        s2 = np.empty(2 * len(starts))
        e2 = np.empty(2 * len(starts))
        s2[0::2] = starts
        e2[0::2] = starts + ell[j]
        s2[1::2] = ends - ell[j]
        e2[1::2] = ends
        starts, ends = s2, e2
    return CircleSet._sorted(starts, ends)


def cantor_left_endpoints(spec: CantorSpec, k: int, index) -> np.ndarray:
    """Left endpoints of level-``k`` arcs with the given indices (0-based)."""
    index = np.asarray(index, dtype=np.int64)
    ell = np.exp(spec.log_ell(np.arange(k + 1)))
    out = np.zeros(index.shape)
    for j in range(1, k + 1):
        bit = (index >> (k - j)) & 1
        out = out + bit * (ell[j - 1] - ell[j])
    return out


# --------------------------------------------------------------------------
# series criteria and the integral of 1/|E_s|


def carleson_criterion(E, N: int | None = None) -> _series.PartialSumSeries:
    """Partial sums of ``sum |I| log(1/|I|)`` over complementary arcs.

    For a :class:`CantorSpec` the terms are ``2^n lambda_n log(1/lambda_n)``.
    Arcs are ordered by decreasing length.
    """
    if isinstance(E, CantorSpec):
        N = E.depth if N is None else N
        n = np.arange(1, N + 1)
        ll = E.log_lambda(n)
        with np.errstate(over="ignore", invalid="ignore"):
            terms = np.where(np.isfinite(ll), np.exp(n * math.log(2.0) + ll) * (-ll), 0.0)
        return _series.from_terms(terms)
    g = np.sort(E.gaps())[::-1]
    if N is not None:
        g = g[:N]
    terms = g * np.log(1.0 / g)
    return _series.from_terms(terms, finite=True)


def _piece_table(E: CircleSet):
    """Pieces of ``[0, pi]`` in ``a = 2 arcsin(s/2)`` on which
    ``|E_s| = alpha + beta * a``."""
    if E.is_empty:
        raise ValueError("empty set")
    m = E.measure
    g = E.gaps() if not E.is_full else np.empty(0)
    ug, cnt = np.unique(g, return_counts=True)
    kinks = np.minimum(ug / 2.0, math.pi)
    bounds = np.unique(np.concatenate(([0.0], kinks[kinks < math.pi], [math.pi])))
    lo, hi = bounds[:-1], bounds[1:]
    # gaps with kink <= lo are filled on the piece
    filled_len = np.concatenate(([0.0], np.cumsum(ug * cnt)))
    filled_cnt = np.concatenate(([0], np.cumsum(cnt)))
    nf = np.searchsorted(kinks, lo, side="right")
    alpha = m + filled_len[nf]
    beta = 2.0 * (filled_cnt[-1] - filled_cnt[nf])
    return lo, hi, alpha, beta


def _antiderivative(x, alpha, beta):
    x = np.asarray(x, dtype=float)
    out = np.empty(np.broadcast(x, alpha, beta).shape)
    x, alpha, beta = np.broadcast_arrays(x, alpha, beta)
    flat = beta == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[flat] = 2.0 / alpha[flat] * np.sin(x[flat] / 2.0)
        b = beta[~flat]
        a0 = alpha[~flat]
        k = 1.0 / (2.0 * b)
        phi = a0 / (2.0 * b)
        si, ci = sici(k * (a0 + b * x[~flat]))
        out[~flat] = (np.cos(phi) * ci + np.sin(phi) * si) / b
    return out


def inverse_measure_integral(E: CircleSet, t, t_max: float = 2.0):
    """``int_t^{t_max} ds / |E_s|`` for chordal ``s`` (vectorized in ``t``).

    In ``a = 2 arcsin(s/2)`` the integrand is ``cos(a/2) / |E_s|`` and
    ``|E_s|`` is linear in ``a`` between the points where complementary
    gaps close, so each piece integrates exactly via sine/cosine integrals.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("lower limit must be positive")
    if not (0 < t_max <= 2.0) or np.any(t > t_max):
        raise ValueError("need 0 < t <= t_max <= 2")
    lo, hi, alpha, beta = _piece_table(E)
    piece_val = _antiderivative(hi, alpha, beta) - _antiderivative(lo, alpha, beta)
    # cumulative integral from a to pi: full pieces above the piece holding a
    above = np.concatenate((np.cumsum(piece_val[::-1])[::-1][1:], [0.0]))

    def from_top(a):
        i = np.clip(np.searchsorted(hi, a, side="left"), 0, len(hi) - 1)
        part = _antiderivative(hi[i], alpha[i], beta[i]) - _antiderivative(a, alpha[i], beta[i])
        return above[i] + part

    a_t = 2.0 * np.arcsin(t / 2.0)
    a_m = 2.0 * math.asin(t_max / 2.0)
    val = from_top(a_t) - from_top(np.array([a_m]))[0]
    val = np.maximum(val, 0.0)
    return float(val[0]) if scalar else val


def cantor_criteria(spec: CantorSpec, N: int | None = None) -> dict:
    """Measure-zero, capacity-zero and Carleson series for a Cantor spec."""
    N = spec.depth if N is None else N
    try:
        spec.validate(min(N, spec.depth) if spec.max_index else min(N, 200))
    except (ValueError, IndexError) as exc:
        return {"valid": False, "error": str(exc)}
    n = np.arange(1, N + 1)
    ll = spec.log_lambda(n)
    with np.errstate(over="ignore"):
        meas_terms = np.where(np.isfinite(ll), np.exp((n - 1) * math.log(2.0) + ll), 0.0)
    meas = _series.from_terms(meas_terms)
    cap_terms = spec.capacity_terms(n)
    cap = _series.from_terms(cap_terms)
    carl = carleson_criterion(spec, N)
    limit = meas.value
    return {
        "valid": True,
        "measure_series": meas,
        "measure_limit": limit,
        "measure_zero": bool(meas.verdict == _series.CONVERGES and abs(limit - TWO_PI) <= 1e-9 * TWO_PI),
        "capacity_series": cap,
        "capacity_zero": cap.verdict == _series.DIVERGES,
        "capacity_positive": cap.verdict == _series.CONVERGES,
        "carleson_series": carl,
        "carleson": carl.verdict == _series.CONVERGES,
    }
