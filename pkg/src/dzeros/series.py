"""Partial sums at dyadic cutoffs and desk-scale convergence verdicts."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import config

CONVERGES = "converges"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PartialSumSeries:
    """Sums of a nonnegative series recorded at increasing cutoffs.

    ``cutoffs[j]`` is the number of terms included in ``sums[j]``.
    ``diagnostics`` holds the fitted quantities behind ``verdict``.
    """

    cutoffs: np.ndarray
    sums: np.ndarray
    verdict: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(self.sums[-1]) if len(self.sums) else 0.0

    def to_dict(self) -> dict:
        return {
            "cutoffs": [int(c) for c in self.cutoffs],
            "sums": [float(s) for s in self.sums],
            "verdict": self.verdict,
            "diagnostics": self.diagnostics,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cutoff", "sum"])
        for c, s in zip(self.cutoffs, self.sums):
            w.writerow([int(c), f"{float(s):.17g}"])
        return buf.getvalue()


def dyadic_cutoffs(n: int) -> np.ndarray:
    """1, 2, 4, ..., with ``n`` appended when it is not a power of two."""
    if n < 1:
        raise ValueError("need at least one term")
    cuts = [1 << j for j in range(n.bit_length()) if (1 << j) <= n]
    if cuts[-1] != n:
        cuts.append(n)
    return np.asarray(cuts, dtype=np.int64)


def block_sums(terms: np.ndarray, cutoffs: np.ndarray) -> np.ndarray:
    """Sums of ``terms`` between consecutive cutoffs.

    Each block is reduced with numpy's pairwise summation and blocks are
    accumulated with ``math.fsum``, so results do not depend on chunking.
    """
    terms = np.asarray(terms, dtype=float)
    edges = np.concatenate(([0], cutoffs))
    return np.array([np.sum(terms[a:b]) for a, b in zip(edges[:-1], edges[1:])])


def cumulative(blocks: np.ndarray) -> np.ndarray:
    out = np.empty(len(blocks))
    acc: list[float] = []
    for j, b in enumerate(blocks):
        acc.append(float(b))
        out[j] = math.fsum(acc)
    return out


def verdict(cutoffs, sums, start: int = 0, finite: bool = False) -> tuple[str, dict]:
    """Classify the growth of partial sums observed at dyadic cutoffs.

    Increments ``d_j = S(N_j) - S(N_{j-1})`` over the last few doublings are
    fitted as ``d_j ~ C * j**beta`` with ``j = log2 N_j``.  The series is
    called convergent when the last increment is negligible, or when
    ``beta < -1`` and the power-law tail extrapolated from the last
    increment is below ``TAIL_TOL``.  It is called divergent when the last
    doubling adds at least ``EPS_DIV`` and ``beta >= DIV_EXPONENT``
    (increments decaying no faster than ``1/j``, i.e. the sum grows at least
    like ``log log N``).  Everything else is inconclusive.

    Increments before index ``start`` are ignored; this lets callers keep
    early negative terms (e.g. ``log 1/l`` with ``l > 1``) in the sums.
    """
    cutoffs = np.asarray(cutoffs, dtype=float)
    sums = np.asarray(sums, dtype=float)
    diag: dict = {}
    if finite:
        return CONVERGES, {"reason": "finite sequence fully summed"}
    inc = np.diff(sums)
    inc_cut = cutoffs[1:]
    inc = inc[start:]
    inc_cut = inc_cut[start:]
    scale = max(1.0, abs(float(sums[-1]))) if len(sums) else 1.0
    if np.any(inc < -1e-12 * scale):
        raise ValueError("negative term in a series that must be nonnegative")
    inc = np.maximum(inc, 0.0)
    if len(inc) == 0:
        return INCONCLUSIVE, {"reason": "no increments"}
    last = float(inc[-1])
    diag["last_increment"] = last
    if last <= config.EPS_CONV * scale:
        diag["reason"] = "last doubling below EPS_CONV"
        return CONVERGES, diag
    m = min(config.VERDICT_WINDOW, len(inc))
    if m < 3:
        diag["reason"] = "too few doublings"
        return INCONCLUSIVE, diag
    d = inc[-m:]
    j = np.log2(inc_cut[-m:])
    if np.any(d <= 0) or np.any(j <= 0):
        diag["reason"] = "zero increments inside window"
        return INCONCLUSIVE, diag
    beta = float(np.polyfit(np.log(j), np.log(d), 1)[0])
    diag["growth_exponent"] = beta
    if last >= config.EPS_DIV and beta >= config.DIV_EXPONENT:
        diag["reason"] = "increments not decaying faster than 1/j"
        return DIVERGES, diag
    if beta < -1.0:
        jl = float(j[-1])
        tail = last * jl / (-beta - 1.0)
        diag["tail_estimate"] = tail
        if tail <= config.TAIL_TOL * scale:
            diag["reason"] = "extrapolated tail below TAIL_TOL"
            return CONVERGES, diag
    diag["reason"] = "no decisive trend"
    return INCONCLUSIVE, diag


def from_terms(terms, n: int | None = None, finite: bool = False,
               cutoffs=None) -> PartialSumSeries:
    """Partial sums of ``terms[:n]`` at dyadic cutoffs with a verdict.

    Negative leading terms are allowed; the verdict only looks at the tail
    after the last negative term.
    """
    terms = np.asarray(terms, dtype=float)
    if n is None:
        n = len(terms)
    terms = terms[:n]
    if np.any(np.isnan(terms)):
        raise ValueError("NaN term")
    cuts = dyadic_cutoffs(n) if cutoffs is None else np.asarray(cutoffs, dtype=np.int64)
    sums = cumulative(block_sums(terms, cuts))
    neg = np.nonzero(terms < 0)[0]
    start = 0
    if len(neg):
        start = int(np.searchsorted(cuts, neg[-1] + 1))
    v, diag = verdict(cuts, sums, start=start, finite=finite)
    return PartialSumSeries(cuts, sums, v, diag)


def from_blocks(cutoffs, blocks, finite: bool = False) -> PartialSumSeries:
    """Partial sums from precomputed block sums (e.g. one block per level)."""
    cuts = np.asarray(cutoffs, dtype=np.int64)
    sums = cumulative(np.asarray(blocks, dtype=float))
    v, diag = verdict(cuts, sums, finite=finite)
    return PartialSumSeries(cuts, sums, v, diag)
