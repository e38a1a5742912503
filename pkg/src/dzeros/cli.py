"""Command-line front end: ``dzeros <command> --config <path> [--out dir] [--seed n]``.

Exit codes: 0 success, 2 input error, 3 numeric or convergence failure.
JSON reports are deterministic for a fixed config and seed; every float
is written with 17 significant digits and non-finite values as strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import blaschke as bl
from . import capacity as cp
from . import series as _series
from . import zerosets as zs
from .circle_sets import (CircleSet, TWO_PI, cantor_criteria, cantor_level,
                          cantor_spec_from_json, perfect_symmetric)
from .dirichlet import PowerSeries

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
MAX_GRID = 1 << 24
MAX_TERMS = 1 << 26


class InputError(Exception):
    pass


class NumericFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    out: Path
    seed: int = 0
    base: Path = field(default_factory=Path.cwd)


# --------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _plain(obj):
    """Convert reports to JSON-ready builtins."""
    if isinstance(obj, _series.PartialSumSeries):
        return _plain(obj.to_dict())
    if hasattr(obj, "to_dict") and not isinstance(obj, dict):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys and ``%.17g`` floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = _fmt(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    return json.dumps(obj)


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(_plain(obj)) + "\n")


def series_table(named: dict) -> str:
    """Long-format CSV of several partial-sum series."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "cutoff", "sum", "verdict"])
    for name in sorted(named):
        s = named[name]
        for c, v in zip(s.cutoffs, s.sums):
            w.writerow([name, int(c), _fmt(float(v)), s.verdict])
    return buf.getvalue()


# --------------------------------------------------------------------------
# config parsing


def _load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _resolve(obj, base: Path):
    """Inline object, or a string path relative to the config file."""
    if isinstance(obj, str):
        return _load_json(base / obj)
    return obj


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise InputError(f"config needs '{key}'")
    return cfg[key]


def _positive(x, name: str) -> float:
    x = float(x)
    if not x > 0:
        raise InputError(f"{name} must be positive")
    return x


def _count(x, name: str, lo: int = 1, hi: int = MAX_TERMS) -> int:
    if isinstance(x, bool) or int(x) != x:
        raise InputError(f"{name} must be an integer")
    x = int(x)
    if not lo <= x <= hi:
        raise InputError(f"{name} must lie in [{lo}, {hi}]")
    return x


def _grid(obj, name: str) -> np.ndarray:
    if isinstance(obj, dict):
        if "logspace" in obj:
            a, b, n = obj["logspace"]
            return np.logspace(math.log10(_positive(a, name)), math.log10(_positive(b, name)), int(n))
        if "linspace" in obj:
            a, b, n = obj["linspace"]
            return np.linspace(float(a), float(b), int(n))
        raise InputError(f"{name} needs a list, 'logspace' or 'linspace'")
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise InputError(f"{name} must be a nonempty list")
    return arr


def parse_set(obj) -> CircleSet:
    if not isinstance(obj, dict):
        raise InputError("set must be a JSON object")
    if obj.get("full"):
        return CircleSet.full()
    if "arcs" in obj:
        E = CircleSet.from_pairs(obj["arcs"])
    elif "points" in obj:
        E = CircleSet.points(obj["points"]) if len(obj["points"]) else CircleSet([])
    elif "cantor" in obj:
        spec = cantor_spec_from_json(obj["cantor"])
        E = cantor_level(spec, int(obj.get("level", min(spec.depth, 10))))
    else:
        raise InputError("set needs 'arcs', 'points', 'cantor' or 'full'")
    if len(E.starts) == 0:
        raise InputError("set is empty")
    return E


def parse_points(obj) -> bl.ZeroSequence:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) == 0:
        raise InputError("zeros must be a nonempty list of [re, im] pairs")
    z = arr[:, 0] + 1j * arr[:, 1]
    if np.any(np.abs(z) >= 1):
        raise InputError("zeros must lie in the open disk")
    return bl.ZeroSequence.from_points(z)


def parse_omega(obj) -> zs.ModulusOmega:
    obj = obj or {"family": "power", "p": 2.0}
    fam = obj.get("family")
    if fam == "power":
        return zs.ModulusOmega.power(float(obj.get("p", 2.0)))
    if fam == "exp_inv":
        return zs.ModulusOmega.exp_inv(float(obj.get("gamma", 0.5)))
    if fam == "log_square":
        return zs.ModulusOmega.log_square()
    if fam == "zero":
        return zs.ModulusOmega.zero()
    raise InputError(f"unknown omega family {fam!r}")


# --------------------------------------------------------------------------
# sequences


def _generic_suite(Z: bl.ZeroSequence, N: int, E: CircleSet | None, p: dict) -> tuple[dict, dict]:
    named = {
        "blaschke": bl.blaschke_sum(Z, N),
        "shapiro_shields": zs.shapiro_shields(Z, N),
        "log_square": zs.log_square_sum(Z, N),
    }
    report = {
        "blaschke": zs.condition_report("blaschke", "sum (1 - r_n)", named["blaschke"]),
        "shapiro_shields": zs.condition_report("shapiro_shields", "sum 1/|log(1-r_n)|",
                                               named["shapiro_shields"]),
        "log_square": zs.condition_report("log_square", "sum 1/log^2(1-r_n)", named["log_square"]),
    }
    if E is not None:
        omega = parse_omega(p.get("omega"))
        named["theorem1"] = zs.theorem1_sum(Z, E, omega, N)
        named["lemma"] = zs.lemma_sum(Z, E, omega, N)
        report["theorem1"] = zs.condition_report(
            "theorem1", "sum omega(2 d(z_n,E))", named["theorem1"], omega=omega.to_dict())
        report["lemma"] = zs.condition_report(
            "lemma", "sum omega(2 d_n) + (1-r_n) int_{2 d_n}^2 omega/t^2", named["lemma"],
            omega=omega.to_dict())
        if "alpha" in p:
            a = float(p["alpha"])
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                named["corollary1"] = zs.corollary1_sum(Z, E, a, N)
            report["corollary1"] = zs.condition_report(
                "corollary1", "sum d(exp(i theta_n),E)^(2 alpha)", named["corollary1"], alpha=a)
    return report, named


def _series_of(report: dict) -> dict:
    """Rebuild ``PartialSumSeries`` from condition reports for the CSV table."""
    out = {}
    for k, v in report.items():
        if isinstance(v, dict) and "cutoffs" in v and "sums" in v:
            out[k] = _series.PartialSumSeries(np.asarray(v["cutoffs"]), np.asarray(v["sums"]),
                                              v["verdict"], v.get("diagnostics", {}))
    return out


def build_sequence(p: dict, seed: int, base: Path):
    """Return ``(Z, N, E, runner)``; ``runner()`` gives ``(report, named series)``."""
    if "zeros" in p and "generator" not in p:
        Z = parse_points(p["zeros"])
        E = parse_set(_resolve(p["set"], base)) if "set" in p else None
        N = Z.length
        return Z, N, E, lambda: _generic_suite(Z, N, E, p)
    gen = p.get("generator")
    if gen == "example2":
        gamma = float(p.get("gamma", 0.3))
        if not 0.0 < gamma < 1.0:
            raise InputError("gamma must lie in (0, 1)")
        N = _count(p.get("N", 1 << 20), "N")
        alpha = float(p.get("alpha", 0.51))
        Z, E = zs.example2_sequence(gamma, N)

        def run():
            rep = zs.example2_report(gamma, N, alpha)
            return rep, _series_of(rep)
        return Z, N, E, run
    if gen == "prop2":
        K = _count(p.get("K", 24), "K", 2, 40)
        if "cantor" in p:
            spec = cantor_spec_from_json(p["cantor"])
        else:
            spec = perfect_symmetric(float(p.get("ratio", 1.0 / 3.0)), max(K + 2, 1 << 16))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            Z, lv = zs.prop2_sequence(spec, K)
        n_points = _count(p.get("n_points", 20), "n_points", 1, 1000)
        E = cantor_level(spec, min(K, 12))

        def run():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                rep = zs.prop2_report(spec, K, n_points, seed)
            return rep, _series_of(rep)
        return Z, Z.length, E, run
    if gen == "shapiro":
        power = _positive(p.get("power", 2.0), "power")
        N = _count(p.get("N", 1 << 20), "N")
        Z = bl.ZeroSequence(lambda idx: (-np.power(idx.astype(float), power), np.zeros(len(idx))),
                            None, "shapiro", {"power": power})
        E = CircleSet.points([0.0])
        return Z, N, E, lambda: _generic_suite(Z, N, E, p)
    if gen == "remark":
        s = float(p.get("s", 1.0))
        N = _count(p.get("N", 1 << 20), "N")
        depth = _count(p.get("cantor_depth", 4), "cantor_depth", 1, 16)
        Z, rep = zs.remark_sequence(s, N, depth)
        from .circle_sets import remark_cantor
        E = cantor_level(remark_cantor(s, max(depth, 8)), depth)
        return Z, N, E, lambda: (rep, _series_of(rep))
    if gen == "assign":
        radii = np.asarray(_need(p, "radii"), dtype=float)
        E = parse_set(_resolve(_need(p, "set"), base))
        if radii.ndim != 1 or len(radii) == 0 or np.any(radii <= 0) or np.any(radii >= 1):
            raise InputError("radii must be a nonempty list in (0, 1)")
        Z = zs.assign_arguments(radii, E)
        N = Z.length
        return Z, N, E, lambda: _generic_suite(Z, N, E, p)
    raise InputError(f"unknown generator {gen!r}")


# --------------------------------------------------------------------------
# commands


def cmd_cantor(rc: RunConfig) -> int:
    p = rc.params
    spec_obj = p.get("cantor", p)
    try:
        spec = cantor_spec_from_json(spec_obj)
    except (ValueError, IndexError, TypeError) as exc:
        raise InputError(f"invalid Cantor spec: {exc}") from exc
    # generator families define every level; run the series well past the depth
    N = _count(p.get("N", spec.max_index or max(spec.depth, 1024)), "N", 1, 1 << 20)
    crit = cantor_criteria(spec, N)
    if not crit["valid"]:
        raise InputError(f"invalid Cantor spec: {crit['error']}")
    level = min(spec.depth, _count(p.get("set_level", 10), "set_level", 0, 16))
    E = cantor_level(spec, level)
    write_json(rc.out / "set.json", {"spec": spec.to_dict(), "level": level, "arcs": E.to_pairs()})
    named = {"measure": crit["measure_series"], "capacity": crit["capacity_series"],
             "carleson": crit["carleson_series"]}
    report = {
        "spec": spec.to_dict(),
        "measure_zero": crit["measure_zero"],
        "measure_limit": crit["measure_limit"],
        "capacity_zero": crit["capacity_zero"],
        "capacity_positive": crit["capacity_positive"],
        "carleson": crit["carleson"],
        "measure_series": zs.condition_report("measure", "sum 2^(n-1) lambda_n", named["measure"]),
        "capacity_series": zs.condition_report("capacity", "sum 2^-n log 1/l_n", named["capacity"]),
        "carleson_series": zs.condition_report("carleson", "sum |I_n| log 1/|I_n|", named["carleson"]),
    }
    write_json(rc.out / "criteria.json", report)
    (rc.out / "partial_sums.csv").write_text(series_table(named))
    return EXIT_OK


def cmd_capacity(rc: RunConfig) -> int:
    p = rc.params
    E = parse_set(_resolve(_need(p, "set"), rc.base))
    ts = _grid(_need(p, "t_grid"), "t_grid")
    if np.any(ts <= 0) or np.any(ts > 2) or np.any(np.diff(ts) <= 0):
        raise InputError("t_grid must be increasing in (0, 2]")
    cells = _count(p.get("cells", 200), "cells", 4, 2000)
    iters = _count(p.get("iters", 20000), "iters", 1, 10 ** 7)
    tol = _positive(p.get("tol", 1e-10), "tol")
    kkt_tol = _positive(p.get("kkt_tol", 1e-6), "kkt_tol")
    pts = cp.capacity_curve(E, ts, cells, iters, tol)
    (rc.out / "capacity.csv").write_text(cp.curve_to_csv(pts))
    failed = [q.t for q in pts if q.kkt_residual > kkt_tol]
    report = {
        "formula": "cap(E_t) <= (int_t^2 ds/|E_s|)^-1",
        "cells": cells,
        "points": [{"t": q.t, "cap": q.cap, "upper_bound": q.upper_bound,
                    "kkt_residual": q.kkt_residual, "converged": q.converged,
                    "bound_ok": q.bound_ok} for q in pts],
        "violations": [q.t for q in pts if not q.bound_ok],
        "unconverged": failed,
    }
    write_json(rc.out / "capacity.json", report)
    if failed:
        raise NumericFailure(f"solver KKT residual above {kkt_tol:g} at t = {failed}")
    return EXIT_OK


def _random_instance(rng, max_zeros: int = 8, max_r: float = 0.9, max_deg: int = 16):
    k = int(rng.integers(1, max_zeros + 1))
    r = max_r * np.sqrt(rng.random(k))
    z = r * np.exp(1j * TWO_PI * rng.random(k))
    d = int(rng.integers(0, max_deg + 1))
    c = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
    return z, c


def cmd_carleson_check(rc: RunConfig) -> int:
    p = rc.params
    tol = _positive(p.get("tol", 1e-6), "tol")
    M = p.get("M")
    if M is not None:
        M = _count(M, "M", 4, MAX_GRID)
    cases = []
    if "random" in p:
        rp = p["random"] or {}
        rng = np.random.default_rng(rc.seed)
        for _ in range(_count(rp.get("count", 200), "count", 1, 100000)):
            z, c = _random_instance(rng, int(rp.get("max_zeros", 8)), float(rp.get("max_r", 0.9)),
                                    int(rp.get("max_degree", 16)))
            cases.append((bl.ZeroSequence.from_points(z), PowerSeries(c)))
    else:
        Z = parse_points(_need(p, "zeros"))
        f = PowerSeries.from_json(p.get("f", [1.0]))
        cases.append((Z, f))
    results = []
    for Z, f in cases:
        try:
            results.append(bl.carleson_check(Z, f, M))
        except bl.GridResolutionError as exc:
            write_json(rc.out / "carleson.json", {"error": str(exc), "required_M": exc.required_M})
            raise NumericFailure(f"{exc}") from exc
    worst = max(r.rel_error for r in results)
    report = {
        "formula": "D(Bf) = D(f) + (1/2pi) int sum_n P_n |f|^2",
        "tol": tol,
        "max_rel_error": worst,
        "passed": worst <= tol,
    }
    if len(results) == 1:
        report.update(results[0].to_dict())
    else:
        report["cases"] = [r.to_dict() for r in results]
    write_json(rc.out / "carleson.json", report)
    if worst > tol:
        raise NumericFailure(f"relative error {worst:.3g} exceeds {tol:g}")
    return EXIT_OK


def cmd_zeros(rc: RunConfig) -> int:
    Z, N, E, run = build_sequence(rc.params, rc.seed, rc.base)
    report, named = run()
    out = {"generator": rc.params.get("generator", "explicit"), "N": N, "conditions": report}
    if E is not None:
        nd = N if N <= 1 << 20 else (1 << 13) - 1
        out["accumulation_hausdorff"] = zs.accumulation_diagnostic(Z, E, min(nd, N))
    write_json(rc.out / "sequence.json", {"sequence": Z.to_json(), "N": N})
    write_json(rc.out / "report.json", out)
    (rc.out / "partial_sums.csv").write_text(series_table(named))
    return EXIT_OK


def cmd_exceptional(rc: RunConfig) -> int:
    p = rc.params
    seq = _resolve(_need(p, "sequence"), rc.base)
    if not isinstance(seq, dict):
        raise InputError("sequence must be a JSON object")
    Z, N, _, _ = build_sequence(seq, rc.seed, rc.base)
    N = _count(p.get("N", N), "N")
    lams = _grid(_need(p, "lambdas"), "lambdas")
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise InputError("lambdas must be positive and increasing")
    M = _count(p.get("M", 4096), "M", 4, MAX_GRID)
    meas = bl.exceptional_level_set(Z, lams, M, N)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "measure"])
    for l, m in zip(lams, meas):
        w.writerow([_fmt(float(l)), _fmt(float(m))])
    (rc.out / "exceptional.csv").write_text(buf.getvalue())
    try:
        cover = bl.exceptional_cover_bound(Z, _count(p.get("N_start", 1), "N_start"), N)
        cover_out = cover.to_dict()
    except ZeroDivisionError:
        # a zero at the origin makes every capacity tail infinite
        cover, cover_out = None, {"vacuous": True, "reason": "zero at the origin"}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N_start", "tail"])
    if cover is not None:
        for s, t in zip(cover.starts, cover.tails):
            w.writerow([int(s), _fmt(float(t))])
    (rc.out / "cover.csv").write_text(buf.getvalue())
    # int_1^lmax |E_lambda| d lambda / lambda; the measure is nonincreasing in
    # lambda, so right and left step sums bracket the integral
    up = lams >= 1.0
    lg = np.diff(np.log(lams[up]))
    m_up = meas[up]
    log_lo = math.fsum(m_up[1:] * lg) if len(lg) else 0.0
    log_hi = math.fsum(m_up[:-1] * lg) if len(lg) else 0.0
    lam0, tail = bl.lambda0(Z, N)
    write_json(rc.out / "exceptional.json", {
        "formula": "int_T log(sum (1-|z_n|^2)/|zeta-z_n|^2) |d zeta| < inf",
        "N": N,
        "M": M,
        "lambda0": lam0,
        "lambda0_tail": tail,
        "log_integral_lower": log_lo,
        "log_integral_upper": log_hi,
        "cover": cover_out,
    })
    return EXIT_OK


COMMANDS = {
    "cantor": cmd_cantor,
    "capacity": cmd_capacity,
    "carleson-check": cmd_carleson_check,
    "zeros": cmd_zeros,
    "exceptional": cmd_exceptional,
}


def _limit_threads():
    n = os.environ.get("DZEROS_THREADS")
    if not n:
        return None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return None
    return threadpool_limits(int(n))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dzeros", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 1 << 64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INPUT
    path = Path(args.config)
    out = Path(args.out)
    limiter = _limit_threads()
    try:
        params = _load_json(path)
        if not isinstance(params, dict):
            raise InputError("config must be a JSON object")
        out.mkdir(parents=True, exist_ok=True)
        rc = RunConfig(args.command, params, out, args.seed, path.resolve().parent)
        with np.errstate(over="ignore", under="ignore"):
            return COMMANDS[args.command](rc)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericFailure, bl.GridResolutionError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if limiter is not None:
            limiter.restore_original_limits()


if __name__ == "__main__":
    sys.exit(main())
