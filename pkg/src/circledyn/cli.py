"""Command-line front end.

Subcommands: rho, windows, tongues, dio, skew, theoremA.  Option precedence
is flags > environment (CIRCLEDYN_<NAME>) > config file > defaults; the
effective configuration is dumped into every output directory.  All outputs
are computed first and then written atomically, so failures leave no
partial files.

Exit codes: 0 success, 2 input error, 3 degenerate map, 4 hypothesis
violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import functools
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, io, rotation, skew, windows
from .diophantine import DioParams, dio_measure
from .errors import (
    CircledynError,
    DegenerateFamily,
    DegenerateFiber,
    HypothesisViolation,
    InputError,
)
from .experiments import eta_curve, intersection_measure

ENV_PREFIX = "CIRCLEDYN_"

_DEFAULTS = {
    "seed": 0,
    "workers": 0,  # 0 = available parallelism
    "qmax": 30,
    "tol": 1e-6,
    "grid": 0,  # 0 = per-command default
    "niter": 0,  # 0 = per-command default
    "out": "out",
    "label": "",
}

_TYPES = {
    "seed": int, "workers": int, "qmax": int, "grid": int, "niter": int,
    "tol": float, "R": float, "nmax": int, "samples": int,
    "eta_families": int, "eta_samples": int, "t": str, "t_range": str,
    "deltas": str, "C": str, "input": str, "out": str, "label": str,
}


@dataclass
class RunConfig:
    """Effective options for one subcommand invocation."""

    subcommand: str
    values: dict = field(default_factory=dict)
    t0: float = 0.0

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name)

    def dump(self, outdir):
        payload = dict(sorted(self.values.items()))
        payload["subcommand"] = self.subcommand
        payload["tool_version"] = __version__
        io._atomic_write(
            os.path.join(outdir, "run_config.json"),
            (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode(),
        )


def _merge_config(sub: str, args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        for k, v in io.load_json(cfg_path).items():
            key = k.replace("-", "_")
            values[key] = _TYPES.get(key, str)(v) if v is not None else v
    for key, typ in _TYPES.items():
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            try:
                values[key] = typ(env)
            except ValueError:
                raise InputError(f"bad value for {ENV_PREFIX}{key.upper()}: {env!r}")
    for key, val in vars(args).items():
        if key in ("config", "func") or val is None:
            continue
        values[key] = val
    return RunConfig(sub, values)


def _workers(cfg: RunConfig) -> int:
    w = int(cfg.values.get("workers", 0))
    return w if w > 0 else (os.cpu_count() or 1)


class _Pool:
    """Order-preserving map over a worker pool; workers == 1 stays serial."""

    def __init__(self, workers: int):
        self.workers = workers
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = cf.ProcessPoolExecutor(max_workers=self.workers)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()

    def map(self, fn, items):
        items = list(items)
        if self._pool is None or len(items) <= 1:
            return [fn(x) for x in items]
        return list(self._pool.map(fn, items, chunksize=max(1, len(items) // (4 * self.workers))))


def _parse_t_values(cfg: RunConfig):
    ts = []
    raw = cfg.values.get("t")
    if raw:
        ts.extend(float(v) for v in str(raw).split(","))
    rng = cfg.values.get("t_range")
    if rng:
        try:
            a, b, n = str(rng).split(":")
            ts.extend(np.linspace(float(a), float(b), int(n)).tolist())
        except ValueError:
            raise InputError(f"--t-range expects a:b:n, got {rng!r}")
    if not ts:
        raise InputError("no parameter values: pass --t and/or --t-range")
    return ts


def _rho_rows(fam, q_max, n_iter, ts):
    ts = list(ts)
    results = rotation.classify_batch(fam, ts, q_max=q_max, n_iter=n_iter)
    return [
        (t, r.estimate, r.error_bound, r.classification, r.p, r.q)
        for t, r in zip(ts, results)
    ]


def cmd_rho(cfg: RunConfig) -> int:
    fam = io.load_family(cfg.input)
    fam.check_diffeo()
    ts = _parse_t_values(cfg)
    n_iter = cfg.niter or rotation.DEFAULT_N_ITER
    with _Pool(_workers(cfg)) as pool:
        chunks = [c for c in np.array_split(np.asarray(ts, dtype=float),
                                            max(1, _workers(cfg))) if c.size]
        task = functools.partial(_rho_rows, fam, cfg.qmax, n_iter)
        rows = [row for chunk in pool.map(task, chunks) for row in chunk]
    _finish(cfg, {"rho.csv": ("rho", rows)}, inputs={"family": cfg.input})
    return 0


def _window_task(fam, tol, grid, pq):
    return windows.window_for_rational(fam, pq[0], pq[1], tol=tol, grid=grid or None)


def cmd_windows(cfg: RunConfig) -> int:
    fam = io.load_family(cfg.input)
    pairs = windows.lift_rationals(cfg.qmax, fam.winding)
    fam.check_diffeo()
    with _Pool(_workers(cfg)) as pool:
        ws = pool.map(functools.partial(_window_task, fam, cfg.tol, cfg.grid), pairs)
    seed = cfg.seed
    samples = int(cfg.values.get("samples", 2000))
    lm = windows.locked_measure(fam, cfg.qmax, samples, tol=cfg.tol, seed=seed, windows=ws)
    files = {
        "windows.csv": ("windows", [
            (w.p, w.q, w.t_lo, w.t_hi, w.width, w.bracket_radius) for w in ws
        ]),
        "measure.csv": ("measure", [(cfg.qmax, lm.lower, lm.mc, lm.unresolved_frac, seed)]),
    }
    _finish(cfg, files, inputs={"family": cfg.input})
    return 0


def _tongue_task(profile, qmax, tol, grid, delta):
    fam = profile.scaled(delta)
    fam.check_diffeo()
    return [
        (delta, w.p, w.q, w.t_lo, w.t_hi)
        for w in windows.enumerate_windows(fam, qmax, tol=tol, grid=grid or None)
    ]


def cmd_tongues(cfg: RunConfig) -> int:
    profile = io.load_family(cfg.input)
    raw = cfg.values.get("deltas")
    if not raw:
        raise InputError("--deltas is required (comma list or a:b:n)")
    if ":" in str(raw):
        a, b, n = str(raw).split(":")
        deltas = np.linspace(float(a), float(b), int(n)).tolist()
    else:
        deltas = [float(v) for v in str(raw).split(",")]
    with _Pool(_workers(cfg)) as pool:
        per_delta = pool.map(
            functools.partial(_tongue_task, profile, cfg.qmax, cfg.tol, cfg.grid), deltas
        )
    rows = [row for chunk in per_delta for row in chunk]
    _finish(cfg, {"tongues.csv": ("tongues", rows)}, inputs={"family": cfg.input})
    return 0


def cmd_dio(cfg: RunConfig) -> int:
    raw = cfg.values.get("C")
    if not raw:
        raise InputError("--C is required (one value or a comma list)")
    cs = [float(v) for v in str(raw).split(",")]
    n_max = cfg.values.get("nmax") or 1000
    grid = cfg.grid or 100_000
    rows = []
    for c in cs:
        m = dio_measure(DioParams(c, n_max, grid))
        rows.append((c, n_max, m.estimate, m.analytic_lower, m.grid_error))
    _finish(cfg, {"dio.csv": ("dio", rows)}, inputs={})
    return 0


def _search_rows(eligible, q_max, n_iter, ts):
    rows = []
    for t in ts:
        hit = None
        for circle, rf, _ in eligible:
            res = rotation.classify(rf, float(t), q_max=q_max, n_iter=n_iter)
            if res.classification == rotation.IRRATIONAL_CANDIDATE:
                hit = (circle, res)
                break
        if hit is None:
            rows.append((float(t), False, None, None, None, "none"))
        else:
            circle, res = hit
            rows.append((float(t), True, circle.k, circle.n, res.estimate,
                         res.classification))
    return rows


def cmd_skew(cfg: RunConfig) -> int:
    F = io.load_skew(cfg.input)
    n_max = cfg.values.get("nmax") or 4
    R = cfg.values.get("R") or 0.5
    n_iter = cfg.niter or rotation.CLASSIFY_N_ITER
    circle_rows = []
    eligible = []
    for circle in skew.periodic_circles(F.m, n_max):
        rf = skew.restricted_family(F, circle)
        sup_c3, ok = skew.a3_check(rf, R)
        circle_rows.append(
            (circle.k, circle.n, circle.x0.numerator, circle.x0.denominator, sup_c3, ok)
        )
        if ok:
            eligible.append((circle, rf, sup_c3))
    ts = _parse_t_values(cfg)
    with _Pool(_workers(cfg)) as pool:
        chunks = [c for c in np.array_split(np.asarray(ts, dtype=float),
                                            max(1, _workers(cfg))) if c.size]
        task = functools.partial(_search_rows, eligible, cfg.qmax, n_iter)
        search_rows = [row for chunk in pool.map(task, chunks) for row in chunk]
    files = {
        "circles.csv": ("circles", circle_rows),
        "search.csv": ("search", search_rows),
    }
    _finish(cfg, files, inputs={"skew": cfg.input},
            hypotheses={"R": R, "n_max": n_max})
    return 0


def cmd_theoremA(cfg: RunConfig) -> int:
    F = io.load_skew(cfg.input)
    n_max = cfg.values.get("nmax") or 6
    samples = int(cfg.values.get("samples", 10_000))
    n_iter = cfg.niter or rotation.CLASSIFY_N_ITER
    fams = []
    seen = set()
    for circle in skew.periodic_circles(F.m, n_max):
        if circle.n in seen:
            continue
        seen.add(circle.n)
        fams.append(skew.restricted_family(F, circle))
    with _Pool(_workers(cfg)) as pool:
        res = intersection_measure(fams, samples, q_max=cfg.qmax, seed=cfg.seed,
                                   n_iter=n_iter, map_fn=pool.map)
        r_star = max(res.norms)
        ec = eta_curve(
            [r_star * k / 4.0 for k in range(1, 5)],
            int(cfg.values.get("eta_families", 8)),
            q_max=cfg.qmax,
            seed=cfg.seed,
            mc_samples=int(cfg.values.get("eta_samples", 2000)),
            n_iter=n_iter,
            map_fn=pool.map,
        )
    inter_rows = [
        (i + 1, mu, mp) for i, (mu, mp) in enumerate(zip(res.mu_locked, res.mu_pessimistic))
    ]
    eta_rows = list(zip(ec.r, ec.eta, ec.eta_raw))
    files = {
        "intersection.csv": ("intersection", inter_rows),
        "eta.csv": ("eta", eta_rows),
    }
    _finish(
        cfg, files, inputs={"skew": cfg.input},
        hypotheses={
            "norms": list(res.norms),
            "windings": list(res.windings),
            "windings_increasing": res.windings_increasing,
            "norms_below_one": all(v < 1.0 for v in res.norms),
            "conforming": res.conforming,
            "eta_at_max_norm": ec.at(r_star),
        },
    )
    return 0


def _finish(cfg: RunConfig, files: dict, inputs: dict, hypotheses: dict | None = None):
    """Write the report, effective config, and CSVs atomically, in that order
    of assembly: everything is computed before the first byte lands."""
    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    report = io.ExperimentReport(
        experiment=cfg.subcommand,
        tool_version=__version__,
        inputs={**inputs, "config": {k: v for k, v in sorted(cfg.values.items())}},
        input_hashes={
            name: io.hash_file(path)
            for name, path in inputs.items()
            if isinstance(path, str) and os.path.exists(path)
        },
        hypotheses=hypotheses or {},
        wall_clock_s=time.time() - (cfg.t0 or time.time()),
    )
    for fname, (schema, rows) in files.items():
        report.add_table(fname.removesuffix(".csv"), io.CSV_SCHEMAS[schema], rows)
        io.write_csv(os.path.join(outdir, fname), io.CSV_SCHEMAS[schema], rows)
    io.write_report(os.path.join(outdir, "report.json"), report)
    cfg.dump(outdir)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="circledyn",
        description="Rotation numbers, locking windows, Diophantine sets and "
                    "quasiperiodic-circle searches for circle maps and torus "
                    "skew products.",
    )
    ap.add_argument("--version", action="version", version=f"circledyn {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", help="definition file (JSON)")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, help="RNG seed recorded in outputs")
        p.add_argument("--workers", type=int,
                       help="worker processes; 0 = all cores, 1 = serial reference")
        p.add_argument("--qmax", type=int, help="largest lock denominator searched")
        p.add_argument("--tol", type=float, help="window bracket tolerance")
        p.add_argument("--grid", type=int, help="grid resolution override")
        p.add_argument("--niter", type=int, help="rotation-estimate iterate count")

    p = sub.add_parser("rho", help="rotation numbers with error bars along a t sweep")
    common(p)
    p.add_argument("--t", help="comma list of parameter values")
    p.add_argument("--t-range", dest="t_range", help="a:b:n uniform sweep")
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("windows", help="certified locking windows plus measure summary")
    common(p)
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("tongues", help="windows across an amplitude grid")
    common(p)
    p.add_argument("--deltas", help="comma list or a:b:n amplitude grid")
    p.set_defaults(func=cmd_tongues)

    p = sub.add_parser("dio", help="Diophantine membership measure")
    common(p, needs_input=False)
    p.add_argument("--C", help="comma list of constants C")
    p.add_argument("--nmax", type=int, help="frequency cutoff (default 1000)")
    p.set_defaults(func=cmd_dio)

    p = sub.add_parser("skew", help="periodic circles, C3 filter, quasiperiodic search")
    common(p)
    p.add_argument("--nmax", type=int, help="largest circle period (default 4)")
    p.add_argument("--R", type=float, help="closeness-to-identity threshold (default 0.5)")
    p.add_argument("--t", help="comma list of parameter values")
    p.add_argument("--t-range", dest="t_range", help="a:b:n uniform sweep")
    p.set_defaults(func=cmd_skew)

    p = sub.add_parser("theoremA", help="intersection-measure decay experiment "
                                        "over restricted families")
    common(p)
    p.add_argument("--nmax", type=int, help="restrict to periods 1..nmax (default 6)")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--eta-families", dest="eta_families", type=int,
                   help="sampled families per norm level")
    p.add_argument("--eta-samples", dest="eta_samples", type=int,
                   help="Monte Carlo samples per sampled family")
    p.set_defaults(func=cmd_theoremA)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args.subcommand, args)
        cfg.t0 = time.time()
        if cfg.values.get("input") is None and args.subcommand != "dio":
            raise InputError("--input is required")
        code = args.func(cfg)
        return code
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DegenerateFamily, DegenerateFiber) as e:
        print(f"degenerate map: {e}", file=sys.stderr)
        return 3
    except HypothesisViolation as e:
        print(f"hypothesis violation: {e}", file=sys.stderr)
        return 4
    except CircledynError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
