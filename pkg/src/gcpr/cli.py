"""Command-line interface: ``gcpr {fit,infer,kpss,profile,mc}``.

Every JSON report carries a manifest (command, dataset path and hash, model,
simulation settings, seed, library version) and no timestamps, so rerunning a
command on the same inputs reproduces its output byte for byte.

Exit codes: 0 success, 2 invalid input, 3 rank deficiency, 4 optimiser
failure, 5 degenerate data.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .core import Dataset, GcprError, InputError, ModelSpec, TrendTerm, preset
from .kpss import default_q_grid, run_kpss
from .lrv import Kernel, lrv_from_fit
from .nls import GridSpec, fit_gcpr, profile_rss, rss_profile_stochastic_power
from .siminf import SimConfig, confidence_interval, run_sim_inference, significance_stars, test_coefficient

SCHEMA_VERSION = "1.0"
THREADS_ENV = "GCPR_THREADS"


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be positive")
    return n


def _parse_trend(text: str) -> TrendTerm:
    """``free``, ``free:LO:HI`` or a number."""
    parts = text.split(":")
    try:
        if parts[0] == "free":
            if len(parts) == 1:
                return TrendTerm.free()
            if len(parts) == 3:
                return TrendTerm.free(float(parts[1]), float(parts[2]))
            raise ValueError
        if len(parts) == 1:
            return TrendTerm.at(float(text))
    except ValueError:
        pass
    raise InputError(f"invalid --trend {text!r}; use a number, 'free' or 'free:LO:HI'")


def _parse_grid(text: str | None) -> tuple[float, ...] | None:
    """``LO:HI:STEP`` or a comma-separated list."""
    if text is None:
        return None
    try:
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            if not step > 0 or hi < lo:
                raise ValueError
            n = int(np.floor((hi - lo) / step + 1e-9))
            return tuple(np.round(lo + step * np.arange(n + 1), 12).tolist())
        vals = tuple(float(v) for v in text.split(",") if v.strip())
        if not vals:
            raise ValueError
        return vals
    except ValueError:
        raise InputError(f"invalid grid {text!r}; use LO:HI:STEP or a comma-separated list") from None


def _parse_ints(text: str | None, what: str) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"invalid {what} {text!r}") from None


def _bandwidth(text: str) -> float | str:
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise InputError(f"bandwidth must be a number or 'auto', got {text!r}") from None


def _spec_from_args(args, data: Dataset) -> ModelSpec:
    if args.model and (args.trend or args.xpow):
        raise InputError("use either --model or --trend/--xpow, not both")
    if args.model:
        spec = preset(args.model, args.lower, args.upper, args.gap)
    else:
        trends = [_parse_trend(t) for t in (args.trend or ["0", "1", f"free:{args.lower}:{args.upper}"])]
        orders = args.xpow if args.xpow else [1] * data.m
        spec = ModelSpec(tuple(trends), tuple(orders), args.gap)
    data.check_spec(spec)
    return spec


def _manifest(command: str, args, data: Dataset | None = None, spec: ModelSpec | None = None,
              **extra) -> dict:
    out = {"command": command, "version": __version__}
    if data is not None:
        out["dataset"] = {"path": str(args.csv), "sha256": data.digest, "T": data.T, "m": data.m}
    if spec is not None:
        out["model"] = spec.describe()
    out.update(extra)
    return out


def _emit(report: dict, args, text: str) -> None:
    payload = json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if getattr(args, "json", None):
        Path(args.json).write_text(payload, encoding="utf-8")
    if getattr(args, "format", "text") == "json":
        sys.stdout.write(payload)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _grid(args) -> GridSpec:
    pts = _parse_grid(getattr(args, "grid", None))
    return GridSpec(step=args.grid_step, points=pts)


def cmd_fit(args) -> int:
    data = Dataset.from_csv(args.csv)
    spec = _spec_from_args(args, data)
    fit = fit_gcpr(spec, data, _grid(args), threads=args.threads)
    resid_path = None
    if args.residuals:
        resid_path = str(args.residuals)
        with open(resid_path, "w", encoding="utf-8") as fh:
            fh.write("t,residual\n")
            for t, u in zip(range(1, data.T + 1), fit.residuals):
                fh.write(f"{t},{u:.17g}\n")
    body = fit.to_dict()
    body["names"] = spec.coef_names()
    body["residuals_path"] = resid_path
    report = {"schema_version": SCHEMA_VERSION, "kind": "fit",
              "manifest": _manifest("fit", args, data, spec, grid_step=args.grid_step), "fit": body}
    lines = [f"GCPR fit  T={data.T}  trends={spec.describe()['trends']}  orders={list(spec.orders)}"]
    lines += [f"  theta{i + 1:<3} {_fmt(th)}" for i, th in enumerate(fit.theta)]
    lines += [f"  {n:<8} {_fmt(v)}" for n, v in zip(spec.coef_names(), fit.params.coefficients())]
    lines.append(f"  RSS      {_fmt(fit.rss)}")
    _emit(report, args, "\n".join(lines) + "\n")
    return 0


def cmd_infer(args) -> int:
    data = Dataset.from_csv(args.csv)
    spec = _spec_from_args(args, data)
    fit = fit_gcpr(spec, data, _grid(args), threads=args.threads)
    lrv = lrv_from_fit(fit, data, Kernel.parse(args.kernel), _bandwidth(args.bandwidth))
    cfg = SimConfig(J=args.J, N=args.N, alpha=args.alpha, seed=args.seed, threads=args.threads)
    draws = run_sim_inference(fit, lrv, cfg)
    rows = []
    for name in draws.names:
        lo, hi = confidence_interval(draws, name, truncate=name.startswith("theta"))
        res = test_coefficient(draws, name, 0.0)
        rows.append({"name": name, "estimate": res.estimate, "ci": [lo, hi], "p_value": res.p_value,
                     "stars": significance_stars(res.p_value)})
    report = {"schema_version": SCHEMA_VERSION, "kind": "infer",
              "manifest": _manifest("infer", args, data, spec, sim=cfg.to_dict(), seed=args.seed,
                                    kernel=lrv.kernel.value, bandwidth=args.bandwidth),
              "fit": fit.to_dict(), "lrv": lrv.to_dict(), "coefficients": rows,
              "resampled_draws": draws.resampled}
    lines = [f"Simulated inference  T={data.T}  J={cfg.J}  N={draws.N}  alpha={cfg.alpha:g}",
             f"  {'name':<8} {'estimate':>12} {'lower':>12} {'upper':>12} {'p':>8}"]
    for r in rows:
        lines.append(f"  {r['name']:<8} {r['estimate']:12.6g} {r['ci'][0]:12.6g} {r['ci'][1]:12.6g} "
                     f"{r['p_value']:8.4f} {r['stars']}")
    _emit(report, args, "\n".join(lines) + "\n")
    return 0


def cmd_kpss(args) -> int:
    data = Dataset.from_csv(args.csv)
    spec = _spec_from_args(args, data)
    fit = fit_gcpr(spec, data, _grid(args), threads=args.threads)
    lrv = lrv_from_fit(fit, data, Kernel.parse(args.kernel), _bandwidth(args.bandwidth))
    q_grid = _parse_ints(args.q_grid, "--q-grid")
    res = run_kpss(fit, data, lrv, args.alpha, q_grid, args.window, edges=args.edges)
    used_grid = q_grid if q_grid is not None else default_q_grid(res.n)
    report = {"schema_version": SCHEMA_VERSION, "kind": "kpss",
              "manifest": _manifest("kpss", args, data, spec, q_grid=used_grid, window=args.window, edges=args.edges,
                                    kernel=lrv.kernel.value, bandwidth=args.bandwidth),
              "fit": fit.to_dict(), "kpss": res.to_dict()}
    text = (f"KPSS  max statistic {res.max_stat:.4f}  critical {res.critical:.4f}  "
            f"M_opt {res.M}  q {res.q_chosen}  reject {'yes' if res.reject else 'no'}\n")
    _emit(report, args, text)
    return 0


def cmd_profile(args) -> int:
    data = Dataset.from_csv(args.csv)
    if args.kind == "trend":
        spec = _spec_from_args(args, data)
        if spec.n_free != 1:
            raise InputError("trend profile needs exactly one free power")
        pts = _parse_grid(args.grid)
        if pts is None:
            from .nls import feasible_grid
            pts = feasible_grid(spec, GridSpec(step=args.grid_step))
        prof = profile_rss(spec, data, pts, threads=args.threads)
    else:
        pts = _parse_grid(args.grid)
        if pts is None:
            raise InputError("--grid is required for --kind xpow")
        prof = rss_profile_stochastic_power(data, pts, threads=args.threads)
    buf = io.StringIO()
    buf.write("theta,rss\n")
    for th, r in zip(prof.theta, prof.rss):
        buf.write(f"{th:.10g},{r:.17g}\n")
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_mc(args) -> int:
    from . import montecarlo as mc

    reps = args.reps if args.reps is not None else (mc.FULL_REPS if args.full_scale else mc.REDUCED_REPS)
    J = args.J if args.J is not None else (mc.FULL_J if args.full_scale else mc.REDUCED_J)
    if args.table == "1":
        rep = mc.table1_experiment(reps=reps, seed=args.seed)
    else:
        table = {"2": "size2", "4": "coverage4", "5": "kpss5", "power": "power"}[args.table]
        tau0 = mc.DgpConfig.tau0 if args.tau3 is None else (7.0, 0.05, args.tau3)
        rep = mc.table_experiment(table, args.scope, reps=reps, J=J, seed=args.seed,
                                  workers=args.threads, redraw_H=not args.fixed_h, tau0=tau0)
    report = {"schema_version": SCHEMA_VERSION, "kind": "mc",
              "manifest": _manifest("mc", args, table=args.table, scope=args.scope, reps=reps, J=J,
                                    seed=args.seed),
              "report": rep.to_dict()}
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"table{args.table}" if args.table != "power" else "power"
        (out / f"{stem}.csv").write_text(rep.to_csv(), encoding="utf-8")
        (out / f"{stem}.txt").write_text(rep.to_text(), encoding="utf-8")
        (out / f"{stem}.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
    _emit(report, args, rep.to_text())
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["m1", "m2", "m3", "m4"], help="named specification")
    g.add_argument("--trend", action="append",
                   help="trend power: a number, 'free' or 'free:LO:HI' (repeatable)")
    g.add_argument("--xpow", type=int, action="append", help="polynomial order per regressor (repeatable)")
    g.add_argument("--lower", type=float, default=0.05, help="lower bound of free powers")
    g.add_argument("--upper", type=float, default=10.0, help="upper bound of free powers")
    g.add_argument("--gap", type=float, default=0.05, help="minimum gap between trend powers")
    g.add_argument("--grid-step", type=float, default=0.01, help="grid step of the power search")


def _common(p: argparse.ArgumentParser, csv: bool = True) -> None:
    if csv:
        p.add_argument("csv", help="input CSV with header t,y,x1,...")
    p.add_argument("--json", help="also write the JSON report to this path")
    p.add_argument("--format", choices=["text", "json"], default="text", help="stdout format")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker count (default from {THREADS_ENV}, else 1)")


def _lrv_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default="bartlett", help="bartlett, parzen or qs")
    p.add_argument("--bandwidth", default="auto", help="number or 'auto' (Andrews AR(1) plug-in)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gcpr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gcpr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="NLS fit of a GCPR model")
    _common(f)
    _model_flags(f)
    f.add_argument("--residuals", help="write residuals to this CSV")
    f.set_defaults(func=cmd_fit)

    i = sub.add_parser("infer", help="simulated confidence intervals and tests")
    _common(i)
    _model_flags(i)
    _lrv_flags(i)
    i.add_argument("--seed", type=int, required=True)
    i.add_argument("--J", type=int, default=999)
    i.add_argument("--N", type=int, default=None, help="simulated path length (default T)")
    i.add_argument("--alpha", type=float, default=0.05)
    i.set_defaults(func=cmd_infer)

    k = sub.add_parser("kpss", help="subsampling KPSS test of the cointegration null")
    _common(k)
    _model_flags(k)
    _lrv_flags(k)
    k.add_argument("--alpha", type=float, default=0.05)
    k.add_argument("--q-grid", help="comma-separated candidate block lengths")
    k.add_argument("--window", type=int, default=2)
    k.add_argument("--edges", choices=["interior", "shrink"], default="interior",
                   help="volatility windows at the ends of the grid")
    k.set_defaults(func=cmd_kpss)

    r = sub.add_parser("profile", help="RSS profile over a power grid (CSV theta,rss)")
    r.add_argument("csv", help="input CSV with header t,y,x1,...")
    _model_flags(r)
    r.add_argument("--kind", choices=["trend", "xpow"], default="trend")
    r.add_argument("--grid", help="LO:HI:STEP or comma-separated powers")
    r.add_argument("--out", help="output CSV (default stdout)")
    r.add_argument("--threads", type=int, default=None)
    r.set_defaults(func=cmd_profile)

    m = sub.add_parser("mc", help="Monte Carlo tables")
    _common(m, csv=False)
    m.add_argument("--table", choices=["1", "2", "4", "5", "power"], required=True)
    m.add_argument("--scope", help="e.g. 'A:rho=0:T=100' or 'AD:rho=0,0.5:T=100,200;B'")
    m.add_argument("--reps", type=int, default=None)
    m.add_argument("--J", type=int, default=None)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--full-scale", action="store_true", help="25000 replications and J=999")
    m.add_argument("--fixed-h", action="store_true", help="draw the rotation H once per cell")
    m.add_argument("--tau3", type=float, default=None, help="override the t^theta coefficient")
    m.add_argument("--out-dir", help="directory for CSV, text and JSON tables")
    m.set_defaults(func=cmd_mc)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        if args.threads is None:
            args.threads = _default_threads()
        if args.threads < 1:
            raise InputError("--threads must be positive")
        return args.func(args)
    except GcprError as e:
        print(f"gcpr: error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, UnicodeDecodeError) as e:
        print(f"gcpr: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
