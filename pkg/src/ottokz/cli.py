"""Batch front end: run single cycles, sweeps, scaling fits, bound reports.

Exit codes: 0 ok, 2 configuration error, 3 simulation error, 4 unusable fit
window, 1 failed --assert.  Numeric output is serialized with 17 significant
digits and rows follow grid order regardless of worker scheduling, so
repeated runs of the same configuration are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .analysis import (
    UnusableWindowError,
    adiabatic_floor_time,
    efficiency_bound,
    fit_kz_exponent,
    w_infinity,
)
from .config import ConfigError, LoadedConfig, config_hash, load_config
from .cycle import CycleConfig, run_cycle
from .model import CriticalExponents

EXIT_OK = 0
EXIT_ASSERT = 1
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_WINDOW = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_default(obj):
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"not JSON serializable: {obj!r}")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _manifest(out_dir: str, loaded: LoadedConfig, outputs: list[str]) -> None:
    payload = {
        "config_hash": config_hash(loaded.resolved),
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": sorted(outputs),
    }
    _write_json(os.path.join(out_dir, "manifest.json"), payload)


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("OTTOKZ_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _load(args) -> LoadedConfig:
    try:
        return load_config(args.config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _record_totals(record) -> dict:
    counts: dict[str, int] = {}
    for mode in record.per_mode:
        counts[mode.label] = counts.get(mode.label, 0) + 1
    return {
        "e_a": record.e_a,
        "e_b": record.e_b,
        "e_c": record.e_c,
        "e_d": record.e_d,
        "e_a_ground": record.e_a_ground,
        "e_d_ground": record.e_d_ground,
        "e_ex_a": record.e_ex_a,
        "q_in": record.q_in,
        "q_out": record.q_out,
        "w": record.w,
        "eta": record.eta,
        "p": record.p,
        "tau_total": record.tau_total,
        "converged": record.converged,
        "cycles_run": record.cycles_run,
        "mode_counts": counts,
    }


def cmd_run(args) -> int:
    loaded = _load(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        record = run_cycle(loaded.cycle)
    except Exception as exc:  # noqa: BLE001 - map any stroke failure to exit 3
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    json_path = os.path.join(args.out, "run.json")
    csv_path = os.path.join(args.out, "per_mode.csv")
    payload = {"config_hash": config_hash(loaded.resolved), **_record_totals(record)}
    _write_json(json_path, payload)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "E_A", "E_B", "E_C", "E_D", "Q_in", "Q_out", "W", "class"])
        for mode in record.per_mode:
            writer.writerow(
                [
                    _fmt(mode.k),
                    _fmt(mode.e_a),
                    _fmt(mode.e_b),
                    _fmt(mode.e_c),
                    _fmt(mode.e_d),
                    _fmt(mode.q_in),
                    _fmt(mode.q_out),
                    _fmt(mode.w),
                    mode.label,
                ]
            )
    _manifest(args.out, loaded, [json_path, csv_path])
    print(f"wrote {json_path} and {csv_path}")
    return EXIT_OK


def _sweep_point(task) -> dict:
    cfg: CycleConfig
    cfg, axis, value = task
    if axis == "tau2":
        cfg = dataclasses.replace(cfg, tau2=value)
    else:
        cfg = dataclasses.replace(cfg, h2=value)
    record = run_cycle(cfg)
    return {
        "value": value,
        "w": record.w,
        "q_in": record.q_in,
        "q_out": record.q_out,
        "eta": record.eta,
        "p": record.p,
    }


def _safe_sweep_point(task) -> dict:
    try:
        return _sweep_point(task)
    except Exception as exc:  # noqa: BLE001 - per-point failures go to the error column
        return {"value": task[2], "error": f"{type(exc).__name__}: {exc}"}


def cmd_sweep(args) -> int:
    loaded = _load(args)
    if loaded.sweep is None:
        print("config error: [sweep] section required for the sweep command", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    sweep = loaded.sweep
    grid = sweep.grid()
    tasks = [(loaded.cycle, sweep.axis, value) for value in grid]

    w_inf = None
    if sweep.axis == "tau2":
        try:
            w_inf = w_infinity(loaded.cycle, method="numeric")
        except Exception:  # noqa: BLE001 - column is optional by contract
            w_inf = None

    jobs = _jobs(args)
    if jobs == 1 or len(tasks) == 1:
        rows = [_safe_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_safe_sweep_point, tasks))

    csv_path = os.path.join(args.out, f"sweep_{sweep.axis}.csv")
    header = [sweep.axis, "W", "Q_in", "Q_out", "eta", "P"]
    if w_inf is not None:
        header.append("W_minus_Winf")
    header.append("error")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            if "error" in row:
                out = [_fmt(row["value"])] + [""] * (len(header) - 2) + [row["error"]]
            else:
                out = [
                    _fmt(row["value"]),
                    _fmt(row["w"]),
                    _fmt(row["q_in"]),
                    _fmt(row["q_out"]),
                    _fmt(row["eta"]),
                    _fmt(row["p"]),
                ]
                if w_inf is not None:
                    out.append(_fmt(row["w"] - w_inf))
                out.append("")
            writer.writerow(out)
    outputs = [csv_path]
    if w_inf is not None:
        winf_path = os.path.join(args.out, "w_infinity.json")
        _write_json(winf_path, {"w_infinity": w_inf, "method": "numeric"})
        outputs.append(winf_path)
    _manifest(args.out, loaded, outputs)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_fit(args) -> int:
    loaded = _load(args) if args.config else None
    exponents = CriticalExponents(nu=args.nu, z=args.z, d=args.d, x=args.x)

    if args.w_inf_source == "value":
        if args.w_inf_value is None:
            print("config error: --w-inf-source value requires --w-inf-value", file=sys.stderr)
            return EXIT_CONFIG
        w_inf = args.w_inf_value
    else:
        if loaded is None:
            print("config error: --config required for numeric/analytic W_inf", file=sys.stderr)
            return EXIT_CONFIG
        try:
            w_inf = w_infinity(loaded.cycle, method=args.w_inf_source)
        except ValueError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG

    points = []
    with open(args.csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "tau2" not in reader.fieldnames or "W" not in reader.fieldnames:
            print("config error: fit input must be a tau2 sweep CSV", file=sys.stderr)
            return EXIT_CONFIG
        for row in reader:
            if row.get("error"):
                continue
            points.append((float(row["tau2"]), float(row["W"])))

    window = None
    if args.window == "auto":
        if loaded is None:
            print("config error: --window auto requires --config", file=sys.stderr)
            return EXIT_CONFIG
        taus = [t for t, _ in points]
        window = (min(taus), min(max(taus), adiabatic_floor_time(loaded.cycle)))
    elif args.window is not None:
        lo, hi = args.window.split(":")
        window = (float(lo), float(hi))

    try:
        fit = fit_kz_exponent(points, w_inf, window=window, exponents=exponents)
    except UnusableWindowError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_WINDOW

    payload = {
        "fitted_exponent": fit.exponent,
        "predicted_exponent": fit.predicted,
        "amplitude": fit.amplitude,
        "residual": fit.residual,
        "window": list(fit.window),
        "n_points": fit.n_points,
        "w_infinity": w_inf,
        "w_inf_source": args.w_inf_source,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "fit.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {path}")
    else:
        print(text)
    if args.assert_ and abs(fit.exponent - fit.predicted) > args.tol:
        print(
            f"assertion failed: |{fit.exponent:.4f} - {fit.predicted:.4f}| > {args.tol}",
            file=sys.stderr,
        )
        return EXIT_ASSERT
    return EXIT_OK


def cmd_bound(args) -> int:
    loaded = _load(args)
    try:
        result = efficiency_bound(loaded.cycle)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload = dataclasses.asdict(result)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "bound.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _manifest(args.out, loaded, [path])
        print(f"wrote {path}")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ottokz",
        description="Otto-cycle simulator for critical free-fermion chains",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=None, help="worker processes (or OTTOKZ_JOBS)")

    p_run = sub.add_parser("run", help="run one cycle, emit JSON + per-mode CSV")
    common(p_run)
    p_run.set_defaults(func=cmd_run, out_default="out")

    p_sweep = sub.add_parser("sweep", help="sweep tau2 or h2 per the [sweep] section")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep, out_default="out")

    p_fit = sub.add_parser("fit", help="fit the work-scaling exponent from a sweep CSV")
    p_fit.add_argument("--csv", required=True, help="CSV produced by the sweep command")
    p_fit.add_argument("--config", default=None, help="INI configuration file")
    p_fit.add_argument("--out", default=None)
    p_fit.add_argument("--jobs", type=int, default=None)
    p_fit.add_argument(
        "--w-inf-source", choices=("numeric", "analytic", "value"), default="numeric"
    )
    p_fit.add_argument("--w-inf-value", type=float, default=None)
    p_fit.add_argument("--window", default=None, help="LO:HI, or 'auto' for the adiabatic floor")
    p_fit.add_argument("--nu", type=float, default=1.0)
    p_fit.add_argument("--z", type=float, default=1.0)
    p_fit.add_argument("--d", type=int, default=1)
    p_fit.add_argument("--x", type=int, default=1, choices=(1, 2))
    p_fit.add_argument("--assert", dest="assert_", action="store_true")
    p_fit.add_argument("--tol", type=float, default=0.05)
    p_fit.set_defaults(func=cmd_fit)

    p_bound = sub.add_parser("bound", help="efficiency ceiling for the configuration")
    common(p_bound)
    p_bound.set_defaults(func=cmd_bound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) is None and hasattr(args, "out_default"):
        args.out = args.out_default
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
