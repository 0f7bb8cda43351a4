"""Command-line entry point: ``hptml <subcommand> [options]``.

Settings are merged as preset < ``--config`` JSON file < explicit flags.
Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .experiments import (
    DEFAULT_RUNS,
    DEFAULT_SEED,
    DISTRIBUTION_PRESETS,
    PRESET_NAMES,
    csv_text,
    distribution_output,
    histogram_csv,
    intensity_table,
    json_text,
    kernel_for,
    load_histogram,
    metadata,
    override_preset,
    run_distribution_preset,
    run_fig1,
)
from .kernels import HawkesParams, kernel_cdf, kernel_density, kernel_to_dict
from .simulation import SeedSpec, count_distribution, simulate_cluster, simulate_thinning, tv_distance
from .special import ml_three_param

PARAM_NAMES = ("lambda0", "alpha", "beta", "nu", "gamma")
PARAM_DEFAULTS = {"lambda0": 1.0, "alpha": 0.5, "beta": 0.9, "nu": 0.5, "gamma": 1.0}


class UsageError(Exception):
    pass


def _add_params(p: argparse.ArgumentParser, kernel: bool = True) -> None:
    for name in PARAM_NAMES:
        p.add_argument(f"--{name}", type=float, default=None)
    if kernel:
        p.add_argument("--kernel", choices=["tml", "ml", "exponential", "none"], default=None,
                       help="excitation kernel built from beta, nu, gamma (default tml)")


def _add_output(p: argparse.ArgumentParser, formats=("csv",)) -> None:
    p.add_argument("--out", default=None, help="output path (default stdout)")
    if len(formats) > 1:
        p.add_argument("--format", choices=formats, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hptml", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None, help="JSON file of settings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml-eval", help="evaluate the Mittag-Leffler function")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-11)

    p = sub.add_parser("kernel", help="density and CDF of a kernel over a grid")
    p.add_argument("--kind", choices=["tml", "ml", "exponential"], default=None)
    for name in ("beta", "nu", "gamma"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    _add_output(p)

    p = sub.add_parser("intensity", help="analytic vs inverted expected intensity")
    _add_params(p, kernel=False)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    _add_output(p)

    p = sub.add_parser("simulate", help="event times of one simulated path")
    _add_params(p)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replication", type=int, default=None)
    p.add_argument("--method", choices=["cluster", "thinning"], default=None)
    _add_output(p)

    p = sub.add_parser("distribution", help="Monte-Carlo histogram of N(t)")
    _add_params(p)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_output(p, ("csv", "json"))

    p = sub.add_parser("preset", help="reproduce a figure as plot data")
    p.add_argument("name", choices=PRESET_NAMES)
    _add_params(p, kernel=False)
    p.add_argument("--t", type=float, nargs="+", default=None, help="override the t values")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_output(p, ("csv", "json"))

    p = sub.add_parser("compare", help="TV distance between two histogram files")
    p.add_argument("first")
    p.add_argument("second")
    return parser


def _settings(args: argparse.Namespace, defaults: dict) -> tuple[dict, list]:
    """Merge defaults < config file < flags; also return the keys set explicitly."""
    merged = dict(defaults)
    explicit = []
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        for key, value in cfg.items():
            if key == "params" and isinstance(value, dict):
                merged.update(value)
                explicit.extend(value)
            else:
                merged[key] = value
                explicit.append(key)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = value
        explicit.append(key)
    return merged, sorted(set(explicit))


def _params(s: dict) -> HawkesParams:
    try:
        return HawkesParams(**{k: float(s[k]) for k in PARAM_NAMES})
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid parameters: {exc}") from exc


def _positive(s: dict, key: str, kind=float):
    try:
        value = kind(s[key])
    except (KeyError, TypeError, ValueError):
        raise UsageError(f"--{key} is required and must be a number") from None
    if not value > 0:
        raise UsageError(f"--{key} must be positive, got {value}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_ml_eval(args, s):
    value = ml_three_param(args.a, args.b, args.c, args.z, args.tol)
    sys.stdout.write(f"{value!r}\n")


def cmd_kernel(args, s):
    s = {"kind": "tml", "beta": 0.9, "nu": 0.5, "gamma": 1.0, "tmax": 10.0, "points": 200, **s}
    params = HawkesParams(1.0, 0.0, float(s["beta"]), float(s["nu"]), float(s["gamma"]))
    spec = kernel_for(s["kind"], params)
    tmax = _positive(s, "tmax")
    n = _positive(s, "points", int)
    rows = []
    for t in np.linspace(tmax / n, tmax, n).tolist():
        rows.append((t, kernel_density(spec, t), kernel_cdf(spec, t)))
    meta = metadata("kernel", kernel=kernel_to_dict(spec))
    _emit(csv_text(meta, ["t", "density", "cdf"], rows), s.get("out"))


def cmd_intensity(args, s):
    s = {**PARAM_DEFAULTS, "tmax": 15.0, "step": 0.1, **s}
    params = _params(s)
    tmax, step = _positive(s, "tmax"), _positive(s, "step")
    n = int(round(tmax / step))
    ts = [round(step * k, 12) for k in range(1, n + 1)]
    doc = intensity_table(params, ts)
    _emit(csv_text(doc["meta"], doc["columns"], doc["rows"]), s.get("out"))


def cmd_simulate(args, s):
    s = {**PARAM_DEFAULTS, "kernel": "tml", "T": 10.0, "seed": DEFAULT_SEED, "replication": 0,
         "method": "cluster", **s}
    params = _params(s)
    spec = kernel_for(s["kernel"], params)
    seed = SeedSpec(int(s["seed"]))
    T = _positive(s, "T")
    rep = int(s["replication"])
    if s["method"] == "thinning":
        try:
            path = simulate_thinning(params, spec, T, seed, rep)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        path = simulate_cluster(params, spec, T, seed, rep)
    meta = metadata("simulate", params=params.as_dict(), kernel=kernel_to_dict(spec),
                    seed=seed.master_seed, replication=rep, T=T, method=s["method"])
    _emit(csv_text(meta, ["time"], [(t,) for t in path.times.tolist()]), s.get("out"))


def cmd_distribution(args, s):
    s = {**PARAM_DEFAULTS, "kernel": "tml", "t": 10.0, "runs": DEFAULT_RUNS,
         "seed": DEFAULT_SEED, "format": "csv", **s}
    params = _params(s)
    spec = kernel_for(s["kernel"], params)
    t = _positive(s, "t")
    runs = _positive(s, "runs", int)
    if runs < 100:
        raise UsageError("--runs must be at least 100")
    h = count_distribution(params, spec, t, runs, SeedSpec(int(s["seed"])))
    doc = distribution_output(h, params, spec, int(s["seed"]))
    if s["format"] == "json":
        _emit(json_text(doc), s.get("out"))
    else:
        _emit(histogram_csv(h, doc["meta"]), s.get("out"))


def cmd_preset(args, s, explicit):
    name = args.name
    fmt = s.get("format")
    if name == "fig1":
        if set(explicit) & set(PARAM_NAMES + ("t", "runs", "seed")):
            raise UsageError("fig1 has fixed parameters; only --out and --format apply")
        doc = run_fig1()
        if fmt == "json":
            _emit(json_text({"meta": doc["meta"],
                             "data": {"columns": doc["columns"], "rows": doc["rows"]}}), s.get("out"))
        else:
            _emit(csv_text(doc["meta"], doc["columns"], doc["rows"]), s.get("out"))
        return
    overrides = {k: float(s[k]) for k in PARAM_NAMES if k in s}
    if "t" in s:
        ts = s["t"] if isinstance(s["t"], list) else [s["t"]]
        overrides["t_values"] = [float(x) for x in ts]
    try:
        preset = override_preset(DISTRIBUTION_PRESETS[name], overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    runs = int(s.get("runs", DEFAULT_RUNS))
    seed = int(s.get("seed", DEFAULT_SEED))
    doc = run_distribution_preset(preset, runs, seed)
    doc["meta"]["overrides"] = sorted(overrides)
    if fmt == "csv":
        rows = []
        for c in doc["data"]["cells"]:
            v = next(iter(c["variant"].values()))
            for which in ("hptml", "comparison"):
                h = c[which]
                for n, f, p in zip(h["n"], h["frequency"], h["probability"]):
                    rows.append((c["t"], v, which, n, f, f"{p:.6f}"))
        cols = ["t", doc["meta"]["variant"], "process", "n", "frequency", "probability"]
        _emit(csv_text(doc["meta"], cols, rows), s.get("out"))
    else:
        _emit(json_text(doc), s.get("out"))


def cmd_compare(args, s):
    try:
        with open(args.first, encoding="utf-8") as fh:
            h1 = load_histogram(fh.read())
        with open(args.second, encoding="utf-8") as fh:
            h2 = load_histogram(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read histogram: {exc}") from exc
    try:
        d = tv_distance(h1, h2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(f"{d!r}\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage and 0 after --help
        return int(exc.code or 0)
    try:
        s, explicit = _settings(args, {})
        if args.command == "ml-eval":
            cmd_ml_eval(args, s)
        elif args.command == "kernel":
            cmd_kernel(args, s)
        elif args.command == "intensity":
            cmd_intensity(args, s)
        elif args.command == "simulate":
            cmd_simulate(args, s)
        elif args.command == "distribution":
            cmd_distribution(args, s)
        elif args.command == "preset":
            cmd_preset(args, s, explicit)
        elif args.command == "compare":
            cmd_compare(args, s)
    except UsageError as exc:
        print(f"hptml: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # parameter validation in the library
        print(f"hptml: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"hptml: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
