"""Figure presets, experiment runners and the CSV/JSON output formats.

CSV files start with ``#key=value`` metadata lines (values JSON-encoded),
then a header line and the rows. JSON outputs are ``{"meta": ..., "data": ...}``
and validate against ``schema/output.schema.json`` shipped with the package.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace
from importlib import resources
from typing import Callable

import numpy as np

from . import __version__
from .intensity import IntensityCurve, expected_count, intensity_analytic, intensity_numeric
from .kernels import (
    Exponential,
    HawkesParams,
    KernelSpec,
    MittagLeffler,
    NoKernel,
    kernel_to_dict,
    tml_triple,
)
from .simulation import CountHistogram, SeedSpec, count_distribution, poisson_pmf, tv_distance

DEFAULT_SEED = 20240917
DEFAULT_RUNS = 10_000


# ---------------------------------------------------------------- presets


@dataclass(frozen=True)
class DistributionPreset:
    """One comparison figure: HPTML vs a limiting process over a grid of cells."""

    name: str
    base: HawkesParams
    t_values: tuple
    variant: str
    variant_values: tuple
    comparison: str

    def cells(self):
        for t in self.t_values:
            for v in self.variant_values:
                yield float(t), replace(self.base, **{self.variant: v})


FIG1_PARAMS = HawkesParams(lambda0=1.0, alpha=0.1, beta=0.9, nu=1.0, gamma=0.1)

DISTRIBUTION_PRESETS = {
    "fig2": DistributionPreset(
        "fig2", HawkesParams(1.0, 0.01, 0.9, 0.01, 1.0), (1.0, 15.0), "beta", (0.9, 0.99), "poisson"
    ),
    "fig3": DistributionPreset(
        "fig3", HawkesParams(1.0, 0.1, 0.99, 0.01, 1.0), (1.0, 10.0), "alpha", (0.1, 0.5),
        "exponential",
    ),
    "fig4": DistributionPreset(
        "fig4", HawkesParams(1.0, 0.1, 0.99, 0.01, 1.0), (1.0, 10.0), "alpha", (0.1, 0.5), "ml"
    ),
    "fig5": DistributionPreset(
        "fig5", HawkesParams(1.0, 0.5, 0.5, 1.0, 1.0), (1.0, 10.0), "beta", (0.5, 0.7), "poisson"
    ),
}

PRESET_NAMES = ("fig1",) + tuple(DISTRIBUTION_PRESETS)


def comparison_kernel(kind: str, params: HawkesParams) -> KernelSpec:
    """Kernel of the limiting process a preset compares against."""
    if kind == "poisson":
        return NoKernel()
    if kind == "exponential":
        return Exponential(params.gamma)
    if kind == "ml":
        return MittagLeffler(params.beta, params.gamma)
    if kind == "tml":
        return params.kernel()
    raise ValueError(f"unknown comparison process {kind!r}")


def override_preset(preset: DistributionPreset, overrides: dict) -> DistributionPreset:
    """Preset with explicit parameter or t-grid overrides applied.

    Overriding the varied parameter collapses the variant axis to that value.
    """
    fields = {k: v for k, v in overrides.items() if k in HawkesParams.__dataclass_fields__}
    out = replace(preset, base=replace(preset.base, **fields))
    if preset.variant in fields:
        out = replace(out, variant_values=(fields[preset.variant],))
    if "t_values" in overrides:
        out = replace(out, t_values=tuple(overrides["t_values"]))
    return out


def kernel_for(kind: str, params: HawkesParams) -> KernelSpec:
    """Kernel named ``kind`` built from the matching fields of ``params``."""
    return comparison_kernel("poisson" if kind == "none" else kind, params)


def process_mean(params: HawkesParams, spec: KernelSpec, t: float) -> float:
    """E[N(t)] for the process with kernel ``spec``, by the series formula."""
    if isinstance(spec, NoKernel) or params.alpha == 0:
        return params.lambda0 * t
    beta, nu, gamma = tml_triple(spec)
    return expected_count(HawkesParams(params.lambda0, params.alpha, beta, nu, gamma), t)


# ---------------------------------------------------------------- runners


def metadata(kind: str, **fields) -> dict:
    return {"kind": kind, "version": __version__, **fields}


def run_fig1(step: float = 0.01, t_max: float = 15.0) -> dict:
    """Analytic and inverted intensity over (0, t_max] at the Fig. 1 parameters."""
    p = FIG1_PARAMS
    n = int(round(t_max / step))
    ts = [round(step * k, 12) for k in range(1, n + 1)]
    rows = []
    for t in ts:
        a = intensity_analytic(p, t)
        try:
            num, _ = intensity_numeric(p, t)
        except ArithmeticError as exc:
            raise ArithmeticError(f"inversion failed at t={t}: {exc}") from exc
        rows.append((t, a, num, abs(a - num)))
    meta = metadata("intensity", preset="fig1", params=p.as_dict(),
                    max_abs_diff=max(r[3] for r in rows))
    return {"meta": meta, "columns": ["t", "lambda_analytic", "lambda_numeric", "abs_diff"],
            "rows": rows}


def intensity_table(params: HawkesParams, ts) -> dict:
    rows = []
    for t in ts:
        a = intensity_analytic(params, t)
        num, _ = intensity_numeric(params, t)
        rows.append((t, a, num, abs(a - num)))
    meta = metadata("intensity", params=params.as_dict(),
                    max_abs_diff=max((r[3] for r in rows), default=0.0))
    return {"meta": meta, "columns": ["t", "lambda_analytic", "lambda_numeric", "abs_diff"],
            "rows": rows}


def histogram_record(h: CountHistogram, params: HawkesParams, spec: KernelSpec) -> dict:
    return {
        "kernel": kernel_to_dict(spec),
        "n": list(range(len(h.freq))),
        "frequency": list(h.freq),
        "probability": [round(x, 6) for x in h.pmf().tolist()],
        "mean": h.mean,
        "std_error_of_mean": h.std_error_of_mean,
        "expected_count": process_mean(params, spec, h.t),
    }


def run_distribution_preset(
    name: "str | DistributionPreset",
    n_runs: int = DEFAULT_RUNS,
    master_seed: int = DEFAULT_SEED,
    workers: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> dict:
    """Histograms of HPTML and its comparison process for every cell of a preset.

    Cell ``i`` of figure ``k`` draws the HPTML histogram from seed
    ``derive(k, i, 0)`` and the comparison from ``derive(k, i, 1)``, so all
    histograms are independent samples.
    """
    preset = DISTRIBUTION_PRESETS[name] if isinstance(name, str) else name
    name = preset.name
    seed = SeedSpec(master_seed)
    fig = int(name.removeprefix("fig")) if name.startswith("fig") else 0
    cells = []
    for idx, (t, params) in enumerate(preset.cells()):
        label = f"{name} cell t={t}, {preset.variant}={getattr(params, preset.variant)}"
        if progress:
            progress(label)
        try:
            spec = params.kernel()
            other = comparison_kernel(preset.comparison, params)
            h1 = count_distribution(params, spec, t, n_runs, seed.derive(fig, idx, 0), workers)
            h2 = count_distribution(params, other, t, n_runs, seed.derive(fig, idx, 1), workers)
        except Exception as exc:
            raise type(exc)(f"{label}: {exc}") from exc
        cells.append({
            "t": t,
            "params": params.as_dict(),
            "variant": {preset.variant: getattr(params, preset.variant)},
            "hptml": histogram_record(h1, params, spec),
            "comparison": histogram_record(h2, params, other),
            "tv_distance": tv_distance(h1, h2),
        })
    meta = metadata(
        "preset", preset=name, params=preset.base.as_dict(), seed=master_seed, n_runs=n_runs,
        t_values=list(preset.t_values), variant=preset.variant,
        variant_values=list(preset.variant_values), comparison=preset.comparison,
    )
    return {"meta": meta, "data": {"cells": cells}}


def distribution_output(h: CountHistogram, params: HawkesParams, spec: KernelSpec,
                        master_seed: int, extra: dict | None = None) -> dict:
    meta = metadata("distribution", params=params.as_dict(), kernel=kernel_to_dict(spec),
                    seed=master_seed, n_runs=h.n_runs, t=h.t, **(extra or {}))
    return {"meta": meta, "data": histogram_record(h, params, spec)}


# ---------------------------------------------------------------- formats


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(stream, meta: dict, columns, rows) -> None:
    for key, value in meta.items():
        stream.write(f"#{key}={json.dumps(value, sort_keys=True)}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def csv_text(meta: dict, columns, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, meta, columns, rows)
    return buf.getvalue()


def read_csv(text: str):
    """Parse CSV text into (meta, columns, rows of floats)."""
    meta, columns, rows = {}, None, []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key] = json.loads(value)
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append([float(v) for v in line.split(",")])
    return meta, columns or [], rows


def json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def histogram_csv(h: CountHistogram, meta: dict) -> str:
    pmf = h.pmf()
    rows = [(n, f, f"{p:.6f}") for n, (f, p) in enumerate(zip(h.freq, pmf))]
    return csv_text(meta, ["n", "frequency", "probability"], rows)


def load_histogram(text: str) -> CountHistogram:
    """Histogram from a distribution CSV or JSON output."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        data = doc["data"]
        return CountHistogram(float(doc["meta"]["t"]), tuple(int(f) for f in data["frequency"]))
    meta, columns, rows = read_csv(text)
    if columns[:2] != ["n", "frequency"]:
        raise ValueError("not a histogram CSV: expected columns n, frequency, probability")
    freq = [0] * (int(max(r[0] for r in rows)) + 1 if rows else 1)
    for r in rows:
        freq[int(r[0])] = int(r[1])
    return CountHistogram(float(meta["t"]), tuple(freq))


def curve_from_csv(text: str) -> IntensityCurve:
    """Read an intensity CSV back into an analytic IntensityCurve."""
    meta, columns, rows = read_csv(text)
    params = HawkesParams(**meta["params"])
    col = columns.index("lambda_analytic")
    return IntensityCurve(
        params,
        tuple(r[0] for r in rows),
        tuple(r[col] for r in rows),
        tuple("analytic" for _ in rows),
        tuple(0.0 for _ in rows),
    )


def output_schema() -> dict:
    return json.loads(resources.files("hptml").joinpath("schema/output.schema.json").read_text())


def preset_summary(doc: dict) -> list:
    """(t, variant, tv, hptml mean, comparison mean) per cell, for reports."""
    out = []
    for c in doc["data"]["cells"]:
        out.append((c["t"], c["variant"], c["tv_distance"], c["hptml"]["mean"],
                    c["comparison"]["mean"]))
    return out


def poisson_tv(h: CountHistogram, mean: float) -> float:
    """TV distance between a histogram and the exact Poisson(mean) pmf."""
    n_max = max(len(h.freq) - 1, int(mean + 20 * np.sqrt(mean + 1) + 20))
    return tv_distance(h, poisson_pmf(mean, n_max))
