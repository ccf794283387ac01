"""Parameter sweeps with CSV and SVG outputs.

A sweep varies one axis (rho in dB, sigma2_SI in dB, the antenna count
M = N, or the pair count K) and evaluates every combination of strategy,
duplex mode, and CSIT mode it was asked for, each as a deterministic row
(source "de") and/or Monte-Carlo rows (source "mc", one per seed). Cells are
independent, so they can run in a process pool; the row order never depends
on the worker count. Monte-Carlo cells reuse the same seed list at every axis
value, which pairs the noise across the axis and keeps the curves smooth.

All dB-to-linear conversions happen here or in the CLI; the core modules only
ever see linear powers.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..config import DUPLEX_MODES, STRATEGIES, LargeScaleProfile, SystemConfig
from ..config import CSIT_MODES, draw_topology, uniform_profile
from ..deteq import de_sum_rate
from ..montecarlo import RateReport, mc_sum_rate

AXES = ("rho_dB", "sigma2_SI_dB", "M", "K")

CSV_HEADER = (
    "axis,axis_value,strategy,duplex,csit,source,seed,n_draws,"
    "sum_rate,rate_hop1,rate_hop2,rate_common,t_split,lambda"
)

WORKERS_ENV = "RSRELAY_WORKERS"

_FLOAT_FIELDS = (
    "axis_value",
    "sum_rate",
    "rate_hop1",
    "rate_hop2",
    "rate_common",
    "t_split",
    "lambda",
)
_INT_FIELDS = ("seed", "n_draws")


@dataclass(frozen=True)
class SweepSpec:
    """Everything needed to reproduce one sweep.

    ``base`` supplies every parameter the axis does not override. Seeds apply
    to Monte-Carlo cells only. ``profile_mode`` is "uniform" (all gains equal
    to ``profile_beta``) or "topology" (random user positions drawn once per
    K from ``profile_seed``).
    """

    name: str
    axis: str
    values: tuple
    base: SystemConfig
    strategies: tuple = None
    duplexes: tuple = None
    csit_modes: tuple = None
    sources: tuple = ("de", "mc")
    seeds: tuple = (1,)
    n_draws: int = 200
    n_lambda: int = 500
    profile_mode: str = "uniform"
    profile_beta: float = 1.0
    profile_seed: int = 0
    disk_diameter_m: float = 1000.0
    emit: tuple = ("csv", "plot")

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.values)
        if len(values) == 0:
            raise ValueError("values must not be empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("values must be strictly increasing")
        object.__setattr__(self, "values", values)
        for name, allowed in (
            ("strategies", STRATEGIES),
            ("duplexes", DUPLEX_MODES),
            ("csit_modes", CSIT_MODES),
        ):
            got = getattr(self, name)
            if got is None:
                fallback = {
                    "strategies": (self.base.strategy,),
                    "duplexes": (self.base.duplex_mode,),
                    "csit_modes": (self.base.csit_mode,),
                }[name]
                object.__setattr__(self, name, fallback)
            else:
                got = tuple(got)
                bad = [g for g in got if g not in allowed]
                if bad:
                    raise ValueError(f"{name} entries {bad} not in {allowed}")
                object.__setattr__(self, name, got)
        sources = tuple(self.sources)
        if not sources or any(s not in ("de", "mc") for s in sources):
            raise ValueError("sources must be a non-empty subset of ('de', 'mc')")
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if "mc" in sources and not self.seeds:
            raise ValueError("mc source needs at least one seed")
        if self.n_draws <= 0 or self.n_lambda <= 0:
            raise ValueError("n_draws and n_lambda must be positive")
        if self.profile_mode not in ("uniform", "topology"):
            raise ValueError("profile_mode must be 'uniform' or 'topology'")
        emit = tuple(self.emit)
        if any(e not in ("csv", "plot") for e in emit):
            raise ValueError("emit entries must be 'csv' or 'plot'")
        object.__setattr__(self, "emit", emit)


def apply_axis(base: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Override one swept parameter on the base configuration."""
    if axis == "rho_dB":
        return replace(base, rho=10.0 ** (value / 10.0))
    if axis == "sigma2_SI_dB":
        return replace(base, sigma2_SI=10.0 ** (value / 10.0))
    if axis == "M":
        n_antennas = int(round(value))
        return replace(base, M=n_antennas, N=n_antennas)
    if axis == "K":
        return replace(base, K=int(round(value)))
    raise ValueError(f"unknown axis {axis!r}")


def profile_for(spec: SweepSpec, cfg: SystemConfig) -> LargeScaleProfile:
    """Build the large-scale profile a cell should use."""
    if spec.profile_mode == "uniform":
        return uniform_profile(cfg, spec.profile_beta)
    return draw_topology(cfg, spec.profile_seed, spec.disk_diameter_m)


def report_to_row(
    report: RateReport, axis: str, axis_value: float, cfg: SystemConfig
) -> dict:
    """Flatten a rate report into one CSV row."""
    return {
        "axis": axis,
        "axis_value": float(axis_value),
        "strategy": cfg.strategy,
        "duplex": cfg.duplex_mode,
        "csit": cfg.csit_mode,
        "source": report.meta["source"],
        "seed": int(report.meta["seed"]),
        "n_draws": int(report.meta["n_draws"]),
        "sum_rate": float(report.sum_rate),
        "rate_hop1": float(np.sum(report.R_SR)),
        "rate_hop2": float(np.sum(report.R_RD_private) + report.R_c),
        "rate_common": float(report.R_c),
        "t_split": float(report.meta["t"]),
        "lambda": float(report.meta["lambda"]),
    }


def _run_cell(args: tuple) -> dict:
    spec, axis_value, strategy, duplex, csit, source, seed = args
    cfg = apply_axis(spec.base, spec.axis, axis_value)
    cfg = replace(cfg, strategy=strategy, duplex_mode=duplex, csit_mode=csit)
    profile = profile_for(spec, cfg)
    if source == "de":
        report = de_sum_rate(cfg, profile)
    else:
        report = mc_sum_rate(cfg, profile, spec.n_draws, seed, spec.n_lambda)
    return report_to_row(report, spec.axis, axis_value, cfg)


def _cells(spec: SweepSpec) -> list[tuple]:
    cells = []
    for value in spec.values:
        for strategy in spec.strategies:
            for duplex in spec.duplexes:
                for csit in spec.csit_modes:
                    for source in spec.sources:
                        seeds = spec.seeds if source == "mc" else (-1,)
                        for seed in seeds:
                            cells.append(
                                (spec, value, strategy, duplex, csit, source, seed)
                            )
    return cells


def worker_count() -> int:
    """Process count from the environment, default 1 (serial)."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        count = int(raw)
    except ValueError as e:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from e
    if count < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1, got {count}")
    return count


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Evaluate every cell of the sweep, in a stable deterministic order."""
    cells = _cells(spec)
    workers = worker_count()
    rows = []
    if workers == 1:
        for cell in cells:
            rows.append(_run_cell_checked(cell))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, cell) for cell in cells]
            for cell, future in zip(cells, futures):
                try:
                    rows.append(future.result())
                except Exception as e:
                    raise RuntimeError(_cell_label(cell)) from e
    return rows


def _cell_label(cell: tuple) -> str:
    spec, value, strategy, duplex, csit, source, seed = cell
    return (
        f"sweep cell failed: {spec.axis}={value}, strategy={strategy}, "
        f"duplex={duplex}, csit={csit}, source={source}, seed={seed}"
    )


def _run_cell_checked(cell: tuple) -> dict:
    try:
        return _run_cell(cell)
    except Exception as e:
        raise RuntimeError(_cell_label(cell)) from e


def emit_csv(table: list[dict], path) -> None:
    """Write rows under the fixed header. Full float precision, LF endings."""
    fields = CSV_HEADER.split(",")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fields)
            for row in table:
                writer.writerow([_format_cell(row[f], f) for f in fields])
    except OSError as e:
        raise OSError(f"cannot write CSV at {path}: {e}") from e


def _format_cell(value, fieldname: str) -> str:
    if fieldname in _FLOAT_FIELDS:
        return repr(float(value))
    if fieldname in _INT_FIELDS:
        return str(int(value))
    return str(value)


def read_table(path) -> list[dict]:
    """Read a CSV written by :func:`emit_csv` back into typed rows."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER.split(","):
            raise ValueError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        rows = []
        for raw in reader:
            row = dict(raw)
            for f in _FLOAT_FIELDS:
                row[f] = float(row[f])
            for f in _INT_FIELDS:
                row[f] = int(row[f])
            rows.append(row)
    return rows


_AXIS_LABELS = {
    "rho_dB": "rho (dB)",
    "sigma2_SI_dB": "self-interference variance (dB)",
    "M": "relay antennas (M = N)",
    "K": "source-destination pairs",
}


def _series_key(row: dict) -> tuple:
    return (row["strategy"], row["duplex"], row["csit"])


def emit_plot(table: list[dict], path, title: str | None = None) -> None:
    """Render sum-rate curves: deterministic lines, Monte-Carlo markers.

    Output is an SVG with pinned hash salt and no timestamp metadata, so a
    rerun of the same table produces identical bytes.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    keys = sorted({_series_key(r) for r in table})
    colors = {k: f"C{i % 10}" for i, k in enumerate(keys)}
    axis = table[0]["axis"] if table else "rho_dB"

    with plt.rc_context({"svg.hashsalt": "rsrelay"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.6))
        for key in keys:
            strategy, duplex, csit = key
            label = f"{strategy} {duplex} {csit}"
            style = "-" if duplex == "FD" else "--"
            de_rows = sorted(
                (r for r in table if _series_key(r) == key and r["source"] == "de"),
                key=lambda r: r["axis_value"],
            )
            if de_rows:
                ax.plot(
                    [r["axis_value"] for r in de_rows],
                    [r["sum_rate"] for r in de_rows],
                    style,
                    color=colors[key],
                    label=f"{label} (DE)",
                )
            mc_rows = [
                r for r in table if _series_key(r) == key and r["source"] == "mc"
            ]
            if mc_rows:
                xs = sorted({r["axis_value"] for r in mc_rows})
                ys = [
                    float(
                        np.mean(
                            [r["sum_rate"] for r in mc_rows if r["axis_value"] == x]
                        )
                    )
                    for x in xs
                ]
                ax.plot(
                    xs,
                    ys,
                    linestyle="none",
                    marker="o",
                    markerfacecolor="none",
                    color=colors[key],
                    label=f"{label} (MC)",
                )
        ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
        ax.set_ylabel("sum rate (bit/s/Hz)")
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OSError(f"cannot write plot at {path}: {e}") from e
        finally:
            plt.close(fig)


def compare_de_mc(table: list[dict], tolerance: float) -> dict:
    """Pair DE rows with seed-averaged MC rows and check relative error.

    Returns {"cells": [...], "max_rel_err": float, "ok": bool}. Raises if any
    DE row lacks MC partners or vice versa.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    groups: dict[tuple, dict] = {}
    for row in table:
        key = (
            row["axis"],
            row["axis_value"],
            row["strategy"],
            row["duplex"],
            row["csit"],
        )
        bucket = groups.setdefault(key, {"de": None, "mc": []})
        if row["source"] == "de":
            bucket["de"] = row["sum_rate"]
        else:
            bucket["mc"].append(row["sum_rate"])
    cells = []
    worst = 0.0
    for key in sorted(groups):
        bucket = groups[key]
        if bucket["de"] is None or not bucket["mc"]:
            raise ValueError(f"unpaired comparison cell {key}")
        mc_mean = float(np.mean(bucket["mc"]))
        de_val = float(bucket["de"])
        if mc_mean == 0.0:
            rel = 0.0 if de_val == 0.0 else float("inf")
        else:
            rel = abs(de_val - mc_mean) / abs(mc_mean)
        worst = max(worst, rel)
        cells.append(
            {
                "axis": key[0],
                "axis_value": key[1],
                "strategy": key[2],
                "duplex": key[3],
                "csit": key[4],
                "de": de_val,
                "mc_mean": mc_mean,
                "n_seeds": len(bucket["mc"]),
                "rel_err": rel,
                "ok": rel < tolerance,
            }
        )
    return {"cells": cells, "max_rel_err": worst, "ok": all(c["ok"] for c in cells)}


_SPEC_KEYS = frozenset(
    {
        "name", "axis", "values", "base", "strategies", "duplexes",
        "csit_modes", "sources", "seeds", "n_draws", "n_lambda",
        "profile", "emit",
    }
)
_PROFILE_KEYS = frozenset({"mode", "beta", "seed", "disk_diameter_m"})


def spec_from_dict(data: dict) -> SweepSpec:
    """Build a SweepSpec from parsed JSON (dB fields converted here)."""
    extra = sorted(set(data) - _SPEC_KEYS)
    if extra:
        raise ValueError(f"unknown sweep spec keys {extra}")
    base_in = dict(data.get("base", {}))
    duplex = str(base_in.pop("duplex", "fd")).upper()
    strategy_raw = str(base_in.pop("strategy", "rs")).lower()
    strategy = {"rs": "RS", "nors": "NoRS"}.get(strategy_raw)
    if strategy is None:
        raise ValueError(f"unknown strategy {strategy_raw!r}")
    cfg_kwargs = {
        "K": int(base_in.pop("k", 4)),
        "N": int(base_in.pop("n", 20)),
        "M": int(base_in.pop("m", 20)),
        "T": int(base_in.pop("t_block", 500)),
        "tau": int(base_in.pop("tau", 8)),
        "p_tr": 10.0 ** (float(base_in.pop("p_tr_db", 2.0)) / 10.0),
        "rho": 10.0 ** (float(base_in.pop("rho_db", 20.0)) / 10.0),
        "sigma2_SI": 10.0 ** (float(base_in.pop("sigma2_si_db", 0.0)) / 10.0),
        "duplex_mode": duplex,
        "strategy": strategy,
        "csit_mode": str(base_in.pop("csit", "imperfect")),
    }
    if base_in:
        raise ValueError(f"unknown base config keys {sorted(base_in)}")
    base = SystemConfig(**cfg_kwargs)

    def _norm_list(name, mapping):
        raw = data.get(name)
        if raw is None:
            return None
        return tuple(mapping[str(v).lower()] for v in raw)

    profile = dict(data.get("profile", {}))
    extra_profile = sorted(set(profile) - _PROFILE_KEYS)
    if extra_profile:
        raise ValueError(f"unknown profile keys {extra_profile}")
    return SweepSpec(
        name=str(data["name"]),
        axis=str(data["axis"]),
        values=tuple(data["values"]),
        base=base,
        strategies=_norm_list("strategies", {"rs": "RS", "nors": "NoRS"}),
        duplexes=_norm_list("duplexes", {"fd": "FD", "hd": "HD"}),
        csit_modes=_norm_list(
            "csit_modes", {"perfect": "perfect", "imperfect": "imperfect"}
        ),
        sources=tuple(data.get("sources", ("de", "mc"))),
        seeds=tuple(data.get("seeds", (1,))),
        n_draws=int(data.get("n_draws", 200)),
        n_lambda=int(data.get("n_lambda", 500)),
        profile_mode=str(profile.get("mode", "uniform")),
        profile_beta=float(profile.get("beta", 1.0)),
        profile_seed=int(profile.get("seed", 0)),
        disk_diameter_m=float(profile.get("disk_diameter_m", 1000.0)),
        emit=tuple(data.get("emit", ("csv", "plot"))),
    )


def load_spec(path) -> SweepSpec:
    """Load a sweep specification from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return spec_from_dict(data)
