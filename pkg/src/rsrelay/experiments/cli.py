"""Command-line entry point.

Subcommands:
  sweep <spec.json>   run a sweep specification
  compare <csv> --tol run the DE-vs-MC comparison on an existing table
  fig1 .. fig5        rerun one of the checked-in figure sweeps
                      (--desk small dimensions, --paper full dimensions)

Every power-like flag takes dB; conversion to linear happens here. Flags
override the loaded specification before the sweep runs.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .sweep import (
    SweepSpec,
    compare_de_mc,
    emit_csv,
    emit_plot,
    load_spec,
    read_table,
    run_sweep,
    spec_from_dict,
)

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rho-db", type=float, help="data SNR in dB")
    parser.add_argument("--sigma-si-db", type=float, help="self-interference variance in dB")
    parser.add_argument("--m", type=int, help="relay transmit antennas")
    parser.add_argument("--n", type=int, help="relay receive antennas")
    parser.add_argument("--k", type=int, help="source-destination pairs")
    parser.add_argument("--t-block", type=int, help="coherence block length")
    parser.add_argument("--tau", type=int, help="pilot symbols per block")
    parser.add_argument("--p-tr-db", type=float, help="pilot power in dB")
    parser.add_argument("--duplex", choices=("fd", "hd"))
    parser.add_argument("--strategy", choices=("rs", "nors"))
    parser.add_argument("--csit", choices=("perfect", "imperfect"))
    parser.add_argument("--seed", type=int, help="replace the Monte-Carlo seed list")
    parser.add_argument("--draws", type=int, help="Monte-Carlo draws per cell")
    parser.add_argument("--out", default=".", help="output directory")


def _apply_overrides(spec: SweepSpec, args: argparse.Namespace) -> SweepSpec:
    base = spec.base
    base_updates = {}
    if args.rho_db is not None:
        base_updates["rho"] = 10.0 ** (args.rho_db / 10.0)
    if args.sigma_si_db is not None:
        base_updates["sigma2_SI"] = 10.0 ** (args.sigma_si_db / 10.0)
    if args.p_tr_db is not None:
        base_updates["p_tr"] = 10.0 ** (args.p_tr_db / 10.0)
    if args.m is not None:
        base_updates["M"] = args.m
    if args.n is not None:
        base_updates["N"] = args.n
    if args.k is not None:
        base_updates["K"] = args.k
    if args.t_block is not None:
        base_updates["T"] = args.t_block
    if args.tau is not None:
        base_updates["tau"] = args.tau
    if args.duplex is not None:
        base_updates["duplex_mode"] = args.duplex.upper()
    if args.strategy is not None:
        base_updates["strategy"] = {"rs": "RS", "nors": "NoRS"}[args.strategy]
    if args.csit is not None:
        base_updates["csit_mode"] = args.csit
    if base_updates:
        base = replace(base, **base_updates)
    spec_updates = {"base": base}
    if args.duplex is not None:
        spec_updates["duplexes"] = (base.duplex_mode,)
    if args.strategy is not None:
        spec_updates["strategies"] = (base.strategy,)
    if args.csit is not None:
        spec_updates["csit_modes"] = (base.csit_mode,)
    if args.seed is not None:
        spec_updates["seeds"] = (args.seed,)
    if args.draws is not None:
        spec_updates["n_draws"] = args.draws
    return replace(spec, **spec_updates)


def _figure_spec(figure: str, scale: str) -> SweepSpec:
    name = f"{figure}_{scale}.json"
    ref = resources.files("rsrelay.experiments").joinpath("figspecs", name)
    import json

    with ref.open("r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def _run_and_emit(spec: SweepSpec, out_dir: str) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = run_sweep(spec)
    csv_path = out / f"{spec.name}.csv"
    emit_csv(table, csv_path)
    print(f"wrote {csv_path}")
    if "plot" in spec.emit:
        svg_path = out / f"{spec.name}.svg"
        emit_plot(table, svg_path, title=spec.name)
        print(f"wrote {svg_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rsrelay",
        description="Relay sum-rate sweeps: Monte Carlo and deterministic equivalents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a sweep from a JSON specification")
    p_sweep.add_argument("spec", help="path to the sweep JSON file")
    _add_overrides(p_sweep)

    p_cmp = sub.add_parser("compare", help="check DE against MC rows in a sweep CSV")
    p_cmp.add_argument("csv", help="path to a sweep CSV")
    p_cmp.add_argument("--tol", type=float, required=True, help="relative tolerance")

    for figure in FIGURES:
        p_fig = sub.add_parser(figure, help=f"rerun the {figure} sweep")
        scale = p_fig.add_mutually_exclusive_group()
        scale.add_argument("--desk", action="store_true", help="small dimensions (default)")
        scale.add_argument("--paper", action="store_true", help="full dimensions")
        _add_overrides(p_fig)

    args = parser.parse_args(argv)

    if args.command == "sweep":
        spec = _apply_overrides(load_spec(args.spec), args)
        return _run_and_emit(spec, args.out)

    if args.command == "compare":
        report = compare_de_mc(read_table(args.csv), args.tol)
        for cell in report["cells"]:
            verdict = "PASS" if cell["ok"] else "FAIL"
            print(
                f"{cell['axis']}={cell['axis_value']:g} {cell['strategy']} "
                f"{cell['duplex']} {cell['csit']}: de={cell['de']:.6g} "
                f"mc={cell['mc_mean']:.6g} (n={cell['n_seeds']}) "
                f"rel_err={cell['rel_err']:.3%} {verdict}"
            )
        print(
            f"max rel err {report['max_rel_err']:.3%} "
            f"{'within' if report['ok'] else 'EXCEEDS'} tolerance {args.tol:.3%}"
        )
        return 0 if report["ok"] else 1

    scale = "paper" if getattr(args, "paper", False) else "desk"
    spec = _apply_overrides(_figure_spec(args.command, scale), args)
    return _run_and_emit(spec, args.out)


if __name__ == "__main__":
    sys.exit(main())
