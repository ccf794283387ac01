"""Sweep harness, CSV/plot emitters, and the command-line interface."""

from .sweep import (
    AXES,
    CSV_HEADER,
    SweepSpec,
    apply_axis,
    compare_de_mc,
    emit_csv,
    emit_plot,
    load_spec,
    read_table,
    run_sweep,
    spec_from_dict,
    worker_count,
)

__all__ = [
    "AXES",
    "CSV_HEADER",
    "SweepSpec",
    "apply_axis",
    "compare_de_mc",
    "emit_csv",
    "emit_plot",
    "load_spec",
    "read_table",
    "run_sweep",
    "spec_from_dict",
    "worker_count",
]
