import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import pandas as pd
from matplotlib.figure import Figure

from src.errors import StreamFormatError
from src.io_formats import CCC_SCHEMA, ROC_SCHEMA, SWEEP_SCHEMA, read_table


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)


#-----------------------------
# :: Plot Kinds
#-----------------------------

"""
Schema name -> (x column, y column, x label, y label, x scale). CCC curves are drawn
against milliseconds.
"""

PLOT_KINDS = {
    CCC_SCHEMA: ("dt_us", "c_avg", "accumulation interval (ms)", "average contrast", 1e-3),
    SWEEP_SCHEMA: ("param", "aocc_sum", "parameter", "AOCC", 1.0),
    ROC_SCHEMA: ("fpr", "tpr", "false positive rate", "true positive rate", 1.0),
}


@dataclass(frozen=True, slots=True)
class PlotOptions:
    width_in: float = 6.4
    height_in: float = 4.0
    title: str | None = None
    labels: tuple[str, ...] = field(default_factory=tuple)


#-----------------------------
# :: Plot Function
#-----------------------------

"""
Renders one or more result CSVs of the same kind as lines on a single SVG. The kind
comes from each file's schema line; mixing kinds is an error. Output is deterministic:
no timestamp and a fixed hash salt for element ids.
"""

def plot_csvs(inputs: Sequence[str | Path], output: str | Path, options: PlotOptions = PlotOptions()) -> None:
    if not inputs:
        raise ValueError("plot needs at least one input CSV")
    if options.labels and len(options.labels) != len(inputs):
        raise ValueError(f"{len(options.labels)} labels for {len(inputs)} inputs")

    tables = []
    for path in inputs:
        meta, df = read_table(path)
        schema = meta.get("schema")
        if schema not in PLOT_KINDS:
            raise StreamFormatError(f"{path}: cannot plot schema {schema!r}")
        tables.append((schema, df))
    kinds = {schema for schema, _ in tables}
    if len(kinds) > 1:
        raise StreamFormatError(f"cannot mix plot kinds {sorted(kinds)}")
    x_col, y_col, x_label, y_label, x_scale = PLOT_KINDS[kinds.pop()]

    matplotlib.rcParams["svg.hashsalt"] = "aocc"
    fig = Figure(figsize=(options.width_in, options.height_in))
    ax = fig.add_subplot()
    for i, (path, (_, df)) in enumerate(zip(inputs, tables)):
        label = options.labels[i] if options.labels else Path(path).stem
        x = pd.to_numeric(df[x_col], errors="coerce") * x_scale
        ax.plot(x, df[y_col], marker="o" if len(df) <= 60 else None, markersize=3, label=label)
    if x_col == "fpr":
        ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if options.title:
        ax.set_title(options.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(output, format="svg", metadata={"Date": None})
    logger.info(f"Plotted {len(inputs)} curve(s) to {output}")
