import sys
import logging
import argparse
from pathlib import Path
from types import MappingProxyType
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import pandas as pd

from src.ccc import GRID_PRESETS, IntervalGrid, ccc, aocc
from src.denoisers import (
    DEFAULT_THRESHOLDS, DenoiserConfig, DenoiserVariant, Norm, ScoredStream, denoise_mask, oracle_scores,
)
from src.errors import AoccError, UsageError
from src.esr import esr_windowed, stream_esr
from src.frame_contrast import accumulate_frame, contrast
from src.io_formats import (
    CCC_SCHEMA, EVAL_SCHEMA, ROC_SCHEMA, SWEEP_SCHEMA, read_scores, read_stream, write_scores,
    write_stream, write_table,
)
from src.labeled_metrics import confusion, report, roc
from src.models import EventStream, SensorGeometry
from src.noise import NoiseConfig, inject
from src.pipeline import DEFAULT_RADII, dwf_configs, run_sweep, threshold_configs
from src.plotting import PlotOptions, plot_csvs
from src.synth import SCENES, SceneConfig, synthesize


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


def _error_line(kind: str, exc: BaseException | str, name: str | None = None) -> str:
    message = " ".join(str(exc).split())
    return f"error={kind} type={name or type(exc).__name__} message={message}"


# ----------------------------
# :: Argument Parser Class
# ----------------------------

"""
argparse reports bad flags with its own free-form text; this parser prints the same
machine-readable error line as data failures, then exits with the usage status.
"""

class CliParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, _error_line("usage", message, "ArgumentError") + "\n")


#-----------------------------
# :: Argument Types
#-----------------------------

def _grid_ms(text: str) -> IntervalGrid:
    try:
        start, stop, step = (float(part) for part in text.split(":"))
        return IntervalGrid.from_range_ms(start, stop, step)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected start:stop:step in ms, got {text!r} ({e})")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _non_negative(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a value >= 0, got {text!r}")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


#-----------------------------
# :: Parser Builder
#-----------------------------

def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", type=Path, help="event file (.csv, or .bin/.aocc binary)")
    p.add_argument("--format", choices=["csv", "bin"], default=None, help="input format (default: from suffix)")


def _add_output(p: argparse.ArgumentParser, required: bool = True, help: str = "output file") -> None:
    p.add_argument("-o", "--output", type=Path, required=required, help=help)


def _add_out_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-format", choices=["csv", "bin"], default=None, help="output format (default: from suffix)")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", choices=sorted(GRID_PRESETS), default="default", help="interval grid preset")
    p.add_argument("--grid-ms", type=_grid_ms, default=None, help="explicit grid start:stop:step in ms")
    p.add_argument("--clip-grid", action="store_true", help="drop intervals longer than the stream")


def _add_scores(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scores", type=Path, default=None, help="per-event scores CSV")
    p.add_argument("--oracle-sigma", type=_non_negative, default=None, help="synthesize oracle scores with this noise")
    p.add_argument("--seed", type=int, default=0)


def _add_dwf(p: argparse.ArgumentParser) -> None:
    p.add_argument("--buffer", type=_positive_int, default=200, help="DWF window size")
    p.add_argument("--support", type=_positive_int, default=1, help="DWF neighbours needed to accept")
    p.add_argument("--norm", choices=[n.value for n in Norm], default=Norm.CHEBYSHEV.value)


def build_parser() -> CliParser:
    parser = CliParser(prog="aocc", description="Event denoising evaluation: AOCC, label metrics, ESR.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--scene", choices=SCENES, default="grating")
    p.add_argument("--width", type=_positive_int, default=64)
    p.add_argument("--height", type=_positive_int, default=64)
    p.add_argument("--duration-ms", type=_positive_int, default=2000)
    p.add_argument("--speed", type=float, default=80.0, help="edge speed in px/s")
    p.add_argument("--period", type=_positive_int, default=16, help="grating period in px")
    p.add_argument("--burst", type=_positive_int, default=2, help="events per pixel per edge crossing")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    _add_out_format(p)

    p = sub.add_parser("frame", help="export the event frame of one window as PGM")
    _add_input(p)
    p.add_argument("--t0-us", type=int, required=True)
    p.add_argument("--t1-us", type=int, required=True)
    _add_output(p, help="output .pgm file")

    p = sub.add_parser("inject", help="add seeded Poisson background noise")
    _add_input(p)
    p.add_argument("--rate", type=_non_negative, required=True, help="noise rate in Hz per pixel")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--polarity-split", type=_unit_interval, default=0.5, help="probability of an ON noise event")
    p.add_argument("--keep-labels", action="store_true", help="keep labels already on a labeled input")
    _add_output(p)
    _add_out_format(p)

    p = sub.add_parser("denoise", help="run a baseline denoiser")
    _add_input(p)
    p.add_argument("--method", choices=[v.value for v in DenoiserVariant], default=DenoiserVariant.DWF.value)
    p.add_argument("--radius", type=_positive_int, default=4, help="DWF search radius")
    _add_dwf(p)
    p.add_argument("--tau", type=_unit_interval, default=0.5, help="score threshold")
    _add_scores(p)
    p.add_argument("--write-scores", type=Path, default=None, help="save the scores used")
    _add_output(p)
    _add_out_format(p)

    p = sub.add_parser("eval", help="label metrics, ESR and AOCC of one stream")
    _add_input(p)
    p.add_argument("--kept", type=Path, default=None, help="denoised stream to score against the labeled input")
    p.add_argument("--labeled", action="store_true", help="confusion-based metrics")
    p.add_argument("--esr", action="store_true", help="event structural ratio")
    p.add_argument("--esr-m", type=_positive_int, default=None, help="ESR reference event count (default N)")
    p.add_argument("--esr-window-ms", type=_positive_int, default=None, help="average ESR over windows")
    p.add_argument("--aocc", action="store_true", help="area of the contrast curve")
    _add_grid(p)
    _add_output(p, required=False, help="output CSV (default stdout)")

    p = sub.add_parser("ccc", help="continuous contrast curve")
    _add_input(p)
    _add_grid(p)
    _add_output(p)

    p = sub.add_parser("sweep", help="AOCC across denoiser parameters")
    _add_input(p)
    p.add_argument("--method", choices=["dwf", "threshold"], default="dwf")
    p.add_argument("--radii", type=_int_list, default=DEFAULT_RADII)
    _add_dwf(p)
    p.add_argument("--thresholds", type=_float_list, default=DEFAULT_THRESHOLDS)
    _add_scores(p)
    p.add_argument("--labeled", action="store_true", help="add label metric columns")
    p.add_argument("--esr", action="store_true", help="add ESR columns")
    p.add_argument("--esr-m", type=_positive_int, default=None)
    p.add_argument("--esr-window-ms", type=_positive_int, default=None, help="average ESR over windows")
    _add_grid(p)
    p.add_argument("--curves-dir", type=Path, default=None, help="write one CCC CSV per parameter")
    _add_output(p, help="summary CSV")

    p = sub.add_parser("roc", help="ROC curve and AUC of per-event scores")
    _add_input(p)
    p.add_argument("--thresholds", type=_float_list, default=DEFAULT_THRESHOLDS)
    _add_scores(p)
    _add_output(p)

    p = sub.add_parser("plot", help="render CCC, sweep or ROC CSVs as SVG")
    p.add_argument("inputs", type=Path, nargs="+")
    p.add_argument("--title", default=None)
    p.add_argument("--labels", default=None, help="comma-separated legend labels")
    p.add_argument("--width-in", type=float, default=6.4)
    p.add_argument("--height-in", type=float, default=4.0)
    _add_output(p, help="output .svg file")

    return parser


# ----------------------------
# :: Run Config Class
# ----------------------------

"""
Everything one invocation depends on besides input bytes: the subcommand and its parsed
options, frozen.
"""

@dataclass(frozen=True, slots=True)
class RunConfig:
    command: str
    options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "options", MappingProxyType(dict(self.options)))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        options = vars(ns).copy()
        return cls(options.pop("command"), options)

    def __getattr__(self, name: str) -> Any:
        if name.startswith("_") or name == "options":
            raise AttributeError(name)
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


#-----------------------------
# :: Shared Helpers
#-----------------------------

def _load(cfg: RunConfig, path: Path | None = None) -> EventStream:
    """Reads the command's input stream, or `path` when given (the --kept file)."""
    path = path or cfg.input
    stream = read_stream(path, cfg.options.get("format"))
    logger.info(f"Loaded {len(stream)} events from {path}")
    return stream


#-----------------------------
# :: Grid Selection Function
#-----------------------------

"""
An explicit --grid-ms wins over the --grid preset. With --clip-grid, intervals longer
than the stream are dropped instead of failing later with StreamRangeError; clipping
everything away is a usage error.
"""

def _grid(cfg: RunConfig, duration: int) -> IntervalGrid:
    grid = cfg.grid_ms or GRID_PRESETS[cfg.grid]
    if cfg.clip_grid:
        grid = grid.clipped(duration)
        if not len(grid):
            raise UsageError(f"no grid interval fits the stream duration {duration} us")
    return grid


def _grid_name(cfg: RunConfig) -> str:
    # recorded in the CSV meta line
    return "custom" if cfg.grid_ms else cfg.grid


#-----------------------------
# :: Score Source Function
#-----------------------------

"""
Per-event scores for threshold denoising: a --scores file aligned with the input, or
oracle scores drawn from the labels with --oracle-sigma. Either way the result is checked
against the stream length and the [0, 1] range.
"""

def _scores(cfg: RunConfig, stream: EventStream) -> np.ndarray:
    if cfg.scores is not None:
        scores = read_scores(cfg.scores)
    elif cfg.oracle_sigma is not None:
        scores = oracle_scores(stream, cfg.oracle_sigma, cfg.seed).scores
    else:
        raise UsageError("score thresholding needs --scores or --oracle-sigma")
    return ScoredStream(stream, scores).scores


#-----------------------------
# :: Command Handlers
#-----------------------------

def _synth(cfg: RunConfig) -> int:
    scene = SceneConfig(SensorGeometry(cfg.width, cfg.height), cfg.duration_ms * 1_000, cfg.seed, cfg.burst)
    stream = synthesize(cfg.scene, scene, cfg.speed, cfg.period)
    write_stream(stream, cfg.output, cfg.out_format)
    return EXIT_OK


def _frame(cfg: RunConfig) -> int:
    frame = accumulate_frame(_load(cfg), cfg.t0_us, cfg.t1_us)
    cfg.output.write_bytes(frame.to_pgm())
    logger.info(f"Frame [{cfg.t0_us}, {cfg.t1_us}): {frame.on_pixel_count} pixels on, contrast {contrast(frame):.6g}")
    return EXIT_OK


def _inject(cfg: RunConfig) -> int:
    noisy = inject(_load(cfg), NoiseConfig(cfg.rate, cfg.seed, cfg.polarity_split, cfg.keep_labels))
    write_stream(noisy, cfg.output, cfg.out_format)
    return EXIT_OK


def _denoise(cfg: RunConfig) -> int:
    stream = _load(cfg)
    denoiser = DenoiserConfig(cfg.method, cfg.radius, cfg.buffer, cfg.support, cfg.norm, cfg.tau)
    scores = None
    if denoiser.variant is DenoiserVariant.SCORE_THRESHOLD:
        scores = _scores(cfg, stream)
        if cfg.write_scores:
            write_scores(scores, cfg.write_scores)
    kept = stream.take(denoise_mask(stream, denoiser, scores))
    logger.info(f"Denoiser {denoiser.variant.value} kept {len(kept)}/{len(stream)} events")
    write_stream(kept, cfg.output, cfg.out_format)
    return EXIT_OK


"""
One-row evaluation of a stream, or of a --kept output scored against its source. Label
metrics, ESR and AOCC are each opt-in; the ESR reference count lands in the meta line.
"""

def _eval(cfg: RunConfig) -> int:
    if not (cfg.labeled or cfg.esr or cfg.aocc):
        raise UsageError("eval needs at least one of --labeled, --esr, --aocc")
    source = _load(cfg)
    evaluated = _load(cfg, cfg.kept) if cfg.kept else source
    row: dict[str, Any] = {}
    meta: dict[str, Any] = {"n_events": len(evaluated), "duration_us": evaluated.duration}

    if cfg.labeled:
        row.update(report(confusion(source, evaluated)).to_row())
    if cfg.esr:
        if cfg.esr_window_ms:
            result = esr_windowed(evaluated, cfg.esr_window_ms * 1_000, cfg.esr_m)
            meta["esr_window_us"] = cfg.esr_window_ms * 1_000
        else:
            result = stream_esr(evaluated, cfg.esr_m)
        meta["m_ref"] = result.m_ref if result.m_ref is not None else "N"
        row.update(result.to_row())
    if cfg.aocc:
        result = aocc(ccc(evaluated, _grid(cfg, evaluated.duration)))
        meta["grid"] = _grid_name(cfg)
        row.update(aocc_sum=result.aocc_sum, aocc_trapezoid=result.aocc_trapezoid)

    write_table(pd.DataFrame([row]), cfg.output or sys.stdout.buffer, EVAL_SCHEMA, meta)
    return EXIT_OK


def _write_curve(curve, sink, grid_name: str, duration: int, n_events: int) -> None:
    result = aocc(curve)
    meta = {"grid": grid_name, "duration_us": duration, "n_events": n_events,
            "aocc_sum": repr(result.aocc_sum), "aocc_trapezoid": repr(result.aocc_trapezoid)}
    write_table(curve.to_frame(), sink, CCC_SCHEMA, meta)


def _ccc(cfg: RunConfig) -> int:
    stream = _load(cfg)
    curve = ccc(stream, _grid(cfg, stream.duration))
    _write_curve(curve, cfg.output, _grid_name(cfg), stream.duration, len(stream))
    return EXIT_OK


#-----------------------------
# :: Sweep Command Handler
#-----------------------------

"""
Runs one denoiser family over its parameter list and writes the summary table; the best
parameter by AOCC sum goes in the meta line. --curves-dir also keeps every CCC.
"""

def _sweep(cfg: RunConfig) -> int:
    stream = _load(cfg)
    grid = _grid(cfg, stream.duration)
    scores = None
    if cfg.method == "dwf":
        configs = dwf_configs(cfg.radii, cfg.buffer, cfg.support, Norm(cfg.norm))
    else:
        scores = _scores(cfg, stream)
        configs = threshold_configs(cfg.thresholds)

    esr_window_us = cfg.esr_window_ms * 1_000 if cfg.esr_window_ms else None
    result = run_sweep(stream, configs, grid, scores, cfg.labeled, cfg.esr, cfg.esr_m, esr_window_us)
    meta = {"method": cfg.method, "best_param": result.best_param, "grid": _grid_name(cfg),
            "duration_us": stream.duration}
    if cfg.esr:
        meta["m_ref"] = cfg.esr_m or "N"
        if esr_window_us:
            meta["esr_window_us"] = esr_window_us
    write_table(result.to_frame(cfg.labeled, cfg.esr), cfg.output, SWEEP_SCHEMA, meta)

    if cfg.curves_dir:
        cfg.curves_dir.mkdir(parents=True, exist_ok=True)
        for row in result.rows:
            path = cfg.curves_dir / f"ccc_{cfg.method}_{row.param}.csv"
            _write_curve(row.aocc.curve, path, _grid_name(cfg), stream.duration, row.n_kept)
    return EXIT_OK


def _roc(cfg: RunConfig) -> int:
    stream = _load(cfg)
    curve = roc(ScoredStream(stream, _scores(cfg, stream)), cfg.thresholds)
    df = pd.DataFrame({"threshold": curve.thresholds, "fpr": curve.fpr, "tpr": curve.tpr})
    write_table(df, cfg.output, ROC_SCHEMA, {"n_events": len(stream)}, footer={"auc": repr(curve.auc)})
    return EXIT_OK


def _plot(cfg: RunConfig) -> int:
    labels = tuple(cfg.labels.split(",")) if cfg.labels else ()
    plot_csvs(cfg.inputs, cfg.output, PlotOptions(cfg.width_in, cfg.height_in, cfg.title, labels))
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "synth": _synth, "frame": _frame, "inject": _inject, "denoise": _denoise, "eval": _eval,
    "ccc": _ccc, "sweep": _sweep, "roc": _roc, "plot": _plot,
}


#-----------------------------
# :: Run Function
#-----------------------------

def run(cfg: RunConfig) -> int:
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    return COMMANDS[cfg.command](cfg)


#-----------------------------
# :: Main Function
#-----------------------------

"""
Parses argv, runs one command and turns every failure into a single stderr line
`error=<kind> type=<exception> message=<text>`. Usage problems exit 2, data and I/O
problems exit 1.
"""

def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    cfg = RunConfig.from_namespace(args)
    try:
        return run(cfg)
    except UsageError as e:
        print(_error_line(e.kind, e), file=sys.stderr)
        return EXIT_USAGE
    except AoccError as e:
        logger.error(f"Command {cfg.command} failed ({type(e).__name__}): {e}")
        print(_error_line(e.kind, e), file=sys.stderr)
        return EXIT_DATA
    except (ValueError, TypeError) as e:
        logger.error(f"Command {cfg.command} failed ({type(e).__name__}): {e}")
        print(_error_line("value", e), file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        logger.error(f"Command {cfg.command} failed ({type(e).__name__}): {e}")
        print(_error_line("io", e), file=sys.stderr)
        return EXIT_DATA
