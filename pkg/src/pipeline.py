import math
import logging
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
import pandas as pd

from src.ccc import DEFAULT_GRID, AoccResult, IntervalGrid, sweep
from src.concurrency import run_bounded
from src.denoisers import DenoiserConfig, DenoiserVariant, Norm, denoise_mask
from src.errors import MissingLabelError
from src.esr import EsrResult, esr_windowed, stream_esr
from src.labeled_metrics import METRIC_COLUMNS, MetricsReport, confusion_from_mask, report
from src.models import EventStream


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)

DEFAULT_RADII = tuple(range(2, 15, 2))
ESR_COLUMNS = ["ntss", "ln", "esr"]


#-----------------------------
# :: Config Grids
#-----------------------------

def dwf_configs(radii: Sequence[int] = DEFAULT_RADII, buffer_size: int = 200, support_count: int = 1,
                norm: Norm = Norm.CHEBYSHEV) -> list[tuple[int, DenoiserConfig]]:
    """One DWF config per radius, keyed by the radius, sharing the other knobs."""
    return [(r, DenoiserConfig(DenoiserVariant.DWF, r, buffer_size, support_count, norm)) for r in radii]


def threshold_configs(thresholds: Sequence[float]) -> list[tuple[float, DenoiserConfig]]:
    """One score-threshold config per threshold, keyed by the threshold."""
    return [(tau, DenoiserConfig(DenoiserVariant.SCORE_THRESHOLD, threshold=tau)) for tau in thresholds]


# ----------------------------
# :: Sweep Row Class
# ----------------------------

@dataclass(frozen=True, slots=True)
class SweepRow:
    param: Hashable
    n_kept: int
    aocc: AoccResult
    metrics: MetricsReport | None = None
    esr: EsrResult | None = None


@dataclass(frozen=True, slots=True)
class DenoiserSweep:
    rows: tuple[SweepRow, ...]
    best_index: int

    @property
    def best_param(self) -> Hashable:
        return self.rows[self.best_index].param

    def to_frame(self, labeled: bool = False, with_esr: bool = False) -> pd.DataFrame:
        records = []
        for row in self.rows:
            record = {"param": row.param, "n_kept": row.n_kept,
                      "aocc_sum": row.aocc.aocc_sum, "aocc_trapezoid": row.aocc.aocc_trapezoid}
            if labeled:
                record.update({k: v for k, v in row.metrics.to_row().items() if k in METRIC_COLUMNS})
            if with_esr:
                record.update(row.esr.to_row() if row.esr else {k: math.nan for k in ESR_COLUMNS})
            records.append(record)
        return pd.DataFrame.from_records(records)


#-----------------------------
# :: Run Sweep Function
#-----------------------------

"""
Denoises one input stream with every configuration, then scores each output with AOCC
and optionally with the label metrics and ESR. ESR covers the whole output, or with
`esr_window_us` the mean over windows of that length. Denoising and curve computation
fan out over workers; rows come back in configuration order.
"""

def run_sweep(stream: EventStream, configs: Sequence[tuple[Hashable, DenoiserConfig]],
              grid: IntervalGrid = DEFAULT_GRID, scores: np.ndarray | None = None, labeled: bool = False,
              with_esr: bool = False, esr_m: int | None = None, esr_window_us: int | None = None,
              n_jobs: int | None = None) -> DenoiserSweep:
    if not configs:
        raise ValueError("sweep needs at least one denoiser configuration")
    if labeled and not stream.labeled:
        raise MissingLabelError("label metrics need a labeled input stream")
    grid.check_duration(stream.duration)

    masks = run_bounded(lambda item: denoise_mask(stream, item[1], scores), configs, n_jobs)
    kept = [(param, stream.take(mask)) for (param, _), mask in zip(configs, masks)]
    aocc_sweep = sweep(kept, grid, n_jobs)

    rows = []
    for (param, out), mask, (_, result) in zip(kept, masks, aocc_sweep.entries):
        metrics = report(confusion_from_mask(stream.labels, mask)) if labeled else None
        esr_result = None
        if with_esr:
            try:
                esr_result = (esr_windowed(out, esr_window_us, esr_m) if esr_window_us
                              else stream_esr(out, esr_m))
            except ValueError as e:
                logger.warning(f"No ESR for parameter {param} ({type(e).__name__}): {e}")
        rows.append(SweepRow(param, len(out), result, metrics, esr_result))

    logger.info(f"Denoiser sweep over {len(rows)} configurations: best parameter {aocc_sweep.best_param}")
    return DenoiserSweep(tuple(rows), aocc_sweep.best_index)
