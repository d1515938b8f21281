"""Grid runner: fans grid points out to workers and assembles reports in order."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from .checks import grid_point_rows
from .config import ExperimentConfig
from .report import ReportRow, to_csv, to_json


@dataclass
class RunResult:
    rows: list[ReportRow]
    csv: str
    json: str

    @property
    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if r.failed]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def _point(args):
    cfg, (p, n, d) = args
    return grid_point_rows(cfg, p, n, d)


def run(cfg: ExperimentConfig, timings: bool = False, write: bool = True) -> RunResult:
    """Run every configured check; exit code 0 iff no constant-free check failed."""
    cfg.validate()
    jobs = [(cfg, g) for g in cfg.grid]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_point, jobs))
    else:
        chunks = [_point(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    provenance = {
        "library": "kresultant",
        "version": __version__,
        "numpy": np.__version__,
        # output paths are left out so that reruns elsewhere produce identical reports
        "config": {k: v for k, v in cfg.to_dict().items() if k not in ("csv_path", "json_path")},
    }
    result = RunResult(rows=rows, csv=to_csv(rows, timings), json=to_json(rows, provenance, timings))
    if write:
        for path, text in ((cfg.csv_path, result.csv), (cfg.json_path, result.json)):
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(text)
    return result
