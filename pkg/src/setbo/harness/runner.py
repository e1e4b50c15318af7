"""Execution of the (strategy, L, seed) cross-product with crash-safe CSV output.

Per cell two files are written and flushed after every iteration:
``history__<cell>.csv`` holds only deterministic columns, so reruns are
bitwise identical, and ``timing__<cell>.csv`` holds the wall-clock times.
"""

from __future__ import annotations

import dataclasses
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..boloop import BoAborted, run_strategy
from ..objectives import build_objective
from .config import ExperimentConfig
from .results import (
    HISTORY_COLUMNS,
    TIMING_COLUMNS,
    ResultTable,
    read_table,
)

SUMMARY_BEST_COLUMNS = ("strategy", "L", "n_seeds", "final_best_mean", "final_best_std", "final_best")
SUMMARY_TIME_COLUMNS = ("strategy", "L", "n_seeds", "total_seconds_mean", "total_seconds_std", "total_seconds")

EXIT_OK = 0
EXIT_OBJECTIVE_FAILED = 1
EXIT_BAD_CONFIG = 2


def output_dir(cfg: ExperimentConfig, base: str | os.PathLike | None = None) -> Path:
    """``<base>/<first 12 hex digits of the config hash>``."""
    root = Path(base if base is not None else (cfg.out or "results"))
    return root / cfg.sha256[:12]


def cell_name(strategy: str, L, seed: int) -> str:
    return f"{strategy}__L{'exact' if L is None else L}__seed{seed}"


def run_cell(cfg: ExperimentConfig, strategy: str, L, seed: int, out: Path) -> tuple[str, str | None]:
    """Run one cell, streaming records to its CSV files.  Returns ``(name, error)``."""
    name = cell_name(strategy, L, seed)
    objective = build_objective(cfg.objective["name"], **{k: v for k, v in cfg.objective.items() if k != "name"})
    history = ResultTable(HISTORY_COLUMNS, cfg.sha256, path=str(out / f"history__{name}.csv"))
    timing = ResultTable(TIMING_COLUMNS, cfg.sha256, path=str(out / f"timing__{name}.csv"))

    def on_record(rec):
        key = (strategy, L, seed, rec.iteration)
        history.append(key + (rec.best_so_far, rec.observed_y))
        timing.append(key + (rec.wall_seconds,))

    try:
        run_strategy(objective, cfg.bo_config(strategy, L, seed), callback=on_record)
    except BoAborted as exc:
        return name, str(exc)
    return name, None


def _cell_job(args):
    cfg_dict, strategy, L, seed, out = args
    return run_cell(ExperimentConfig(**cfg_dict), strategy, L, seed, Path(out))


def _fmt_pm(mean: float, std: float) -> str:
    return f"{mean:.3f} ± {std:.3f}"


def summarize(cfg: ExperimentConfig, out: Path) -> tuple[ResultTable, ResultTable]:
    """Mean and std over seeds of the final best value and of the total run time."""
    best = ResultTable(SUMMARY_BEST_COLUMNS, cfg.sha256, path=str(out / "summary.csv"))
    times = ResultTable(SUMMARY_TIME_COLUMNS, cfg.sha256, path=str(out / "summary_timing.csv"))
    for strategy in cfg.strategies:
        for L in cfg.L:
            finals, totals = [], []
            for seed in cfg.seeds:
                name = cell_name(strategy, L, seed)
                hist = read_table(out / f"history__{name}.csv")
                tim = read_table(out / f"timing__{name}.csv")
                if hist.rows:
                    finals.append(hist.column("best_so_far")[-1])
                    totals.append(tim.column("wall_seconds")[-1])
            if not finals:
                continue
            mb, sb = statistics.fmean(finals), statistics.pstdev(finals)
            mt, st = statistics.fmean(totals), statistics.pstdev(totals)
            best.append((strategy, L, len(finals), mb, sb, _fmt_pm(mb, sb)))
            times.append((strategy, L, len(totals), mt, st, _fmt_pm(mt, st)))
    return best, times


def run_experiment(cfg: ExperimentConfig, base=None, jobs: int = 1, log=print) -> int:
    """Run every cell of ``cfg`` and write the summaries.  Returns an exit code."""
    out = output_dir(cfg, base)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.canonical_json() + "\n", encoding="utf-8")
    cells = cfg.cells()
    if jobs > 1 and len(cells) > 1:
        cfg_dict = dataclasses.asdict(cfg)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_job, [(cfg_dict, s, L, seed, str(out)) for s, L, seed in cells]))
    else:
        results = [run_cell(cfg, s, L, seed, out) for s, L, seed in cells]
    failed = [(name, err) for name, err in results if err is not None]
    for name, err in failed:
        log(f"{name}: {err}")
    summarize(cfg, out)
    log(f"results written to {out}")
    return EXIT_OBJECTIVE_FAILED if failed else EXIT_OK


__all__ = [
    "EXIT_BAD_CONFIG",
    "EXIT_OBJECTIVE_FAILED",
    "EXIT_OK",
    "cell_name",
    "output_dir",
    "run_cell",
    "run_experiment",
    "summarize",
]
