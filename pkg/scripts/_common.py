"""Shared driver for the figure scripts."""
from __future__ import annotations

import argparse
import logging
from pathlib import Path

from christoffel_ls.experiments import ExperimentConfig, run_conditioning_sweep, run_sweep
from christoffel_ls.plots import emit_plots

CONFIGS = Path(__file__).resolve().parent / "configs"


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", default="results", help="where CSVs and gnuplot scripts go")
    p.add_argument("--trials", type=int, help="override the trial count (default 10; 50 gives smoother curves)")
    p.add_argument("--seed", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(config: str, args, conditioning=False, **changes):
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    cfg = ExperimentConfig.from_json(CONFIGS / config)
    for key in ("trials", "seed"):
        if getattr(args, key) is not None:
            changes[key] = getattr(args, key)
    if changes:
        cfg = cfg.replace(**changes)
    out = Path(args.out_dir) / Path(cfg.out).name
    if "K" in changes:
        out = out.with_name(out.name.replace("K20000", f"K{cfg.K}"))
    res = (run_conditioning_sweep if conditioning else run_sweep)(cfg, out)
    print(f"{res.csv_path}: {len(res.rows)} rows")
    return res
