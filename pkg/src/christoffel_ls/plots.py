"""Gnuplot scripts from sweep CSVs.

Each script embeds its curves as inline datablocks, so it runs on its own
with ``gnuplot <script>`` and writes a PNG next to itself. Styles:

``fig1``  error ``E_tau`` against ``M``, one panel per (domain, function, d)
``fig3``  constant ``C`` against ``N``, one panel per (domain, d)
``fig6``  off-grid error ``E_tau_tilde`` against ``M``, one panel per
          (domain, function, d), one curve per (method, rule, K)

Mean rows are used when present; otherwise every trial row is plotted as
points.
"""
from __future__ import annotations

import csv
import re
from collections import defaultdict
from pathlib import Path

from .errors import ConfigurationError, DataError

STYLES = ("fig1", "fig3", "fig6")
REQUIRED = ("method", "m_rule", "d", "domain", "function", "K", "N", "M", "trial", "status",
            "E_tau", "E_tau_tilde", "C", "row_type")

_SPEC = {
    "fig1": dict(panel=("domain", "function", "d"), curve=("method", "m_rule"), x="M", y="E_tau",
                 xlabel="M", ylabel="relative error on the grid"),
    "fig3": dict(panel=("domain", "d"), curve=("method", "m_rule"), x="N", y="C",
                 xlabel="N", ylabel="C"),
    "fig6": dict(panel=("domain", "function", "d"), curve=("method", "m_rule", "K"), x="M", y="E_tau_tilde",
                 xlabel="M", ylabel="relative error off the grid"),
}


def read_csv_strict(path) -> list[dict]:
    """Parse a results CSV, raising :class:`DataError` with the offending line number."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not text.strip():
        raise DataError(f"{path}: empty CSV")
    reader = csv.reader(text.splitlines())
    header = next(reader)
    missing = [c for c in REQUIRED if c not in header]
    if missing:
        raise DataError(f"{path}:1: missing columns {missing}")
    rows = []
    for line_no, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(header):
            raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(fields)}")
        row = dict(zip(header, fields))
        for col in ("N", "M", "K", "d"):
            if not row[col].isdigit():
                raise DataError(f"{path}:{line_no}: column {col} is not a nonnegative integer: {row[col]!r}")
        for col in ("E_tau", "E_tau_tilde", "C"):
            if row[col]:
                try:
                    float(row[col])
                except ValueError:
                    raise DataError(f"{path}:{line_no}: column {col} is not a number: {row[col]!r}") from None
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: CSV has a header but no data rows")
    return rows


def _slug(parts) -> str:
    return re.sub(r"[^A-Za-z0-9.=]+", "_", "_".join(str(p) for p in parts)).strip("_")


def _script(title, xlabel, ylabel, png, curves, source) -> str:
    lines = [
        f"# generated from {source}",
        "set terminal pngcairo size 800,600",
        f"set output '{png}'",
        f"set title \"{title}\" noenhanced",
        f"set xlabel \"{xlabel}\"",
        f"set ylabel \"{ylabel}\"",
        "set logscale y",
        "set format y '10^{%L}'",
        "set key outside right noenhanced",
        "set grid",
    ]
    plots = []
    for i, (label, pts, style) in enumerate(curves):
        lines.append(f"$d{i} << EOD")
        lines.extend(f"{x} {y}" for x, y in pts)
        lines.append("EOD")
        plots.append(f"$d{i} using 1:2 with {style} title \"{label}\"")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def emit_plots(csv_path, style: str, out_dir=None) -> list[Path]:
    """Write one gnuplot script per panel; returns the script paths."""
    if style not in STYLES:
        raise ConfigurationError(f"unknown plot style {style!r}; choose from {STYLES}")
    spec = _SPEC[style]
    rows = read_csv_strict(csv_path)
    out_dir = Path(out_dir) if out_dir is not None else Path(csv_path).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    has_means = any(r["row_type"] == "mean" for r in rows)
    use = [r for r in rows if (r["row_type"] == "mean") == has_means and r[spec["y"]]]
    panels: dict[tuple, dict[tuple, list]] = defaultdict(lambda: defaultdict(list))
    for r in use:
        panel = tuple(r[k] for k in spec["panel"])
        curve = tuple(r[k] for k in spec["curve"])
        panels[panel][curve].append((int(r[spec["x"]]), float(r[spec["y"]])))
    if not panels:
        raise DataError(f"{csv_path}: no rows carry {spec['y']} values to plot")
    paths = []
    for panel, curves in sorted(panels.items()):
        slug = _slug((style,) + panel)
        title = ", ".join(f"{k}={v}" for k, v in zip(spec["panel"], panel))
        entries = [
            (" ".join(curve), sorted(pts), "linespoints" if has_means else "points")
            for curve, pts in sorted(curves.items())
        ]
        path = out_dir / f"{slug}.gp"
        path.write_text(_script(title, spec["xlabel"], spec["ylabel"], f"{slug}.png", entries, Path(csv_path).name),
                        encoding="utf-8")
        paths.append(path)
    return paths
