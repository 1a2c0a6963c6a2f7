#!/usr/bin/env python3
"""Render figures from the solver's delimited reports.

Consumes the frozen CSV/JSON schemas written by the `ntdball` CLI
(region-grid, verify-bound, moser --ladder-out) and renders:

  * the exponent-region panel(s): classification coloring, the critical
    curve, and the comparison square with corner at N/(N-2);
  * the bound-ratio scatter with horizontal fitted-constant lines;
  * the ladder-norm curves (normalized L^{r_i} norms vs step).

No mathematics is recomputed here; every plotted quantity is a column
of the input files.

Usage:
  plots/render.py --region region.csv [region2.csv ...] \
                  --sweep sweep.csv --ladder ladder.json --out figures/
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

STYLE_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "style.mplstyle")

REGION_COLUMNS = ("N", "p1", "p2", "delta0", "region", "square_bound")
SWEEP_COLUMNS = (
    "b1", "b2", "p1", "p2", "h1_u", "h1_v", "linf_u", "linf_v",
    "A", "B", "ratio_u", "ratio_v", "iterations", "residual", "outcome",
)

REGION_COLORS = {
    "StrictlyBelow": "#3a7d44",
    "OnHyperbola": "#1f3b73",
    "Above": "#b8443c",
}


class SchemaError(Exception):
    pass


@dataclass(frozen=True)
class ReportBundle:
    region_csvs: tuple
    sweep_csv: str
    ladder_json: str
    outdir: str


def read_rows(path, expected_columns):
    """Read a CSV, insisting on the exact frozen header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        for got, want in zip(header, expected_columns):
            if got != want:
                raise SchemaError(f"{path}: expected column {want!r}, found {got!r}")
        if len(header) != len(expected_columns):
            raise SchemaError(f"{path}: expected {len(expected_columns)} columns, found {len(header)}")
        return [dict(zip(header, rec)) for rec in reader]


def _save(fig, outdir, stem):
    paths = []
    for ext in ("svg", "png"):
        path = os.path.join(outdir, f"{stem}.{ext}")
        fig.savefig(path)
        paths.append(path)
    plt.close(fig)
    return paths


def render_region(path, outdir):
    rows = read_rows(path, REGION_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: region file has no rows")
    N = float(rows[0]["N"])
    square = float(rows[0]["square_bound"])
    p1 = [float(r["p1"]) for r in rows]
    p2 = [float(r["p2"]) for r in rows]

    fig, ax = plt.subplots()
    for cls, color in REGION_COLORS.items():
        xs = [x for x, r in zip(p1, rows) if r["region"] == cls]
        ys = [y for y, r in zip(p2, rows) if r["region"] == cls]
        ax.scatter(xs, ys, s=14, color=color, label=cls, zorder=3)

    # critical curve: zero contour of the delta0 column on the grid
    xs = sorted(set(p1))
    ys = sorted(set(p2))
    if len(xs) > 1 and len(ys) > 1:
        lut = {(float(r["p1"]), float(r["p2"])): float(r["delta0"]) for r in rows}
        grid = [[lut[(x, y)] for x in xs] for y in ys]
        ax.contour(xs, ys, grid, levels=[0.0], colors="#1f3b73", linewidths=1.5)

    if square > 1.0:
        ax.add_patch(Rectangle((1.0, 1.0), square - 1.0, square - 1.0,
                               fill=True, alpha=0.15, color="#d3a625",
                               label=f"comparison square, corner {square:g}"))
        ax.plot([square], [square], marker="s", color="#d3a625", markersize=6)

    ax.set_xlabel("p1")
    ax.set_ylabel("p2")
    ax.set_title(f"exponent regions, N = {N:g}")
    ax.legend(loc="upper right", fontsize=8)
    stem = f"region_N{N:g}".replace(".", "_")
    return _save(fig, outdir, stem)


def render_ratio(path, outdir):
    rows = read_rows(path, SWEEP_COLUMNS)
    converged = [r for r in rows if r["outcome"] == "Converged" and r["ratio_u"] != ""]
    fig, ax = plt.subplots()
    if converged:
        b1 = [float(r["b1"]) for r in converged]
        ru = [float(r["ratio_u"]) for r in converged]
        rv = [float(r["ratio_v"]) for r in converged]
        ax.scatter(b1, ru, s=18, color="#3a7d44", label="ratio_u")
        ax.scatter(b1, rv, s=18, marker="x", color="#b8443c", label="ratio_v")
        ax.axhline(max(ru), color="#3a7d44", linestyle="--", linewidth=1,
                   label=f"fitted C0 = {max(ru):.4g}")
        ax.axhline(max(rv), color="#b8443c", linestyle=":", linewidth=1,
                   label=f"fitted C1 = {max(rv):.4g}")
        ax.legend(fontsize=8)
    ax.set_xlabel("b1")
    ax.set_ylabel("sup-norm ratio")
    ax.set_title("bound ratios over the coefficient sweep")
    return _save(fig, outdir, "ratios")


def render_ladder(path, outdir):
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("rows", "linf_u", "linf_v"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    rows = doc["rows"]
    for key in ("i", "r", "normalized_u", "normalized_v"):
        if rows and key not in rows[0]:
            raise SchemaError(f"{path}: ladder rows missing key {key!r}")
    fig, ax = plt.subplots()
    if rows:
        ii = [row["i"] for row in rows]
        ax.plot(ii, [row["normalized_u"] for row in rows], marker="o",
                color="#3a7d44", label="u, normalized L^{r_i}")
        ax.plot(ii, [row["normalized_v"] for row in rows], marker="x",
                color="#b8443c", label="v, normalized L^{r_i}")
    ax.axhline(doc["linf_u"], color="#3a7d44", linestyle="--", linewidth=1, label="sup |u|")
    ax.axhline(doc["linf_v"], color="#b8443c", linestyle=":", linewidth=1, label="sup |v|")
    ax.set_xlabel("ladder step i")
    ax.set_ylabel("norm")
    ax.set_title("integrability ladder")
    ax.legend(fontsize=8)
    return _save(fig, outdir, "ladder")


def render(bundle: ReportBundle):
    os.makedirs(bundle.outdir, exist_ok=True)
    plt.style.use(STYLE_FILE)
    files = []
    for region_csv in bundle.region_csvs:
        files.extend(render_region(region_csv, bundle.outdir))
    files.extend(render_ratio(bundle.sweep_csv, bundle.outdir))
    files.extend(render_ladder(bundle.ladder_json, bundle.outdir))
    return files


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="render report figures")
    parser.add_argument("--region", nargs="+", required=True,
                        help="region CSV path(s), one figure per file")
    parser.add_argument("--sweep", required=True, help="sweep CSV path")
    parser.add_argument("--ladder", required=True, help="ladder JSON path")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    bundle = ReportBundle(region_csvs=tuple(args.region), sweep_csv=args.sweep,
                          ladder_json=args.ladder, outdir=args.out)
    try:
        files = render(bundle)
    except SchemaError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 1
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
