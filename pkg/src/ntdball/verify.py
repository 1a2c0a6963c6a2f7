"""Sup-norm estimate harness: bound ratios, coefficient sweeps, and
region scans.

The central object is the ratio

    ratio_u = ||u||_inf / ((1 + ||u||_H1^A)(1 + ||v||_H1^A)),

whose supremum over solution families is the empirical constant of the
sup-norm estimate; the harness fits it over coefficient grids and checks
stability on held-out grids.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import sphere
from .errors import InvalidParams, NotStrictlySubcritical, SolveFailure
from .exponents import (
    ExponentTable,
    RegionClass,
    SystemParams,
    classify,
    derive_exponents,
    square_bound,
)
from .fields import linf_boundary, spectral_h1
from .solver import Nonlinearity, SolutionPair, SolverConfig, solve_coupled

SWEEP_COLUMNS = (
    "b1", "b2", "p1", "p2", "h1_u", "h1_v", "linf_u", "linf_v",
    "A", "B", "ratio_u", "ratio_v", "iterations", "residual", "outcome",
)

REGION_COLUMNS = ("N", "p1", "p2", "delta0", "region", "square_bound")


def _fmt(x) -> str:
    """Canonical cell formatting: 17 significant digits round-trips a double."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class SweepSpec:
    """One coefficient sweep: nonlinearity family x (b1, b2) grid."""

    params: SystemParams
    b1_grid: tuple
    b2_grid: tuple
    f_kind: str = "AffinePower"
    g_kind: str = "AffinePower"
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(L_max=4, tol=1e-12))
    output: str | None = None

    def __post_init__(self):
        if self.params.N != 3:
            raise InvalidParams("solving is fixed to the unit ball in R^3 (N = 3)")
        if not self.b1_grid or not self.b2_grid:
            raise InvalidParams("coefficient grids must be non-empty")


@dataclass(frozen=True)
class BoundRow:
    b1: float
    b2: float
    p1: float
    p2: float
    outcome: str
    iterations: int
    residual: float | None = None
    h1_u: float | None = None
    h1_v: float | None = None
    linf_u: float | None = None
    linf_v: float | None = None
    A: float | None = None
    B: float | None = None
    ratio_u: float | None = None
    ratio_v: float | None = None

    def cells(self):
        vals = {
            "b1": self.b1, "b2": self.b2, "p1": self.p1, "p2": self.p2,
            "h1_u": self.h1_u, "h1_v": self.h1_v,
            "linf_u": self.linf_u, "linf_v": self.linf_v,
            "A": self.A, "B": self.B,
            "ratio_u": self.ratio_u, "ratio_v": self.ratio_v,
            "iterations": self.iterations, "residual": self.residual,
            "outcome": self.outcome,
        }
        return [vals[c] if c == "outcome" else _fmt(vals[c]) for c in SWEEP_COLUMNS]


def solution_h1_norms(sol: SolutionPair) -> tuple[float, float]:
    """H1(ball) norms of both components through the boundary form."""
    spectrum = sphere.ntd_spectrum(sol.u.grid.L_max)
    return spectral_h1(sol.fu.coeffs, spectrum), spectral_h1(sol.gv.coeffs, spectrum)


def bound_ratios(sol: SolutionPair, table: ExponentTable) -> tuple[float, float]:
    """Sup-norm-vs-H1 ratios of a converged pair under the table's
    exponents."""
    region, _ = classify(table.N, table.p1, table.p2)
    if region is not RegionClass.StrictlyBelow:
        raise NotStrictlySubcritical("bound ratios need a strictly subcritical table")
    h1_u, h1_v = solution_h1_norms(sol)
    linf_u = linf_boundary(sol.u)
    linf_v = linf_boundary(sol.v)
    ratio_u = linf_u / ((1.0 + h1_u**table.A) * (1.0 + h1_v**table.A))
    ratio_v = linf_v / ((1.0 + h1_u**table.B) * (1.0 + h1_v**table.B))
    return ratio_u, ratio_v


def run_sweep(spec: SweepSpec):
    """Solve every (b1, b2) grid point and assemble bound-ratio rows.

    Failures are recorded per-row (outcome Blowup/MaxIterations), never
    raised.  Returns (rows, summary) where summary carries the fitted
    constants: the largest observed ratios over converged rows.
    """
    params = spec.params
    region, _ = classify(params.N, params.p1, params.p2)
    table = derive_exponents(params) if region is RegionClass.StrictlyBelow else None

    rows = []
    for b1 in spec.b1_grid:
        for b2 in spec.b2_grid:
            f = _make_nonlinearity(spec.f_kind, b1, params.p2)
            g = _make_nonlinearity(spec.g_kind, b2, params.p1)
            try:
                sol = solve_coupled(f, g, spec.solver)
            except SolveFailure as exc:
                rows.append(BoundRow(
                    b1=b1, b2=b2, p1=params.p1, p2=params.p2,
                    outcome=exc.outcome, iterations=exc.iterations,
                    residual=exc.history[-1] if exc.history else None,
                ))
                continue
            h1_u, h1_v = solution_h1_norms(sol)
            linf_u = linf_boundary(sol.u)
            linf_v = linf_boundary(sol.v)
            if table is not None:
                ratio_u = linf_u / ((1.0 + h1_u**table.A) * (1.0 + h1_v**table.A))
                ratio_v = linf_v / ((1.0 + h1_u**table.B) * (1.0 + h1_v**table.B))
                A, B = table.A, table.B
            else:
                ratio_u = ratio_v = A = B = None
            rows.append(BoundRow(
                b1=b1, b2=b2, p1=params.p1, p2=params.p2,
                outcome="Converged", iterations=sol.iterations, residual=sol.residual,
                h1_u=h1_u, h1_v=h1_v, linf_u=linf_u, linf_v=linf_v,
                A=A, B=B, ratio_u=ratio_u, ratio_v=ratio_v,
            ))

    converged = [r for r in rows if r.outcome == "Converged"]
    with_ratio = [r for r in converged if r.ratio_u is not None]
    counts = {}
    for r in rows:
        counts[r.outcome] = counts.get(r.outcome, 0) + 1
    summary = {
        "C0": max((r.ratio_u for r in with_ratio), default=None),
        "C1": max((r.ratio_v for r in with_ratio), default=None),
        "outcomes": counts,
        "rows": len(rows),
    }
    return rows, summary


def _make_nonlinearity(kind: str, b: float, p: float) -> Nonlinearity:
    if kind == "Saturated":
        return Nonlinearity(kind, b=b, p=p, M=1.0)
    return Nonlinearity(kind, b=b, p=p)


def sweep_csv_text(rows) -> str:
    """Render sweep rows in the frozen column order (LF line endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow(r.cells())
    return buf.getvalue()


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(sweep_csv_text(rows))


def read_sweep_csv(path):
    """Parse a sweep CSV back into BoundRow objects (bit-exact floats)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SWEEP_COLUMNS:
            raise InvalidParams(f"unexpected sweep header: {header}")
        for rec in reader:
            d = dict(zip(SWEEP_COLUMNS, rec))
            opt = lambda s: None if s == "" else float(s)
            rows.append(BoundRow(
                b1=float(d["b1"]), b2=float(d["b2"]),
                p1=float(d["p1"]), p2=float(d["p2"]),
                outcome=d["outcome"], iterations=int(d["iterations"]),
                residual=opt(d["residual"]),
                h1_u=opt(d["h1_u"]), h1_v=opt(d["h1_v"]),
                linf_u=opt(d["linf_u"]), linf_v=opt(d["linf_v"]),
                A=opt(d["A"]), B=opt(d["B"]),
                ratio_u=opt(d["ratio_u"]), ratio_v=opt(d["ratio_v"]),
            ))
    return rows


@dataclass(frozen=True)
class RegionRow:
    N: float
    p1: float
    p2: float
    delta0: float
    region: str
    square_bound: float


def region_grid(N: float, p_max: float, step: float):
    """Classify every (p1, p2) grid point against the critical curve.

    Accepts real N >= 3 so region panels at non-integer dimensions can
    be produced; the classifier is the same one behind classify_region.
    """
    if N < 3:
        raise InvalidParams(f"dimension must be >= 3, got {N}")
    if not (p_max > 1.0):
        raise InvalidParams(f"p_max must exceed 1, got {p_max}")
    if not (0.0 < step <= 0.5):
        raise InvalidParams(f"step must lie in (0, 0.5], got {step}")
    sq = square_bound(N)
    npts = int(math.floor((p_max - 1.0) / step + 1e-9))
    ps = [1.0 + step * k for k in range(1, npts + 1)]
    rows = []
    for p1 in ps:
        for p2 in ps:
            cls, d0 = classify(N, p1, p2)
            rows.append(RegionRow(N=N, p1=p1, p2=p2, delta0=d0,
                                  region=cls.value, square_bound=sq))
    return rows


def region_csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REGION_COLUMNS)
    for r in rows:
        writer.writerow([
            _fmt(r.N), _fmt(r.p1), _fmt(r.p2), _fmt(r.delta0),
            r.region, _fmt(r.square_bound),
        ])
    return buf.getvalue()


def write_region_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(region_csv_text(rows))
