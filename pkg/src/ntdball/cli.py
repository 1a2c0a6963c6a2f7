"""Command-line entry point.

Subcommands: exponents, selftest, norms, solve, moser, verify-bound,
region-grid.  Exit code 0 on success (including non-converged solves,
which are outcomes, not failures), 1 on validation/usage errors with a
single-line diagnostic, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import moser, sphere, verify
from .errors import (
    InvalidParams,
    NotStrictlySubcritical,
    NtdBallError,
    SolveFailure,
)
from .exponents import (
    SystemParams,
    classify_region,
    derive_exponents,
    moser_ladder_exponents,
)
from .fields import BoundaryField, solution_norms
from .solver import Nonlinearity, SolutionPair, SolverConfig, solve_coupled


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1.
    def error(self, message):
        raise CliUsageError(message)


@dataclass
class RunConfig:
    """Parsed invocation: subcommand, flags, optional config payload."""

    subcommand: str
    args: argparse.Namespace
    payload: dict | None = None


def load_config(path: str) -> dict:
    """Load a TOML or JSON config, auto-detected by extension."""
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    if path.endswith(".json"):
        with open(path) as fh:
            return json.load(fh)
    raise InvalidParams(f"config must be .toml or .json, got {path!r}")


def _emit(obj, as_json: bool, lines=None):
    if as_json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for line in lines if lines is not None else [json.dumps(obj, sort_keys=True)]:
            print(line)


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------

def cmd_exponents(args) -> int:
    params = SystemParams(args.N, args.p1, args.p2)
    region, d0 = classify_region(params)
    out = {
        "N": params.N, "p1": params.p1, "p2": params.p2,
        "swapped": params.swapped,
        "region": region.value, "delta0": d0,
    }
    try:
        table = derive_exponents(params)
        out.update(table.as_dict())
    except NotStrictlySubcritical:
        for key in ("two_star_trace", "two_star_volume", "trace_conjugate",
                    "q1", "q2", "m1", "m2", "sigma1", "sigma2",
                    "eta", "A", "B", "At1", "At2", "Bt1", "Bt2"):
            out[key] = None
    if args.ladder:
        out["ladder"] = [
            {"i": i, "s": s_i, "r": r_i}
            for (i, s_i, r_i) in moser_ladder_exponents(params.N, args.ladder)
        ]
    lines = [f"region: {out['region']}  delta0: {d0:.12g}"]
    if out.get("A") is not None:
        lines.append(f"A: {out['A']:.12g}  B: {out['B']:.12g}  eta: {out['eta']:.12g}")
        lines.append(f"At1+At2: {out['At1'] + out['At2']:.12g}  Bt1+Bt2: {out['Bt1'] + out['Bt2']:.12g}")
    for row in out.get("ladder", []):
        lines.append(f"ladder i={row['i']}: s={row['s']:.6g} r={row['r']:.6g}")
    _emit(out, args.json, lines)
    return 0


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    L = args.Lmax
    grid = sphere.build_grid(L)
    n = sphere.num_coeffs(L)
    gram_err = 0.0
    rng = np.random.default_rng(0)
    for _ in range(16):
        c = rng.standard_normal(n)
        hc = sphere.HarmonicCoeffs(L, c)
        back = sphere.analyze(grid, sphere.synthesize(grid, hc))
        gram_err = max(gram_err, float(np.max(np.abs(back.c - c)) / np.max(np.abs(c))))
    w_err = abs(grid.weights.sum() - 4.0 * math.pi) / (4.0 * math.pi)

    rec_err = 0.0
    for ell in range(1, min(64, sphere.MAX_BESSEL_ORDER)):
        lo = sphere.bessel_i(ell - 1, 1.0).value
        mid = sphere.bessel_i(ell, 1.0)
        hi = sphere.bessel_i(ell + 1, 1.0).value
        if mid.underflow:
            break
        rec_err = max(rec_err, abs(lo - hi - (2 * ell + 1) * mid.value) / max(lo, 1e-300))
    spec = sphere.ntd_spectrum(min(64, L if L > 0 else 64))
    monotone = bool(np.all(np.diff(spec.lam) < 0.0)) and bool(np.all(spec.lam > 0.0))

    out = {
        "Lmax": L,
        "roundtrip_rel_err": gram_err,
        "weight_sum_rel_err": w_err,
        "bessel_recurrence_rel_err": rec_err,
        "ntd_monotone_positive": monotone,
        "lambda0": float(spec.lam[0]),
    }
    _emit(out, args.json, [f"{k}: {v}" for k, v in out.items()])
    return 0


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def _parse_field(spec_str: str, grid) -> BoundaryField:
    kind, _, rest = spec_str.partition(":")
    if kind == "constant":
        return BoundaryField.constant(grid, float(rest or "1"))
    if kind == "harmonic":
        ell_s, _, m_s = rest.partition(",")
        return BoundaryField.harmonic(grid, int(ell_s), int(m_s or "0"))
    if kind == "random":
        return BoundaryField.random(grid, int(rest or "0"))
    raise InvalidParams(f"field spec must be constant:c | harmonic:l,m | random:seed, got {spec_str!r}")


def cmd_norms(args) -> int:
    grid = sphere.build_grid(args.Lmax)
    h = _parse_field(args.field, grid)
    spectrum = sphere.ntd_spectrum(args.Lmax)
    trace = BoundaryField.from_coeffs(grid, h.coeffs.scaled_by_degree(spectrum.lam))
    report = solution_norms(trace, h,
                            boundary_r=tuple(args.r), volume_q=tuple(args.q),
                            sobolev_m=tuple(args.m))
    _emit(report.as_dict(), True)  # NormReport is a JSON interface
    return 0


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _nonlinearity_from_config(section: dict) -> Nonlinearity:
    try:
        kind = section["kind"]
        b = float(section["b"])
        p = float(section["p"])
    except KeyError as exc:
        raise InvalidParams(f"nonlinearity config missing key {exc}")
    M = float(section["M"]) if "M" in section else None
    return Nonlinearity(kind, b=b, p=p, M=M)


def _init_from_config(value, L_max: int):
    if value in (None, "zero"):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, dict):
        if "constant" in value:
            return float(value["constant"])
        if "file" in value:
            coeffs = _read_coeff_dump(value["file"], L_max)
            return BoundaryField.from_coeffs(sphere.build_grid(L_max), coeffs)
    raise InvalidParams(f"unrecognized init spec {value!r}")


def solver_config_from_payload(payload: dict) -> SolverConfig:
    L_max = int(payload.get("Lmax", 8))
    return SolverConfig(
        L_max=L_max,
        oversample=int(payload.get("oversample", 3)),
        damping=float(payload.get("damping", 0.5)),
        tol=float(payload.get("tol", 1e-10)),
        max_iter=int(payload.get("max_iter", 500)),
        anderson_depth=int(payload.get("anderson_depth", 0)),
        blowup=float(payload.get("blowup", 1e8)),
        init=_init_from_config(payload.get("init"), L_max),
    )


def solution_to_dict(sol: SolutionPair) -> dict:
    return {
        "outcome": "Converged",
        "Lmax": sol.u.grid.L_max,
        "oversample": sol.config.oversample,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "linf_u": float(np.abs(sol.u.values).max()),
        "linf_v": float(np.abs(sol.v.values).max()),
        "u_coeffs": sol.u.coeffs.c.tolist(),
        "v_coeffs": sol.v.coeffs.c.tolist(),
        "fu_coeffs": sol.fu.coeffs.c.tolist(),
        "gv_coeffs": sol.gv.coeffs.c.tolist(),
    }


def solution_from_dict(doc: dict) -> SolutionPair:
    L = int(doc["Lmax"])
    grid = sphere.build_grid(L)
    def fld(key):
        return BoundaryField.from_coeffs(grid, sphere.HarmonicCoeffs(L, np.asarray(doc[key])))
    cfg = SolverConfig(L_max=L, oversample=int(doc.get("oversample", 3)))
    return SolutionPair(
        u=fld("u_coeffs"), v=fld("v_coeffs"), fu=fld("fu_coeffs"), gv=fld("gv_coeffs"),
        iterations=int(doc["iterations"]), residual=float(doc["residual"]), config=cfg,
    )


def _write_coeff_dump(path: str, coeffs: sphere.HarmonicCoeffs) -> None:
    with open(path, "w") as fh:
        for ell in range(coeffs.L_max + 1):
            for m in range(-ell, ell + 1):
                fh.write(f"{ell} {m} {coeffs.get(ell, m):.17g}\n")


def _read_coeff_dump(path: str, L_max: int) -> sphere.HarmonicCoeffs:
    c = np.zeros(sphere.num_coeffs(L_max))
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            ell, m, val = int(parts[0]), int(parts[1]), float(parts[2])
            if ell <= L_max:
                c[sphere.coeff_index(ell, m)] = val
    return sphere.HarmonicCoeffs(L_max, c)


def cmd_solve(args) -> int:
    payload = load_config(args.config)
    cfg = solver_config_from_payload(payload)
    if "f" not in payload or "g" not in payload:
        raise InvalidParams("solve config needs f = {kind, b, p} and g = {kind, b, p}")
    f = _nonlinearity_from_config(payload["f"])
    g = _nonlinearity_from_config(payload["g"])
    try:
        sol = solve_coupled(f, g, cfg)
        doc = solution_to_dict(sol)
    except SolveFailure as exc:
        doc = {
            "outcome": exc.outcome,
            "Lmax": cfg.L_max,
            "oversample": cfg.oversample,
            "iterations": exc.iterations,
            "residual": exc.history[-1] if exc.history else None,
            "message": str(exc),
        }
        sol = None
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
    if sol is not None and args.dump:
        _write_coeff_dump(args.dump + "_u.txt", sol.u.coeffs)
        _write_coeff_dump(args.dump + "_v.txt", sol.v.coeffs)
    brief = {k: doc[k] for k in ("outcome", "iterations", "residual") if k in doc}
    brief.update({k: doc[k] for k in ("linf_u", "linf_v") if k in doc})
    _emit(doc if args.json else brief, args.json,
          [f"{k}: {v}" for k, v in brief.items()])
    return 0


# ---------------------------------------------------------------------------
# moser
# ---------------------------------------------------------------------------

def _load_solution(path: str | None) -> SolutionPair:
    if not path:
        raise InvalidParams("this operation needs --solution <file produced by solve>")
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("outcome") != "Converged":
        raise InvalidParams(f"solution file records outcome {doc.get('outcome')!r}")
    return solution_from_dict(doc)


def cmd_moser(args) -> int:
    out = {}
    lines = []
    if args.identity:
        s, L = args.identity
        sol = _load_solution(args.solution)
        rep = moser.truncation_identity(
            sol.u, sol.fu, moser.TruncationParams(float(s), float(L)))
        out["identity"] = rep.as_dict()
        lines.append(f"identity s={s} L={L}: lhs={rep.lhs:.12g} rhs={rep.rhs:.12g} rel_err={rep.rel_err:.3e}")
    if args.balance:
        s, L = args.balance
        sol = _load_solution(args.solution)
        rep = moser.weak_truncation_balance(
            sol, moser.TruncationParams(float(s), float(L)))
        out["balance"] = rep.as_dict()
        lines.append(f"balance s={s} L={L}: lhs={rep.lhs:.12g} rhs={rep.rhs:.12g} rel_err={rep.rel_err:.3e}")
    if args.ladder:
        sol = _load_solution(args.solution)
        rep = moser.ladder(sol, args.ladder)
        out["ladder"] = rep.as_dict()
        for row in out["ladder"]["rows"]:
            lines.append(f"ladder i={row['i']}: r={row['r']:.6g} "
                         f"|u|_r={row['norm_u']:.9g} |v|_r={row['norm_v']:.9g}")
    if args.appendix_b:
        C, Ct, s = args.appendix_b
        sup = moser.appendix_b_sup(float(C), float(Ct), float(s), grid_n=args.grid_n)
        out["appendix_b"] = {"C": float(C), "Ct": float(Ct), "s": float(s), "sup_xy": sup}
        lines.append(f"appendix-b C={C} Ct={Ct} s={s}: sup xy = {sup:.9g}")
    if not out:
        raise InvalidParams("nothing to do: pass --identity, --balance, --ladder or --appendix-b")
    if args.ladder_out and "ladder" in out:
        with open(args.ladder_out, "w") as fh:
            json.dump(out["ladder"], fh, indent=2, sort_keys=True)
    _emit(out, args.json, lines)
    return 0


# ---------------------------------------------------------------------------
# verify-bound / region-grid
# ---------------------------------------------------------------------------

def sweep_spec_from_payload(payload: dict) -> verify.SweepSpec:
    try:
        params = SystemParams(int(payload.get("N", 3)), float(payload["p1"]), float(payload["p2"]))
        b1_grid = tuple(float(b) for b in payload["b1_grid"])
        b2_grid = tuple(float(b) for b in payload["b2_grid"])
    except KeyError as exc:
        raise InvalidParams(f"sweep config missing key {exc}")
    solver_cfg = solver_config_from_payload(payload.get("solver", {}))
    return verify.SweepSpec(
        params=params, b1_grid=b1_grid, b2_grid=b2_grid,
        f_kind=payload.get("f_kind", "AffinePower"),
        g_kind=payload.get("g_kind", "AffinePower"),
        solver=solver_cfg, output=payload.get("output"),
    )


def cmd_verify_bound(args) -> int:
    payload = load_config(args.config)
    spec = sweep_spec_from_payload(payload)
    rows, summary = verify.run_sweep(spec)
    out_csv = args.out or spec.output
    if out_csv:
        verify.write_sweep_csv(rows, out_csv)
        with open(out_csv + ".summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    _emit(summary, args.json, [
        f"rows: {summary['rows']}",
        f"outcomes: {summary['outcomes']}",
        f"C0: {summary['C0']}",
        f"C1: {summary['C1']}",
    ] + ([f"csv: {out_csv}"] if out_csv else []))
    return 0


def cmd_region_grid(args) -> int:
    rows = verify.region_grid(args.N, args.pmax, args.step)
    verify.write_region_csv(rows, args.out)
    counts = {}
    for r in rows:
        counts[r.region] = counts.get(r.region, 0) + 1
    out = {"points": len(rows), "classes": counts,
           "square_bound": rows[0].square_bound if rows else None,
           "csv": args.out}
    _emit(out, args.json, [f"{k}: {v}" for k, v in out.items()])
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="ntdball", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("exponents", help="exponent calculus for (N, p1, p2)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--ladder", type=int, default=0, metavar="I_MAX")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("selftest", help="spectral machinery self-test")
    p.add_argument("--Lmax", type=int, default=16)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("norms", help="norm report for a linear Neumann solve")
    p.add_argument("--field", required=True,
                   help="constant:c | harmonic:l,m | random:seed (Neumann data)")
    p.add_argument("--Lmax", type=int, default=16)
    p.add_argument("--r", type=float, nargs="*", default=[1.0, 2.0, 4.0])
    p.add_argument("--q", type=float, nargs="*", default=[2.0, 6.0])
    p.add_argument("--m", type=float, nargs="*", default=[2.0, 3.0, 6.0])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("solve", help="solve the coupled boundary system")
    p.add_argument("--config", required=True, help="TOML or JSON solver config")
    p.add_argument("--out", help="write SolutionPair JSON here")
    p.add_argument("--dump", help="prefix for plain-text coefficient dumps")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("moser", help="truncation identities, ladder, product oracle")
    p.add_argument("--solution", help="solution JSON produced by solve")
    p.add_argument("--identity", nargs=2, type=float, metavar=("S", "L"))
    p.add_argument("--balance", nargs=2, type=float, metavar=("S", "L"))
    p.add_argument("--ladder", type=int, default=0, metavar="I_MAX")
    p.add_argument("--ladder-out", help="write the ladder report JSON here")
    p.add_argument("--appendix-b", nargs=3, type=float, metavar=("C", "CT", "S"))
    p.add_argument("--grid-n", type=int, default=200)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_moser)

    p = sub.add_parser("verify-bound", help="coefficient sweep with bound ratios")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the CSV output path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("region-grid", help="classify a (p1, p2) grid")
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--pmax", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_region_grid)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        RunConfig(subcommand=args.subcommand, args=args)
        return args.func(args)
    except CliUsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvalidParams, NotStrictlySubcritical, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NtdBallError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
