"""Truncation test functions, the integrability ladder, and the
constrained-product oracle.

The truncation device phi = u min{|u|^{2s}, L^2} drives the bootstrap
that lifts boundary integrability of solutions step by step; this module
evaluates its energy identities by quadrature and quantifies the product
bound that closes the bootstrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import exponents, sphere
from .errors import InvalidParams
from .fields import (
    BoundaryField,
    VolumeSamples,
    boundary_norm,
    check_ntd_pair,
    linf_boundary,
    solid_solution,
    volume_samples,
)
from .solver import SolutionPair

MAX_LADDER_STEPS = 12


@dataclass(frozen=True)
class TruncationParams:
    """Power s >= 0 and cap L > 0 of the truncation factor min{|u|^s, L}."""

    s: float
    L: float

    def __post_init__(self):
        if self.s < 0.0:
            raise InvalidParams(f"truncation power must be >= 0, got {self.s}")
        if not (self.L > 0.0):
            raise InvalidParams(f"truncation cap must be positive, got {self.L}")


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float

    @property
    def rel_err(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), 1e-300)

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "rel_err": self.rel_err}


@dataclass(frozen=True)
class LadderReport:
    """Boundary norms of (u, v) along the integrability ladder."""

    rows: tuple          # (i, s_i, r_i, norm_u, norm_v) per step
    linf_u: float
    linf_v: float

    def as_dict(self):
        area = 4.0 * math.pi
        return {
            "rows": [
                {
                    "i": i,
                    "s": s_i,
                    "r": r_i,
                    "norm_u": nu,
                    "norm_v": nv,
                    "normalized_u": nu / area ** (1.0 / r_i),
                    "normalized_v": nv / area ** (1.0 / r_i),
                }
                for (i, s_i, r_i, nu, nv) in self.rows
            ],
            "linf_u": self.linf_u,
            "linf_v": self.linf_v,
        }


def _truncation_pieces(sol, t: TruncationParams):
    """Masked integrand pieces shared by both truncation identities."""
    s, L = t.s, t.L
    absu = np.abs(sol.u)
    power = absu**s
    mask = power <= L
    minfac = np.minimum(power**2, L**2)
    return absu, mask, minfac


def truncation_identity(trace: BoundaryField, neumann: BoundaryField,
                        t: TruncationParams,
                        volume: VolumeSamples | None = None) -> IdentityReport:
    """Energy identity for phi = u min{|u|^s, L} on one solution.

    lhs assembles ||phi||_H1^2 from the piecewise gradient of phi; rhs
    is the three-term expansion s(s+2) int_{|u|^s<=L} |grad u|^2 |u|^{2s}
    + int |grad u|^2 min + int u^2 min.  Both sides share one quadrature,
    so rel_err measures the transcription of the two formulas, and the
    common value converges under refinement.
    """
    check_ntd_pair(trace.coeffs, neumann.coeffs)
    if volume is None:
        volume = volume_samples(trace.grid)
    sol = solid_solution(trace.coeffs, volume)
    s, L = t.s, t.L
    absu, mask, minfac = _truncation_pieces(sol, t)
    grad2 = sol.grad2

    grad_phi2 = np.where(mask, (s + 1.0) ** 2 * absu ** (2.0 * s), L**2) * grad2
    lhs = volume.integrate(grad_phi2 + sol.u**2 * minfac)

    rhs = (
        s * (s + 2.0) * volume.integrate(np.where(mask, grad2 * minfac, 0.0))
        + volume.integrate(grad2 * minfac)
        + volume.integrate(sol.u**2 * minfac)
    )
    return IdentityReport(lhs=lhs, rhs=rhs)


def weak_truncation_balance(sol_pair: SolutionPair, t: TruncationParams,
                            volume: VolumeSamples | None = None) -> IdentityReport:
    """Weak form of the u-equation tested against phi = u min{|u|^{2s}, L^2}.

    lhs is the three-term volume decomposition 2s int_{|u|^s<=L}
    |grad u|^2 |u|^{2s} + int |grad u|^2 min + int u^2 min; rhs is the
    boundary quadrature of the stored Neumann data against phi on the
    oversampled grid.  The mismatch combines solver residual, projection,
    and quadrature error.
    """
    if volume is None:
        volume = volume_samples(sol_pair.u.grid)
    solid = solid_solution(sol_pair.u.coeffs, volume)
    s, L = t.s, t.L
    absu, mask, minfac = _truncation_pieces(solid, t)
    grad2 = solid.grad2
    lhs = (
        2.0 * s * volume.integrate(np.where(mask, grad2 * absu ** (2.0 * s), 0.0))
        + volume.integrate(grad2 * minfac)
        + volume.integrate(solid.u**2 * minfac)
    )

    cfg = sol_pair.config
    ogrid = sphere.build_grid(min(cfg.oversample * cfg.L_max, sphere.MAX_BAND_LIMIT))
    u_over = sol_pair.u.resample(ogrid)
    fu_over = sol_pair.fu.resample(ogrid)
    phi = u_over * np.minimum(np.abs(u_over) ** (2.0 * s), L**2)
    rhs = ogrid.integrate(fu_over * phi)
    return IdentityReport(lhs=lhs, rhs=rhs)


def ladder(sol_pair: SolutionPair, i_max: int) -> LadderReport:
    """Boundary norms of the converged pair along the ladder exponents.

    Norms are evaluated on a 3x oversampled grid in max-normalized form,
    which keeps |u|^r meaningful up to r ~ 10^4.
    """
    if i_max < 1 or i_max > MAX_LADDER_STEPS:
        raise InvalidParams(f"ladder depth must lie in [1, {MAX_LADDER_STEPS}], got {i_max}")
    steps = exponents.moser_ladder_exponents(3, i_max)
    rows = []
    for (i, s_i, r_i) in steps:
        nu = boundary_norm(sol_pair.u, r_i, oversample=3)
        nv = boundary_norm(sol_pair.v, r_i, oversample=3)
        rows.append((i, s_i, r_i, nu, nv))
    return LadderReport(
        rows=tuple(rows),
        linf_u=linf_boundary(sol_pair.u),
        linf_v=linf_boundary(sol_pair.v),
    )


def _feasible(x, y, C_K, Ct_K, s):
    e1 = 2.0 / (s + 1.0)
    e2 = 2.0 * s / (s + 1.0)
    return 0.5 * x**2 * y**2 <= C_K + Ct_K * (x**e1 * y**e2 + x**e2 * y**e1)


def appendix_b_sup(C_K: float, Ct_K: float, s: float, grid_n: int = 200) -> float:
    """Largest product x*y compatible with the bootstrap constraint
    (1/2) x^2 y^2 <= C_K + Ct_K (x^{2/(s+1)} y^{2s/(s+1)} + x^{2s/(s+1)} y^{2/(s+1)}).

    Brute force on a log-spaced grid over [1e-6, 1e6]^2, then bisection
    along rays through the constraint boundary.  Monotone in both
    constants because the feasible set only grows with them.
    """
    if C_K < 0.0 or Ct_K < 0.0:
        raise InvalidParams("constants must be >= 0")
    if not (s > 0.0):
        raise InvalidParams(f"truncation power must be positive, got {s}")
    if grid_n < 100:
        raise InvalidParams(f"grid resolution must be >= 100, got {grid_n}")

    lo, hi = 1e-6, 1e6
    axis = np.logspace(math.log10(lo), math.log10(hi), grid_n)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    feas = _feasible(X, Y, C_K, Ct_K, s)
    if not feas.any():
        return 0.0
    best = float(np.max(np.where(feas, X * Y, 0.0)))

    # Refine along rays y = omega * x: the constraint is monotone past its
    # boundary on each ray, so bisection in log-scale locates the active
    # constraint; the ray sup of x*y sits there.
    omegas = np.logspace(math.log10(lo / hi), math.log10(hi / lo), 2 * grid_n - 1)
    for omega in omegas:
        t_lo, t_hi = lo, hi / max(1.0, omega)
        if not _feasible(t_lo, omega * t_lo, C_K, Ct_K, s):
            continue
        if _feasible(t_hi, omega * t_hi, C_K, Ct_K, s):
            best = max(best, t_hi * omega * t_hi)
            continue
        for _ in range(80):
            t_mid = math.sqrt(t_lo * t_hi)
            if _feasible(t_mid, omega * t_mid, C_K, Ct_K, s):
                t_lo = t_mid
            else:
                t_hi = t_mid
        best = max(best, t_lo * omega * t_lo)
    return best
