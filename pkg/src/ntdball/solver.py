"""Fixed-point solver for the coupled nonlinear boundary system.

The system -Delta u + u = 0, du/dn = f(x, v) and -Delta v + v = 0,
dv/dn = g(x, u) is solved on boundary traces: u = K f(., v) and
v = K g(., u) with K the Neumann-to-Dirichlet operator, which is
diagonal in spherical harmonics on the unit ball.  The iteration is
damped Picard with optional Anderson mixing; nonlinear terms are
evaluated pointwise on an oversampled grid and projected back, which
controls aliasing of the non-polynomial powers |s|^p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sphere
from .errors import Blowup, InvalidParams, MaxIterations, NonFinite
from .fields import BoundaryField

NONLINEARITY_KINDS = ("PurePowerOdd", "AffinePower", "Saturated", "Weighted")


@dataclass(frozen=True)
class Nonlinearity:
    """Boundary nonlinearity s -> f(x, s) from the growth-bound catalog.

    Every kind satisfies |f(x, s)| <= b (1 + |s|^p) pointwise; for the
    Weighted kind this is enforced by requiring sup|w| <= 1.
    """

    kind: str
    b: float
    p: float
    M: float | None = None
    weight: BoundaryField | None = None

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise InvalidParams(f"unknown nonlinearity kind {self.kind!r}")
        if not (self.b > 0.0):
            raise InvalidParams(f"coefficient b must be positive, got {self.b}")
        if not (self.p > 1.0):
            raise InvalidParams(f"growth exponent p must exceed 1, got {self.p}")
        if self.kind == "Saturated":
            if self.M is None or not (self.M > 0.0):
                raise InvalidParams("Saturated kind needs a positive cap M")
        if self.kind == "Weighted":
            if self.weight is None:
                raise InvalidParams("Weighted kind needs a weight field")
            if np.abs(self.weight.values).max() > 1.0 + 1e-12:
                raise InvalidParams("weight field must satisfy sup|w| <= 1")

    def evaluate(self, s: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
        """Pointwise values f(x, s); ``w`` is the weight resampled onto
        the evaluation grid (Weighted kind only)."""
        a = np.abs(s)
        if self.kind == "PurePowerOdd":
            return self.b * np.sign(s) * a**self.p
        if self.kind == "AffinePower":
            return self.b * (1.0 + a**self.p)
        if self.kind == "Saturated":
            return self.b * (1.0 + np.minimum(a, self.M) ** self.p)
        if w is None:
            raise InvalidParams("Weighted evaluation needs the resampled weight")
        return w * self.b * (1.0 + a**self.p)


def _parse_init(init):
    """Normalize the initial-iterate spec: None/'zero', a constant, or a
    BoundaryField applied to both components."""
    if init is None or init == "zero":
        return ("zero", None)
    if isinstance(init, (int, float)):
        return ("constant", float(init))
    if isinstance(init, BoundaryField):
        return ("field", init)
    raise InvalidParams(f"unrecognized init spec {init!r}")


@dataclass(frozen=True)
class SolverConfig:
    L_max: int
    oversample: int = 3
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 500
    anderson_depth: int = 0
    blowup: float = 1e8
    init: object = None   # None | "zero" | constant c | BoundaryField

    def __post_init__(self):
        if self.L_max < 0 or self.L_max > sphere.MAX_BAND_LIMIT:
            raise InvalidParams(f"band limit out of range: {self.L_max}")
        if self.oversample < 1:
            raise InvalidParams("oversample factor must be >= 1")
        if not (0.0 < self.damping <= 1.0):
            raise InvalidParams("damping must lie in (0, 1]")
        if not (self.tol > 0.0):
            raise InvalidParams("tolerance must be positive")
        if self.max_iter < 1:
            raise InvalidParams("max_iter must be >= 1")
        if self.anderson_depth < 0:
            raise InvalidParams("anderson_depth must be >= 0")
        if not (self.blowup > 0.0):
            raise InvalidParams("blowup threshold must be positive")
        _parse_init(self.init)


@dataclass(frozen=True)
class SolutionPair:
    """Converged boundary traces and their Neumann data."""

    u: BoundaryField
    v: BoundaryField
    fu: BoundaryField
    gv: BoundaryField
    iterations: int
    residual: float
    config: SolverConfig
    residual_history: tuple = field(default=(), repr=False)


def apply_ntd(h: BoundaryField) -> BoundaryField:
    """Boundary trace of the solution with Neumann data h."""
    spectrum = sphere.ntd_spectrum(h.grid.L_max)
    return BoundaryField.from_coeffs(h.grid, h.coeffs.scaled_by_degree(spectrum.lam))


class _AndersonMixer:
    """Multi-secant mixing over the last ``depth`` fixed-point residuals."""

    def __init__(self, depth: int, damping: float):
        self.depth = depth
        self.damping = damping
        self.zs: list[np.ndarray] = []
        self.gs: list[np.ndarray] = []

    def step(self, z: np.ndarray, gz: np.ndarray) -> np.ndarray:
        beta = self.damping
        if self.depth == 0:
            return (1.0 - beta) * z + beta * gz
        self.zs.append(z.copy())
        self.gs.append(gz.copy())
        if len(self.zs) > self.depth + 1:
            self.zs.pop(0)
            self.gs.pop(0)
        k = len(self.zs) - 1
        if k == 0:
            return (1.0 - beta) * z + beta * gz
        R = np.stack([g - s for g, s in zip(self.gs, self.zs)], axis=1)
        dR = np.diff(R, axis=1)
        gamma, *_ = np.linalg.lstsq(dR, R[:, -1], rcond=None)
        dZ = np.diff(np.stack(self.zs, axis=1), axis=1)
        dG = np.diff(np.stack(self.gs, axis=1), axis=1)
        z_bar = z - dZ @ gamma
        g_bar = gz - dG @ gamma
        return (1.0 - beta) * z_bar + beta * g_bar


def solve_coupled(f: Nonlinearity, g: Nonlinearity, cfg: SolverConfig) -> SolutionPair:
    """Solve u = K f(., v), v = K g(., u) by damped fixed-point iteration.

    Raises MaxIterations, Blowup, or NonFinite (all carrying the
    residual history) when the iteration does not converge.
    """
    grid = sphere.build_grid(cfg.L_max)
    ogrid = sphere.build_grid(min(cfg.oversample * cfg.L_max, sphere.MAX_BAND_LIMIT))
    spectrum = sphere.ntd_spectrum(cfg.L_max)
    n = sphere.num_coeffs(cfg.L_max)

    w_f = f.weight.resample(ogrid) if f.kind == "Weighted" else None
    w_g = g.weight.resample(ogrid) if g.kind == "Weighted" else None

    mode, payload = _parse_init(cfg.init)
    if mode == "zero":
        uc = np.zeros(n)
    elif mode == "constant":
        uc = np.zeros(n)
        uc[0] = payload * np.sqrt(4.0 * np.pi)
    else:
        uc = payload.coeffs.truncated(cfg.L_max).c.copy()
    vc = uc.copy()

    mixer = _AndersonMixer(cfg.anderson_depth, cfg.damping)
    history = []
    fu_c = gv_c = None
    for it in range(1, cfg.max_iter + 1):
        u_over = sphere.synthesize(ogrid, sphere.HarmonicCoeffs(cfg.L_max, uc))
        v_over = sphere.synthesize(ogrid, sphere.HarmonicCoeffs(cfg.L_max, vc))
        if max(np.abs(u_over).max(), np.abs(v_over).max()) > cfg.blowup:
            raise Blowup(
                f"sup norm exceeded {cfg.blowup:g} at iteration {it}",
                iterations=it, history=history,
            )
        fu_vals = f.evaluate(v_over, w_f)
        gv_vals = g.evaluate(u_over, w_g)
        if not (np.all(np.isfinite(fu_vals)) and np.all(np.isfinite(gv_vals))):
            raise NonFinite(
                f"non-finite nonlinearity values at iteration {it}",
                iterations=it, history=history,
            )
        fu_c = sphere.analyze(ogrid, fu_vals).truncated(cfg.L_max).c
        gv_c = sphere.analyze(ogrid, gv_vals).truncated(cfg.L_max).c
        lam = spectrum.lam[sphere.HarmonicCoeffs(cfg.L_max, fu_c).degrees()]
        ku = lam * fu_c
        kv = lam * gv_c

        res = max(float(np.linalg.norm(uc - ku)), float(np.linalg.norm(vc - kv)))
        history.append(res)
        if res <= cfg.tol:
            return SolutionPair(
                u=BoundaryField.from_coeffs(grid, sphere.HarmonicCoeffs(cfg.L_max, uc)),
                v=BoundaryField.from_coeffs(grid, sphere.HarmonicCoeffs(cfg.L_max, vc)),
                fu=BoundaryField.from_coeffs(grid, sphere.HarmonicCoeffs(cfg.L_max, fu_c)),
                gv=BoundaryField.from_coeffs(grid, sphere.HarmonicCoeffs(cfg.L_max, gv_c)),
                iterations=it,
                residual=res,
                config=cfg,
                residual_history=tuple(history),
            )
        z = mixer.step(np.concatenate([uc, vc]), np.concatenate([ku, kv]))
        if not np.all(np.isfinite(z)):
            raise NonFinite(
                f"non-finite iterate at iteration {it}",
                iterations=it, history=history,
            )
        uc, vc = z[:n], z[n:]

    raise MaxIterations(
        f"residual {history[-1]:.3e} > tol {cfg.tol:g} after {cfg.max_iter} iterations",
        iterations=cfg.max_iter, history=history,
    )


def weak_residual(sol: SolutionPair, test_band: int,
                  volume=None) -> float:
    """Largest defect of the weak form over harmonic test extensions.

    Tests the converged pair against the extensions of every Y_lm with
    l <= test_band: volume quadrature of grad u . grad phi + u phi minus
    the boundary quadrature of f(x, v) phi.
    """
    from .fields import solid_solution, volume_samples  # local: avoid cycle

    if test_band < 0 or test_band > sol.u.grid.L_max:
        raise InvalidParams(f"test band must lie in [0, {sol.u.grid.L_max}]")
    grid = sol.u.grid
    if volume is None:
        volume = volume_samples(grid)
    worst = 0.0
    for who in ("u", "v"):
        trace = sol.u if who == "u" else sol.v
        data = sol.fu if who == "u" else sol.gv
        solid = solid_solution(trace.coeffs, volume)
        profs = np.array([sphere.radial_profiles(test_band, float(r)) for r in volume.radii])
        p_tab, dp_tab = profs[:, 0, :], profs[:, 1, :]  # (R, test_band+1)
        for ell in range(test_band + 1):
            for m in range(-ell, ell + 1):
                c = np.zeros(sphere.num_coeffs(test_band))
                c[sphere.coeff_index(ell, m)] = 1.0
                hc = sphere.HarmonicCoeffs(test_band, c)
                y = sphere.synthesize(grid, hc)
                dth, dph = sphere.synthesize_gradient(grid, hc)
                lhs = 0.0
                for i, r in enumerate(volume.radii):
                    dot = (
                        solid.ur[i] * dp_tab[i, ell] * y
                        + solid.ut[i] * (p_tab[i, ell] / r) * dth
                        + solid.up[i] * (p_tab[i, ell] / r) * dph
                        + solid.u[i] * p_tab[i, ell] * y
                    )
                    lhs += volume.rweights[i] * grid.integrate(dot)
                rhs = grid.integrate(data.values * y)
                worst = max(worst, abs(lhs - rhs))
    return worst
