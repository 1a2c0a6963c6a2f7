"""Boundary and volume field containers and the norms computed on them.

A BoundaryField couples point values on a sphere grid with their
harmonic projection; a VolumeSamples object adds a radial Gauss-Legendre
rule so that solid solutions reconstructed from boundary traces can be
integrated over the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sphere
from .errors import DataMismatch, InvalidParams, ZeroData

#: Oversampling factor for sup-norm evaluation; band-limited fields are
#: resynthesized on a grid this many times finer before taking the max.
LINF_OVERSAMPLE = 3

#: Default radial Gauss-Legendre node count; integrands in r are analytic.
DEFAULT_RADIAL_NODES = 48


@dataclass(frozen=True)
class BoundaryField:
    """A function on the unit sphere: grid samples plus harmonic projection.

    For band-limited content values and coefficients are two views of the
    same field; for aliased content the stored values are authoritative
    and the coefficients are their quadrature projection.
    """

    grid: sphere.SphereGrid
    values: np.ndarray
    coeffs: sphere.HarmonicCoeffs

    @classmethod
    def from_values(cls, grid: sphere.SphereGrid, values: np.ndarray) -> "BoundaryField":
        values = np.asarray(values, dtype=float)
        if values.shape == ():
            values = np.full((grid.n_theta, grid.n_phi), float(values))
        return cls(grid, values, sphere.analyze(grid, values))

    @classmethod
    def from_coeffs(cls, grid: sphere.SphereGrid, coeffs: sphere.HarmonicCoeffs) -> "BoundaryField":
        return cls(grid, sphere.synthesize(grid, coeffs), coeffs)

    @classmethod
    def constant(cls, grid: sphere.SphereGrid, c: float) -> "BoundaryField":
        return cls.from_values(grid, float(c))

    @classmethod
    def harmonic(cls, grid: sphere.SphereGrid, ell: int, m: int, amplitude: float = 1.0) -> "BoundaryField":
        if ell > grid.L_max or abs(m) > ell:
            raise InvalidParams(f"harmonic ({ell},{m}) outside grid band {grid.L_max}")
        c = np.zeros(sphere.num_coeffs(grid.L_max))
        c[sphere.coeff_index(ell, m)] = amplitude
        return cls.from_coeffs(grid, sphere.HarmonicCoeffs(grid.L_max, c))

    @classmethod
    def random(cls, grid: sphere.SphereGrid, seed: int, scale: float = 1.0) -> "BoundaryField":
        """Band-limited field with N(0, scale^2/(l+1)^2) coefficients."""
        rng = np.random.default_rng(seed)
        c = rng.standard_normal(sphere.num_coeffs(grid.L_max)) * scale
        degs = np.repeat(np.arange(grid.L_max + 1), 2 * np.arange(grid.L_max + 1) + 1)
        c /= (1.0 + degs) ** 2
        return cls.from_coeffs(grid, sphere.HarmonicCoeffs(grid.L_max, c))

    def resample(self, grid: sphere.SphereGrid) -> np.ndarray:
        """Band-limited synthesis of this field on another grid."""
        return sphere.synthesize(grid, self.coeffs)


def _pole_values(coeffs: sphere.HarmonicCoeffs) -> tuple[float, float]:
    """Field values at the north and south poles (only m = 0 survives)."""
    ells = np.arange(coeffs.L_max + 1)
    zonal = coeffs.c[ells * (ells + 1)]
    amp = np.sqrt((2 * ells + 1) / (4.0 * np.pi))
    north = float(np.sum(zonal * amp))
    south = float(np.sum(zonal * amp * (-1.0) ** ells))
    return north, south


def linf_boundary(field: BoundaryField) -> float:
    """Sup norm over a 3x oversampled grid, the poles, and the stored
    samples.

    A lower bound on the true sup with spectrally small gap for
    band-limited fields.
    """
    over = sphere.build_grid(min(LINF_OVERSAMPLE * field.grid.L_max, sphere.MAX_BAND_LIMIT))
    north, south = _pole_values(field.coeffs)
    return float(max(np.abs(field.values).max(), np.abs(field.resample(over)).max(),
                     abs(north), abs(south)))


def boundary_norm(field: BoundaryField, r: float, oversample: int = 1) -> float:
    """Lebesgue norm on the sphere; r = inf gives the oversampled max.

    Large exponents are evaluated in max-normalized form, so powers like
    |f|^4096 neither overflow nor lose the limit toward the sup.
    """
    if r != math.inf and r < 1.0:
        raise InvalidParams(f"Lebesgue exponent must be >= 1, got {r}")
    if r == math.inf:
        return linf_boundary(field)
    if oversample > 1:
        grid = sphere.build_grid(min(oversample * field.grid.L_max, sphere.MAX_BAND_LIMIT))
        values = field.resample(grid)
    else:
        grid, values = field.grid, field.values
    peak = float(np.abs(values).max())
    if peak == 0.0:
        return 0.0
    mean = grid.integrate(np.abs(values / peak) ** r)
    return peak * mean ** (1.0 / r)


@dataclass(frozen=True)
class VolumeSamples:
    """Radial Gauss-Legendre rule on (0,1) paired with a sphere grid.

    Radial weights carry the r^2 jacobian, so a volume integral is
    sum_i rweights[i] * (surface integral on shell i).
    """

    grid: sphere.SphereGrid
    radii: np.ndarray
    rweights: np.ndarray

    def integrate(self, shell_values: np.ndarray) -> float:
        """Integrate values of shape (n_radial, n_theta, n_phi) over the ball."""
        per_shell = np.einsum("ijk,j->i", shell_values, self.grid.glweights)
        per_shell *= 2.0 * np.pi / self.grid.n_phi
        return float(self.rweights @ per_shell)


def volume_samples(grid: sphere.SphereGrid, n_radial: int = DEFAULT_RADIAL_NODES) -> VolumeSamples:
    if n_radial < 2:
        raise InvalidParams(f"need at least 2 radial nodes, got {n_radial}")
    x, w = np.polynomial.legendre.leggauss(n_radial)
    radii = 0.5 * (x + 1.0)
    rweights = 0.5 * w * radii**2
    return VolumeSamples(grid=grid, radii=radii, rweights=rweights)


@dataclass(frozen=True)
class SolidSolution:
    """Point values and gradient of a solid solution on volume samples.

    u has shape (n_radial, n_theta, n_phi); ur is the radial derivative
    and (ut, up) the two physical tangential components (already divided
    by r), so grad2 = ur^2 + ut^2 + up^2.
    """

    volume: VolumeSamples
    u: np.ndarray
    ur: np.ndarray
    ut: np.ndarray
    up: np.ndarray

    @property
    def grad2(self) -> np.ndarray:
        return self.ur**2 + self.ut**2 + self.up**2


def solid_solution(trace: sphere.HarmonicCoeffs, volume: VolumeSamples) -> SolidSolution:
    """Reconstruct the solution of -Delta u + u = 0 with the given
    Dirichlet trace on every volume shell."""
    grid = volume.grid
    R = volume.radii.size
    shape = (R, grid.n_theta, grid.n_phi)
    u = np.empty(shape)
    ur = np.empty(shape)
    ut = np.empty(shape)
    up = np.empty(shape)
    for i, r in enumerate(volume.radii):
        p, dp = sphere.radial_profiles(trace.L_max, float(r))
        shell = trace.scaled_by_degree(p)
        u[i] = sphere.synthesize(grid, shell)
        ur[i] = sphere.synthesize(grid, trace.scaled_by_degree(dp))
        dth, dph = sphere.synthesize_gradient(grid, shell)
        ut[i] = dth / r
        up[i] = dph / r
    return SolidSolution(volume=volume, u=u, ur=ur, ut=ut, up=up)


@dataclass(frozen=True)
class NormReport:
    """Norm inventory for one homogeneous-equation solution."""

    h1: float
    h1_quadrature: float
    linf_boundary: float
    linf_volume: float
    boundary_lr: dict
    volume_lq: dict
    w1m: dict

    def as_dict(self):
        return {
            "h1": self.h1,
            "h1_quadrature": self.h1_quadrature,
            "linf_boundary": self.linf_boundary,
            "linf_volume": self.linf_volume,
            "boundary_lr": {str(k): v for k, v in self.boundary_lr.items()},
            "volume_lq": {str(k): v for k, v in self.volume_lq.items()},
            "w1m": {str(k): v for k, v in self.w1m.items()},
        }


def spectral_h1(neumann: sphere.HarmonicCoeffs, spectrum: sphere.NtDSpectrum) -> float:
    """H1(ball) norm of the solution with given Neumann data, through the
    boundary form: ||u||_H1^2 = sum_l lambda_l h_lm^2."""
    lam = spectrum.lam[neumann.degrees()]
    return float(np.sqrt(np.sum(lam * neumann.c**2)))


def check_ntd_pair(trace: sphere.HarmonicCoeffs, neumann: sphere.HarmonicCoeffs,
                   rtol: float = 1e-6) -> sphere.NtDSpectrum:
    """Verify trace = NtD(neumann) on coefficients; DataMismatch otherwise."""
    if trace.L_max != neumann.L_max:
        raise DataMismatch("trace and Neumann data have different band limits")
    spectrum = sphere.ntd_spectrum(trace.L_max)
    expect = neumann.c * spectrum.lam[neumann.degrees()]
    scale = max(float(np.max(np.abs(expect))), 1e-300)
    err = float(np.max(np.abs(trace.c - expect)))
    if err > rtol * scale:
        raise DataMismatch(
            f"trace is not the Neumann-to-Dirichlet image of the data (err {err:.3e})"
        )
    return spectrum


def solution_norms(trace_u: BoundaryField, neumann_h: BoundaryField,
                   volume: VolumeSamples | None = None,
                   boundary_r=(1.0, 2.0, 4.0), volume_q=(2.0, 6.0),
                   sobolev_m=(2.0, 3.0, 6.0), h1_rtol: float = 1e-8) -> NormReport:
    """All norms of one solution of the homogeneous Neumann problem.

    The H1 norm is computed both spectrally and by volume quadrature;
    disagreement beyond ``h1_rtol`` raises DataMismatch since it means
    the pair is not a solution at the claimed resolution.
    """
    spectrum = check_ntd_pair(trace_u.coeffs, neumann_h.coeffs)
    if volume is None:
        volume = volume_samples(trace_u.grid)
    h1 = spectral_h1(neumann_h.coeffs, spectrum)

    sol = solid_solution(trace_u.coeffs, volume)
    h1_quad = math.sqrt(volume.integrate(sol.grad2 + sol.u**2))
    if abs(h1 - h1_quad) > h1_rtol * max(h1, h1_quad, 1e-300):
        raise DataMismatch(
            f"spectral H1 {h1!r} and quadrature H1 {h1_quad!r} disagree beyond rtol {h1_rtol}"
        )

    lb = linf_boundary(trace_u)
    shell_max = float(np.abs(sol.u).max()) if sol.u.size else 0.0
    report = NormReport(
        h1=h1,
        h1_quadrature=h1_quad,
        linf_boundary=lb,
        linf_volume=max(lb, shell_max),
        boundary_lr={r: boundary_norm(trace_u, r) for r in boundary_r},
        volume_lq={q: volume.integrate(np.abs(sol.u) ** q) ** (1.0 / q) for q in volume_q},
        w1m={
            m: (volume.integrate(sol.grad2 ** (m / 2.0)) + volume.integrate(np.abs(sol.u) ** m)) ** (1.0 / m)
            for m in sobolev_m
        },
    )
    return report


def coefficient_field(v: BoundaryField, p: float, b: float, N: int):
    """Boundary coefficient a(x) = b (1 + |v|^p) / (1 + |v|) and its
    L^{N-1} norm.

    Checks the pointwise domination a <= b (1 + |v|^{p-1}) that makes
    the linear-growth hypothesis applicable.
    """
    if not (p > 1.0) or not (b > 0.0):
        raise InvalidParams(f"need p > 1 and b > 0, got p={p}, b={b}")
    if N < 3:
        raise InvalidParams(f"dimension must be >= 3, got {N}")
    t = np.abs(v.values)
    a_vals = b * (1.0 + t**p) / (1.0 + t)
    bound = b * (1.0 + t ** (p - 1.0))
    if np.any(a_vals > bound * (1.0 + 1e-12)):
        raise AssertionError("coefficient field violates its pointwise bound")
    a = BoundaryField.from_values(v.grid, a_vals)
    a_norm = boundary_norm(a, float(N - 1))
    return a, a_norm


def neumann_estimate_ratio(h: BoundaryField, q: float,
                           volume: VolumeSamples | None = None):
    """Sobolev-vs-boundary-data quotient for the linear Neumann problem.

    Solves the homogeneous equation with data h, takes m = N q/(N-1)
    (N = 3 on the ball) and returns (m, ||u||_W1m / ||h||_Lq).
    """
    if q < 1.0:
        raise InvalidParams(f"Lebesgue exponent must be >= 1, got {q}")
    hq = boundary_norm(h, q)
    if hq == 0.0:
        raise ZeroData("Neumann data is identically zero")
    m = 3.0 * q / 2.0
    spectrum = sphere.ntd_spectrum(h.grid.L_max)
    trace = h.coeffs.scaled_by_degree(spectrum.lam)
    if volume is None:
        volume = volume_samples(h.grid)
    sol = solid_solution(trace, volume)
    w1m = (volume.integrate(sol.grad2 ** (m / 2.0)) + volume.integrate(np.abs(sol.u) ** m)) ** (1.0 / m)
    return m, w1m / hq
