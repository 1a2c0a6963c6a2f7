"""Spectral machinery on the unit sphere and unit ball.

Real orthonormal spherical harmonics on a Gauss-Legendre x equispaced
grid, forward/inverse transforms, modified spherical Bessel functions of
the first kind, and the Neumann-to-Dirichlet spectrum of -Delta + 1 on
the unit ball.

Conventions
-----------
Harmonics are real and orthonormal:

    Y_{l,0}  = q_{l,0}(cos theta),
    Y_{l,m}  = sqrt(2) q_{l,m}(cos theta) cos(m phi),   m > 0,
    Y_{l,-m} = sqrt(2) q_{l,m}(cos theta) sin(m phi),   m > 0,

with q_{l,m} the orthonormalized associated Legendre functions (no
Condon-Shortley phase).  Coefficients are stored flat with index
l*(l+1) + m, so a band limit L occupies (L+1)^2 slots.

The grid (L+1 colatitude nodes, 2L+1 azimuth nodes) is the minimal
configuration whose quadrature integrates products of two band-L
harmonics exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BandLimitMismatch, InvalidParams

MAX_BAND_LIMIT = 256
MAX_BESSEL_ORDER = 300
UNDERFLOW_FLOOR = 1e-300


def coeff_index(ell: int, m: int) -> int:
    """Flat index of the (ell, m) coefficient."""
    return ell * (ell + 1) + m


def num_coeffs(L_max: int) -> int:
    return (L_max + 1) ** 2


@dataclass(frozen=True)
class SphereGrid:
    """Quadrature grid on the unit sphere for band limit L_max."""

    L_max: int
    thetas: np.ndarray          # (n_theta,) colatitudes in (0, pi)
    phis: np.ndarray            # (n_phi,) equispaced azimuths in [0, 2pi)
    glweights: np.ndarray       # (n_theta,) Gauss-Legendre weights in x = cos theta
    _legendre: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_theta(self) -> int:
        return self.thetas.size

    @property
    def n_phi(self) -> int:
        return self.phis.size

    @property
    def weights(self) -> np.ndarray:
        """Full (n_theta, n_phi) quadrature weights; they sum to 4*pi."""
        return np.outer(self.glweights, np.full(self.n_phi, 2.0 * np.pi / self.n_phi))

    def integrate(self, values: np.ndarray) -> float:
        """Surface integral of point values sampled on the grid."""
        return float(self.glweights @ values.sum(axis=1)) * (2.0 * np.pi / self.n_phi)

    # Legendre tables are built lazily once per grid and shared by all
    # transforms; the dict is the only mutable slot and is write-once.
    def legendre_tables(self):
        if "q" not in self._legendre:
            q, dq = _legendre_tables(self.L_max, np.cos(self.thetas))
            self._legendre["q"] = q
            self._legendre["dq"] = dq
        return self._legendre["q"], self._legendre["dq"]


@dataclass(frozen=True)
class HarmonicCoeffs:
    """Real spherical-harmonic coefficients, flat (L_max+1)^2 layout."""

    L_max: int
    c: np.ndarray

    def __post_init__(self):
        if self.c.shape != (num_coeffs(self.L_max),):
            raise BandLimitMismatch(
                f"coefficient array of length {self.c.size} does not match band {self.L_max}"
            )

    def get(self, ell: int, m: int) -> float:
        return float(self.c[coeff_index(ell, m)])

    def degrees(self) -> np.ndarray:
        """Degree l of every flat slot."""
        return np.repeat(np.arange(self.L_max + 1), 2 * np.arange(self.L_max + 1) + 1)

    def truncated(self, L_new: int) -> "HarmonicCoeffs":
        if L_new >= self.L_max:
            c = np.zeros(num_coeffs(L_new))
            c[: self.c.size] = self.c
            return HarmonicCoeffs(L_new, c)
        return HarmonicCoeffs(L_new, self.c[: num_coeffs(L_new)].copy())

    def scaled_by_degree(self, factors: np.ndarray) -> "HarmonicCoeffs":
        """Multiply every degree-l coefficient by factors[l]."""
        if factors.shape != (self.L_max + 1,):
            raise BandLimitMismatch("one factor per degree required")
        return HarmonicCoeffs(self.L_max, self.c * factors[self.degrees()])

    def l2(self) -> float:
        return float(np.sqrt(np.sum(self.c**2)))


def build_grid(L_max: int) -> SphereGrid:
    """Minimal exact-quadrature grid for band limit L_max.

    n_theta = L_max + 1 Gauss-Legendre colatitudes and
    n_phi = 2 L_max + 1 equispaced azimuths.
    """
    if L_max < 0 or L_max > MAX_BAND_LIMIT:
        raise InvalidParams(f"band limit must lie in [0, {MAX_BAND_LIMIT}], got {L_max}")
    n_theta = L_max + 1
    n_phi = 2 * L_max + 1
    x, w = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(-x)  # colatitude increasing from the north pole
    thetas = np.arccos(x[order])
    glweights = w[order]
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    return SphereGrid(L_max=L_max, thetas=thetas, phis=phis, glweights=glweights)


def _legendre_tables(L_max: int, x: np.ndarray):
    """Orthonormalized associated Legendre values and theta-derivatives.

    Returns two lists indexed by m; entry m is an array of shape
    (L_max - m + 1, n) holding q_{l,m}(x) for l = m..L_max (dq holds
    d/dtheta of the same).  Upward recurrence in l for fixed m is stable
    for the fully normalized functions.
    """
    n = x.size
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))  # sin theta > 0 off the poles
    q = []
    dq = []
    qmm = np.full(n, math.sqrt(1.0 / (4.0 * math.pi)))
    for m in range(L_max + 1):
        rows = np.empty((L_max - m + 1, n))
        rows[0] = qmm
        if L_max >= m + 1:
            rows[1] = math.sqrt(2 * m + 3.0) * x * qmm
        for ell in range(m + 2, L_max + 1):
            a = math.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
            b = math.sqrt(
                (2.0 * ell + 1.0) * ((ell - 1.0) ** 2 - m * m)
                / ((2.0 * ell - 3.0) * (ell * ell - m * m))
            )
            rows[ell - m] = a * x * rows[ell - 1 - m] - b * rows[ell - 2 - m]
        drows = np.empty_like(rows)
        for ell in range(m, L_max + 1):
            if ell == m:
                prev = 0.0
                c = 0.0
            else:
                prev = rows[ell - 1 - m]
                c = math.sqrt((2.0 * ell + 1.0) * (ell * ell - m * m) / (2.0 * ell - 1.0))
            drows[ell - m] = (ell * x * rows[ell - m] - c * prev) / s
        q.append(rows)
        dq.append(drows)
        if m < L_max:
            qmm = math.sqrt((2 * m + 3.0) / (2 * m + 2.0)) * s * qmm
    return q, dq


def _azimuth_bases(grid: SphereGrid, L_max: int):
    m = np.arange(L_max + 1)[:, None]
    ang = m * grid.phis[None, :]
    return np.cos(ang), np.sin(ang)


def analyze(grid: SphereGrid, values: np.ndarray) -> HarmonicCoeffs:
    """Forward transform: quadrature projection onto the grid's band."""
    if values.shape != (grid.n_theta, grid.n_phi):
        raise BandLimitMismatch(
            f"values shape {values.shape} does not match grid ({grid.n_theta}, {grid.n_phi})"
        )
    if not np.all(np.isfinite(values)):
        raise InvalidParams("values must be finite")
    L = grid.L_max
    q, _ = grid.legendre_tables()
    cosm, sinm = _azimuth_bases(grid, L)
    dphi = 2.0 * np.pi / grid.n_phi
    fc = values @ cosm.T * dphi  # (n_theta, L+1)
    fs = values @ sinm.T * dphi
    wfc = fc * grid.glweights[:, None]
    wfs = fs * grid.glweights[:, None]
    c = np.zeros(num_coeffs(L))
    for m in range(L + 1):
        proj_c = q[m] @ wfc[:, m]  # (L-m+1,)
        ells = np.arange(m, L + 1)
        if m == 0:
            c[ells * (ells + 1)] = proj_c
        else:
            proj_s = q[m] @ wfs[:, m]
            c[ells * (ells + 1) + m] = math.sqrt(2.0) * proj_c
            c[ells * (ells + 1) - m] = math.sqrt(2.0) * proj_s
    return HarmonicCoeffs(L, c)


def synthesize(grid: SphereGrid, coeffs: HarmonicCoeffs) -> np.ndarray:
    """Inverse transform onto the grid nodes.

    Accepts coefficients with band limit <= grid.L_max.
    """
    if coeffs.L_max > grid.L_max:
        raise BandLimitMismatch(
            f"coefficients of band {coeffs.L_max} exceed grid band {grid.L_max}"
        )
    L = coeffs.L_max
    q, _ = grid.legendre_tables()
    cosm, sinm = _azimuth_bases(grid, L)
    gc = np.zeros((L + 1, grid.n_theta))
    gs = np.zeros((L + 1, grid.n_theta))
    for m in range(L + 1):
        ells = np.arange(m, L + 1)
        rows = q[m][: L - m + 1]
        if m == 0:
            gc[0] = coeffs.c[ells * (ells + 1)] @ rows
        else:
            gc[m] = math.sqrt(2.0) * (coeffs.c[ells * (ells + 1) + m] @ rows)
            gs[m] = math.sqrt(2.0) * (coeffs.c[ells * (ells + 1) - m] @ rows)
    return gc.T @ cosm + gs.T @ sinm


def synthesize_gradient(grid: SphereGrid, coeffs: HarmonicCoeffs):
    """Surface gradient components on the grid nodes.

    Returns (d/dtheta, (1/sin theta) d/dphi); together with a radial
    part these assemble the full gradient of a solid harmonic expansion.
    """
    if coeffs.L_max > grid.L_max:
        raise BandLimitMismatch(
            f"coefficients of band {coeffs.L_max} exceed grid band {grid.L_max}"
        )
    L = coeffs.L_max
    q, dq = grid.legendre_tables()
    cosm, sinm = _azimuth_bases(grid, L)
    sin_t = np.sin(grid.thetas)
    # d/dtheta: replace q by dq.
    gc = np.zeros((L + 1, grid.n_theta))
    gs = np.zeros((L + 1, grid.n_theta))
    # (1/sin) d/dphi: swaps cos<->sin blocks with factor +-m/sin.
    hc = np.zeros((L + 1, grid.n_theta))
    hs = np.zeros((L + 1, grid.n_theta))
    for m in range(L + 1):
        ells = np.arange(m, L + 1)
        drows = dq[m][: L - m + 1]
        rows = q[m][: L - m + 1]
        if m == 0:
            gc[0] = coeffs.c[ells * (ells + 1)] @ drows
        else:
            cc = coeffs.c[ells * (ells + 1) + m]
            cs = coeffs.c[ells * (ells + 1) - m]
            gc[m] = math.sqrt(2.0) * (cc @ drows)
            gs[m] = math.sqrt(2.0) * (cs @ drows)
            over = (cc @ rows) * m / sin_t
            hs[m] = -math.sqrt(2.0) * over
            hc[m] = math.sqrt(2.0) * (cs @ rows) * m / sin_t
    d_theta = gc.T @ cosm + gs.T @ sinm
    d_phi_over_sin = hs.T @ sinm + hc.T @ cosm
    return d_theta, d_phi_over_sin


# ---------------------------------------------------------------------------
# Modified spherical Bessel functions i_l of the first kind.
# ---------------------------------------------------------------------------

class BesselValue(NamedTuple):
    value: float
    deriv: float
    underflow: bool


def _ratio_table(L_top: int, r: float) -> np.ndarray:
    """Ratios rho_l = i_l(r) / i_{l-1}(r) for l = 0..L_top.

    Downward continued fraction rho_l = 1 / ((2l+1)/r + rho_{l+1}),
    seeded with 0 far above L_top; each downward step contracts errors
    by ~rho^2, so the seed is forgotten long before l = L_top.
    rho_0 is the analytic i_0/i_{-1} = tanh(r).
    """
    start = L_top + 40
    rho = np.zeros(L_top + 1)
    tail = 0.0
    for ell in range(start, 0, -1):
        tail = 1.0 / ((2.0 * ell + 1.0) / r + tail)
        if ell <= L_top:
            rho[ell] = tail
    rho[0] = math.tanh(r)
    return rho


def _value_table(L_top: int, r: float) -> np.ndarray:
    """Values i_l(r), l = 0..L_top, normalized at i_0 = sinh(r)/r.

    Entries below the double-precision floor come out as 0.0.
    """
    rho = _ratio_table(L_top, r)
    vals = np.empty(L_top + 1)
    vals[0] = math.sinh(r) / r
    for ell in range(1, L_top + 1):
        vals[ell] = vals[ell - 1] * rho[ell]
    return vals


def bessel_i(ell: int, r: float) -> BesselValue:
    """Modified spherical Bessel i_l(r) and derivative at 0 < r <= 1.

    The ``underflow`` flag marks values below 1e-300; they are reported
    as 0.0 and downstream spectra fall back to ratio arithmetic.
    """
    if ell < 0 or ell > MAX_BESSEL_ORDER:
        raise InvalidParams(f"order must lie in [0, {MAX_BESSEL_ORDER}], got {ell}")
    if not (0.0 < r <= 1.0):
        raise InvalidParams(f"radius must lie in (0, 1], got {r}")
    vals = _value_table(ell + 1, r)
    i_l = vals[ell]
    if ell == 0:
        di = vals[1]  # i_0' = i_1
    else:
        di = vals[ell - 1] - (ell + 1.0) / r * i_l
    under = abs(i_l) < UNDERFLOW_FLOOR
    return BesselValue(float(i_l), float(di), bool(under))


@dataclass(frozen=True)
class NtDSpectrum:
    """Diagonal Neumann-to-Dirichlet eigenvalues lambda_l = i_l(1)/i_l'(1)."""

    L_max: int
    lam: np.ndarray

    def __post_init__(self):
        if self.lam.shape != (self.L_max + 1,):
            raise BandLimitMismatch("one eigenvalue per degree required")


def ntd_spectrum(L_max: int) -> NtDSpectrum:
    """Neumann-to-Dirichlet eigenvalues up to degree L_max.

    Computed from the Bessel ratio table, which stays representable at
    every order even where i_l(1) itself underflows:

        lambda_l = rho_l / (1 - (l+1) rho_l),   rho_l = i_l(1)/i_{l-1}(1).
    """
    if L_max < 0 or L_max > MAX_BAND_LIMIT:
        raise InvalidParams(f"band limit must lie in [0, {MAX_BAND_LIMIT}], got {L_max}")
    rho = _ratio_table(max(L_max, 1), 1.0)
    ells = np.arange(L_max + 1)
    lam = np.empty(L_max + 1)
    lam[0] = 1.0 / rho[1]
    if L_max >= 1:
        r = rho[1 : L_max + 1]
        lam[1:] = r / (1.0 - (ells[1:] + 1.0) * r)
    return NtDSpectrum(L_max=L_max, lam=lam)


def radial_profiles(L_max: int, r: float):
    """Per-degree interior profiles of solid solutions of -Delta u + u = 0.

    Returns (p, dp) with p[l] = i_l(r)/i_l(1) and dp[l] = i_l'(r)/i_l(1),
    assembled from Bessel ratio tables so that no intermediate value
    underflows until the profile itself (~ r^l) does.
    """
    if not (0.0 < r <= 1.0):
        raise InvalidParams(f"radius must lie in (0, 1], got {r}")
    rho_r = _ratio_table(L_max + 1, r)
    rho_1 = _ratio_table(L_max + 1, 1.0)
    p = np.empty(L_max + 1)
    dp = np.empty(L_max + 1)
    p[0] = (math.sinh(r) / r) / math.sinh(1.0)
    dp[0] = rho_r[1] * p[0]
    for ell in range(1, L_max + 1):
        p[ell] = p[ell - 1] * (rho_r[ell] / rho_1[ell])
        # i_{l-1}(r)/i_l(1) = p_{l-1} / rho_1[l]
        dp[ell] = p[ell - 1] / rho_1[ell] - (ell + 1.0) / r * p[ell]
    return p, dp


def harmonic_extension(coeffs: HarmonicCoeffs, r: float, grid: SphereGrid | None = None) -> np.ndarray:
    """Values at radius r of the solution of -Delta u + u = 0 whose
    boundary trace has the given coefficients."""
    if not (0.0 < r <= 1.0):
        raise InvalidParams(f"radius must lie in (0, 1], got {r}")
    if grid is None:
        grid = build_grid(coeffs.L_max)
    p, _ = radial_profiles(coeffs.L_max, r)
    return synthesize(grid, coeffs.scaled_by_degree(p))
