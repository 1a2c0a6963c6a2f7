"""Exponent calculus for the coupled boundary system.

Every quantity here is a rational function of the dimension N and the
growth exponents (p1, p2): the critical-curve defect delta0, the trace
and volume Sobolev indices, the interpolation weights, and the sup-norm
estimate exponents A, B together with their two-term splittings.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InvalidParams, NotStrictlySubcritical

#: Tolerance for deciding that delta0 vanishes (the pair sits exactly on
#: the critical curve).  The formulas are rational in the inputs, so
#: double precision resolves the sign well beyond this.
ON_CURVE_TOL = 1e-12

#: Geometric growth of the ladder exponents makes rows beyond this depth
#: overflow any sensible quadrature.
MAX_LADDER_DEPTH = 40


class RegionClass(enum.Enum):
    """Position of (p1, p2) relative to the critical curve."""

    StrictlyBelow = "StrictlyBelow"
    OnHyperbola = "OnHyperbola"
    Above = "Above"


@dataclass(frozen=True)
class SystemParams:
    """Dimension and growth exponents, normalized so that p1 <= p2.

    Inputs with p1 > p2 are silently swapped; ``swapped`` records that
    the caller's order was reversed.
    """

    N: int
    p1: float
    p2: float
    swapped: bool = False

    def __post_init__(self):
        if self.N < 3 or int(self.N) != self.N:
            raise InvalidParams(f"dimension N must be an integer >= 3, got {self.N}")
        if not (self.p1 > 1.0) or not (self.p2 > 1.0):
            raise InvalidParams(f"growth exponents must exceed 1, got p1={self.p1}, p2={self.p2}")
        if self.p1 > self.p2:
            lo, hi = self.p2, self.p1
            object.__setattr__(self, "p1", lo)
            object.__setattr__(self, "p2", hi)
            object.__setattr__(self, "swapped", True)


@dataclass(frozen=True)
class ExponentTable:
    """All derived exponents for a strictly subcritical pair."""

    N: int
    p1: float
    p2: float
    two_star_trace: float
    two_star_volume: float
    trace_conjugate: float
    delta0: float
    q1: float
    q2: float
    m1: float
    m2: float
    sigma1: float
    sigma2: float
    eta: float
    A: float
    B: float
    At1: float
    At2: float
    Bt1: float
    Bt2: float

    def as_dict(self):
        return {
            "N": self.N,
            "p1": self.p1,
            "p2": self.p2,
            "two_star_trace": self.two_star_trace,
            "two_star_volume": self.two_star_volume,
            "trace_conjugate": self.trace_conjugate,
            "delta0": self.delta0,
            "q1": self.q1,
            "q2": self.q2,
            "m1": self.m1,
            "m2": self.m2,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "eta": self.eta,
            "A": self.A,
            "B": self.B,
            "At1": self.At1,
            "At2": self.At2,
            "Bt1": self.Bt1,
            "Bt2": self.Bt2,
        }


def delta0_value(N: float, p1: float, p2: float) -> float:
    """Defect 1/(p1+1) + 1/(p2+1) - (N-2)/(N-1) of the critical curve.

    Accepts real N >= 3 so that region scans can sample non-integer
    dimensions; the solver itself only ever uses integer N.
    """
    if N < 3:
        raise InvalidParams(f"dimension must be >= 3, got {N}")
    if not (p1 > 1.0) or not (p2 > 1.0):
        raise InvalidParams(f"growth exponents must exceed 1, got p1={p1}, p2={p2}")
    return 1.0 / (p1 + 1.0) + 1.0 / (p2 + 1.0) - (N - 2.0) / (N - 1.0)


def classify(N: float, p1: float, p2: float) -> tuple[RegionClass, float]:
    """Classify an exponent pair against the critical curve for real N."""
    d0 = delta0_value(N, p1, p2)
    if d0 > ON_CURVE_TOL:
        return RegionClass.StrictlyBelow, d0
    if d0 < -ON_CURVE_TOL:
        return RegionClass.Above, d0
    return RegionClass.OnHyperbola, d0


def classify_region(params: SystemParams) -> tuple[RegionClass, float]:
    """Classify ``params`` and return the class together with delta0."""
    return classify(params.N, params.p1, params.p2)


def sobolev_indices(N: int) -> tuple[float, float, float]:
    """Trace index 2(N-1)/(N-2), volume index 2N/(N-2), and the trace
    conjugate 2(N-1)/N."""
    if N < 3 or int(N) != N:
        raise InvalidParams(f"dimension N must be an integer >= 3, got {N}")
    two_star_trace = 2.0 * (N - 1) / (N - 2)
    two_star_volume = 2.0 * N / (N - 2)
    trace_conjugate = 2.0 * (N - 1) / N
    return two_star_trace, two_star_volume, trace_conjugate


def derive_exponents(params: SystemParams) -> ExponentTable:
    """Populate the full exponent table for a strictly subcritical pair.

    Raises NotStrictlySubcritical when delta0 <= 0 (the sup-norm
    exponents blow up on the critical curve and are undefined above it).
    """
    region, d0 = classify_region(params)
    if region is not RegionClass.StrictlyBelow:
        raise NotStrictlySubcritical(
            f"(N={params.N}, p1={params.p1}, p2={params.p2}) has delta0={d0:.3e} <= 0"
        )
    N, p1, p2 = params.N, params.p1, params.p2
    two_star_trace, two_star_volume, trace_conjugate = sobolev_indices(N)

    # Lebesgue/Sobolev bookkeeping indices fixed by the proof strategy:
    # q_i = 2(N-1) balances the interpolation, forcing m_i = Nq_i/(N-1)
    # and sigma_i = (N-2)/(N-1).
    q = 2.0 * (N - 1)
    m = N * q / (N - 1)
    sigma = (N - 2.0) / (N - 1.0)

    # Two independent routes to eta; their agreement is an invariant
    # checked by the test suite on a parameter grid.
    ratio = two_star_trace / q  # equals 1/(N-2)
    eta_direct = 1.0 - sigma * sigma * (p1 - ratio) * (p2 - ratio)
    eta = sigma * (p1 + 1.0) * (p2 + 1.0) * d0

    A = 1.0 / ((N - 1) * (p1 + 1.0) * d0)
    B = 1.0 / ((N - 1) * (p2 + 1.0) * d0)

    denom = (p1 + 1.0) * (p2 + 1.0) * d0
    At1 = (p2 - 1.0 / (N - 2)) / ((N - 1) * denom)
    At2 = 1.0 / ((N - 2) * denom)
    Bt1 = (p1 - 1.0 / (N - 2)) / ((N - 1) * denom)
    Bt2 = 1.0 / ((N - 2) * denom)

    table = ExponentTable(
        N=N, p1=p1, p2=p2,
        two_star_trace=two_star_trace,
        two_star_volume=two_star_volume,
        trace_conjugate=trace_conjugate,
        delta0=d0,
        q1=q, q2=q, m1=m, m2=m,
        sigma1=sigma, sigma2=sigma,
        eta=eta, A=A, B=B,
        At1=At1, At2=At2, Bt1=Bt1, Bt2=Bt2,
    )
    # Internal consistency: the two eta formulas and the tilde splittings
    # agree identically in exact arithmetic.
    rel = abs(eta - eta_direct) / max(abs(eta), abs(eta_direct), 1e-300)
    if rel > 1e-9:
        raise AssertionError(f"eta formulas disagree: {eta} vs {eta_direct}")
    return table


def moser_ladder_exponents(N: int, i_max: int) -> list[tuple[int, float, float]]:
    """Integrability ladder (i, s_i, r_i) with s_i = (2_*/2)^i - 1 and
    r_i = 2_* (s_i + 1), the boundary exponent gained at step i."""
    if N < 3 or int(N) != N:
        raise InvalidParams(f"dimension N must be an integer >= 3, got {N}")
    if i_max < 1:
        raise InvalidParams(f"ladder depth must be >= 1, got {i_max}")
    if i_max > MAX_LADDER_DEPTH:
        raise InvalidParams(f"ladder depth capped at {MAX_LADDER_DEPTH}, got {i_max}")
    two_star = 2.0 * (N - 1) / (N - 2)
    half = two_star / 2.0
    rows = []
    for i in range(1, i_max + 1):
        s_i = half**i - 1.0
        r_i = two_star * (s_i + 1.0)
        rows.append((i, s_i, r_i))
    return rows


def weak_form_indices(params: SystemParams) -> dict:
    """Lebesgue indices governing when the boundary integrals of the
    weak formulation are finite."""
    N, p1, p2 = params.N, params.p1, params.p2
    two_star_trace, _, trace_conjugate = sobolev_indices(N)
    return {
        "trace_conjugate": trace_conjugate,
        "two_star_over_p1": two_star_trace / p1,
        "v_boundary_index": (N - 1.0) * (p2 - 1.0),
        "extra_boundary_integrability_required": p2 > two_star_trace - 1.0,
    }


def hyperbola_p2(N: float, p1: float) -> float:
    """Solve the critical-curve equality for p2 given p1.

    Only defined where the curve stays in the admissible quadrant
    (p2 > 1); raises InvalidParams otherwise.
    """
    if N < 3:
        raise InvalidParams(f"dimension must be >= 3, got {N}")
    rhs = (N - 2.0) / (N - 1.0) - 1.0 / (p1 + 1.0)
    if rhs <= 0.0:
        raise InvalidParams(f"no finite p2 on the curve for p1={p1}")
    p2 = 1.0 / rhs - 1.0
    if p2 <= 1.0:
        raise InvalidParams(f"curve leaves the admissible quadrant at p1={p1}")
    return p2


def square_bound(N: float) -> float:
    """Upper corner N/(N-2) of the comparison square overlaid on region
    scans."""
    if N < 3:
        raise InvalidParams(f"dimension must be >= 3, got {N}")
    return N / (N - 2.0)


