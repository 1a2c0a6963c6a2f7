"""Spectral Neumann-to-Dirichlet machinery on the unit ball.

Solves the coupled system -Delta u + u = 0, du/dn = f(x, v) (and its
twin with u, v swapped) as a fixed point on boundary traces, and wraps
the solver in harnesses that exercise the exponent calculus, the
integrability ladder, and the sup-norm-vs-H1 estimate numerically.
"""

__version__ = "0.1.0"
