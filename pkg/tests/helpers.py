"""Independent oracles shared by the test modules.

Everything here is deliberately written against the math, not against the
package internals: dense Gaussian elimination for linear solves,
hand-differentiated manufactured solutions, and the closed-form
contraction factors in their published algebraic form.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from schwarz1d.problem import ProblemSpec


def dense_solve(A, b):
    """Gaussian elimination with partial pivoting (no library solver)."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = b.size
    for col in range(n):
        piv = col + int(np.argmax(np.abs(A[col:, col])))
        if A[piv, col] == 0.0:
            raise ZeroDivisionError("singular matrix")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        for row in range(col + 1, n):
            f = A[row, col] / A[col, col]
            A[row, col:] -= f * A[col, col:]
            b[row] -= f * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1:] @ x[row + 1:]) / A[row, row]
    return x


def tau_exponent5(L, L1, L2, p, q):
    """Double-sweep contraction factor in the exponent-5 algebraic form.

    |4 e^{5L2} + e^{5L} + p (e^{5L2} - e^{5L})| / |4 e^{5L2} + 1 + p (e^{5L2} - 1)|
    * |4 e^{5L1} + 1 - q (e^{5L1} - 1)| / |4 e^{5L1} + e^{5L} - q (e^{5L1} - e^{5L})|
    """
    X = math.exp(5 * L2)
    Y = math.exp(5 * L)
    Z = math.exp(5 * L1)
    f1 = abs((4 * X + Y + p * (X - Y)) / (4 * X + 1 + p * (X - 1)))
    f2 = abs((4 * Z + 1 - q * (Z - 1)) / (4 * Z + Y - q * (Z - Y)))
    return f1 * f2


class SineSolution:
    """Manufactured u*(x) = sin(pi x / L): exact values and derivatives."""

    def __init__(self, length: float):
        self.length = length
        self.w = math.pi / length

    def u(self, x):
        return np.sin(self.w * np.asarray(x, dtype=float))

    def du(self, x):
        return self.w * np.cos(self.w * np.asarray(x, dtype=float))

    def d2u(self, x):
        return -self.w**2 * np.sin(self.w * np.asarray(x, dtype=float))


def manufactured_elliptic(spec: ProblemSpec) -> tuple[ProblemSpec, SineSolution]:
    """Spec whose exact solution is sin(pi x / L) (vanishes at both ends).

    The source is  -a u*'' + b u*' + c u* - F(x, u*),  differentiated by
    hand for the constant diffusion coefficients the catalog uses.
    """
    assert spec.a.kind == "constant", "manufactured source assumes constant a"
    sol = SineSolution(spec.length)

    def src(x):
        x = np.asarray(x, dtype=float)
        ustar = sol.u(x)
        return (-spec.a(0.0) * sol.d2u(x) + np.atleast_1d(spec.b(x)) * sol.du(x)
                + np.atleast_1d(spec.c(x)) * ustar - np.atleast_1d(spec.F(x, ustar)))

    return replace(spec, source=src), sol


def manufactured_parabolic(spec: ProblemSpec) -> tuple[ProblemSpec, "object"]:
    """Spec whose exact solution is exp(-t) sin(pi x / L)."""
    assert spec.a.kind == "constant"
    sol = SineSolution(spec.length)

    class SpaceTime:
        @staticmethod
        def u(x, t):
            return math.exp(-t) * sol.u(x)

    def src(x, t):
        x = np.asarray(x, dtype=float)
        decay = math.exp(-t)
        ustar = decay * sol.u(x)
        return (-decay * sol.u(x) - spec.a(0.0) * decay * sol.d2u(x)
                + np.atleast_1d(spec.b(x)) * decay * sol.du(x)
                + np.atleast_1d(spec.c(x)) * ustar - np.atleast_1d(spec.F(x, ustar)))

    return replace(spec, source=src), SpaceTime


def fitted_order(hs, errs) -> float:
    """Least-squares slope of log err against log h (the observed order)."""
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
