"""Symmetric eigendecomposition by cyclic Jacobi rotations at any precision.

The same rotation code runs on floats (up to 16 digits) and on mpmath
numbers (17 to 512 digits).  Jacobi is slow asymptotically but the matrices
here are at most 24 x 24, and it stays accurate for clustered or exactly
degenerate eigenvalues, which is what crossing checks need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .arith import get_context, to_number
from .errors import ConvergenceError
from .parametric import NumericMatrix, ParametricMatrix, evaluate

MAX_SWEEPS = 40
# stop once off(A) <= 10**-(P - CONVERGENCE_GUARD) * ||A||_F
CONVERGENCE_GUARD = 5
# the residual invariants hold with this many guard digits
GUARD_DIGITS = 10


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues with paired orthonormal eigenvector columns.

    ``eigenvectors[k]`` is the k-th column, normalised so that its
    largest-magnitude component is positive (lowest index wins ties).
    """

    precision: int
    eigenvalues: tuple[Any, ...]
    eigenvectors: tuple[tuple[Any, ...], ...]
    sweeps: int = 0

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def values_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.eigenvalues])

    def vectors_array(self) -> np.ndarray:
        """Float copy with eigenvectors as columns."""
        return np.array([[float(x) for x in col] for col in self.eigenvectors]).T.reshape(self.n, self.n)


def _as_rows(m, ctx):
    if isinstance(m, NumericMatrix):
        rows = m.rows
    elif isinstance(m, np.ndarray):
        rows = m.tolist()
    else:
        rows = m
    try:
        a = [[to_number(ctx, x) for x in row] for row in rows]
    except ValueError as exc:
        raise ValueError(f"matrix has a non-finite entry: {exc}") from exc
    n = len(a)
    if n == 0 or any(len(r) != n for r in a):
        raise ValueError("matrix must be square and non-empty")
    for i in range(n):
        for j in range(i):
            if a[i][j] != a[j][i]:
                raise ValueError(f"matrix is not symmetric at ({i + 1},{j + 1})")
    return a


def _off_norm(a, ctx):
    n = len(a)
    s = ctx.zero
    for i in range(n):
        row = a[i]
        for j in range(i + 1, n):
            s += row[j] * row[j]
    return ctx.sqrt(2 * s)


def eig_sym(m, precision: int | None = None, max_sweeps: int = MAX_SWEEPS) -> EigenSystem:
    """Eigenvalues and eigenvectors of a real symmetric matrix.

    Args:
        m: a :class:`NumericMatrix`, a square array, or nested sequences.
        precision: decimal digits; defaults to ``m.precision`` or 16.
        max_sweeps: budget of full cyclic sweeps.

    Raises:
        ValueError: the input is not square, symmetric and finite.
        ConvergenceError: the off-diagonal norm did not drop below
            ``10**-(P-5) * ||M||_F`` within the budget.
    """
    if precision is None:
        precision = m.precision if isinstance(m, NumericMatrix) else 16
    ctx = get_context(precision)
    a = _as_rows(m, ctx)
    n = len(a)
    zero, one = ctx.zero, ctx.one
    v = [[one if i == j else zero for j in range(n)] for i in range(n)]

    frob = ctx.sqrt(sum((x * x for row in a for x in row), zero))
    tol = ctx.ldexp10(-(precision - CONVERGENCE_GUARD)) * frob
    # rotations on entries this small cannot matter at the working precision
    negligible = ctx.ldexp10(-(precision + 3)) * frob

    sweeps = 0
    off = _off_norm(a, ctx)
    while off > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {float(off):.3e})",
                off_norm=off,
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if ctx.fabs(apq) <= negligible:
                    a[p][q] = a[q][p] = zero
                    continue
                theta = (a[q][q] - a[p][p]) / (2 * apq)
                t = one / (ctx.fabs(theta) + ctx.sqrt(theta * theta + one))
                if theta < 0:
                    t = -t
                c = one / ctx.sqrt(t * t + one)
                s = t * c
                tau = s / (one + c)
                h = t * apq
                a[p][p] -= h
                a[q][q] += h
                a[p][q] = a[q][p] = zero
                ap, aq = a[p], a[q]
                for r in range(n):
                    if r == p or r == q:
                        continue
                    g, hh = ap[r], aq[r]
                    ap[r] = a[r][p] = g - s * (hh + g * tau)
                    aq[r] = a[r][q] = hh + s * (g - hh * tau)
                for row in v:
                    g, hh = row[p], row[q]
                    row[p] = g - s * (hh + g * tau)
                    row[q] = hh + s * (g - hh * tau)
        off = _off_norm(a, ctx)

    order = sorted(range(n), key=lambda k: a[k][k])
    values = tuple(a[k][k] for k in order)
    vectors = []
    for k in order:
        col = [v[r][k] for r in range(n)]
        big = max(range(n), key=lambda r: (ctx.fabs(col[r]), -r))
        if col[big] < 0:
            col = [-x for x in col]
        vectors.append(tuple(col))
    return EigenSystem(precision, values, tuple(vectors), sweeps)


def point_assignment(
    param: str,
    value,
    precision: int,
    fixed: Mapping[str, Any] | None = None,
    transform: Callable[[Any, int], Mapping[str, Any]] | None = None,
) -> dict[str, Any]:
    """Parameter values at one point of a one-dimensional path.

    Without ``transform`` the path variable is the parameter ``param`` itself;
    with it, ``transform(value, precision)`` supplies the parameter values
    (e.g. a van der Waals strength computed from a distance).
    """
    out = dict(fixed or {})
    if transform is None:
        out[param] = value
    else:
        out.update(transform(value, precision))
    return out


def gap_at(
    m: ParametricMatrix,
    param: str,
    value,
    pair: Sequence[int],
    precision: int = 16,
    *,
    fixed: Mapping[str, Any] | None = None,
    transform: Callable[[Any, int], Mapping[str, Any]] | None = None,
):
    """``lambda_b - lambda_a`` for ascending positions ``pair = (a, b)`` (1-based)."""
    a, b = pair
    if not 1 <= a < b <= m.n:
        raise ValueError(f"curve pair must satisfy 1 <= a < b <= {m.n}, got {pair}")
    ctx = get_context(precision)
    x = to_number(ctx, value)
    es = eig_sym(evaluate(m, point_assignment(param, x, precision, fixed, transform), precision))
    return es.eigenvalues[b - 1] - es.eigenvalues[a - 1]
