"""Recovering a vector from mixed samples.

For an index set ``J`` the mixed samples of ``x`` are ``(A x)(j)`` for ``j``
in ``J`` and ``x(j)`` elsewhere.  They equal ``A(J) x`` where ``A(J)`` takes
row ``j`` of ``A`` for ``j`` in ``J`` and the unit row otherwise, and
``det A(J) = det A_J``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numeric
from .errors import DimensionError, RecoveryImpossibleError, SingularSystemError
from .numeric import DOUBLE, PrecisionConfig, as_cmatrix
from .weaving import IndexSet


@dataclass(frozen=True)
class MixedSamples:
    J: IndexSet
    values: np.ndarray = field(compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape[:1] != (self.J.n,):
            raise DimensionError(f"{values.shape[0]} sample values for ambient size {self.J.n}")
        object.__setattr__(self, "values", values)


def _check(A, J: IndexSet) -> np.ndarray:
    A = as_cmatrix(A, square=True)
    if J.n != A.shape[0]:
        raise DimensionError(f"index set over {J.n} elements, matrix is {A.shape[0]}x{A.shape[0]}")
    return A


def weaving_operator(A, J: IndexSet) -> np.ndarray:
    A = _check(A, J)
    out = np.eye(A.shape[0], dtype=complex)
    idx = list(J.members)
    out[idx] = A[idx]
    return out


def sample(A, J: IndexSet, x) -> MixedSamples:
    A = _check(A, J)
    x = np.asarray(x, dtype=complex)
    if x.shape[:1] != (A.shape[0],):
        raise DimensionError(f"vector of length {x.shape[0]} for a {A.shape[0]}x{A.shape[0]} matrix")
    return MixedSamples(J, weaving_operator(A, J) @ x)


def recover(A, s: MixedSamples, cfg: PrecisionConfig = DOUBLE) -> np.ndarray:
    """Invert ``x -> A(J) x``.

    Entries off ``J`` are read directly; the rest solve
    ``A_J x_J = y_J - A[J, J^c] x_{J^c}``, which is ``A(J)`` eliminated by
    blocks.  ``s.values`` may carry several sample vectors as columns.
    """
    A = _check(A, s.J)
    y = s.values
    J = list(s.J.members)
    if not J:
        return y.copy()
    Jc = list(s.J.complement().members)
    x = y.copy()
    rhs = y[J] - A[np.ix_(J, Jc)] @ y[Jc]
    try:
        x[J] = numeric.solve(A[np.ix_(J, J)], rhs, cfg)
    except SingularSystemError as exc:
        raise RecoveryImpossibleError(
            f"central submatrix on {tuple(J)} is singular; A is not in class W",
            witness=s.J,
            verdict=exc.verdict,
        ) from exc
    return x


def two_matrix_recover(A, B, J: IndexSet, mixed, cfg: PrecisionConfig = DOUBLE) -> np.ndarray:
    """Recover ``x`` from ``(A x)(j)`` for ``j`` in ``J`` and ``(B x)(j)`` otherwise."""
    A = _check(A, J)
    B = _check(B, J)
    if not numeric.certify_invertibility(B, cfg).invertible:
        raise SingularSystemError("B must be invertible")
    M = B.copy()
    idx = list(J.members)
    M[idx] = A[idx]
    try:
        return numeric.solve(M, np.asarray(mixed, dtype=complex), cfg)
    except SingularSystemError as exc:
        raise RecoveryImpossibleError(
            f"rows of A on {tuple(idx)} stacked with B are dependent", witness=J, verdict=exc.verdict
        ) from exc
