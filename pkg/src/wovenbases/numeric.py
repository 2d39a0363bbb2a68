"""Dense complex linear algebra with explicit zero tests.

Two precision levels are supported.  Double mode works on ``complex128``
arrays and decides invertibility from the smallest singular value.  Extended
mode runs Gaussian elimination in gmpy2 ``mpc`` arithmetic while carrying a
radius for every entry (midpoint-radius balls), so the returned determinant
comes with a bound on ``|computed - exact|``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple

import gmpy2
import numpy as np

from .errors import DimensionError, SingularSystemError, SymmetryError

UNIT_ROUNDOFF = 2.0**-53

INVERTIBLE = "invertible"
SINGULAR = "singular"
INCONCLUSIVE = "inconclusive"

# integer codes used by the batched verdicts
CODE_INVERTIBLE, CODE_SINGULAR, CODE_INCONCLUSIVE = 0, 1, 2
_CODE_NAMES = {CODE_INVERTIBLE: INVERTIBLE, CODE_SINGULAR: SINGULAR, CODE_INCONCLUSIVE: INCONCLUSIVE}

# width of the double-mode band that is neither singular nor invertible
INCONCLUSIVE_FACTOR = 10.0
# covers rounding in the float64 radius arithmetic itself
_RADIUS_SAFETY = 1.0 + 1e-10

# overflow surfaces as a non-finite bound, which callers read as inconclusive
_quiet_overflow = np.errstate(over="ignore", invalid="ignore")


@dataclass(frozen=True)
class PrecisionConfig:
    """Arithmetic mode and tolerances.

    ``escalation_bits`` is the precision used when a double-mode verdict falls
    in the inconclusive band; ``max_bits`` caps any precision doubling.
    """

    mode: str = "double"
    bits: int = 53
    zero_tol: float = 1e-9
    rel_tol: float = 1e-12
    escalation_bits: int = 192
    max_bits: int = 1024

    def __post_init__(self):
        if self.mode not in ("double", "extended"):
            raise ValueError(f"unknown precision mode {self.mode!r}")
        if self.mode == "double" and self.bits != 53:
            raise ValueError("double mode has exactly 53 bits")
        if self.bits < 53:
            raise ValueError("extended precision needs at least 53 bits")
        if not self.zero_tol > 0:
            raise ValueError("zero_tol must be positive")
        if not self.rel_tol >= 0:
            raise ValueError("rel_tol must be nonnegative")
        if self.max_bits < self.escalation_bits:
            raise ValueError("max_bits must be at least escalation_bits")

    @classmethod
    def extended(cls, bits: int = 192, **kwargs) -> PrecisionConfig:
        return cls(mode="extended", bits=bits, **kwargs)

    def at_bits(self, bits: int) -> PrecisionConfig:
        return replace(self, mode="extended", bits=bits)

    def to_dict(self) -> dict:
        return asdict(self)


DOUBLE = PrecisionConfig()


class DetResult(NamedTuple):
    value: complex  # gmpy2.mpc in extended mode
    error_bound: float
    bits: int

    @property
    def abs_value(self) -> float:
        return abs(complex(self.value))


@dataclass(frozen=True)
class InvertibilityVerdict:
    status: str
    abs_det: float
    error_bound: float
    min_singular: float | None = None
    max_singular: float | None = None
    bits: int = 53

    @property
    def invertible(self) -> bool:
        return self.status == INVERTIBLE

    @property
    def singular(self) -> bool:
        return self.status == SINGULAR

    def to_dict(self) -> dict:
        return asdict(self)


def as_cmatrix(a, square: bool = False) -> np.ndarray:
    """Validate and convert ``a`` to a finite 2-D ``complex128`` array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def hadamard_bound(a: np.ndarray) -> float:
    """Product of the Euclidean row norms, an upper bound for ``|det a|``."""
    if a.shape[0] == 0:
        return 1.0
    return float(np.prod(np.linalg.norm(a, axis=1)))


def to_mpc_array(a, bits: int) -> np.ndarray:
    """Exact conversion of a complex128 array to an object array of ``mpc``."""
    a = np.asarray(a, dtype=complex)
    out = np.empty(a.shape, dtype=object)
    with gmpy2.context(precision=bits):
        for idx, z in np.ndenumerate(a):
            out[idx] = gmpy2.mpc(z)
    return out


def _abs(x: np.ndarray) -> np.ndarray:
    return np.abs(x.astype(complex))


def ball_det(mid: np.ndarray, rad: np.ndarray, bits: int) -> DetResult:
    """Determinant of the ball matrix ``mid ± rad`` by fully pivoted elimination.

    ``mid`` holds ``mpc`` entries, ``rad`` float radii that contain the exact
    entries.  The result satisfies ``|value - det(exact)| <= error_bound`` for
    every exact matrix inside the balls.  When a pivot ball contains zero the
    elimination stops and the remaining Schur complement is bounded with
    Hadamard's inequality; the value is then reported as 0.
    """
    mid = np.asarray(mid, dtype=object)
    values, bounds = ball_det_batch(mid[None], np.asarray(rad, dtype=float)[None], bits)
    return DetResult(values[0], float(bounds[0]), bits)


def _swap(arrays, ar, k, other, axis):
    for X in arrays:
        if axis == 1:
            keep = X[ar, k].copy()
            X[ar, k] = X[ar, other]
            X[ar, other] = keep
        else:
            keep = X[ar, :, k].copy()
            X[ar, :, k] = X[ar, :, other]
            X[ar, :, other] = keep


@_quiet_overflow
def ball_det_batch(mid: np.ndarray, rad: np.ndarray, bits: int) -> tuple[np.ndarray, np.ndarray]:
    """:func:`ball_det` over a stack of shape ``(B, n, n)``.

    Returns an object array of ``mpc`` values and a float array of bounds.
    """
    mid = np.array(mid, dtype=object)
    rad = np.array(rad, dtype=float)
    B, n = mid.shape[0], mid.shape[1]
    eps = 4.0 * 2.0**-bits
    values = np.empty(B, dtype=object)
    bounds = np.zeros(B)
    with gmpy2.context(precision=bits):
        d_mid = np.empty(B, dtype=object)
        d_mid[:] = [gmpy2.mpc(1)] * B
        d_rad = np.zeros(B)
        sign = np.ones(B, dtype=int)
        idx = np.arange(B)
        mag = _abs(mid) if mid.size else np.zeros(mid.shape)
        for k in range(n):
            m = n - k
            sub = mag[:, k:, k:].reshape(len(idx), m * m)
            flat = np.argmax(sub, axis=1)
            pi, pj = np.divmod(flat, m)
            ar = np.arange(len(idx))
            pa = sub[ar, flat]
            pr = rad[ar, pi + k, pj + k]
            bad = ~(pa > pr)
            if bad.any():
                for b in np.nonzero(bad)[0]:
                    values[idx[b]], bounds[idx[b]] = _zero_consistent(
                        d_mid[b], d_rad[b], mag[b, k:, k:], rad[b, k:, k:]
                    )
                keep = ~bad
                mid, rad, mag, d_mid, d_rad, sign, idx = (x[keep] for x in (mid, rad, mag, d_mid, d_rad, sign, idx))
                pi, pj, pa, pr = pi[keep], pj[keep], pa[keep], pr[keep]
                ar = np.arange(len(idx))
                if not len(idx):
                    break
            rows, cols = pi + k, pj + k
            _swap((mid, rad, mag), ar, k, rows, axis=1)
            _swap((mid, rad, mag), ar, k, cols, axis=2)
            sign[rows != k] *= -1
            sign[cols != k] *= -1
            p = mid[:, k, k]
            new = d_mid * p
            d_rad = _abs(d_mid) * pr + d_rad * (pa + pr) + eps * _abs(new)
            d_mid = new
            if k == n - 1:
                break
            col = mid[:, k + 1 :, k]
            mult = col / p[:, None]
            l_abs = _abs(mult)
            l_rad = (mag[:, k + 1 :, k] * pr[:, None] + pa[:, None] * rad[:, k + 1 :, k]) / (pa * (pa - pr))[
                :, None
            ] + eps * l_abs
            row = mid[:, k, k + 1 :]
            row_abs = mag[:, k, k + 1 :]
            row_rad = rad[:, k, k + 1 :]
            schur = mid[:, k + 1 :, k + 1 :] - mult[:, :, None] * row[:, None, :]
            s_abs = _abs(schur)
            rad[:, k + 1 :, k + 1 :] += (
                l_abs[:, :, None] * row_rad[:, None, :]
                + l_rad[:, :, None] * (row_abs + row_rad)[:, None, :]
                + eps * (l_abs[:, :, None] * row_abs[:, None, :] + s_abs)
            )
            mid[:, k + 1 :, k + 1 :] = schur
            mag[:, k + 1 :, k + 1 :] = s_abs
        neg = sign < 0
        d_mid[neg] = -d_mid[neg]
    values[idx] = d_mid
    bounds[idx] = d_rad * _RADIUS_SAFETY
    return values, bounds


def _zero_consistent(d_mid, d_rad, mag, rad):
    rows = np.sqrt(np.sum((mag + rad) ** 2, axis=1))
    bound = (abs(complex(d_mid)) + d_rad) * float(np.prod(rows))
    return gmpy2.mpc(0), bound * _RADIUS_SAFETY


@_quiet_overflow
def det(a, cfg: PrecisionConfig = DOUBLE) -> DetResult:
    """Determinant with an error bound.

    Double mode uses LAPACK's partially pivoted LU and reports the estimate
    ``4 n u * hadamard(a)``.  Extended mode converts the entries exactly and
    calls :func:`ball_det`.
    """
    a = as_cmatrix(a, square=True)
    n = a.shape[0]
    if cfg.mode == "double":
        value = complex(np.linalg.det(a)) if n else 1.0 + 0j
        return DetResult(value, 4.0 * n * UNIT_ROUNDOFF * hadamard_bound(a), 53)
    return ball_det(to_mpc_array(a, cfg.bits), np.zeros(a.shape), cfg.bits)


def verdict_from_det(result: DetResult) -> InvertibilityVerdict:
    """Extended-mode zero test: singular iff ``|det| <= error_bound``."""
    abs_det = result.abs_value
    bound = result.error_bound
    if not (math.isfinite(abs_det) and math.isfinite(bound)):
        status = INCONCLUSIVE
    elif abs_det > bound:
        status = INVERTIBLE
    else:
        status = SINGULAR
    return InvertibilityVerdict(status, abs_det, bound, bits=result.bits)


def _classify_sigma(smin, smax, zero_tol):
    threshold = zero_tol * np.maximum(1.0, smax)
    return np.where(
        smin <= threshold,
        CODE_SINGULAR,
        np.where(smin < INCONCLUSIVE_FACTOR * threshold, CODE_INCONCLUSIVE, CODE_INVERTIBLE),
    )


@_quiet_overflow
def verdict(a, cfg: PrecisionConfig = DOUBLE) -> InvertibilityVerdict:
    """Single-shot invertibility verdict at the configured precision."""
    a = as_cmatrix(a, square=True)
    if cfg.mode == "extended":
        return verdict_from_det(det(a, cfg))
    if a.shape[0] == 0:
        return InvertibilityVerdict(INVERTIBLE, 1.0, 0.0, 1.0, 1.0)
    s = np.linalg.svd(a, compute_uv=False)
    smin, smax = float(s[-1]), float(s[0])
    d = det(a, cfg)
    code = int(_classify_sigma(smin, smax, cfg.zero_tol))
    return InvertibilityVerdict(_CODE_NAMES[code], abs(d.value), d.error_bound, smin, smax)


def certify_invertibility(a, cfg: PrecisionConfig = DOUBLE) -> InvertibilityVerdict:
    """Like :func:`verdict`, escalating inconclusive double-mode results."""
    v = verdict(a, cfg)
    if v.status == INCONCLUSIVE and cfg.mode == "double":
        ext = verdict(a, cfg.at_bits(cfg.escalation_bits))
        return replace(ext, min_singular=v.min_singular, max_singular=v.max_singular)
    return v


class BatchVerdicts(NamedTuple):
    min_singular: np.ndarray
    max_singular: np.ndarray
    abs_det: np.ndarray
    codes: np.ndarray


@_quiet_overflow
def batch_verdicts(stack: np.ndarray, zero_tol: float) -> BatchVerdicts:
    """Double-mode verdicts for a stack of equally sized square matrices."""
    s = np.linalg.svd(stack, compute_uv=False)
    smin, smax = s[:, -1], s[:, 0]
    return BatchVerdicts(smin, smax, np.abs(np.linalg.det(stack)), _classify_sigma(smin, smax, zero_tol))


def solve(a, b, cfg: PrecisionConfig = DOUBLE) -> np.ndarray:
    """Solve ``a x = b`` after certifying ``a`` invertible.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    a = as_cmatrix(a, square=True)
    b = np.asarray(b, dtype=complex)
    if b.shape[:1] != (a.shape[0],) or b.ndim > 2:
        raise DimensionError(f"right-hand side of shape {b.shape} does not match {a.shape}")
    v = certify_invertibility(a, cfg)
    if not v.invertible:
        raise SingularSystemError(f"system matrix is not certifiably invertible ({v.status})", v)
    if cfg.mode == "double":
        return np.linalg.solve(a, b)
    return _solve_extended(a, b, cfg.bits)


def _solve_extended(a, b, bits):
    vector = b.ndim == 1
    rhs = b.reshape(a.shape[0], -1)
    n, m = rhs.shape
    aug = to_mpc_array(np.hstack([a, rhs]), bits)
    with gmpy2.context(precision=bits):
        for k in range(n):
            piv = k + int(np.argmax(_abs(aug[k:, k])))
            if piv != k:
                aug[[k, piv]] = aug[[piv, k]]
            factors = aug[k + 1 :, k] / aug[k, k]
            aug[k + 1 :, k:] -= np.multiply.outer(factors, aug[k, k:])
        x = np.empty((n, m), dtype=object)
        for k in range(n - 1, -1, -1):
            acc = aug[k, n:] - aug[k, k + 1 : n].dot(x[k + 1 :]) if k < n - 1 else aug[k, n:]
            x[k] = acc / aug[k, k]
    out = x.astype(complex)
    return out[:, 0] if vector else out


def sigma_extremes(a) -> tuple[float, float]:
    """Smallest and largest singular values."""
    a = as_cmatrix(a, square=True)
    if a.shape[0] == 0:
        raise DimensionError("empty matrix has no singular values")
    s = np.linalg.svd(a, compute_uv=False)
    return float(s[-1]), float(s[0])


def hermitian_eigen_range(g, rel_tol: float = 1e-12) -> tuple[float, float]:
    """Extreme eigenvalues of a Hermitian matrix; raises SymmetryError otherwise."""
    g = as_cmatrix(g, square=True)
    if g.shape[0] == 0:
        raise DimensionError("empty matrix has no eigenvalues")
    scale = max(1.0, float(np.linalg.norm(g)))
    if np.linalg.norm(g - g.conj().T) > rel_tol * scale:
        raise SymmetryError("matrix is not Hermitian within tolerance")
    w = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    return float(w[0]), float(w[-1])
