"""Fourier matrices and the square-free question.

``F_n`` has entries ``zeta^(j k mod n)`` with ``zeta = exp(2 pi i / n)``; the
exponent is reduced first so equal entries are bit-identical.  ``F_n`` fails
to be in W whenever ``n`` is not square free; whether every square-free ``n``
gives ``F_n`` in W is open, and :func:`scan` only collects evidence.
"""

from __future__ import annotations

import functools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import gmpy2
import numpy as np

from . import numeric
from .errors import SizeError
from .numeric import DOUBLE, PrecisionConfig
from .weaving import IndexSet, MinorScan, _masks_members, scan_minors

log = logging.getLogger(__name__)

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"

DEFAULT_SCAN_CONFIG = PrecisionConfig.extended(192, escalation_bits=192, max_bits=1024)
DEFAULT_MAX_N = 20
CHUNK = 2048


def _exponents(n: int, members) -> np.ndarray:
    j = np.asarray(members, dtype=np.int64)
    return np.outer(j, j) % n


@functools.lru_cache(maxsize=64)
def roots_of_unity(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


@functools.lru_cache(maxsize=64)
def roots_of_unity_ball(n: int, bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Correctly rounded ``zeta^m`` as ``mpc`` midpoints with enclosing radii."""
    mid = np.empty(n, dtype=object)
    with gmpy2.context(precision=bits):
        for m in range(n):
            mid[m] = gmpy2.root_of_unity(n, m)
    rad = np.full(n, 2.0 * 2.0**-bits)
    rad[0] = 0.0
    return mid, rad


def fourier_matrix(n: int, cfg: PrecisionConfig = DOUBLE) -> np.ndarray:
    """Unnormalized ``F_n``: complex128 in double mode, ``mpc`` objects otherwise."""
    if n < 1:
        raise ValueError("Fourier matrix needs n >= 1")
    exps = _exponents(n, range(n))
    if cfg.mode == "double":
        return roots_of_unity(n)[exps]
    return roots_of_unity_ball(n, cfg.bits)[0][exps]


def is_square_free(n: int) -> tuple[bool, int | None]:
    """Trial division; returns ``(False, p)`` for the smallest prime with ``p^2 | n``."""
    if n < 2:
        raise ValueError("square-freeness is asked for n >= 2")
    m, p = n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return False, p
        p += 1
    return True, None


def two_by_two_witness(n: int) -> IndexSet | None:
    """For ``n = p^2 q`` the block on ``{0, pq}`` is ``[[1, 1], [1, 1]]``."""
    flag, p = is_square_free(n)
    if flag:
        return None
    q = n // (p * p)
    return IndexSet(n, (0, p * q))


def proportional_rows(n: int, members) -> tuple[int, int] | None:
    """Exact singularity certificate: two rows of the central block of ``F_n``
    whose exponents differ by a constant are proportional."""
    e = _exponents(n, members)
    diffs = (e[:, None, :] - e[None, :, :]) % n
    const = np.all(diffs == diffs[:, :, :1], axis=2)
    np.fill_diagonal(const, False)
    hit = np.argwhere(const)
    if len(hit):
        a, b = hit[0]
        return int(a), int(b)
    return None


def block_det(n: int, members, bits: int) -> numeric.DetResult:
    mid, rad = roots_of_unity_ball(n, bits)
    e = _exponents(n, members)
    return numeric.ball_det(mid[e], rad[e], bits)


@dataclass(frozen=True)
class FourierScanRow:
    n: int
    square_free: bool
    in_W: str
    min_abs_det: float
    min_abs_det_error: float
    witness_J: IndexSet | None
    subsets_checked: int
    precision_bits: int
    reduced: bool = True
    candidate_J: IndexSet | None = None
    seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("witness_J", "candidate_J"):
            v = getattr(self, key)
            d[key] = v.to_dict() if v is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> FourierScanRow:
        d = dict(d)
        for key in ("witness_J", "candidate_J"):
            if d.get(key) is not None:
                d[key] = IndexSet.from_dict(d[key])
        return cls(**d)


def _decide(n: int, members, bits: int, cap: int):
    """Returns ``(status, DetResult, bits_used)`` with status one of
    invertible / singular (exact) / inconclusive."""
    b = bits
    while True:
        res = block_det(n, members, b)
        if numeric.verdict_from_det(res).invertible:
            return numeric.INVERTIBLE, res, b
        if proportional_rows(n, members) is not None:
            return numeric.SINGULAR, res, b
        if b >= cap:
            return numeric.INCONCLUSIVE, res, b
        b = min(2 * b, cap)


def classify_fourier(
    n: int,
    cfg: PrecisionConfig = DEFAULT_SCAN_CONFIG,
    reduced: bool = True,
    max_n: int = DEFAULT_MAX_N,
    fast_path: bool = True,
) -> FourierScanRow:
    """Decide ``F_n`` in W with rigorous ball determinants.

    Non-square-free ``n`` is answered from the 2x2 witness.  Otherwise every
    subset containing 0 is examined (``reduced``), or all nonempty subsets.
    A singular block counts only when its rows are provably proportional;
    other near-zero determinants trigger precision doubling up to
    ``cfg.max_bits`` and then an inconclusive row.
    """
    if n < 2:
        raise ValueError("classify_fourier needs n >= 2")
    if n > max_n:
        raise SizeError(f"n={n} exceeds the Fourier classification limit {max_n}")
    bits = cfg.bits if cfg.mode == "extended" else cfg.escalation_bits
    cap = max(cfg.max_bits, bits)
    t0 = time.perf_counter()
    square_free, _ = is_square_free(n)
    if fast_path and not square_free:
        J = two_by_two_witness(n)
        res = block_det(n, J.members, bits)
        return FourierScanRow(
            n, False, NO, res.abs_value, res.error_bound, J, 0, bits, reduced,
            seconds=time.perf_counter() - t0,
        )
    masks = np.arange(1, 1 << n, 2 if reduced else 1, dtype=np.int64)
    min_abs, min_err = np.inf, 0.0
    used = bits
    candidate = None
    checked = 0
    for start in range(0, len(masks), CHUNK):
        chunk = masks[start : start + CHUNK]
        abs_det, bounds = _batched_block_dets(n, chunk, bits)
        for i, mask in enumerate(chunk):
            checked += 1
            if abs_det[i] > bounds[i]:
                if abs_det[i] < min_abs:
                    min_abs, min_err = abs_det[i], bounds[i]
                continue
            members = [b for b in range(n) if int(mask) >> b & 1]
            status, res, b = _decide(n, members, bits, cap)
            used = max(used, b)
            if res.abs_value < min_abs:
                min_abs, min_err = res.abs_value, res.error_bound
            if status == numeric.SINGULAR:
                return FourierScanRow(
                    n, square_free, NO, res.abs_value, res.error_bound, IndexSet(n, members),
                    checked, used, reduced, candidate, time.perf_counter() - t0,
                )
            if status == numeric.INCONCLUSIVE and candidate is None:
                candidate = IndexSet(n, members)
    verdict = INCONCLUSIVE if candidate is not None else YES
    return FourierScanRow(
        n, square_free, verdict, float(min_abs), float(min_err), None,
        checked, used, reduced, candidate, time.perf_counter() - t0,
    )


def _batched_block_dets(n: int, masks: np.ndarray, bits: int) -> tuple[np.ndarray, np.ndarray]:
    mid, rad = roots_of_unity_ball(n, bits)
    abs_det = np.empty(len(masks))
    bounds = np.empty(len(masks))
    for _, (pos, members) in _masks_members(masks, n).items():
        e = (members[:, :, None] * members[:, None, :]) % n
        values, bnd = numeric.ball_det_batch(mid[e], rad[e], bits)
        abs_det[pos] = np.abs(values.astype(complex))
        bounds[pos] = bnd
    return abs_det, bounds


@dataclass
class ScanReport:
    rows: list[FourierScanRow]
    config: dict
    seconds: float = 0.0
    findings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "config": self.config,
            "seconds": self.seconds,
            "findings": list(self.findings),
        }


def _row_findings(row: FourierScanRow) -> list[str]:
    out = []
    if not row.square_free and row.in_W != NO:
        out.append(f"n={row.n}: not square free but in_W={row.in_W}; contradicts the proven necessity")
    if row.square_free and row.in_W == NO:
        out.append(
            f"n={row.n}: square free but a singular central block was found at "
            f"{list(row.witness_J.members)}; counterexample candidate: square free yet not in W"
        )
    if row.in_W == INCONCLUSIVE:
        out.append(f"n={row.n}: inconclusive at {row.precision_bits} bits (candidate {row.candidate_J})")
    return out


def scan(
    n_lo: int,
    n_hi: int,
    cfg: PrecisionConfig = DEFAULT_SCAN_CONFIG,
    max_n: int = DEFAULT_MAX_N,
    workers: int = 1,
) -> ScanReport:
    """Classify ``F_n`` for every ``n`` in ``[n_lo, n_hi]``; an empty range gives
    an empty report.  Anomalies are logged as warnings and listed in ``findings``."""
    if n_hi > max_n:
        raise SizeError(f"n={n_hi} exceeds the Fourier classification limit {max_n}")
    ns = list(range(max(n_lo, 2), n_hi + 1)) if n_hi >= n_lo else []
    t0 = time.perf_counter()
    classify = functools.partial(classify_fourier, cfg=cfg, max_n=max_n)
    if workers > 1 and len(ns) > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(classify, ns))
    else:
        rows = [classify(n) for n in ns]
    findings = [f for r in rows for f in _row_findings(r)]
    for f in findings:
        log.warning(f)
    config = {"n_lo": n_lo, "n_hi": n_hi, "precision": cfg.to_dict(), "reduced": True}
    return ScanReport(rows, config, time.perf_counter() - t0, findings)


def minors_exhaustive(p: int, cfg: PrecisionConfig = DOUBLE, max_p: int = 11) -> MinorScan:
    """Scan every square submatrix of ``F_p``.

    Minors in the inconclusive band are recomputed as ball determinants from
    exact roots of unity at ``cfg.escalation_bits``.
    """
    if p < 1:
        raise ValueError("minors_exhaustive needs p >= 1")
    if p > max_p:
        raise SizeError(f"p={p} exceeds the minor-scan limit {max_p}")
    bits = cfg.escalation_bits

    def refine(rows, cols):
        mid, rad = roots_of_unity_ball(p, bits)
        e = np.outer(np.array(rows), np.array(cols)) % p
        return numeric.verdict_from_det(numeric.ball_det(mid[e], rad[e], bits))

    return scan_minors(fourier_matrix(p), cfg, refine)
