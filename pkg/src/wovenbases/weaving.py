"""Central-submatrix machinery for deciding whether two bases are woven.

Two bases are woven exactly when every central (principal) submatrix of the
change-of-basis matrix is invertible; such matrices form the class W.  Index
sets are 0-based throughout.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple

import numpy as np

from . import numeric
from .errors import BasisError, DimensionError, SingularSystemError, SizeError
from .numeric import (
    CODE_INCONCLUSIVE,
    CODE_INVERTIBLE,
    CODE_SINGULAR,
    DOUBLE,
    PrecisionConfig,
    as_cmatrix,
)

IN_W = "in_W"
NOT_IN_W = "not_in_W"
INCONCLUSIVE = "inconclusive"

DEFAULT_MAX_N = 24
DEFAULT_CHUNK = 4096


@dataclass(frozen=True)
class IndexSet:
    """A subset ``members`` of ``{0, ..., n-1}`` kept strictly increasing."""

    n: int
    members: tuple[int, ...] = ()

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        if self.n < 0:
            raise ValueError("ambient size must be nonnegative")
        if any(b <= a for a, b in zip(members, members[1:])):
            raise ValueError(f"members must be strictly increasing: {members}")
        if members and (members[0] < 0 or members[-1] >= self.n):
            raise ValueError(f"members {members} out of range for n={self.n}")

    @classmethod
    def of(cls, n: int, members: Iterable[int]) -> IndexSet:
        return cls(n, tuple(sorted(set(int(m) for m in members))))

    @classmethod
    def from_mask(cls, n: int, mask: int) -> IndexSet:
        return cls(n, tuple(i for i in range(n) if mask >> i & 1))

    @classmethod
    def full(cls, n: int) -> IndexSet:
        return cls(n, tuple(range(n)))

    @property
    def mask(self) -> int:
        return sum(1 << m for m in self.members)

    def complement(self) -> IndexSet:
        inside = set(self.members)
        return IndexSet(self.n, tuple(i for i in range(self.n) if i not in inside))

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members

    def to_dict(self) -> dict:
        return {"n": self.n, "members": list(self.members)}

    @classmethod
    def from_dict(cls, d: dict) -> IndexSet:
        return cls(int(d["n"]), tuple(d["members"]))


@dataclass(frozen=True)
class WeavingCertificate:
    """Outcome of a class-W decision plus the evidence behind it.

    ``worst_J`` is the singular witness when ``status`` is ``not_in_W`` and
    otherwise the subset with the smallest singular value (ties go to the
    smallest bit-mask).  Statistics cover every subset up to and including the
    witness in bit-mask order.  A ``fast_path`` certificate skips enumeration;
    there ``min_sigma`` is the smallest singular value of the full matrix and
    ``min_abs_det`` is exact for triangular input and a lower bound for
    definite input.
    """

    status: str
    worst_J: IndexSet | None
    min_sigma: float
    min_abs_det: float
    subsets_checked: int
    precision_used: PrecisionConfig
    max_sigma: float | None = None
    fast_path: str | None = None
    escalations: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["worst_J"] = self.worst_J.to_dict() if self.worst_J is not None else None
        d["precision_used"] = self.precision_used.to_dict()
        return d


@dataclass(frozen=True)
class FinitePerturbation:
    """The l2 operator ``I + E`` with ``E`` zero outside ``support x support``."""

    support: tuple[int, ...]
    block: np.ndarray = field(compare=False)

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        object.__setattr__(self, "support", support)
        if any(s < 0 for s in support) or any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support must be strictly increasing nonnegative indices")
        block = np.asarray(self.block, dtype=complex).reshape(len(support), len(support))
        object.__setattr__(self, "block", as_cmatrix(block, square=True))

    def local_operator(self) -> np.ndarray:
        """``(I + E)`` restricted to ``support x support``."""
        return np.eye(len(self.support), dtype=complex) + self.block

    def truncate(self, m: int) -> np.ndarray:
        """The ``m x m`` leading corner of ``I + E``."""
        if self.support and m <= self.support[-1]:
            raise DimensionError("corner must contain the whole support")
        out = np.eye(m, dtype=complex)
        idx = np.array(self.support, dtype=int)
        out[np.ix_(idx, idx)] += self.block
        return out


@dataclass(frozen=True)
class BasisPair:
    """Two bases of C^n stored as the columns of ``V`` and ``W``."""

    V: np.ndarray = field(compare=False)
    W: np.ndarray = field(compare=False)

    def __post_init__(self):
        V = as_cmatrix(self.V, square=True)
        W = as_cmatrix(self.W, square=True)
        if V.shape != W.shape:
            raise DimensionError(f"bases have different sizes {V.shape} and {W.shape}")
        for name, M in (("V", V), ("W", W)):
            if not numeric.certify_invertibility(M).invertible:
                raise BasisError(f"{name} is not a basis")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.V.shape[0]


def central_submatrix(A, J: IndexSet) -> np.ndarray:
    """``(a_jk)`` for ``j, k`` in ``J``."""
    A = as_cmatrix(A, square=True)
    if J.n != A.shape[0]:
        raise DimensionError(f"index set over {J.n} elements, matrix is {A.shape[0]}x{A.shape[0]}")
    if not len(J):
        raise ValueError("the empty central submatrix is excluded")
    idx = np.array(J.members)
    return A[np.ix_(idx, idx)]


# --------------------------------------------------------------------------
# enumeration engine


def _masks_members(masks: np.ndarray, n: int) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Group masks by popcount; returns ``k -> (positions in masks, members array)``."""
    bits = (masks[:, None] >> np.arange(n)) & 1
    sizes = bits.sum(axis=1)
    groups = {}
    for k in np.unique(sizes):
        pos = np.nonzero(sizes == k)[0]
        members = np.nonzero(bits[pos])[1].reshape(len(pos), int(k))
        groups[int(k)] = (pos, members)
    return groups


class _ChunkResult(NamedTuple):
    masks: np.ndarray
    codes: np.ndarray
    min_sigma: np.ndarray
    max_sigma: np.ndarray
    abs_det: np.ndarray
    escalations: int


def _scan_chunk(A: np.ndarray, masks: np.ndarray, cfg: PrecisionConfig) -> _ChunkResult:
    n = A.shape[0]
    m = len(masks)
    codes = np.empty(m, dtype=int)
    smin = np.empty(m)
    smax = np.empty(m)
    adet = np.empty(m)
    escalations = 0
    for _, (pos, members) in _masks_members(masks, n).items():
        stack = A[members[:, :, None], members[:, None, :]]
        bv = numeric.batch_verdicts(stack, cfg.zero_tol)
        smin[pos], smax[pos], adet[pos] = bv.min_singular, bv.max_singular, bv.abs_det
        c = bv.codes.copy()
        redo = np.nonzero(c == CODE_INCONCLUSIVE)[0] if cfg.mode == "double" else np.arange(len(c))
        ext_cfg = cfg if cfg.mode == "extended" else cfg.at_bits(cfg.escalation_bits)
        for r in redo:
            v = numeric.verdict(stack[r], ext_cfg)
            c[r] = {numeric.INVERTIBLE: CODE_INVERTIBLE, numeric.SINGULAR: CODE_SINGULAR}.get(
                v.status, CODE_INCONCLUSIVE
            )
            escalations += cfg.mode == "double"
        codes[pos] = c
    return _ChunkResult(masks, codes, smin, smax, adet, escalations)


class _Scan(NamedTuple):
    status: str
    witness_mask: int | None
    worst_mask: int | None
    min_sigma: float
    max_sigma: float
    min_abs_det: float
    checked: int
    escalations: int


def enumerate_central(
    A: np.ndarray,
    cfg: PrecisionConfig = DOUBLE,
    masks: Iterable[int] | None = None,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> _Scan:
    """Check central submatrices of ``A`` for the given masks (default: all nonempty).

    Masks are processed in ascending order and the scan stops after the chunk
    containing the first singular subset.  Results depend only on the mask
    order, never on ``chunk`` or ``workers``.
    """
    n = A.shape[0]
    if masks is None:
        all_masks = np.arange(1, 1 << n, dtype=np.int64)
    else:
        all_masks = np.array(sorted(masks), dtype=np.int64)
    chunks = [all_masks[i : i + chunk] for i in range(0, len(all_masks), chunk)]
    parts: list[_ChunkResult] = []
    witness = None

    def run(c):
        return _scan_chunk(A, c, cfg)

    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for start in range(0, len(chunks), max(1, workers)):
            wave = chunks[start : start + max(1, workers)]
            results = list(pool.map(run, wave)) if pool else [run(c) for c in wave]
            for res in results:
                parts.append(res)
                sing = np.nonzero(res.codes == CODE_SINGULAR)[0]
                if len(sing):
                    witness = int(res.masks[sing[0]])
                    break
            if witness is not None:
                break
    finally:
        if pool:
            pool.shutdown()

    if not parts:
        return _Scan(IN_W, None, None, np.inf, 0.0, np.inf, 0, 0)
    masks_c = np.concatenate([p.masks for p in parts])
    keep = masks_c <= witness if witness is not None else slice(None)
    masks_c = masks_c[keep]
    codes = np.concatenate([p.codes for p in parts])[keep]
    smin = np.concatenate([p.min_sigma for p in parts])[keep]
    smax = np.concatenate([p.max_sigma for p in parts])[keep]
    adet = np.concatenate([p.abs_det for p in parts])[keep]
    worst = int(masks_c[int(np.argmin(smin))])
    if witness is not None:
        status = NOT_IN_W
    elif np.any(codes == CODE_INCONCLUSIVE):
        status = INCONCLUSIVE
        witness = None
    else:
        status = IN_W
    return _Scan(
        status,
        witness,
        worst,
        float(smin.min()),
        float(smax.max()),
        float(adet.min()),
        len(masks_c),
        sum(p.escalations for p in parts),
    )


def _certificate(scan: _Scan, n: int, cfg: PrecisionConfig) -> WeavingCertificate:
    mask = scan.witness_mask if scan.status == NOT_IN_W else scan.worst_mask
    used = cfg.at_bits(cfg.escalation_bits) if scan.escalations else cfg
    return WeavingCertificate(
        status=scan.status,
        worst_J=IndexSet.from_mask(n, mask) if mask is not None else None,
        min_sigma=scan.min_sigma,
        min_abs_det=scan.min_abs_det,
        subsets_checked=scan.checked,
        precision_used=used,
        max_sigma=scan.max_sigma,
        escalations=scan.escalations,
    )


def _fast_path(A: np.ndarray, cfg: PrecisionConfig) -> WeavingCertificate | None:
    n = A.shape[0]
    lower = not np.any(np.triu(A, 1))
    upper = not np.any(np.tril(A, -1))
    if lower or upper:
        d = np.abs(np.diag(A))
        if np.all(d > numeric.INCONCLUSIVE_FACTOR * cfg.zero_tol * np.maximum(1.0, d)):
            small = d[d < 1.0]
            min_det = float(np.prod(small)) if len(small) else float(d.min())
            smin, smax = numeric.sigma_extremes(A)
            return WeavingCertificate(IN_W, None, smin, min_det, 0, cfg, smax, "triangular")
        return None
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.linalg.norm(A - A.conj().T) <= cfg.rel_tol * scale:
        lo, hi = numeric.hermitian_eigen_range(A, cfg.rel_tol)
        thr = cfg.zero_tol * max(1.0, abs(lo), abs(hi))
        if lo > thr or hi < -thr:
            # eigenvalues of central submatrices interlace, so the full matrix is the worst
            m = min(abs(lo), abs(hi))
            return WeavingCertificate(
                IN_W, IndexSet.full(n), m, m if m >= 1 else m**n, 0, cfg, max(abs(lo), abs(hi)), "hermitian_definite"
            )
    return None


def classify_class_w(
    A,
    cfg: PrecisionConfig = DOUBLE,
    max_n: int = DEFAULT_MAX_N,
    workers: int = 1,
    fast_paths: bool = True,
) -> WeavingCertificate:
    """Decide whether every central submatrix of ``A`` is invertible."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if n == 0:
        raise DimensionError("empty matrix")
    if n > max_n:
        raise SizeError(f"n={n} exceeds the enumeration limit {max_n}")
    if fast_paths:
        cert = _fast_path(A, cfg)
        if cert is not None:
            return cert
    return _certificate(enumerate_central(A, cfg, workers=workers), n, cfg)


def change_of_basis(pair: BasisPair, cfg: PrecisionConfig = DOUBLE) -> np.ndarray:
    """``A = V^{-1} W``: column ``i`` of ``W`` equals ``V @ A[:, i]``."""
    try:
        return numeric.solve(pair.V, pair.W, cfg)
    except SingularSystemError as exc:
        raise BasisError("V is not a basis") from exc


def are_woven(pair: BasisPair, cfg: PrecisionConfig = DOUBLE, max_n: int = DEFAULT_MAX_N) -> WeavingCertificate:
    return classify_class_w(change_of_basis(pair, cfg), cfg, max_n=max_n)


@dataclass(frozen=True)
class PermutationSearch:
    found: bool
    sigma: tuple[int, ...] | None
    certificate: WeavingCertificate | None
    change_of_basis: np.ndarray = field(compare=False, repr=False)
    permutations_classified: int = 0


def _hard_singular(M: np.ndarray, zero_tol: float) -> bool:
    s = np.linalg.svd(M, compute_uv=False)
    return bool(s[-1] <= zero_tol * max(1.0, s[0]))


def woven_up_to_permutation(
    pair: BasisPair, cfg: PrecisionConfig = DOUBLE, max_n: int = 8
) -> PermutationSearch:
    """Search for ``sigma`` such that ``V`` is woven with ``W[:, sigma]``.

    Permutations are visited in lexicographic order; a partial assignment is
    abandoned as soon as one of its 1x1 or 2x2 central minors is singular.
    """
    n = pair.n
    if n > max_n:
        raise SizeError(f"n={n} exceeds the permutation search limit {max_n}")
    A = change_of_basis(pair, cfg)
    tol = cfg.zero_tol
    classified = 0

    def extend(prefix: tuple[int, ...], free: list[int]):
        nonlocal classified
        j = len(prefix)
        if j == n:
            classified += 1
            cert = classify_class_w(A[:, list(prefix)], cfg, max_n=max_n)
            return (prefix, cert) if cert.status == IN_W else None
        for c in free:
            if _hard_singular(A[j : j + 1, [c]], tol):
                continue
            if any(_hard_singular(A[np.ix_([i, j], [prefix[i], c])], tol) for i in range(j)):
                continue
            hit = extend(prefix + (c,), [f for f in free if f != c])
            if hit is not None:
                return hit
        return None

    hit = extend((), list(range(n)))
    if hit is None:
        return PermutationSearch(False, None, None, A, classified)
    return PermutationSearch(True, hit[0], hit[1], A, classified)


@dataclass(frozen=True)
class MinorScan:
    holds: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None
    count: int
    min_abs: float
    escalations: int = 0

    @property
    def all_nonzero(self) -> bool:
        return self.holds


def scan_minors(
    A: np.ndarray,
    cfg: PrecisionConfig = DOUBLE,
    refine: Callable[[tuple[int, ...], tuple[int, ...]], numeric.InvertibilityVerdict] | None = None,
) -> MinorScan:
    """Test every square submatrix of ``A`` (by size, then rows, then columns).

    ``refine`` re-decides minors that land in the inconclusive band; the
    default recomputes them as ball determinants at ``cfg.escalation_bits``.
    """
    n = A.shape[0]
    ext_cfg = cfg.at_bits(cfg.escalation_bits)
    if refine is None:

        def refine(rows, cols):
            return numeric.verdict(A[np.ix_(rows, cols)], ext_cfg)

    count = 0
    min_abs = np.inf
    escalations = 0
    for k in range(1, n + 1):
        cols = np.array(list(itertools.combinations(range(n), k)), dtype=int)
        for rows in itertools.combinations(range(n), k):
            r = np.array(rows)
            stack = A[r[None, :, None], cols[:, None, :]]
            bv = numeric.batch_verdicts(stack, cfg.zero_tol)
            codes = bv.codes.copy()
            for i in np.nonzero(codes == CODE_INCONCLUSIVE)[0]:
                escalations += 1
                v = refine(rows, tuple(int(c) for c in cols[i]))
                codes[i] = CODE_INVERTIBLE if v.invertible else CODE_SINGULAR
            sing = np.nonzero(codes == CODE_SINGULAR)[0]
            if len(sing):
                i = int(sing[0])
                count += i + 1
                min_abs = min(min_abs, float(bv.abs_det[: i + 1].min()))
                return MinorScan(False, (rows, tuple(int(c) for c in cols[i])), count, min_abs, escalations)
            count += len(cols)
            min_abs = min(min_abs, float(bv.abs_det.min()))
    return MinorScan(True, None, count, float(min_abs), escalations)


def all_minors_nonzero(A, cfg: PrecisionConfig = DOUBLE, max_n: int = 12) -> MinorScan:
    """True iff every square submatrix is invertible, i.e. every column
    permutation of ``A`` lies in W."""
    A = as_cmatrix(A, square=True)
    if A.shape[0] > max_n:
        raise SizeError(f"n={A.shape[0]} exceeds the minor-scan limit {max_n}")
    return scan_minors(A, cfg)


SYMMETRIES = ("inverse", "transpose", "adjoint", "conj_diag", "conj_perm")


def apply_symmetry(A, sym: str, arg=None, cfg: PrecisionConfig = DOUBLE) -> np.ndarray:
    """Return ``A^{-1}``, ``A^t``, ``A^*``, ``D^* A D`` (``arg`` = diagonal of D)
    or ``P^* A P`` (``arg`` = permutation with ``P e_i = e_{p(i)}``)."""
    A = as_cmatrix(A, square=True)
    n = A.shape[0]
    if sym == "inverse":
        return numeric.solve(A, np.eye(n, dtype=complex), cfg)
    if sym == "transpose":
        return A.T.copy()
    if sym == "adjoint":
        return A.conj().T
    if sym == "conj_diag":
        d = np.asarray(arg, dtype=complex)
        if d.shape != (n,) or np.any(d == 0):
            raise ValueError("conj_diag needs n nonzero diagonal entries")
        return d.conj()[:, None] * A * d[None, :]
    if sym == "conj_perm":
        p = np.asarray(arg, dtype=int)
        if sorted(p.tolist()) != list(range(n)):
            raise ValueError("conj_perm needs a permutation of range(n)")
        return A[np.ix_(p, p)]
    raise ValueError(f"unknown symmetry {sym!r}; choose from {SYMMETRIES}")


def classify_finite_perturbation(
    fp: FinitePerturbation, cfg: PrecisionConfig = DOUBLE, max_support: int = DEFAULT_MAX_N
) -> WeavingCertificate:
    """Class-W decision for ``I + E`` on l2 with ``E`` finitely supported.

    Every central submatrix splits as ``(I + E)_T`` plus an identity tail with
    ``T`` inside the support, so only subsets of the support are examined.
    ``min_sigma`` and ``max_sigma`` are the uniform lower and upper bounds over
    all central submatrices, the tail contributing 1 to each.
    """
    s = len(fp.support)
    if s > max_support:
        raise SizeError(f"support of size {s} exceeds the limit {max_support}")
    ambient = fp.support[-1] + 1 if s else 0
    if s == 0:
        return WeavingCertificate(IN_W, None, 1.0, 1.0, 0, cfg, 1.0)
    scan = enumerate_central(fp.local_operator(), cfg)
    mask = scan.witness_mask if scan.status == NOT_IN_W else scan.worst_mask
    worst = None
    if mask is not None:
        worst = IndexSet(ambient, tuple(fp.support[i] for i in range(s) if mask >> i & 1))
    return WeavingCertificate(
        status=scan.status,
        worst_J=worst,
        min_sigma=min(1.0, scan.min_sigma),
        min_abs_det=min(1.0, scan.min_abs_det),
        subsets_checked=scan.checked,
        precision_used=cfg.at_bits(cfg.escalation_bits) if scan.escalations else cfg,
        max_sigma=max(1.0, scan.max_sigma),
        escalations=scan.escalations,
    )


class DRResult(NamedTuple):
    satisfied: bool
    norm_R: float
    sup_d: float


def dr_criterion(fp: FinitePerturbation) -> DRResult:
    """Diagonal-dominance test ``2 ||R|| <= sup |d_nn|`` for ``I + E = D + R``."""
    M = fp.local_operator()
    R = M - np.diag(np.diag(M))
    norm_R = float(np.linalg.norm(R, 2)) if len(fp.support) else 0.0
    # outside the support the diagonal is 1
    sup_d = max([1.0] + [float(x) for x in np.abs(np.diag(M))])
    return DRResult(2.0 * norm_R <= sup_d, norm_R, sup_d)
