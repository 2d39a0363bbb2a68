"""Weaving certificates for bases of integer translates.

A generator is described by samples of its Fourier transform on the shelves
``zeta + k`` for ``zeta`` on a uniform half-open grid of ``[-1/2, 1/2)`` and
``|k| <= K``.  Periodized sums over ``k`` are truncated to those shelves, and
suprema/infima over ``zeta`` are taken over the grid, so every certificate is
a statement at the recorded resolution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, GridMismatchError

CERTIFIED = "certified_woven"
NOT_CERTIFIED = "not_certified"

DEFAULT_GRID = 4096
DEFAULT_KMAX = 64


def grid_points(grid_size: int) -> np.ndarray:
    """``-1/2 + g / G`` for ``g = 0..G-1``; doubling ``G`` keeps the old points."""
    return -0.5 + np.arange(grid_size) / grid_size


@dataclass(frozen=True)
class SpectrumSamples:
    """``values[k + K, g]`` is the transform at ``grid_points(G)[g] + k``."""

    grid_size: int
    k_max: int
    values: np.ndarray = field(compare=False)
    label: str | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if self.grid_size < 2:
            raise ValueError("grid needs at least two points")
        if self.k_max < 0:
            raise ValueError("k_max must be nonnegative")
        if values.shape != (2 * self.k_max + 1, self.grid_size):
            raise ValueError(
                f"values of shape {values.shape}, expected {(2 * self.k_max + 1, self.grid_size)}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum samples must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls, fhat: Callable[[np.ndarray], np.ndarray], grid_size: int = DEFAULT_GRID,
        k_max: int = DEFAULT_KMAX, label: str | None = None,
    ) -> SpectrumSamples:
        """Sample a vectorized transform ``fhat(xi)`` on every shelf."""
        z = grid_points(grid_size)
        shelves = np.arange(-k_max, k_max + 1)[:, None]
        values = np.broadcast_to(fhat(z[None, :] + shelves), (2 * k_max + 1, grid_size))
        return cls(grid_size, k_max, np.array(values, dtype=complex), label)

    @classmethod
    def base_shelf(
        cls, fhat: Callable[[np.ndarray], np.ndarray], grid_size: int = DEFAULT_GRID,
        k_max: int = DEFAULT_KMAX, label: str | None = None,
    ) -> SpectrumSamples:
        """Transform supported on ``[-1/2, 1/2)``: ``fhat`` is evaluated at ``zeta``
        on shelf 0 only."""
        values = np.zeros((2 * k_max + 1, grid_size), dtype=complex)
        values[k_max] = fhat(grid_points(grid_size))
        return cls(grid_size, k_max, values, label)

    @property
    def zeta(self) -> np.ndarray:
        return grid_points(self.grid_size)

    def shelf(self, k: int) -> np.ndarray:
        return self.values[k + self.k_max]

    def tail_mass(self) -> float:
        """Largest ``sum |samples|^2`` on the two boundary shelves ``|k| = K``."""
        if self.k_max == 0:
            return 0.0
        edge = np.abs(self.values[[0, -1]]) ** 2
        return float(edge.sum(axis=0).max())

    def __sub__(self, other: SpectrumSamples) -> SpectrumSamples:
        _match(self, other)
        return SpectrumSamples(self.grid_size, self.k_max, self.values - other.values)


def sinc_spectrum(grid_size: int = DEFAULT_GRID, k_max: int = DEFAULT_KMAX) -> SpectrumSamples:
    """Transform of ``sin(pi x)/(pi x)``: the indicator of ``[-1/2, 1/2)``."""
    return SpectrumSamples.base_shelf(lambda z: np.ones_like(z), grid_size, k_max, "sinc")


def _match(a: SpectrumSamples, b: SpectrumSamples):
    if (a.grid_size, a.k_max) != (b.grid_size, b.k_max):
        raise GridMismatchError(
            f"spectra sampled on (G={a.grid_size}, K={a.k_max}) and (G={b.grid_size}, K={b.k_max})"
        )


@dataclass(frozen=True)
class BracketSamples:
    grid_size: int
    values: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class GramField:
    grid_size: int
    n_gen: int
    matrices: np.ndarray = field(compare=False)  # shape (G, n, n)

    def eigen_ranges(self) -> tuple[np.ndarray, np.ndarray]:
        w = np.linalg.eigvalsh(self.matrices)
        return w[:, 0], w[:, -1]


@dataclass(frozen=True)
class SISCertificate:
    """Sufficient-only verdict: ``not_certified`` does not mean not woven."""

    status: str
    A_est: float
    B_est: float
    mu_est: float
    margin: float
    grid_size: int
    k_max: int
    tail_mass: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PWCertificate(SISCertificate):
    """Adds the bounds clause: ``A <= |psi_hat|^2 <= B`` with ``max(B-1, 1-A) < 1``."""

    sup_deviation: float = 0.0
    psi_lower: float = 0.0
    psi_upper: float = 0.0
    bounds_clause: bool = False


def bracket(s: SpectrumSamples) -> BracketSamples:
    return BracketSamples(s.grid_size, np.sum(np.abs(s.values) ** 2, axis=0))


def riesz_bounds(b: BracketSamples) -> tuple[float, float]:
    return float(b.values.min()), float(b.values.max())


def _certificate(A: float, B: float, mu: float, s: SpectrumSamples, tail: float) -> SISCertificate:
    status = CERTIFIED if (A > 0 and mu < A) else NOT_CERTIFIED
    return SISCertificate(status, A, B, mu, A - mu, s.grid_size, s.k_max, tail)


def perturbation_certify(phi: SpectrumSamples, psi: SpectrumSamples) -> SISCertificate:
    """``sup bracket(phi - psi) < inf bracket(phi)`` certifies that the translates
    of ``psi`` form a Riesz basis woven with those of ``phi``."""
    _match(phi, psi)
    A, B = riesz_bounds(bracket(phi))
    mu = float(bracket(phi - psi).values.max())
    return _certificate(A, B, mu, phi, max(phi.tail_mass(), psi.tail_mass()))


def pw_corollary_certify(psi: SpectrumSamples, support_tol: float = 1e-12) -> PWCertificate:
    """Paley-Wiener case: compare ``psi`` with the sinc basis.

    Certified when ``sup |1 - psi_hat| < 1`` on the grid.
    """
    off = np.delete(psi.values, psi.k_max, axis=0)
    if off.size and np.abs(off).max() > support_tol:
        raise DomainError("psi_hat is not supported on [-1/2, 1/2)")
    base = psi.shelf(0)
    sup_dev = float(np.abs(1.0 - base).max())
    lo, hi = float((np.abs(base) ** 2).min()), float((np.abs(base) ** 2).max())
    mu = sup_dev**2
    status = CERTIFIED if sup_dev < 1.0 else NOT_CERTIFIED
    return PWCertificate(
        status, 1.0, 1.0, mu, 1.0 - mu, psi.grid_size, psi.k_max, 0.0,
        sup_dev, lo, hi, bool(lo > 0 and max(hi - 1.0, 1.0 - lo) < 1.0),
    )


def gram_field(gens: Sequence[SpectrumSamples]) -> GramField:
    """``G(zeta)[j, l] = sum_k phi_j(zeta + k) conj(phi_l(zeta + k))``."""
    if not gens:
        raise ValueError("need at least one generator")
    for g in gens[1:]:
        _match(gens[0], g)
    V = np.stack([g.values for g in gens])  # (n, shelves, G)
    M = np.einsum("jkg,lkg->gjl", V, V.conj())
    return GramField(gens[0].grid_size, len(gens), M)


def multi_perturbation_certify(Phi: Sequence[SpectrumSamples], Psi: Sequence[SpectrumSamples]) -> SISCertificate:
    """Several generators: ``sup lambda_max G_{Phi-Psi} < inf lambda_min G_Phi``."""
    if len(Phi) != len(Psi):
        raise GridMismatchError(f"{len(Phi)} generators against {len(Psi)}")
    for a, b in zip(Phi, Psi):
        _match(a, b)
    lo, hi = gram_field(Phi).eigen_ranges()
    _, dhi = gram_field([a - b for a, b in zip(Phi, Psi)]).eigen_ranges()
    tail = max(s.tail_mass() for s in (*Phi, *Psi))
    return _certificate(float(lo.min()), float(hi.max()), float(dhi.max()), Phi[0], tail)


@dataclass(frozen=True)
class FiniteSectionBounds:
    min_lower_bound: float
    max_upper_bound: float
    trial_bounds: tuple[tuple[float, float], ...] = ()
    seed: int | None = None

    def __iter__(self):
        return iter((self.min_lower_bound, self.max_upper_bound))


def woven_subsets(N: int, trials: int, seed: int | None) -> np.ndarray:
    """Boolean masks over ``k = -N..N`` (True means the ``psi`` translate),
    drawn serially so a seed fixes the sequence."""
    rng = np.random.default_rng(seed)
    return rng.random((trials, 2 * N + 1)) < 0.5


def _cross_coefficients(phi: SpectrumSamples, psi: SpectrumSamples, N: int) -> np.ndarray:
    """``c[s, t, d] = (1/G) sum_g exp(-2 pi i d zeta_g) H_st(zeta_g)`` for lags
    ``d = -2N..2N`` where ``H`` is the 2x2 Gram field of ``(phi, psi)``."""
    H = gram_field([phi, psi]).matrices  # (G, 2, 2)
    z = phi.zeta
    lags = np.arange(-2 * N, 2 * N + 1)
    E = np.exp(-2j * np.pi * np.outer(lags, z)) / phi.grid_size
    return np.einsum("dg,gst->std", E, H)


def synthesis_matrix(phi: SpectrumSamples, psi: SpectrumSamples, mask: np.ndarray) -> np.ndarray:
    """Quadrature-weighted transforms of the woven translates, one column per ``k``.

    Column ``k`` stacks ``exp(-2 pi i k zeta) f_hat(zeta + m) / sqrt(G)`` over
    shelves ``m`` and grid points, with ``f = psi`` where ``mask`` is set.
    """
    _match(phi, psi)
    N = (len(mask) - 1) // 2
    ks = np.arange(-N, N + 1)
    phase = np.exp(-2j * np.pi * np.outer(phi.zeta, ks))  # (G, 2N+1)
    cols = []
    for i in range(len(ks)):
        src = psi.values if mask[i] else phi.values
        cols.append((src * phase[:, i][None, :]).ravel())
    return np.stack(cols, axis=1) / np.sqrt(phi.grid_size)


def finite_section_validate(
    phi: SpectrumSamples, psi: SpectrumSamples, N: int = 32, trials: int = 50, seed: int | None = 0
) -> FiniteSectionBounds:
    """Empirical Riesz bounds of random weavings of the translates ``|k| <= N``.

    For each drawn mask the Gram matrix of the woven columns is
    ``c[s(l), s(k), l - k]`` (see :func:`_cross_coefficients`), equal to
    ``M^* M`` for the synthesis matrix ``M`` without forming it.  Its extreme
    eigenvalues are the lower and upper bounds of that section.
    """
    _match(phi, psi)
    c = _cross_coefficients(phi, psi, N)
    masks = woven_subsets(N, trials, seed)
    ks = np.arange(-N, N + 1)
    lag = ks[None, :] - ks[:, None] + 2 * N
    per_trial = []
    for mask in masks:
        s = mask.astype(int)
        gram = c[s[None, :], s[:, None], lag]
        w = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
        per_trial.append((float(w[0]), float(w[-1])))
    lows = [lo for lo, _ in per_trial] or [np.inf]
    highs = [hi for _, hi in per_trial] or [0.0]
    return FiniteSectionBounds(min(lows), max(highs), tuple(per_trial), seed)


class PerturbedRieszBounds(NamedTuple):
    lower: float
    upper: float


def perturbed_riesz_bounds(cert: SISCertificate) -> PerturbedRieszBounds:
    """Riesz bounds implied by a perturbation of size ``mu`` below ``A``:
    ``((sqrt A - sqrt mu)^2, (sqrt B + sqrt mu)^2)``."""
    ra, rb, rm = np.sqrt(cert.A_est), np.sqrt(cert.B_est), np.sqrt(cert.mu_est)
    return PerturbedRieszBounds(float(max(ra - rm, 0.0) ** 2), float((rb + rm) ** 2))
