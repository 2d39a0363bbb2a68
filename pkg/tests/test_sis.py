import numpy as np
import pytest

from wovenbases import sis
from wovenbases.errors import DomainError, GridMismatchError
from wovenbases.sis import CERTIFIED, NOT_CERTIFIED, SpectrumSamples

G, K = 512, 8


def base(f, grid=G, k=K):
    return SpectrumSamples.base_shelf(f, grid, k)


def perturbed(grid=G, k=K):
    return base(lambda z: 1 - 0.4 * np.exp(2j * np.pi * z), grid, k)


def degenerate(grid=G, k=K):
    # vanishes at zeta = 0, which is a grid point
    return base(lambda z: 1 - np.exp(2j * np.pi * z), grid, k)


def test_grid_points_half_open_and_nested():
    z = sis.grid_points(8)
    assert z[0] == -0.5 and z[-1] < 0.5 and np.allclose(np.diff(z), 1 / 8)
    assert np.array_equal(sis.grid_points(16)[::2], z)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        SpectrumSamples(1, 0, np.ones((1, 1)))
    with pytest.raises(ValueError):
        SpectrumSamples(4, 1, np.ones((2, 4)))
    with pytest.raises(ValueError):
        SpectrumSamples(4, 0, np.array([[1, np.nan, 1, 1]]))


def test_from_function_places_shelves():
    s = SpectrumSamples.from_function(lambda xi: xi, 4, 1)
    assert np.allclose(s.shelf(1), s.zeta + 1)
    assert np.allclose(s.shelf(-1), s.zeta - 1)


@pytest.mark.parametrize("grid", [2, 64, 4096])
def test_sinc_bracket_is_one(grid):
    b = sis.bracket(sis.sinc_spectrum(grid, 4))
    assert np.max(np.abs(b.values - 1)) <= 1e-12
    assert sis.riesz_bounds(b) == (1.0, 1.0)


def test_bracket_examples():
    zero = SpectrumSamples(G, K, np.zeros((2 * K + 1, G)))
    assert np.all(sis.bracket(zero).values == 0)
    vals = np.zeros((2 * K + 1, G))
    vals[K] = vals[K + 1] = 1
    assert np.allclose(sis.bracket(SpectrumSamples(G, K, vals)).values, 2)


def test_riesz_bounds_examples():
    vals = np.zeros((2 * K + 1, G))
    vals[K] = 1
    vals[K, 17] = 0
    assert sis.riesz_bounds(sis.bracket(SpectrumSamples(G, K, vals)))[0] == 0
    s = base(lambda z: np.sqrt(1 + 0.5 * np.cos(2 * np.pi * z)))
    lo, hi = sis.riesz_bounds(sis.bracket(s))
    assert lo == pytest.approx(0.5, abs=1e-4) and hi == pytest.approx(1.5, abs=1e-12)


def test_bracket_unimodular_invariance(rng):
    s = SpectrumSamples(G, K, rng.standard_normal((2 * K + 1, G)) + 1j * rng.standard_normal((2 * K + 1, G)))
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, G))
    t = SpectrumSamples(G, K, s.values * phase[None, :])
    assert np.allclose(sis.bracket(s).values, sis.bracket(t).values, rtol=1e-13)


def test_perturbation_examples():
    phi = sis.sinc_spectrum(G, K)
    cert = sis.perturbation_certify(phi, perturbed())
    assert cert.status == CERTIFIED
    assert cert.mu_est == pytest.approx(0.16, abs=1e-12)
    assert cert.A_est == 1.0 and cert.margin == pytest.approx(0.84)
    assert (cert.grid_size, cert.k_max) == (G, K)
    cert = sis.perturbation_certify(phi, phi)
    assert cert.status == CERTIFIED and cert.mu_est == 0
    cert = sis.perturbation_certify(phi, base(lambda z: 2.2 * np.ones_like(z)))
    assert cert.status == NOT_CERTIFIED and cert.mu_est == pytest.approx(1.44)


def test_mismatch_raises():
    with pytest.raises(GridMismatchError):
        sis.perturbation_certify(sis.sinc_spectrum(64, 2), sis.sinc_spectrum(128, 2))
    with pytest.raises(GridMismatchError):
        sis.perturbation_certify(sis.sinc_spectrum(64, 2), sis.sinc_spectrum(64, 3))
    with pytest.raises(GridMismatchError):
        sis.multi_perturbation_certify([sis.sinc_spectrum(64, 2)], [])


def test_tail_mass_reported():
    s = SpectrumSamples.from_function(lambda xi: np.exp(-(xi**2)), 64, 2)
    z = sis.grid_points(64)
    expected = np.max(np.exp(-2 * (z - 2) ** 2) + np.exp(-2 * (z + 2) ** 2))
    assert s.tail_mass() == pytest.approx(expected, rel=1e-12)
    assert sis.perturbation_certify(s, s).tail_mass == s.tail_mass()


def test_pw_corollary_examples():
    cert = sis.pw_corollary_certify(base(np.ones_like))
    assert cert.status == CERTIFIED and cert.margin == 1.0
    cert = sis.pw_corollary_certify(base(lambda z: 1.9 * np.ones_like(z)))
    assert cert.status == CERTIFIED and cert.sup_deviation == pytest.approx(0.9)
    cert = sis.pw_corollary_certify(base(lambda z: np.where(z < 0, 2.0, 1.0)))
    assert cert.status == NOT_CERTIFIED and cert.sup_deviation == pytest.approx(1.0)


def test_pw_matches_perturbation_against_sinc():
    psi = perturbed()
    a = sis.pw_corollary_certify(psi)
    b = sis.perturbation_certify(sis.sinc_spectrum(G, K), psi)
    assert a.status == b.status and a.mu_est == pytest.approx(b.mu_est, abs=1e-14)


def test_pw_bounds_clause():
    assert sis.pw_corollary_certify(base(lambda z: 1.2 * np.ones_like(z))).bounds_clause
    # |psi|^2 = 3.61 breaks max(B - 1, 1 - A) < 1
    assert not sis.pw_corollary_certify(base(lambda z: 1.9 * np.ones_like(z))).bounds_clause


def test_pw_rejects_off_shelf_mass():
    with pytest.raises(DomainError):
        sis.pw_corollary_certify(SpectrumSamples.from_function(np.ones_like, G, K))


def test_gram_field_examples():
    phi = sis.sinc_spectrum(G, K)
    g = sis.gram_field([phi])
    assert np.allclose(g.matrices[:, 0, 0], sis.bracket(phi).values)
    v1 = np.zeros((2 * K + 1, G))
    v1[K] = 1
    v2 = np.zeros((2 * K + 1, G))
    v2[K + 1] = 1
    g = sis.gram_field([SpectrumSamples(G, K, v1), SpectrumSamples(G, K, v2)])
    assert np.allclose(g.matrices, np.eye(2))
    g = sis.gram_field([phi, phi])
    assert np.allclose(g.matrices, [[1, 1], [1, 1]])
    lo, _ = g.eigen_ranges()
    assert np.max(np.abs(lo)) < 1e-12


def test_gram_field_is_hermitian_psd(rng):
    gens = [SpectrumSamples(G, 2, rng.standard_normal((5, G)) + 1j * rng.standard_normal((5, G))) for _ in range(3)]
    M = sis.gram_field(gens).matrices
    assert np.allclose(M, M.conj().transpose(0, 2, 1))
    assert np.linalg.eigvalsh(M).min() > -1e-12


def test_multi_examples():
    v1 = np.zeros((2 * K + 1, G))
    v1[K] = 1
    v2 = np.zeros((2 * K + 1, G))
    v2[K + 1] = 1
    Phi = [SpectrumSamples(G, K, v1), SpectrumSamples(G, K, v2)]
    cert = sis.multi_perturbation_certify(Phi, Phi)
    assert cert.status == CERTIFIED and cert.mu_est == 0
    Psi = [SpectrumSamples(G, K, 0.8 * v1), SpectrumSamples(G, K, 0.8 * v2)]
    cert = sis.multi_perturbation_certify(Phi, Psi)
    assert cert.status == CERTIFIED
    assert cert.mu_est == pytest.approx(0.04) and cert.A_est == pytest.approx(1.0)


def test_multi_single_generator_reduces(rng):
    for psi in (perturbed(), base(lambda z: 2.2 * np.ones_like(z)), degenerate()):
        phi = sis.sinc_spectrum(G, K)
        a = sis.perturbation_certify(phi, psi)
        b = sis.multi_perturbation_certify([phi], [psi])
        assert a.status == b.status
        for f in ("A_est", "B_est", "mu_est", "margin"):
            assert getattr(a, f) == pytest.approx(getattr(b, f), abs=1e-12)


def test_nested_grid_monotonicity():
    def f(z):
        return 1 + 0.3 * np.cos(2 * np.pi * z + 0.3) + 0.2j * np.sin(6 * np.pi * z)

    prev = None
    for grid in (16, 32, 64, 128, 256):
        phi = SpectrumSamples.from_function(f, grid, 1)
        psi = SpectrumSamples.from_function(lambda z: 0.9 * f(z) + 0.1 * np.cos(10 * np.pi * z), grid, 1)
        cert = sis.perturbation_certify(phi, psi)
        if prev is not None:
            assert cert.A_est <= prev.A_est
            assert cert.B_est >= prev.B_est
            assert cert.mu_est >= prev.mu_est
        prev = cert


def test_woven_subsets_seeded():
    a = sis.woven_subsets(5, 4, 7)
    assert a.shape == (4, 11) and a.dtype == bool
    assert np.array_equal(a, sis.woven_subsets(5, 4, 7))
    assert not np.array_equal(a, sis.woven_subsets(5, 4, 8))


def test_gram_route_matches_synthesis_matrix(rng):
    phi = SpectrumSamples.from_function(lambda xi: np.exp(-(xi**2)), 64, 3)
    psi = SpectrumSamples.from_function(lambda xi: (1 + 0.2j * xi) * np.exp(-(xi**2) / 1.5), 64, 3)
    N = 5
    fs = sis.finite_section_validate(phi, psi, N=N, trials=6, seed=3)
    for mask, (lo, hi) in zip(sis.woven_subsets(N, 6, 3), fs.trial_bounds):
        s = np.linalg.svd(sis.synthesis_matrix(phi, psi, mask), compute_uv=False)
        assert lo == pytest.approx(s[-1] ** 2, abs=1e-12)
        assert hi == pytest.approx(s[0] ** 2, abs=1e-12)


def test_finite_section_sinc_is_orthonormal():
    phi = sis.sinc_spectrum(G, K)
    lo, hi = sis.finite_section_validate(phi, phi, N=16, trials=5)
    assert lo == pytest.approx(1, abs=1e-12) and hi == pytest.approx(1, abs=1e-12)


def test_finite_section_certified_pair_meets_perturbation_bound():
    phi, psi = sis.sinc_spectrum(1024, 4), perturbed(1024, 4)
    cert = sis.perturbation_certify(phi, psi)
    fs = sis.finite_section_validate(phi, psi, N=32, trials=50, seed=0)
    assert fs.min_lower_bound > 0
    assert fs.min_lower_bound >= sis.perturbed_riesz_bounds(cert).lower - 0.05
    assert fs.max_upper_bound <= sis.perturbed_riesz_bounds(cert).upper + 0.05


def test_finite_section_deterministic():
    phi, psi = sis.sinc_spectrum(256, 2), perturbed(256, 2)
    assert sis.finite_section_validate(phi, psi, 8, 10, 5) == sis.finite_section_validate(phi, psi, 8, 10, 5)


def test_finite_section_degenerate_generator():
    psi = degenerate(1024, 2)
    assert sis.bracket(psi).values.min() == 0
    lo, _ = sis.finite_section_validate(psi, psi, N=32, trials=50, seed=0)
    assert lo < 0.01
    # weaving with sinc: the bound decays as the section grows
    phi = sis.sinc_spectrum(1024, 2)
    lows = [sis.finite_section_validate(phi, psi, N=N, trials=50, seed=0).min_lower_bound for N in (4, 16, 64)]
    assert lows[0] > lows[1] > lows[2]
    assert lows[2] < 0.05


def test_perturbed_riesz_bounds():
    cert = sis.perturbation_certify(sis.sinc_spectrum(G, K), perturbed())
    cb = sis.perturbed_riesz_bounds(cert)
    assert cb.lower == pytest.approx(0.36) and cb.upper == pytest.approx(1.96)
