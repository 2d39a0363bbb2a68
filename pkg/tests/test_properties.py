"""Property tests: invariants that hold for every input, not just examples."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import cgauss
from wovenbases import formats, numeric, reconstruct, sis, weaving
from wovenbases.weaving import IN_W, IndexSet

seeds = st.integers(0, 2**32 - 1)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def small_matrices(max_n=5):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(arrays(np.float64, (n, n), elements=finite), arrays(np.float64, (n, n), elements=finite))
    ).map(lambda pair: pair[0] + 1j * pair[1])


@settings(max_examples=60, deadline=None)
@given(small_matrices(), st.data())
def test_expansion_identity(A, data):
    n = A.shape[0]
    J = IndexSet.from_mask(n, data.draw(st.integers(1, (1 << n) - 1)))
    d_op = numeric.det(reconstruct.weaving_operator(A, J))
    d_blk = numeric.det(weaving.central_submatrix(A, J))
    assert abs(complex(d_op.value) - complex(d_blk.value)) <= d_op.error_bound + d_blk.error_bound + 1e-300


@settings(max_examples=40, deadline=None)
@given(small_matrices(4))
def test_certificate_matches_definition(A):
    cert = weaving.classify_class_w(A, fast_paths=False)
    n = A.shape[0]
    codes = []
    for mask in range(1, 1 << n):
        block = weaving.central_submatrix(A, IndexSet.from_mask(n, mask))
        codes.append(numeric.certify_invertibility(block).status)
    if cert.status == IN_W:
        assert all(c == numeric.INVERTIBLE for c in codes)
        assert cert.subsets_checked == (1 << n) - 1
    elif cert.status == weaving.NOT_IN_W:
        assert codes[cert.worst_J.mask - 1] == numeric.SINGULAR
        assert all(c != numeric.SINGULAR for c in codes[: cert.worst_J.mask - 1])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 6))
def test_closure_under_symmetries(seed, n):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, n, n)
    if weaving.classify_class_w(A).status != IN_W:
        return
    d = cgauss(rng, n)
    p = rng.permutation(n)
    for sym, arg in (("inverse", None), ("transpose", None), ("adjoint", None), ("conj_diag", d), ("conj_perm", p)):
        assert weaving.classify_class_w(weaving.apply_symmetry(A, sym, arg)).status == IN_W


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 7))
def test_recovery_roundtrip(seed, n):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, n, n)
    if weaving.classify_class_w(A).status != IN_W:
        return
    x = cgauss(rng, n)
    J = IndexSet.from_mask(n, int(rng.integers(0, 1 << n)))
    back = reconstruct.recover(A, reconstruct.sample(A, J, x))
    assert np.linalg.norm(back - x) <= 1e-8 * np.linalg.norm(x)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.data())
def test_index_set_complement_involution(n, data):
    J = IndexSet.from_mask(n, data.draw(st.integers(0, (1 << n) - 1)))
    assert J.complement().complement() == J
    assert J.mask + J.complement().mask == (1 << n) - 1


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_sigma_verdict_agreement(seed):
    A = cgauss(np.random.default_rng(seed), 4, 4)
    smin, smax = numeric.sigma_extremes(A)
    if smin > 10 * 1e-9 * max(1, smax):
        assert numeric.verdict(A).invertible
        assert numeric.verdict(A, numeric.PrecisionConfig.extended(128)).invertible


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 64), st.integers(0, 3))
def test_bracket_phase_invariance(seed, grid, k):
    rng = np.random.default_rng(seed)
    s = sis.SpectrumSamples(grid, k, cgauss(rng, 2 * k + 1, grid))
    u = np.exp(1j * rng.uniform(0, 2 * np.pi, grid))
    t = sis.SpectrumSamples(grid, k, s.values * u)
    assert np.allclose(sis.bracket(s).values, sis.bracket(t).values, rtol=1e-12, atol=0)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_workers_do_not_change_certificates(seed):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, 7, 7)
    if rng.random() < 0.5:
        A[rng.integers(7), rng.integers(7)] = 0
        A[3, 3] = 0
    a = weaving.classify_class_w(A, fast_paths=False)
    b = weaving.classify_class_w(A, fast_paths=False, workers=3)
    assert a == b


json_scalars = st.one_of(
    st.none(), st.booleans(), st.integers(-(10**6), 10**6), st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=8)
)
json_values = st.recursive(
    json_scalars, lambda c: st.lists(c, max_size=4) | st.dictionaries(st.text(max_size=5), c, max_size=4), max_leaves=12
)
json_objects = st.dictionaries(st.text(max_size=5), json_values, max_size=4)


@settings(max_examples=50, deadline=None)
@given(json_objects, json_objects)
def test_report_roundtrip(config, result):
    rep = formats.Report(["x"], config, result, 0, {"total": 0.5})
    assert formats.Report.from_json(rep.to_json()) == rep


def test_genericity():
    rng = np.random.default_rng(7)
    certified = sum(weaving.classify_class_w(cgauss(rng, 6, 6)).status == IN_W for _ in range(1000))
    assert certified >= 995


def test_structured_matrices_certify(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        T = np.tril(cgauss(rng, n, n))
        T[np.diag_indices(n)] = rng.uniform(0.5, 2, n) * np.exp(1j * rng.uniform(0, 6.28, n))
        assert weaving.classify_class_w(T).status == IN_W
        X = cgauss(rng, n, n)
        assert weaving.classify_class_w(X @ X.conj().T + 1e-3 * np.eye(n)).status == IN_W
