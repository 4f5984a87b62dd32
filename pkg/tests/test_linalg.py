import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpext import linalg as la


def test_diagonal_spectrum():
    w, _ = la.herm_eig(np.diag([2.0, 1.0]))
    assert np.allclose(w, [2, 1])


def test_pauli_x_spectrum():
    w, _ = la.herm_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(w, [1, -1])


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_reconstruction(d, seed):
    a = la.random_hermitian(np.random.default_rng(seed), d)
    w, v = la.herm_eig(a)
    assert np.allclose((v * w) @ v.conj().T, a, atol=1e-9)
    assert np.all(np.diff(w) <= 1e-12)


def test_bad_input_rejected():
    with pytest.raises(ValueError):
        la.herm_eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        la.herm_eig(np.array([[np.nan, 0], [0, 1]]))


def test_norms_diagonal_and_nilpotent():
    assert la.trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3)
    assert la.op_norm(np.diag([1.0, -2.0])) == pytest.approx(2)
    nil = np.array([[0, 2.0], [0, 0]])
    assert la.op_norm(nil) == pytest.approx(2)
    assert la.trace_norm(nil) == pytest.approx(2)


def _unitary_seesaw(a, rng, iters=50):
    """max |Tr[AU]| over unitaries by alternating phase/polar updates."""
    best = 0.0
    for _ in range(5):
        u = la.random_unitary(rng, a.shape[0])
        for _ in range(iters):
            u_new, _, vh = np.linalg.svd(a.conj().T)
            u = u_new @ vh
        best = max(best, abs(np.trace(a @ u)))
    return best


def test_trace_norm_unitary_oracle(rng):
    for _ in range(10):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert abs(la.trace_norm(a) - _unitary_seesaw(a, rng)) <= 1e-6


def test_trace_norm_dual_to_op_norm(rng):
    for _ in range(10):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        u, _, vh = np.linalg.svd(a)
        b = u @ vh
        assert la.op_norm(b) == pytest.approx(1)
        assert abs(np.trace(b.conj().T @ a)) == pytest.approx(la.trace_norm(a), abs=1e-9)
        for _ in range(20):
            c = la.random_unitary(rng, 4)
            assert abs(np.trace(c.conj().T @ a)) <= la.trace_norm(a) + 1e-9


def test_psd_helpers(rng):
    p = la.random_psd(rng, 4)
    r = la.psd_sqrt(p)
    assert np.allclose(r @ r, p, atol=1e-9)
    assert la.is_psd(p)
    clipped = la.psd_clip(np.diag([1.0, -0.5]))
    assert np.allclose(clipped, np.diag([1.0, 0.0]))
    s = la.sign_unitary(la.random_hermitian(rng, 3))
    assert np.allclose(s @ s, np.eye(3), atol=1e-9)


def test_partial_trace(rng):
    a, b = la.random_density(rng, 2), la.random_density(rng, 3)
    x = np.kron(a, b)
    assert np.allclose(la.partial_trace(x, (2, 3), keep=0), a)
    assert np.allclose(la.partial_trace(x, (2, 3), keep=1), b)


def test_block_diag_cq(rng):
    blocks = np.array([la.random_psd(rng, 2) for _ in range(3)])
    big = la.block_diag_cq(blocks)
    assert big.shape == (6, 6)
    assert np.trace(big) == pytest.approx(np.trace(blocks.sum(0)))
