import itertools
import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import random_cq_blocks
from qpext import linalg as la
from qpext import norms as nm
from qpext.errors import SizeLimitError, ValidationError
from qpext.model import CqState

vectors = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=10)


def sigma_lp(w, k):
    """min |a|_1 + 2^k |b|_inf over splits w = a + b (explicit LP)."""
    w = np.asarray(w, float)
    n = w.size
    # variables: a (n), b (n), u (n) >= |a|, t >= |b_i|
    c = np.concatenate([np.zeros(2 * n), np.ones(n), [2.0 ** k]])
    eye, z = np.eye(n), np.zeros((n, n))
    one = np.ones((n, 1))
    a_ub = np.block([[eye, z, -eye, np.zeros((n, 1))], [-eye, z, -eye, np.zeros((n, 1))],
                     [z, eye, z, -one], [z, -eye, z, -one]])
    a_eq = np.hstack([eye, eye, z, np.zeros((n, 1))])
    bounds = [(None, None)] * (2 * n) + [(0, None)] * (n + 1)
    r = linprog(c, A_ub=a_ub, b_ub=np.zeros(4 * n), A_eq=a_eq, b_eq=w, bounds=bounds, method="highs")
    return r.fun


def water_filling_lp(values, k):
    """max sum y_j v_j with 0 <= y_j <= 2^-k s, sum y <= s, s <= 1."""
    v = np.asarray(values, float)
    n = v.size
    c = -np.concatenate([v, [0.0]])
    a_ub = np.vstack([np.hstack([np.eye(n), -2.0 ** -k * np.ones((n, 1))]),
                      np.concatenate([np.ones(n), [-1.0]])[None]])
    r = linprog(c, A_ub=a_ub, b_ub=np.zeros(n + 1), bounds=[(0, None)] * n + [(0, 1)], method="highs")
    return -r.fun


# cap / sigma ---------------------------------------------------------

def test_cap_examples():
    assert nm.cap_norm([0.5, 0.5], 1) == pytest.approx(1)
    assert nm.cap_norm([1, 0], 1) == pytest.approx(2)


@given(vectors, st.floats(0, 4))
def test_cap_is_max_of_norms(v, k):
    v = np.asarray(v)
    assert nm.cap_norm(v, k) == pytest.approx(max(2**k * np.abs(v).max(), np.abs(v).sum()))


def test_sigma_examples():
    assert nm.sigma_norm([1, 0], 1) == pytest.approx(1)
    assert nm.sigma_norm([0.6, 0.3, 0.1], 1) == pytest.approx(0.9)
    assert sigma_lp([0.6, 0.3, 0.1], 1) == pytest.approx(0.9)


def test_sigma_matches_lp(rng):
    for _ in range(200):
        n = int(rng.integers(1, 11))
        w = rng.standard_normal(n)
        k = float(rng.uniform(0, 4))
        assert abs(nm.sigma_norm(w, k) - sigma_lp(w, k)) <= 1e-9


@given(vectors, vectors, st.floats(0, 4))
def test_pairing_inequality(v, w, k):
    m = min(len(v), len(w))
    v, w = np.asarray(v[:m]), np.asarray(w[:m])
    assert abs(v @ w) <= nm.cap_norm(v, k) * nm.sigma_norm(w, k) + 1e-9
    assert nm.dual_pairing_check(v, w, k)


def test_pairing_trivial():
    assert nm.dual_pairing_check([1.0], [1.0], 0)


@given(vectors, st.floats(0, 4))
def test_supporting_functional(v, k):
    v = np.asarray(v)
    s = nm.supporting_functional(v, k)
    assert abs(v @ s - nm.cap_norm(v, k)) <= 1e-8 * (1 + nm.cap_norm(v, k))
    assert nm.cap_dual_norm(s, k) <= 1 + 1e-12


def test_cap_dual_is_scaled_sigma(rng):
    for _ in range(20):
        w = rng.standard_normal(5)
        assert nm.cap_dual_norm(w, 1.5) == pytest.approx(2**-1.5 * nm.sigma_norm(w, 1.5))


# entropies -----------------------------------------------------------

def test_min_entropy_examples():
    assert nm.min_entropy(np.full(8, 1 / 8)) == pytest.approx(3)
    assert nm.min_entropy([0.5, 0.25, 0.25]) == pytest.approx(1)
    assert nm.min_entropy([1.0, 0, 0]) == 0


def smooth_max_prob_lp(p, eps):
    """min t over distributions r with |r - p|_1 <= eps and r <= t."""
    n = len(p)
    # variables r (n), d (n) >= |r - p|, t
    c = np.zeros(2 * n + 1)
    c[-1] = 1
    eye = np.eye(n)
    a_ub = np.block([[eye, -eye, np.zeros((n, 1))], [-eye, -eye, np.zeros((n, 1))],
                     [np.zeros((1, n)), np.ones((1, n)), np.zeros((1, 1))],
                     [eye, np.zeros((n, n)), -np.ones((n, 1))]])
    b_ub = np.concatenate([p, -np.asarray(p), [eps], np.zeros(n)])
    a_eq = np.concatenate([np.ones(n), np.zeros(n + 1)])[None]
    r = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1], bounds=[(0, None)] * (2 * n + 1),
                method="highs")
    return r.fun


def test_smooth_min_entropy_examples():
    p = [0.75, 0.25]
    assert nm.smooth_min_entropy(p, 0) == pytest.approx(nm.min_entropy(p))
    assert nm.smooth_min_entropy(p, 0.5) == pytest.approx(1.0)


def test_smooth_max_prob_lp_and_monotone(rng):
    for _ in range(30):
        p = rng.dirichlet(np.ones(int(rng.integers(1, 7))))
        prev = -1.0
        for eps in np.linspace(0, 2, 9):
            assert nm.smooth_max_prob(p, eps) == pytest.approx(smooth_max_prob_lp(p, eps), abs=1e-9)
            h = nm.smooth_min_entropy(p, eps)
            assert h >= prev - 1e-12
            prev = h


def test_cond_min_entropy_examples():
    p = np.array([0.5, 0.3, 0.2])
    assert nm.cond_min_entropy(CqState.classical(p)) == pytest.approx(nm.min_entropy(p), abs=1e-7)
    corr = np.array([np.diag([0.5, 0]), np.diag([0, 0.5])])
    assert nm.cond_min_entropy(CqState(corr)) == pytest.approx(0, abs=1e-7)
    prod = CqState.product(np.eye(2) / 2, [0.25] * 4)
    assert nm.cond_min_entropy(prod) == pytest.approx(2, abs=1e-7)


def smooth_guessing_cvxpy(blocks, eps):
    n, q = blocks.shape[0], blocks.shape[1]
    s = cp.Variable((q, q), hermitian=True)
    r = [cp.Variable((q, q), hermitian=True) for _ in range(n)]
    pos = [cp.Variable((q, q), hermitian=True) for _ in range(n)]
    neg = [cp.Variable((q, q), hermitian=True) for _ in range(n)]
    cons = [cp.real(sum(cp.trace(v) for v in r)) == 1,
            cp.real(sum(cp.trace(v) for v in pos + neg)) <= eps]
    for x in range(n):
        cons += [r[x] >> 0, pos[x] >> 0, neg[x] >> 0, s - r[x] >> 0,
                 r[x] - blocks[x] == pos[x] - neg[x]]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(s))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def test_smooth_cond_min_entropy(rng):
    p = np.array([0.6, 0.3, 0.1])
    rho = CqState.classical(p)
    assert nm.smooth_cond_min_entropy(rho, 0) == pytest.approx(nm.cond_min_entropy(rho), abs=1e-7)
    for eps in (0.1, 0.4, 1.0):
        assert nm.smooth_cond_min_entropy(rho, eps) == pytest.approx(nm.smooth_min_entropy(p, eps), abs=1e-6)
    blocks = random_cq_blocks(rng, 2, 3)
    prev = -np.inf
    for eps in (0.0, 0.05, 0.2, 0.6):
        val = nm.smooth_guessing_probability(CqState(blocks), eps)
        if eps > 0:
            assert val == pytest.approx(smooth_guessing_cvxpy(blocks, eps), abs=1e-6)
        h = -math.log2(val)
        assert h >= prev - 1e-7
        prev = h


def test_subnormalized_smoothing_is_larger(rng):
    rho = CqState(random_cq_blocks(rng, 2, 3))
    for eps in (0.1, 0.5):
        assert nm.smooth_cond_min_entropy(rho, eps, normalized=False) >= nm.smooth_cond_min_entropy(rho, eps) - 1e-7
    assert nm.smooth_cond_min_entropy(rho, 1.0, normalized=False) == math.inf


def test_smoothing_validation():
    with pytest.raises(ValidationError):
        nm.smooth_max_prob([1.0], 3)
    with pytest.raises(ValidationError):
        nm.smooth_guessing_probability(CqState.classical([1.0]), -0.1)


# operator-space norms -------------------------------------------------

def test_infty_one_examples(rng):
    assert nm.infty_one_norm_pos(np.eye(4), 2, 2) == pytest.approx(2, abs=1e-7)
    phi = np.zeros(4)
    phi[0] = phi[3] = 1
    assert nm.infty_one_norm_pos(np.outer(phi, phi), 2, 2) == pytest.approx(1, abs=1e-7)
    v = rng.random(3)
    assert nm.infty_one_norm_pos(np.diag(v), 1, 3) == pytest.approx(v.sum(), abs=1e-7)
    for _ in range(5):
        x = la.random_psd(rng, 6)
        assert nm.infty_one_norm_pos(x, 2, 3) == pytest.approx(nm.infty_one_norm_pos_closed(x, 2, 3), abs=1e-6)


def test_infty_one_limits():
    with pytest.raises(SizeLimitError):
        nm.infty_one_norm_pos(np.eye(33), 1, 33)
    with pytest.raises(ValidationError):
        nm.infty_one_norm_pos(-np.eye(2), 1, 2)


def test_capcap_examples(rng):
    n = 4
    assert nm.capcap_norm_pos(np.full((n, 1, 1), 1 / n), 2) == pytest.approx(1)
    for _ in range(10):
        v = rng.random(5)
        assert nm.capcap_norm_pos(v.reshape(-1, 1, 1), 1.3) == pytest.approx(nm.cap_norm(v, 1.3))


def test_capcap_dominates_classical_part(rng):
    for _ in range(10):
        blocks = np.array([la.random_psd(rng, 2) for _ in range(3)])
        diag = np.array([np.diag(b).real for b in blocks])
        for i in range(2):
            assert nm.capcap_norm_pos(blocks, 1) >= nm.cap_norm(diag[:, i], 1) - 1e-12


def test_capcap_upper(rng):
    for _ in range(10):
        blocks = np.array([la.random_psd(rng, 2) for _ in range(3)])
        roots = np.array([la.psd_sqrt(b) for b in blocks])
        assert nm.capcap_upper(roots, roots, 1) == pytest.approx(nm.capcap_norm_pos(blocks, 1), abs=1e-8)
    root = np.full((4, 1, 1), 0.5)
    assert nm.capcap_upper(root, root, 2) == pytest.approx(1)


def test_positive_decomposition(rng):
    for _ in range(10):
        a = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
        b = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
        parts = nm.positive_decomposition(a, b, 1)
        total = sum((1j) ** j * p for j, p in enumerate(parts))
        assert np.allclose(total, nm.factor_product(a, b))
        bound = nm.capcap_upper(a, b, 1)
        for p in parts:
            assert la.min_eig(p.reshape(-1, 2, 2)[0]) >= -1e-12
            assert nm.capcap_norm_pos(p, 1) <= bound * (1 + 1e-9)
    with pytest.raises(ValidationError):
        nm.capcap_upper(np.ones((2, 1, 1)), np.ones((3, 1, 1)), 0)


# sigma-sigma pair -----------------------------------------------------

def test_sigsig_water_filling():
    x = np.array([0.5, 0.3, 0.2]).reshape(3, 1, 1)
    p, d = nm.sigsig_norm_pos(x, 1, 1e-11)
    assert p == pytest.approx(0.4, abs=1e-9)
    assert d == pytest.approx(0.4, abs=1e-9)
    assert nm.water_filling([0.5, 0.3, 0.2], 1) == pytest.approx(0.4)
    assert water_filling_lp([0.5, 0.3, 0.2], 1) == pytest.approx(0.4)


def test_sigsig_single_block(rng):
    # one block: value min(2^-k, 1) * |X| since yhat <= min(2^-k, 1) sigma
    x = la.random_psd(rng, 2)
    for k in (0, 1, 2):
        val, a, b = nm.sigsig_dual(x[None], k)
        assert val == pytest.approx(min(2.0**-k, 1) * la.op_norm(x), abs=1e-6)
        assert la.min_eig(a[0] + b - x) >= -1e-6


def test_sigsig_duality_and_oracles(rng):
    for _ in range(8):
        q, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        blocks = np.array([la.random_psd(rng, q) for _ in range(n)])
        k = float(rng.integers(0, 3))
        p, d = nm.sigsig_norm_pos(blocks, k)
        assert p == pytest.approx(d, abs=1e-6)
        # independent SDP oracle for the primal
        sig = cp.Variable((q, q), hermitian=True)
        ys = [cp.Variable((q, q), hermitian=True) for _ in range(n)]
        cons = [sig >> 0, cp.real(cp.trace(sig)) <= 1, sig - sum(ys) >> 0]
        cons += [y >> 0 for y in ys] + [2.0**-k * sig - y >> 0 for y in ys]
        obj = cp.Maximize(cp.real(sum(cp.trace(blocks[j] @ ys[j]) for j in range(n))))
        prob = cp.Problem(obj, cons)
        prob.solve(solver=cp.CLARABEL)
        assert p == pytest.approx(prob.value, abs=1e-6)
        assert nm.trace_pairing_pos(blocks, k) >= p - 1e-7
        if q == 1:
            vals = blocks[:, 0, 0].real
            assert p == pytest.approx(nm.water_filling(vals, k), abs=1e-7)
            assert nm.water_filling(vals, k) == pytest.approx(water_filling_lp(vals, k), abs=1e-9)


# classical norm and Grothendieck --------------------------------------

def test_linfty_to_l1_examples(rng):
    assert nm.linfty_to_l1_norm(np.eye(2)) == pytest.approx(2)
    assert nm.linfty_to_l1_norm(np.ones((2, 2))) == pytest.approx(4)
    for _ in range(5):
        a = rng.choice([-1.0, 1.0], size=(4, 4))
        brute = max(s @ a @ t for s in itertools.product((1, -1), repeat=4)
                    for t in itertools.product((1, -1), repeat=4))
        assert nm.linfty_to_l1_norm(a) == pytest.approx(brute)
        assert nm.linfty_to_l1_norm(a, 2) == pytest.approx(brute / 4)


def test_linfty_to_l1_transpose_invariant(rng):
    for _ in range(5):
        a = rng.standard_normal((3, 6))
        assert nm.linfty_to_l1_norm(a) == pytest.approx(nm.linfty_to_l1_norm(a.T))
    with pytest.raises(SizeLimitError):
        nm.linfty_to_l1_norm(np.ones((30, 30)), limit=1000)


def test_grothendieck_examples():
    assert nm.grothendieck_sdp([[1.0]]) == pytest.approx(1, abs=1e-7)
    assert nm.grothendieck_sdp(np.eye(2)) == pytest.approx(2, abs=1e-7)
    a = [[1, 1], [1, -1]]
    assert nm.grothendieck_sdp(a) == pytest.approx(2 * math.sqrt(2), abs=1e-7)
    assert nm.sign_max(a) == pytest.approx(2)


def test_grothendieck_against_cvxpy(rng):
    for _ in range(3):
        a = rng.standard_normal((3, 4))
        g = cp.Variable((7, 7), symmetric=True)
        cost = np.zeros((7, 7))
        cost[:3, 3:] = a / 2
        cost[3:, :3] = a.T / 2
        prob = cp.Problem(cp.Maximize(cp.trace(cost @ g)), [g >> 0, cp.diag(g) == 1])
        prob.solve(solver=cp.CLARABEL)
        assert nm.grothendieck_sdp(a) == pytest.approx(prob.value, abs=1e-6)
