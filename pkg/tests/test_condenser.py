import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from qpext import condenser as con
from qpext import linalg as la
from qpext import norms as nm
from qpext.errors import ExactModeError, ValidationError
from qpext.model import (BipartiteGraph, constant_family, identity_family, random_family,
                         strong_family, to_graph)


def test_cond_map(rng):
    fam = identity_family(2)
    v = rng.random(4)
    assert np.allclose(con.cond_map(fam, v), v)
    p = rng.dirichlet(np.ones(4))
    assert np.allclose(con.cond_map(constant_family(2, 1, 1), p), [1, 0])
    fam = random_family(3, 2, 2, 8)
    assert np.allclose(fam.transition().sum(axis=0), 1)
    strong = strong_family(2, 1, 1, rng.integers(0, 2, size=(2, 4)))
    assert con.cond_map_strong(strong, p).shape == (2, 2)
    with pytest.raises(ValidationError):
        con.cond_map_strong(fam, np.ones(8) / 8)


def brute_is_condenser(fam, k, kp, eps):
    kk = 2 ** k
    for s in itertools.combinations(range(fam.N), kk):
        p = np.zeros(fam.N)
        p[list(s)] = 1 / kk
        if nm.smooth_max_prob(fam.transition() @ p, eps) > 2.0**-kp * (1 + 1e-12):
            return False
    return True


def test_is_condenser():
    assert con.is_condenser(identity_family(2), 1, 1, 0)[0]
    ok, wit = con.is_condenser(constant_family(2, 1, 1), 1, 1, 0.5)
    assert not ok and wit is not None and wit.sum() == pytest.approx(1)


def test_is_condenser_brute(rng):
    for i in range(10):
        fam = random_family(int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(0, 3)), 50 + i)
        k, kp = int(rng.integers(0, fam.n + 1)), int(rng.integers(0, fam.m + 1))
        eps = float(rng.choice([0.0, 0.1, 0.3]))
        assert con.is_condenser(fam, k, kp, eps)[0] == brute_is_condenser(fam, k, kp, eps)


def test_bounded_norm_examples():
    assert con.cond_bounded_norm(identity_family(1), 1, 1) == pytest.approx(1)
    assert con.cond_bounded_norm(constant_family(2, 1, 0), 1, 0) == pytest.approx(1)
    with pytest.raises(ExactModeError):
        con.cond_bounded_norm(identity_family(2), 0.5, 1)


def test_densest_examples():
    complete = BipartiteGraph(2, 2, 2, [[0, 0], [1, 1]])
    assert con.densest_subgraph(complete, 2, 2)[0] == 4
    matching = to_graph(identity_family(2))
    val, left, right = con.densest_subgraph(matching, 2, 2)
    assert val == 2 and left == right
    assert con.densest_subgraph(matching, 0, 2)[0] == 0


def test_densest_random_graph_bruteforce(rng):
    fam = random_family(3, 3, 1, 77)
    g = to_graph(fam)
    for kk, kp in ((1, 1), (2, 4), (4, 2), (8, 8)):
        val, left, right = con.densest_subgraph(g, kk, kp)
        assert val == con.densest_subgraph_bruteforce(g, kk, kp)
        c = g.multiplicity()
        assert c[np.ix_(left, right)].sum() == val


def test_densest_equivalence(rng):
    assert con.check_densest_equivalence(identity_family(1), 1, 1)[0]
    assert con.check_densest_equivalence(constant_family(2, 1, 1), 1, 0)[0]
    for i in range(10):
        fam = random_family(int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(0, 3)), 90 + i)
        k, kp = int(rng.integers(0, fam.n + 1)), int(rng.integers(0, fam.m + 1))
        ok, norm, dense = con.check_densest_equivalence(fam, k, kp)
        assert ok
        assert norm == pytest.approx(dense / (2**k * fam.D), abs=1e-9)


def test_gram_relaxation_upper_bounds(rng):
    for i in range(3):
        fam = random_family(2, 2, 1, 5 + i)
        g = to_graph(fam)
        assert con.densest_gram_relaxation(g, 2, 2) >= con.densest_subgraph(g, 2, 2)[0] - 1e-6


def classical_pairing_lp(fam, k, kp):
    """max sum_y (W x)_y yhat_y over 0 <= x <= 2^-k, sum x <= 1, 0 <= yhat <= 2^-k' s, sum yhat <= s <= 1.

    Bilinear, so enumerate vertices of the x polytope (flat 2^-k vectors) and solve the LP in yhat.
    """
    w = fam.transition()
    best = 0.0
    kk = 2**k
    for s in itertools.combinations(range(fam.N), kk):
        x = np.zeros(fam.N)
        x[list(s)] = 1 / kk
        v = w @ x
        m = v.size
        c = -np.concatenate([v, [0.0]])
        a_ub = np.vstack([np.hstack([np.eye(m), -2.0**-kp * np.ones((m, 1))]),
                          np.concatenate([np.ones(m), [-1.0]])[None]])
        r = linprog(c, A_ub=a_ub, b_ub=np.zeros(m + 1), bounds=[(0, None)] * m + [(0, 1)], method="highs")
        best = max(best, -r.fun)
    return best


def test_seesaw_q1_classical(rng):
    for i in range(4):
        fam = random_family(2, 2, 1, 20 + i)
        k, kp = 1, 1
        res = con.cond_cb_lower_seesaw(fam, k, kp, 1, iters=10, restarts=2, seed=i)
        target = 2.0**-kp * con.cond_bounded_norm(fam, k, kp)
        assert res.value == pytest.approx(target, abs=1e-6)
        assert res.value == pytest.approx(classical_pairing_lp(fam, k, kp), abs=1e-6)


def test_seesaw_witness_and_monotone():
    fam = random_family(2, 2, 1, 3)
    r1 = con.cond_cb_lower_seesaw(fam, 1, 1, 1, iters=10, restarts=2)
    r2 = con.cond_cb_lower_seesaw(fam, 1, 1, 2, iters=10, restarts=2, init=r1.x)
    assert r2.value >= r1.value - 1e-8
    for r in (r1, r2):
        w = fam.transition()
        assert r.value == con.pairing_value(w, r.x, r.yhat)
        q = r.x.shape[1]
        for b in r.x:
            assert la.min_eig(b) >= -1e-12 and la.max_eig(b) <= 0.5 + 1e-12
        assert la.max_eig(r.x.sum(axis=0)) <= 1 + 1e-12
        assert np.trace(r.sigma).real <= 1 + 1e-12
        for b in r.yhat:
            assert la.min_eig(0.5 * r.sigma - b) >= -1e-10
        assert la.min_eig(r.sigma - r.yhat.sum(axis=0)) >= -1e-10
        assert q == r.q


def test_analyze_condenser_report():
    rep = con.analyze_condenser(identity_family(1), 1, 1, 0.0, qs=[1, 2], iters=5, restarts=1)
    d = rep.to_dict()
    assert d["dense_equivalence"] is True
    assert d["bounded_norm"] == pytest.approx(1)
    assert d["is_condenser"] is True
    assert d["cb_lower.q2"] >= d["cb_lower.q1"] - 1e-9
