import itertools
import math

import numpy as np
import pytest

from helpers_ext import diagonal_adversary_state, guess_entropy
from qpext import extractor as ext
from qpext import linalg as la
from qpext import norms as nm
from qpext.errors import ExactModeError, SizeLimitError, ValidationError
from qpext.model import (CqState, FunctionFamily, constant_family, identity_family, random_family,
                         strong_family)


def test_delta_map_examples(rng):
    assert np.allclose(ext.delta_map(identity_family(1), [1, 0]), [0.5, -0.5])
    perm = FunctionFamily(2, 2, 1, [[0, 1, 2, 3], [3, 2, 0, 1]])
    assert np.allclose(ext.delta_map(perm, np.full(4, 0.25)), 0)
    fam = random_family(3, 2, 1, 4)
    a, b = rng.standard_normal(8), rng.standard_normal(8)
    assert np.allclose(ext.delta_map(fam, 2 * a - 3 * b), 2 * ext.delta_map(fam, a) - 3 * ext.delta_map(fam, b))
    with pytest.raises(ValidationError):
        ext.delta_map(fam, np.ones(3))


def test_delta_map_strong(rng):
    inner = rng.integers(0, 2, size=(1, 4))
    fam = strong_family(2, 1, 0, inner)
    v = rng.random(4)
    assert np.allclose(ext.delta_map_strong(fam, v).ravel(), ext.delta_map(fam, v))
    fam = strong_family(2, 1, 2, rng.integers(0, 2, size=(4, 4)))
    blocks = ext.delta_map_strong(fam, v)
    assert blocks.shape == (4, 2)
    # blocks already carry the 1/D weight, so they add up to the weak map of the inner family
    assert np.allclose(blocks.sum(axis=0), ext.delta_map(fam.induced_weak(), v))
    perms = strong_family(2, 2, 1, np.array([[0, 1, 2, 3], [1, 0, 3, 2]]))
    assert np.allclose(ext.delta_map_strong(perms, np.full(4, 0.25)), 0)
    with pytest.raises(ValidationError):
        ext.delta_map_strong(random_family(2, 1, 0, 1), v)


def brute_ext_error(fam, k):
    kk = 2 ** k
    w = fam.transition()
    best = 0.0
    for s in itertools.combinations(range(fam.N), kk):
        p = np.zeros(fam.N)
        p[list(s)] = 1 / kk
        best = max(best, np.abs(w @ p - 1 / fam.M).sum())
    return best


def test_ext_error_examples():
    assert ext.ext_error(constant_family(1, 1, 0), 1) == pytest.approx(1)
    assert ext.ext_error(identity_family(1), 1) == pytest.approx(0)
    fam = random_family(3, 1, 1, 17)
    assert ext.ext_error(fam, 1) == pytest.approx(brute_ext_error(fam, 1))
    with pytest.raises(ExactModeError):
        ext.ext_error(fam, 0.5)
    with pytest.raises(SizeLimitError):
        ext.ext_error(random_family(4, 1, 0, 1), 3, limit=100)


def test_ext_error_matches_brute(rng):
    for i in range(10):
        fam = random_family(int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(0, 3)), i)
        for k in range(fam.n + 1):
            err, support = ext.ext_error_witness(fam, k)
            assert err == pytest.approx(brute_ext_error(fam, k), abs=1e-12)
            p = np.zeros(fam.N)
            p[support] = 1 / len(support)
            assert np.abs(fam.transition() @ p - 1 / fam.M).sum() == pytest.approx(err)


def test_bounded_norm(rng):
    assert ext.ext_bounded_norm(identity_family(1), 1) == pytest.approx(1)
    assert ext.ext_bounded_norm_primal(identity_family(1), 1) == pytest.approx(1)
    for i in range(15):
        fam = random_family(int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(0, 3)), 100 + i)
        for k in range(1, fam.n + 1):
            norm = ext.ext_bounded_norm(fam, k)
            assert ext.ext_error(fam, k) <= norm + 1e-9
            assert norm <= 3 * ext.ext_error(fam, k - 1) + 1e-9
            assert norm == pytest.approx(ext.ext_bounded_norm_primal(fam, k), abs=1e-9)
            # dual form: max over output signs of the scaled sigma norm
            dm = ext.delta_matrix(fam)
            by_sigma = max(2.0**-k * nm.sigma_norm(dm.T @ np.array(s), k)
                           for s in itertools.product((1, -1), repeat=fam.M))
            assert norm == pytest.approx(by_sigma, abs=1e-12)


def test_attack_value_examples(rng):
    fam = random_family(2, 1, 1, 5)
    sig = la.random_density(rng, 2)
    prod = CqState.product(sig, np.full(4, 0.25))
    expected = np.abs(fam.transition() @ np.full(4, 0.25) - 0.5).sum()
    assert ext.attack_value(fam, prod) == pytest.approx(expected)
    p = rng.dirichlet(np.ones(4))
    assert ext.attack_value(fam, CqState.classical(p)) == pytest.approx(np.abs(fam.transition() @ p - 0.5).sum())
    with pytest.raises(ValidationError):
        ext.attack_value(fam, CqState.classical([0.5, 0.5]))


def test_koenig_terhal_audit(rng):
    checked = 0
    for trial in range(40):
        fam = random_family(3, 1, int(rng.integers(0, 2)), 300 + trial)
        k = int(rng.integers(0, 3))
        eps = ext.ext_error(fam, k)
        if eps <= 0 or k + math.log2(1 / eps) > fam.n:
            continue
        h = k + math.log2(1 / eps)
        rho = diagonal_adversary_state(rng, fam.N, int(rng.integers(1, 4)), h)
        assert guess_entropy(rho) >= h - 1e-9
        assert ext.attack_value(fam, rho) <= 2 * eps + 1e-6
        checked += 1
    assert checked >= 10


def test_seesaw_classical_reduction(rng):
    for i in range(4):
        fam = random_family(2, 1, 1, 40 + i)
        res = ext.cb_lower_seesaw(fam, 1, 1, iters=10, restarts=2, seed=i)
        assert res.value == pytest.approx(ext.ext_error(fam, 1), abs=1e-6)
        assert res.value == ext.attack_value(fam, res.witness)


def test_seesaw_witness_is_feasible_and_monotone():
    fam = random_family(2, 1, 1, 9)
    trend = ext.cb_lower_trend(fam, 1, [1, 2], iters=10, restarts=2, seed=3)
    assert trend[1].value >= trend[0].value - 1e-8
    for r in trend:
        assert r.value == pytest.approx(ext.attack_value(fam, r.witness), abs=1e-12)
        assert nm.cond_min_entropy(r.witness, 1e-10) >= 1 - 1e-6


def test_seesaw_full_entropy_is_product():
    fam = random_family(2, 1, 1, 2)
    res = ext.cb_lower_seesaw(fam, 2, 2)
    assert res.value == pytest.approx(np.abs(fam.transition() @ np.full(4, 0.25) - 0.5).sum())


def test_seesaw_validation():
    fam = identity_family(1)
    with pytest.raises(ValidationError):
        ext.cb_lower_seesaw(fam, 1, 0)
    with pytest.raises(ValidationError):
        ext.cb_lower_seesaw(fam, 2, 1)


def test_upper_bound_arithmetic():
    b = ext.cb_upper_bounds(random_family(2, 2, 0, 1), 1, 0.01)
    assert b["dim_bound"] == pytest.approx((2, 0.12))
    assert b["small_output_bound"] is None
    b = ext.cb_upper_bounds(random_family(3, 1, 0, 1), 3, 0.05)
    assert b["high_entropy_bound"][1] == pytest.approx(10.8 * 0.05)
    strong = random_family(2, 2, 1, 1, strong_m_prime=1)
    b = ext.cb_upper_bounds(strong, 1, 0.02)
    k_shift, eps_b = b["small_output_bound"]
    assert eps_b == pytest.approx(12 * math.sqrt(2) * math.sqrt(0.04))
    assert k_shift == pytest.approx(1 + math.log2(100))
    with pytest.raises(ValidationError):
        ext.cb_upper_bounds(strong, 1, -1)


def test_converse_slack():
    fam = random_family(3, 1, 0, 1)
    assert ext.converse_slack(fam, 3, 0.5) == pytest.approx(3 - 2 - 1)
    assert ext.converse_slack(fam, 3, 0) is None


def test_analyze_extractor_report():
    rep = ext.analyze_extractor(identity_family(1), 1, qs=[1, 2], iters=5, restarts=1)
    d = rep.to_dict()
    assert d["bounded_norm"] == pytest.approx(1)
    assert d["eps_classical"] == pytest.approx(0)
    assert d["cb_lower.q2"] >= d["cb_lower.q1"] - 1e-9
    assert not any(key.startswith("timings") for key in d)
    assert any(key.startswith("timings") for key in rep.to_dict(True))
