"""Fixed-seed property suites run by ``qpext verify``.

Each suite returns a list of ``(check name, passed)`` pairs. The oracles
here use only numpy so the command works without test dependencies.
"""

from __future__ import annotations

import json

import numpy as np

from . import condenser as con
from . import extractor as ext
from . import game as gm
from . import linalg as la
from . import norms as nm
from .model import (CqState, FunctionFamily, constant_family, from_graph, identity_family,
                    random_family, to_graph)
from .sdp import SdpBuilder, Term


def suite_model(rng, seed):
    out = []
    fams = [random_family(int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(0, 3)),
                          seed + i) for i in range(10)]
    out.append(("graph round trip", all(from_graph(to_graph(f)) == f for f in fams)))
    out.append(("json round trip", all(FunctionFamily.from_dict(json.loads(json.dumps(f.to_dict()))) == f
                                       for f in fams)))
    out.append(("random determinism", random_family(3, 1, 2, seed) == random_family(3, 1, 2, seed)))
    try:
        FunctionFamily(1, 2, 1, [[0, 1], [0, 1]], 1)
        out.append(("strong encoding rejected", False))
    except ValueError:
        out.append(("strong encoding rejected", True))
    return out


def suite_linalg(rng, seed):
    ok_eig = ok_tensor = ok_dual = True
    for _ in range(20):
        d = int(rng.integers(1, 7))
        a = la.random_hermitian(rng, d)
        w, v = la.herm_eig(a)
        ok_eig &= bool(np.allclose((v * w) @ v.conj().T, a, atol=1e-9) and np.all(np.diff(w) <= 1e-12))
        b = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        ok_tensor &= abs(la.op_norm(np.kron(a, b)) - la.op_norm(a) * la.op_norm(b)) <= 1e-9 * (1 + la.op_norm(a))
        c = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        u, _, vh = np.linalg.svd(c)
        ok_dual &= abs(abs(np.trace((u @ vh).conj().T @ c)) - la.trace_norm(c)) <= 1e-9
    return [("eigendecomposition", ok_eig), ("op norm of tensor products", ok_tensor),
            ("trace norm attained by polar unitary", ok_dual)]


def suite_sdp(rng, seed):
    out = []
    b = SdpBuilder()
    x = b.herm(2)
    b.add_operator([Term(x)], ">=", np.eye(2))
    b.set_objective([(x, 1.0)], "min")
    out.append(("identity bound", abs(b.solve(1e-9).primal_value - 2) <= 1e-7))
    a = la.random_hermitian(rng, 4)
    b = SdpBuilder()
    x = b.herm(4)
    b.add_scalar([(x, 1.0)], "==", 1.0)
    b.set_objective([(x, a)], "max")
    out.append(("eigenvalue program", abs(b.solve(1e-9).primal_value - la.max_eig(a)) <= 1e-7))
    out.append(("guessing probability",
                abs(nm.guessing_probability(CqState.classical([0.5, 0.3, 0.2]), 1e-9) - 0.5) <= 1e-7))
    return out


def suite_norms(rng, seed):
    ok_pair = ok_topk = ok_supp = True
    for _ in range(200):
        n = int(rng.integers(1, 11))
        k = float(rng.uniform(0, np.log2(n) + 1e-12))
        v, w = rng.standard_normal(n), rng.standard_normal(n)
        ok_pair &= nm.dual_pairing_check(v, w, k)
        s = nm.supporting_functional(v, k)
        ok_supp &= abs(v @ s - nm.cap_norm(v, k)) <= 1e-8 and nm.cap_dual_norm(s, k) <= 1 + 1e-12
        kk = int(rng.integers(1, n + 1))
        top = np.sort(np.abs(w))[::-1][:kk].sum()
        ok_topk &= abs(nm.sigma_norm(w, np.log2(kk)) - top) <= 1e-9
    ok_sig = True
    for _ in range(3):
        q, n = int(rng.integers(1, 3)), int(rng.integers(2, 4))
        blocks = np.array([la.random_psd(rng, q) for _ in range(n)])
        p, d = nm.sigsig_norm_pos(blocks, 1.0)
        ok_sig &= abs(p - d) <= 1e-6
    ok_wf = abs(nm.sigsig_norm_pos(np.array([0.5, 0.3, 0.2]).reshape(3, 1, 1), 1.0, 1e-11)[0] - 0.4) <= 1e-9
    return [("cap/sigma pairing", ok_pair), ("supporting functional", ok_supp),
            ("sigma equals top-K sum", ok_topk), ("sigsig strong duality", ok_sig),
            ("sigsig water-filling", ok_wf),
            ("Grothendieck 2x2", abs(nm.grothendieck_sdp([[1, 1], [1, -1]]) - 2 * np.sqrt(2)) <= 1e-6)]


def suite_extractor(rng, seed):
    ok_sandwich = ok_pd = True
    for i in range(10):
        fam = random_family(int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(0, 3)), seed + i)
        for k in range(1, fam.n + 1):
            e, norm, e_prev = ext.ext_error(fam, k), ext.ext_bounded_norm(fam, k), ext.ext_error(fam, k - 1)
            ok_sandwich &= e <= norm + 1e-9 and norm <= 3 * e_prev + 1e-9
            ok_pd &= abs(norm - ext.ext_bounded_norm_primal(fam, k)) <= 1e-9
    fam = random_family(2, 1, 1, seed)
    r = ext.cb_lower_seesaw(fam, 1, 1, iters=5, restarts=1, seed=seed)
    return [("error <= norm <= 3 error(k-1)", ok_sandwich), ("primal = dual norm", ok_pd),
            ("Q=1 attack equals classical error", abs(r.value - ext.ext_error(fam, 1)) <= 1e-6)]


def suite_condenser(rng, seed):
    ok_eq = ok_bf = True
    for i in range(8):
        fam = random_family(int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(0, 3)), seed + i)
        k, kp = int(rng.integers(0, fam.n + 1)), int(rng.integers(0, fam.m + 1))
        ok, _, dense = con.check_densest_equivalence(fam, k, kp)
        ok_eq &= ok
        ok_bf &= dense == con.densest_subgraph_bruteforce(to_graph(fam), 2 ** k, 2 ** kp)
    return [("densest subgraph equivalence", ok_eq), ("densest subgraph brute force", ok_bf),
            ("identity is a condenser", con.is_condenser(identity_family(2), 1, 1, 0)[0])]


def suite_game(rng, seed):
    g = gm.build_game(constant_family(1, 1, 0), 1, 0)
    out = [("constant graph value", abs(gm.classical_value(g)[0] - 0.75) <= 1e-12)]
    ok_j = True
    for _ in range(10):
        q = int(rng.integers(1, 4))
        p = gm.random_regime(rng, 4, q, 1.0)
        ok_j &= gm.check_junge_lemma(p, k=1.0).ok
    out.append(("POVM construction bounds", ok_j))
    rec = gm.sandwich_check(random_family(1, 1, 1, seed), 0, 0, q=1, iters=5, restarts=1, seed=seed)
    out.append(("sandwich inequalities", rec["ok"]))
    return out


SUITES = {
    "model": suite_model,
    "linalg": suite_linalg,
    "sdp": suite_sdp,
    "norms": suite_norms,
    "extractor": suite_extractor,
    "condenser": suite_condenser,
    "game": suite_game,
}


def run_all(seed: int = 42) -> dict:
    """Run every suite; returns ``{suite: [(check, passed), ...]}``."""
    results = {}
    for name, fn in SUITES.items():
        rng = np.random.default_rng([seed, len(results)])
        results[name] = [(c, bool(p)) for c, p in fn(rng, seed)]
    return results
