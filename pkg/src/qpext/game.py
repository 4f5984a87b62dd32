"""The two-player game attached to a condenser graph.

The referee draws ``gamma = 2^(n-k)`` left vertices ``xs`` and
``gamma' = 2^(m-k')`` right vertices ``ys`` uniformly with replacement, plus a
seed s. Alice answers an index a, Bob an index b; they win if
``Gamma(xs[a], s) = ys[b]``.

With ``W[y, x] = Pr_s[Gamma(x, s) = y]`` every strategy collapses to
operators ``A(x) = E_xs sum_a [xs[a] = x] phat(a; xs)`` (and B likewise), and
its value is the largest eigenvalue of ``sum_{x,y} W[y, x] A(x) (x) B(y)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .condenser import cond_bounded_norm, cond_cb_lower_seesaw
from .errors import SolverError, ValidationError
from .linalg import hermitize, max_eig, min_eig, psd_clip, psd_sqrt
from .model import (DEFAULT_LIMIT, BipartiteGraph, FunctionFamily, check_enumeration,
                    exact_power, to_graph)
from .sdp import SdpBuilder, Term

MARGIN = 1e-9


@dataclass(frozen=True, eq=False)
class GameInstance:
    graph: BipartiteGraph
    k: float
    k_prime: float
    gamma: int
    gamma_prime: int

    @property
    def n_left(self) -> int:
        return self.graph.n_left

    @property
    def n_right(self) -> int:
        return self.graph.n_right

    def win_matrix(self) -> np.ndarray:
        """``W[y, x] = Pr_s[Gamma(x, s) = y]``."""
        return self.graph.multiplicity().T / self.graph.degree

    def alice_questions(self) -> np.ndarray:
        return _questions(self.n_left, self.gamma)

    def bob_questions(self) -> np.ndarray:
        return _questions(self.n_right, self.gamma_prime)

    def question_count(self) -> int:
        return self.n_left ** self.gamma * self.n_right ** self.gamma_prime * self.graph.degree


def _questions(size: int, length: int) -> np.ndarray:
    return np.array(list(itertools.product(range(size), repeat=length)), dtype=np.int64).reshape(-1, length)


def build_game(fam: FunctionFamily, k: float, k_prime: float) -> GameInstance:
    if not 0 <= k <= fam.n or not 0 <= k_prime <= fam.m:
        raise ValidationError("need 0 <= k <= n and 0 <= k' <= m")
    gamma = exact_power(fam.n - k, "(n-k)")
    gamma_p = exact_power(fam.m - k_prime, "(m-k')")
    return GameInstance(to_graph(fam), float(k), float(k_prime), gamma, gamma_p)


def _answer_distribution(questions: np.ndarray, answers: np.ndarray, size: int) -> np.ndarray:
    """Distribution of the pointed-to vertex ``questions[i, answers[i]]``."""
    picked = questions[np.arange(questions.shape[0]), answers]
    return np.bincount(picked, minlength=size) / questions.shape[0]


def classical_value(g: GameInstance, limit: int = DEFAULT_LIMIT):
    """Exact classical value; returns ``(value, alice_answers, bob_answers)``.

    Deterministic strategies of the side with fewer of them are enumerated;
    the other side plays the best response, which for a fixed opponent is
    pointwise: answer the index whose vertex has the highest win probability.
    """
    w = g.win_matrix()
    xq, yq = g.alice_questions(), g.bob_questions()
    check_enumeration(xq.shape[0] * yq.shape[0] * g.graph.degree, limit, "question enumeration")
    count_a = g.gamma ** xq.shape[0]
    count_b = g.gamma_prime ** yq.shape[0]
    if count_b <= count_a:
        own, other, wt, own_len = yq, xq, w.T, g.gamma_prime
        bob_side = True
    else:
        own, other, wt, own_len = xq, yq, w, g.gamma
        bob_side = False
    check_enumeration(min(count_a, count_b), limit, "classical strategy enumeration")
    best, best_own, best_other = -1.0, None, None
    size_own = g.n_right if bob_side else g.n_left
    for strat in itertools.product(range(own_len), repeat=own.shape[0]):
        strat = np.array(strat, dtype=np.int64)
        dist = _answer_distribution(own, strat, size_own)
        h = wt @ dist  # win probability for each vertex on the other side
        hv = h[other]
        val = float(hv.max(axis=1).mean())
        if val > best + 1e-15:
            best, best_own, best_other = val, strat, np.argmax(hv, axis=1)
    if bob_side:
        return best, best_other, best_own
    return best, best_own, best_other


def classical_strategy_value(g: GameInstance, alice: np.ndarray, bob: np.ndarray) -> float:
    w = g.win_matrix()
    a = _answer_distribution(g.alice_questions(), np.asarray(alice), g.n_left)
    b = _answer_distribution(g.bob_questions(), np.asarray(bob), g.n_right)
    return float(b @ w @ a)


def classical_value_bruteforce(g: GameInstance, limit: int = DEFAULT_LIMIT) -> float:
    """Double enumeration of deterministic strategies with explicit seed averaging."""
    xq, yq = g.alice_questions(), g.bob_questions()
    nb = g.graph.neighbors
    total = g.gamma ** xq.shape[0] * g.gamma_prime ** yq.shape[0]
    check_enumeration(total * xq.shape[0] * yq.shape[0], limit, "brute-force game enumeration")
    best = 0.0
    for f in itertools.product(range(g.gamma), repeat=xq.shape[0]):
        xa = xq[np.arange(xq.shape[0]), list(f)]
        for gg in itertools.product(range(g.gamma_prime), repeat=yq.shape[0]):
            yb = yq[np.arange(yq.shape[0]), list(gg)]
            wins = 0
            for s in range(g.graph.degree):
                wins += int((nb[s][xa][:, None] == yb[None, :]).sum())
            best = max(best, wins / (g.graph.degree * xq.shape[0] * yq.shape[0]))
    return best


# ----------------------------------------------------------------------
# quantum strategies
# ----------------------------------------------------------------------

@dataclass
class QuantumStrategy:
    """POVM families indexed by question-vector position in lexicographic order.

    ``alice`` has shape ``(N^gamma, gamma, Q, Q)``; ``bob`` has shape
    ``(M^gamma', gamma', Q, Q)``.
    """

    q_dim: int
    alice: np.ndarray
    bob: np.ndarray

    def validate(self, tol: float = MARGIN) -> "QuantumStrategy":
        for name, ops in (("alice", self.alice), ("bob", self.bob)):
            if ops.ndim != 4 or ops.shape[2:] != (self.q_dim, self.q_dim):
                raise ValidationError(f"{name} POVMs have shape {ops.shape}")
            if np.linalg.eigvalsh(hermitize(ops)).min() < -tol:
                raise ValidationError(f"{name} has a non-positive POVM element")
            tot = ops.sum(axis=1)
            if (1 - np.linalg.eigvalsh(hermitize(tot))).min() < -tol:
                raise ValidationError(f"{name} POVM sums exceed the identity")
        return self


def strategy_operators(g: GameInstance, strat: QuantumStrategy):
    """``A(x) = E_xs sum_a [xs[a] = x] phat(a; xs)`` and the same for Bob."""
    def collapse(questions, povm, size):
        out = np.zeros((size,) + povm.shape[2:], dtype=complex)
        for j, qv in enumerate(questions):
            for a, x in enumerate(qv):
                out[x] += povm[j, a]
        return out / questions.shape[0]

    return (collapse(g.alice_questions(), strat.alice, g.n_left),
            collapse(g.bob_questions(), strat.bob, g.n_right))


def game_operator(w: np.ndarray, a_ops: np.ndarray, b_ops: np.ndarray) -> np.ndarray:
    """``sum_{x,y} W[y, x] A(x) (x) B(y)``."""
    bsum = np.tensordot(w.T, b_ops, axes=1)  # (N, Q, Q)
    q1, q2 = a_ops.shape[1], b_ops.shape[1]
    out = np.zeros((q1 * q2, q1 * q2), dtype=complex)
    for x in range(a_ops.shape[0]):
        out += np.kron(a_ops[x], bsum[x])
    return hermitize(out)


def strategy_value(g: GameInstance, strat: QuantumStrategy) -> float:
    a_ops, b_ops = strategy_operators(g, strat)
    return max_eig(game_operator(g.win_matrix(), a_ops, b_ops))


def embed_classical(g: GameInstance, alice, bob, q: int) -> QuantumStrategy:
    """Deterministic answers as projective POVMs ``phat(a; xs) = [a = f(xs)] I``."""
    xq, yq = g.alice_questions(), g.bob_questions()
    pa = np.zeros((xq.shape[0], g.gamma, q, q), dtype=complex)
    pb = np.zeros((yq.shape[0], g.gamma_prime, q, q), dtype=complex)
    pa[np.arange(xq.shape[0]), np.asarray(alice)] = np.eye(q)
    pb[np.arange(yq.shape[0]), np.asarray(bob)] = np.eye(q)
    return QuantumStrategy(q, pa, pb)


def _repair_povms(ops: np.ndarray) -> np.ndarray:
    out = np.empty_like(ops)
    for j in range(ops.shape[0]):
        blk = np.array([psd_clip(o) for o in ops[j]])
        s = max(1.0, max_eig(blk.sum(axis=0)))
        out[j] = blk / s
    return out


def _best_reply(eff: np.ndarray, xs: tuple, q: int, tol: float) -> dict:
    """Maximize ``sum_x Tr P_x eff[x]`` over ``P_x >= 0``, ``sum_x P_x <= I``, x in xs."""
    if q == 1:
        vals = [eff[x][0, 0].real for x in xs]
        i = int(np.argmax(vals))
        return {xs[i]: np.ones((1, 1), dtype=complex)} if vals[i] > 0 else {}
    b = SdpBuilder()
    vs = {x: b.herm(q) for x in xs}
    b.add_operator([Term(v) for v in vs.values()], "<=", np.eye(q))
    b.set_objective([(v, eff[x]) for x, v in vs.items()], "max")
    sol = b.solve(tol)
    return {x: sol.value(v) for x, v in vs.items()}


def _povm_step(questions: np.ndarray, eff: np.ndarray, length: int, q: int, tol: float) -> np.ndarray:
    """Maximize ``sum_{xs,a} Tr phat(a; xs) eff[xs[a]]`` subject to ``sum_a phat <= I``.

    The program separates over question vectors, and a vector's optimum only
    depends on its set of distinct entries (repeated positions see the same
    operator), so one small SDP is solved per distinct set.
    """
    out = np.zeros((questions.shape[0], length, q, q), dtype=complex)
    cache = {}
    for j, qv in enumerate(questions):
        xs = tuple(sorted(set(int(x) for x in qv)))
        if xs not in cache:
            cache[xs] = _best_reply(eff, xs, q, tol)
        for x, op in cache[xs].items():
            out[j, list(qv).index(x)] = op
    return out


def _top_state(gop: np.ndarray, q1: int, q2: int) -> np.ndarray:
    w, v = np.linalg.eigh(gop)
    return v[:, -1].reshape(q1, q2)


def _seesaw(g: GameInstance, strat: QuantumStrategy, iters: int, tol: float, improve_tol: float):
    w = g.win_matrix()
    xq, yq = g.alice_questions(), g.bob_questions()
    q = strat.q_dim
    best_val = strategy_value(g, strat)
    best = strat
    history = [best_val]
    cur = strat
    for _ in range(iters):
        a_ops, b_ops = strategy_operators(g, cur)
        psi = _top_state(game_operator(w, a_ops, b_ops), q, q)
        bsum = np.tensordot(w.T, b_ops, axes=1)
        eff_a = np.array([hermitize(psi @ bs.T @ psi.conj().T) for bs in bsum])
        try:
            pa = _repair_povms(_povm_step(xq, eff_a, g.gamma, q, tol))
        except SolverError:
            break
        cur = QuantumStrategy(q, pa, cur.bob)
        a_ops, _ = strategy_operators(g, cur)
        psi = _top_state(game_operator(w, a_ops, b_ops), q, q)
        asum = np.tensordot(w, a_ops, axes=1)  # (M, Q, Q)
        eff_b = np.array([hermitize((psi.conj().T @ a @ psi).T) for a in asum])
        try:
            pb = _repair_povms(_povm_step(yq, eff_b, g.gamma_prime, q, tol))
        except SolverError:
            break
        cur = QuantumStrategy(q, cur.alice, pb)
        val = strategy_value(g, cur)
        history.append(val)
        if val > best_val:
            gain = val - best_val
            best_val, best = val, cur
            if gain < improve_tol:
                break
        else:
            break
    return best_val, best, history


def entangled_value_lower(g: GameInstance, q: int, strategy: QuantumStrategy | None = None,
                          iters: int = 30, restarts: int = 3, seed: int = 0, tol: float = 1e-8,
                          limit: int = DEFAULT_LIMIT, improve_tol: float = 1e-9):
    """Value of a given strategy, or the best found by a see-saw over POVM blocks.

    Returns ``(value, strategy)``. The see-saw starts from the optimal
    classical strategy embedded with identity POVM elements, so its value is
    never below the classical value.
    """
    if q < 1 or q > 4:
        raise ValidationError("Q must lie in [1, 4]")
    check_enumeration(g.question_count(), limit, "question enumeration")
    if strategy is not None:
        strategy.validate()
        return strategy_value(g, strategy), strategy
    _, fa, fb = classical_value(g, limit)
    starts = [embed_classical(g, fa, fb, q)]
    rng = np.random.default_rng(seed)
    nx, ny = g.alice_questions().shape[0], g.bob_questions().shape[0]
    for _ in range(max(restarts - 1, 0)):
        def rand(count, length):
            z = rng.standard_normal((count, length, q, q)) + 1j * rng.standard_normal((count, length, q, q))
            return _repair_povms(z @ z.conj().transpose(0, 1, 3, 2))
        starts.append(QuantumStrategy(q, rand(nx, g.gamma), rand(ny, g.gamma_prime)))
    best_val, best = -1.0, None
    for st in starts:
        val, strat, _ = _seesaw(g, st, iters, tol, improve_tol)
        if val > best_val:
            best_val, best = val, strat
    return best_val, best


# ----------------------------------------------------------------------
# the POVM construction from operator-valued marginals
# ----------------------------------------------------------------------

def _check_marginals(p: np.ndarray, k: float | None, tol: float = MARGIN) -> np.ndarray:
    p = hermitize(np.asarray(p, dtype=complex))
    if p.ndim != 3 or p.shape[1] != p.shape[2]:
        raise ValidationError("marginals must have shape (N, Q, Q)")
    ev = np.linalg.eigvalsh(p)
    if ev.min() < -tol or ev.max() > 1 + tol:
        raise ValidationError("marginals must satisfy 0 <= p(x) <= 1")
    if k is not None:
        q = p.shape[1]
        if min_eig(2.0 ** k / 4 * np.eye(q) - p.sum(axis=0)) < -tol:
            raise ValidationError("marginals violate sum_x p(x) <= (2^k / 4) 1")
    return p


def _root_factors(p: np.ndarray) -> np.ndarray:
    q = p.shape[1]
    return np.array([psd_sqrt(np.eye(q) - b) for b in p])


def junge_povms(p, xvec, k: float | None = None) -> np.ndarray:
    """``phat(a) = r_(a-1)^* p[x_a] r_(a-1)``, ``r_a = (1 - p[x_a])^(1/2) ... (1 - p[x_1])^(1/2)``."""
    p = _check_marginals(p, k)
    roots = _root_factors(p)
    q = p.shape[1]
    r = np.eye(q, dtype=complex)
    out = []
    for x in xvec:
        out.append(hermitize(r.conj().T @ p[x] @ r))
        r = roots[x] @ r
    return np.array(out).reshape(len(out), q, q)


def junge_strategy(p, gamma: int, k: float | None = None) -> np.ndarray:
    """POVMs for every question vector in lexicographic order, shape ``(N^gamma, gamma, Q, Q)``."""
    p = _check_marginals(p, k)
    return np.array([junge_povms(p, xv) for xv in _questions(p.shape[0], gamma)])


def junge_expectations(p, gamma: int):
    """Exact ``sum_a E(1 - r_(a-1))`` and ``sum_a E(1 - r_(a-1))^* (1 - r_(a-1))``.

    ``E r_a = T^a`` with ``T = mean_x (1 - p(x))^(1/2)`` and ``E r_a^* r_a = Phi^a(1)``
    with ``Phi(Y) = mean_x (1 - p(x))^(1/2) Y (1 - p(x))^(1/2)``.
    """
    p = _check_marginals(p, None)
    roots = _root_factors(p)
    q = p.shape[1]
    eye = np.eye(q, dtype=complex)
    t = roots.mean(axis=0)
    tp = eye.copy()
    phi = eye.copy()
    e2 = np.zeros((q, q), dtype=complex)
    e3 = np.zeros((q, q), dtype=complex)
    for _ in range(gamma):
        e2 += eye - tp
        e3 += eye - tp - tp.conj().T + phi
        tp = t @ tp
        phi = np.einsum("xab,bc,xdc->ad", roots, phi, roots.conj()) / p.shape[0]
    return hermitize(e2), hermitize(e3)


def junge_expectations_enumerated(p, gamma: int, limit: int = DEFAULT_LIMIT):
    """Same sums by explicit enumeration over all prefixes (test oracle)."""
    p = _check_marginals(p, None)
    roots = _root_factors(p)
    n, q = p.shape[0], p.shape[1]
    check_enumeration(n ** max(gamma - 1, 0), limit, "prefix enumeration")
    eye = np.eye(q, dtype=complex)
    e2 = np.zeros((q, q), dtype=complex)
    e3 = np.zeros((q, q), dtype=complex)
    for a in range(1, gamma + 1):
        acc2 = np.zeros((q, q), dtype=complex)
        acc3 = np.zeros((q, q), dtype=complex)
        prefixes = list(itertools.product(range(n), repeat=a - 1))
        for pre in prefixes:
            r = eye.copy()
            for x in pre:
                r = roots[x] @ r
            acc2 += eye - r
            acc3 += (eye - r).conj().T @ (eye - r)
        e2 += acc2 / len(prefixes)
        e3 += acc3 / len(prefixes)
    return hermitize(e2), hermitize(e3)


@dataclass
class JungeCheck:
    ok: bool
    povm_margin: float
    first_margin: float
    second_margin: float
    vectors_checked: int


def check_junge_lemma(p, k: float | None = None, gamma: int | None = None, samples: int | None = None,
                      seed: int = 0, limit: int = DEFAULT_LIMIT) -> JungeCheck:
    """Verify the sub-POVM property and the ``gamma/8``, ``gamma/4`` bounds.

    ``gamma`` defaults to ``N 2^-k``. All question vectors are checked when
    there are at most ``limit`` of them (or ``samples`` is None), else
    ``samples`` random ones.
    """
    p = _check_marginals(p, k)
    n, q = p.shape[0], p.shape[1]
    if gamma is None:
        if k is None:
            raise ValidationError("need gamma or k")
        gamma = exact_power(math.log2(n) - k, "(n-k)")
    count = n ** gamma
    if samples is None or count <= samples:
        check_enumeration(count, limit, "question vectors")
        vecs = _questions(n, gamma)
    else:
        vecs = np.random.default_rng(seed).integers(0, n, size=(samples, gamma))
    margin1 = np.inf
    for xv in vecs:
        tot = junge_povms(p, xv).sum(axis=0)
        margin1 = min(margin1, min_eig(np.eye(q) - tot))
    e2, e3 = junge_expectations(p, gamma)
    m2 = min_eig(gamma / 8 * np.eye(q) - e2)
    m3 = min_eig(gamma / 4 * np.eye(q) - e3)
    ok = margin1 >= -MARGIN and m2 >= -MARGIN and m3 >= -MARGIN
    return JungeCheck(bool(ok), float(margin1), float(m2), float(m3), int(len(vecs)))


def random_regime(rng: np.random.Generator, n: int, q: int, k: float) -> np.ndarray:
    """Random PSD marginals with ``p(x) <= 1`` and ``sum p(x) <= (2^k/4) 1``."""
    g = rng.standard_normal((n, q, q)) + 1j * rng.standard_normal((n, q, q))
    p = g @ g.conj().transpose(0, 2, 1)
    p *= rng.uniform(0.2, 1.0) * (2.0 ** k / 4) / max_eig(p.sum(axis=0))
    top = max(max_eig(b) for b in p)
    if top > 1:
        p /= top
    return hermitize(p)


# ----------------------------------------------------------------------
# sandwich inequalities
# ----------------------------------------------------------------------

def marginal_feasibility(a_ops: np.ndarray, k: float) -> float:
    """Smallest margin of ``sum A(x) <= 1`` and ``A(x) <= 2^-k 1`` (and ``A(x) >= 0``)."""
    q = a_ops.shape[1]
    eye = np.eye(q)
    m = min_eig(eye - a_ops.sum(axis=0))
    for a in a_ops:
        m = min(m, min_eig(2.0 ** -k * eye - a), min_eig(a))
    return float(m)


def sandwich_check(fam: FunctionFamily, k: float, k_prime: float, q: int = 1, iters: int = 20,
                   restarts: int = 2, seed: int = 0, tol: float = 1e-8,
                   limit: int = DEFAULT_LIMIT) -> dict:
    """Compare game values with the condenser norm quantities.

    Classical side: ``omega <= 2^-k' |[Con]|`` (exact on both sides).
    Quantum side: the operators A, B built from the best found Q-dimensional
    strategy lie in the positive cap-cap balls, the game value equals their
    pairing, and the condenser see-saw warm-started from A certifies a pairing
    at least as large.
    """
    g = build_game(fam, k, k_prime)
    omega, fa, fb = classical_value(g, limit)
    norm = cond_bounded_norm(fam, k, k_prime, limit)
    scaled = 2.0 ** -k_prime * norm
    rec = {
        "gamma": g.gamma, "gamma_prime": g.gamma_prime,
        "classical_value": omega, "bounded_norm": norm, "scaled_norm": scaled,
        "classical_ok": bool(omega <= scaled + 1e-6),
        "ratio": scaled / omega if omega > 0 else None,
    }
    val, strat = entangled_value_lower(g, q, None, iters, restarts, seed, tol, limit)
    a_ops, b_ops = strategy_operators(g, strat)
    pairing = max_eig(game_operator(g.win_matrix(), a_ops, b_ops))
    fa_m = marginal_feasibility(a_ops, k)
    fb_m = marginal_feasibility(b_ops, k_prime)
    cres = cond_cb_lower_seesaw(fam, k, k_prime, q, iters, restarts, seed, tol, init=a_ops, limit=limit)
    rec.update({
        "q": q, "entangled_value": val, "operator_pairing": pairing,
        "alice_margin": fa_m, "bob_margin": fb_m,
        "operators_feasible": bool(fa_m >= -MARGIN and fb_m >= -MARGIN),
        "cond_pairing": cres.value,
        "quantum_ok": bool(val <= cres.value + 1e-6),
        "entangled_ge_classical": bool(val >= omega - 1e-6),
        "quantum_ratio": cres.value / val if val > 0 else None,
    })
    rec["ok"] = bool(rec["classical_ok"] and rec["quantum_ok"] and rec["operators_feasible"]
                     and rec["entangled_ge_classical"])
    return rec


def constant_graph_value(n_right: int, gamma_prime: int) -> float:
    """Value when every edge goes to one vertex: ``1 - (1 - 1/M)^gamma'``."""
    return 1.0 - (1.0 - 1.0 / n_right) ** gamma_prime
