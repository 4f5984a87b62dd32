"""Condenser analysis: the condenser map, exact bounded norm, condenser
checking, densest subgraph, and a fixed-dimension see-saw for the
operator-space pairing.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ExactModeError, SolverError, ValidationError
from .extractor import flat_subsets
from .linalg import hermitize, max_eig, psd_clip, psd_inv_sqrt
from .model import (DEFAULT_LIMIT, BipartiteGraph, FunctionFamily, check_enumeration,
                    exact_power, to_graph)
from .norms import sigma_norm, sigsig_primal, smooth_max_prob
from .sdp import SdpBuilder, Term


def cond_map(fam: FunctionFamily, v) -> np.ndarray:
    """``(1/D) sum_s F_s(v)``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (fam.N,):
        raise ValidationError(f"input must have length N = {fam.N}")
    return fam.transition() @ v


def cond_map_strong(fam: FunctionFamily, v) -> np.ndarray:
    """Strong condenser map as a ``D x M'`` array indexed by ``(s, y')``."""
    if not fam.is_strong:
        raise ValidationError("family is not strong")
    return cond_map(fam, v).reshape(fam.D, fam.M_prime)


def is_condenser(fam: FunctionFamily, k: float, k_prime: float, eps: float,
                 limit: int = DEFAULT_LIMIT, rel_tol: float = 1e-12):
    """Check every flat source of min-entropy k; returns ``(ok, violating source or None)``.

    The smoothed output max-probability is convex in the output
    distribution, so flat sources are the worst case.
    """
    kk = exact_power(k)
    if kk > fam.N:
        raise ValidationError(f"k = {k} exceeds n = {fam.n}")
    target = 2.0 ** -k_prime * (1 + rel_tol)
    w = fam.transition()
    for subsets in flat_subsets(fam.N, kk, limit):
        imgs = w[:, subsets].sum(axis=2).T / kk
        for s, img in zip(subsets, imgs):
            if smooth_max_prob(img, eps) > target:
                p = np.zeros(fam.N)
                p[s] = 1.0 / kk
                return False, p
    return True, None


def cond_bounded_norm_witness(fam: FunctionFamily, k: float, k_prime: float,
                              limit: int = DEFAULT_LIMIT):
    kk = exact_power(k)
    if kk > fam.N:
        raise ValidationError(f"k = {k} exceeds n = {fam.n}")
    w = fam.transition()
    best, best_set = -1.0, None
    for subsets in flat_subsets(fam.N, kk, limit):
        imgs = w[:, subsets].sum(axis=2).T / kk
        for s, img in zip(subsets, imgs):
            v = sigma_norm(img, k_prime)
            if v > best + 1e-15:
                best, best_set = v, s.copy()
    return best, best_set


def cond_bounded_norm(fam: FunctionFamily, k: float, k_prime: float,
                      limit: int = DEFAULT_LIMIT) -> float:
    """``|[Con] : cap{2^k l_inf, l_1} -> Sigma{2^k' l_inf, l_1}|`` over nonnegative flat vertices."""
    return cond_bounded_norm_witness(fam, k, k_prime, limit)[0]


def densest_subgraph(g: BipartiteGraph, kk: int, kk_prime: int, limit: int = DEFAULT_LIMIT):
    """Exact ``max sum_{(x,y) edges} f_x g_y`` with ``|f| <= K``, ``|g| <= K'``.

    Enumerates subsets of the side with fewer candidates; the other side is
    then the top-degree vertices into the chosen set. Returns
    ``(value, left_set, right_set)``; edge multiplicities count.
    """
    c = g.multiplicity()
    kk = min(int(kk), g.n_left)
    kk_prime = min(int(kk_prime), g.n_right)
    if kk <= 0 or kk_prime <= 0:
        return 0, (), ()
    left_count = math.comb(g.n_left, kk)
    right_count = math.comb(g.n_right, kk_prime)
    if left_count <= right_count:
        mat, size, other = c, kk, kk_prime
        swap = False
    else:
        mat, size, other = c.T, kk_prime, kk
        swap = True
    best, best_a, best_b = -1, None, None
    for subsets in flat_subsets(mat.shape[0], size, limit):
        deg = mat[subsets].sum(axis=1)  # (count, other side)
        order = np.argsort(-deg, axis=1, kind="stable")[:, :other]
        vals = np.take_along_axis(deg, order, axis=1).sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_a, best_b = int(vals[i]), subsets[i], np.sort(order[i])
    a, b = tuple(int(v) for v in best_a), tuple(int(v) for v in best_b)
    return (best, b, a) if swap else (best, a, b)


def densest_subgraph_bruteforce(g: BipartiteGraph, kk: int, kk_prime: int,
                                limit: int = DEFAULT_LIMIT) -> int:
    """Full 0/1 quadratic program over all ``f, g`` with bounded weights (test oracle)."""
    c = g.multiplicity()
    check_enumeration(2 ** (g.n_left + g.n_right), limit, "0/1 quadratic program")
    fs = np.array(list(itertools.product((0, 1), repeat=g.n_left)))
    gs = np.array(list(itertools.product((0, 1), repeat=g.n_right)))
    fs = fs[fs.sum(axis=1) <= kk]
    gs = gs[gs.sum(axis=1) <= kk_prime]
    return int((fs @ c @ gs.T).max())


def check_densest_equivalence(fam: FunctionFamily, k: float, k_prime: float,
                              limit: int = DEFAULT_LIMIT, tol: float = 1e-6):
    """``|2^(k+d) cond_bounded_norm - Dense(G, 2^k, 2^k')| <= tol``; returns ``(ok, norm, dense)``."""
    kk, kp = exact_power(k), exact_power(k_prime, "k'")
    norm = cond_bounded_norm(fam, k, k_prime, limit)
    dense = densest_subgraph(to_graph(fam), kk, kp, limit)[0]
    return abs(kk * fam.D * norm - dense) <= tol, norm, dense


def densest_gram_relaxation(g: BipartiteGraph, kk: int, kk_prime: int, tol: float = 1e-8) -> float:
    """Report-only Gram relaxation of the 0/1 program.

    Variable ``Z = [[1, f^T, g^T], [f, F, .], [g, ., G]]`` PSD with
    ``diag = (1, f, g)``, ``sum f <= K``, ``sum g <= K'`` and maximize
    ``sum c[x, y] Z[f_x, g_y]``. Upper bounds the densest subgraph value.
    """
    c = g.multiplicity().astype(float)
    n, m = c.shape
    dim = 1 + n + m
    b = SdpBuilder()
    z = b.sym(dim)
    e00 = np.zeros((dim, dim))
    e00[0, 0] = 1
    b.add_scalar([(z, e00)], "==", 1.0)
    for i in range(1, dim):
        e = np.zeros((dim, dim))
        e[i, i] = 1
        e[0, i] = e[i, 0] = -0.5
        b.add_scalar([(z, e)], "==", 0.0)
    for lo, hi, cap in ((1, 1 + n, kk), (1 + n, dim, kk_prime)):
        e = np.zeros((dim, dim))
        e[np.arange(lo, hi), np.arange(lo, hi)] = 1
        b.add_scalar([(z, e)], "<=", float(cap))
    cost = np.zeros((dim, dim))
    cost[1:1 + n, 1 + n:] = c / 2
    cost[1 + n:, 1:1 + n] = c.T / 2
    b.set_objective([(z, cost)], "max")
    return b.solve(tol).primal_value


# ----------------------------------------------------------------------
# fixed-dimension see-saw
# ----------------------------------------------------------------------

@dataclass
class CondSeesawResult:
    value: float
    x: np.ndarray | None
    yhat: np.ndarray | None
    sigma: np.ndarray | None
    history: list[float] = field(default_factory=list)
    q: int = 1


def pairing_value(w: np.ndarray, x: np.ndarray, yhat: np.ndarray) -> float:
    """``sum_y Tr ([Con] x)(y) yhat(y)`` with ``([Con] x)(y) = sum_x W[y, x] x(x)``."""
    cx = np.tensordot(w, x, axes=1)
    return float(np.einsum("yab,yba->", cx, yhat).real)


def repair_input(x: np.ndarray, k: float) -> np.ndarray:
    """Scale PSD-clipped blocks into ``x(j) <= 2^-k I``, ``sum x(j) <= I``."""
    x = np.array([psd_clip(b) for b in x])
    s = max(1.0, max(max_eig(b) for b in x) * 2.0 ** k, max_eig(x.sum(axis=0)))
    return x / s


def repair_output(yhat: np.ndarray, sigma: np.ndarray, k_prime: float):
    """Scale into ``yhat(j) <= 2^-k' sigma``, ``sum yhat(j) <= sigma``, ``Tr sigma <= 1``."""
    q = sigma.shape[0]
    y = np.array([psd_clip(b) for b in yhat])
    sig = psd_clip(sigma)
    sig = sig + 1e-12 * max(1.0, float(np.trace(sig).real)) * np.eye(q) / q
    isq = psd_inv_sqrt(sig)
    lam1 = max(max_eig(isq @ b @ isq) for b in y) * 2.0 ** k_prime
    lam2 = max_eig(isq @ y.sum(axis=0) @ isq)
    y = y / max(1.0, lam1, lam2)
    tr = float(np.trace(sig).real)
    if tr > 1:
        y, sig = y / tr, sig / tr
    return y, hermitize(sig)


def _x_step(w: np.ndarray, yhat: np.ndarray, k: float, q: int, tol: float) -> np.ndarray:
    n = w.shape[1]
    zx = np.tensordot(w.T, yhat, axes=1)  # Z(x) = sum_y W[y, x] yhat(y)
    b = SdpBuilder()
    xv = [b.herm(q) for _ in range(n)]
    for j in range(n):
        b.add_operator([Term(xv[j])], "<=", 2.0 ** -k * np.eye(q))
    b.add_operator([Term(v) for v in xv], "<=", np.eye(q))
    b.set_objective([(xv[j], zx[j]) for j in range(n)], "max")
    sol = b.solve(tol)
    return np.array([sol.value(v) for v in xv])


def _run(w, x, k, k_prime, iters, tol, improve_tol):
    x = repair_input(x, k)
    best = None
    history = []
    for _ in range(iters):
        try:
            _, yh, sig = sigsig_primal(np.tensordot(w, x, axes=1), k_prime, tol)
        except SolverError:
            break
        yh, sig = repair_output(yh, sig, k_prime)
        val = pairing_value(w, x, yh)
        history.append(val)
        if best is not None and val <= best[0] + improve_tol:
            if val > best[0]:
                best = (val, x, yh, sig)
            break
        best = (val, x, yh, sig) if best is None or val > best[0] else best
        try:
            x = repair_input(_x_step(w, yh, k, x.shape[1], tol), k)
        except SolverError:
            break
    return best, history


def cond_cb_lower_seesaw(fam: FunctionFamily, k: float, k_prime: float, q: int, iters: int = 30,
                         restarts: int = 4, seed: int = 0, tol: float = 1e-8,
                         init: np.ndarray | None = None, limit: int = DEFAULT_LIMIT,
                         improve_tol: float = 1e-9) -> CondSeesawResult:
    """Lower bound on the Q-restricted pairing ``2^-k' |[Con]|_Q``.

    Alternates between the input blocks x (``0 <= x(j) <= 2^-k``,
    ``sum x(j) <= 1``) and the jointly convex output pair ``(yhat, sigma)``,
    whose update is the sigma-sigma primal program on ``[Con] x``. The value
    is re-evaluated on repaired, exactly feasible witnesses.
    """
    if q < 1 or q > 6:
        raise ValidationError("Q must lie in [1, 6]")
    w = fam.transition()
    starts = []
    if init is not None:
        blocks = np.zeros((fam.N, q, q), dtype=complex)
        qi = init.shape[1]
        blocks[:, :qi, :qi] = init
        starts.append(blocks)
    try:
        _, support = cond_bounded_norm_witness(fam, k, k_prime, limit)
        blocks = np.zeros((fam.N, q, q), dtype=complex)
        blocks[support, 0, 0] = 2.0 ** -k
        starts.append(blocks)
    except (ValidationError, ExactModeError):
        pass
    rng = np.random.default_rng(seed)
    res = CondSeesawResult(-1.0, None, None, None, [], q)
    for r in range(max(restarts, 1) + len(starts) - 1):
        if r < len(starts):
            x0 = starts[r]
        else:
            g = rng.standard_normal((fam.N, q, q)) + 1j * rng.standard_normal((fam.N, q, q))
            x0 = g @ g.conj().transpose(0, 2, 1)
        best, hist = _run(w, x0, k, k_prime, iters, tol, improve_tol)
        if best is not None and best[0] > res.value:
            res = CondSeesawResult(best[0], best[1], best[2], best[3], hist, q)
    return res


@dataclass
class CondenserReport:
    k: float
    k_prime: float
    eps: float
    bounded_norm: float
    is_condenser: bool
    witness_source: list | None
    dense_value: int
    dense_equivalence: bool
    cb_lower: dict
    gram_relaxation: float | None = None
    shifted: dict = field(default_factory=dict)
    game: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_dict(self, with_timings: bool = False) -> dict:
        d = {"k": self.k, "k_prime": self.k_prime, "eps": self.eps,
             "bounded_norm": self.bounded_norm, "is_condenser": self.is_condenser,
             "dense_value": self.dense_value, "dense_equivalence": self.dense_equivalence}
        if self.witness_source is not None:
            d["witness_source"] = self.witness_source
        for q, v in self.cb_lower.items():
            d[f"cb_lower.q{q}"] = v
        if self.gram_relaxation is not None:
            d["gram_relaxation"] = self.gram_relaxation
        for key, v in self.shifted.items():
            d[f"shifted.{key}"] = v
        for key, v in self.game.items():
            d[f"game.{key}"] = v
        if with_timings:
            for name, t in self.timings.items():
                d[f"timings.{name}"] = t
        return d


def analyze_condenser(fam: FunctionFamily, k: float, k_prime: float, eps: float, qs=(1,),
                      iters: int = 30, restarts: int = 4, seed: int = 0, tol: float = 1e-8,
                      limit: int = DEFAULT_LIMIT, gram: bool = True) -> CondenserReport:
    timings = {}
    t0 = time.perf_counter()
    norm = cond_bounded_norm(fam, k, k_prime, limit)
    ok, wit = is_condenser(fam, k, k_prime, eps, limit)
    timings["classical"] = time.perf_counter() - t0
    kk, kp = exact_power(k), exact_power(k_prime, "k'")
    dense = densest_subgraph(to_graph(fam), kk, kp, limit)[0]
    equiv = abs(kk * fam.D * norm - dense) <= 1e-6
    t0 = time.perf_counter()
    cb, prev = {}, None
    for i, q in enumerate(sorted(set(int(v) for v in qs))):
        r = cond_cb_lower_seesaw(fam, k, k_prime, q, iters, restarts, seed + i, tol, prev, limit)
        if cb and r.value < max(cb.values()):
            cb[q] = max(cb.values())
        else:
            cb[q] = r.value
            prev = r.x
    timings["cb_lower"] = time.perf_counter() - t0
    gr = None
    if gram and fam.N + fam.M <= 31:
        try:
            gr = densest_gram_relaxation(to_graph(fam), kk, kp)
        except SolverError:
            gr = None
    shifted = {}
    if eps > 0:
        # Both parameter sets carry a log(1/eps) loss; report them side by side.
        shifted["k_prime_plus_log"] = k_prime + math.log2(1.0 / eps)
        shifted["norm_le_eps"] = norm <= eps
        shifted["six_eps"] = 6 * eps
    return CondenserReport(k, k_prime, eps, norm, ok, None if wit is None else wit.tolist(),
                           dense, equiv, cb, gr, shifted, {}, timings)
