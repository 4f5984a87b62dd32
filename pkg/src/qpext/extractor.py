"""Extractor analysis: Delta maps, exact classical error and bounded norm,
fixed-dimension quantum attacks, and the closed-form quantum-proofness bounds.

Flat sources ``1_S / K`` with ``|S| = K = 2**k`` are the vertices of the
nonnegative part of the unit ball of ``max(K |.|_inf, |.|_1)``; the
classical error is a convex function of the source, so it peaks at one of
them.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ExactModeError, SolverError, ValidationError
from .linalg import herm_trace_norm, hermitize, psd_clip, psd_inv_sqrt, sign_unitary
from .model import DEFAULT_LIMIT, CqState, FunctionFamily, check_enumeration, exact_power
from .norms import _sign_vectors
from .sdp import SdpBuilder, Term

GROTHENDIECK_BOUND = 1.8
CHUNK = 4096


def delta_matrix(fam: FunctionFamily) -> np.ndarray:
    """``Delta = (1/D) sum_s F_s - u_M 1^T`` as an M x N matrix."""
    return fam.transition() - 1.0 / fam.M


def delta_map(fam: FunctionFamily, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (fam.N,):
        raise ValidationError(f"input must have length N = {fam.N}")
    return delta_matrix(fam) @ v


def delta_map_strong(fam: FunctionFamily, v) -> np.ndarray:
    """Strong Delta map on outputs ``(s, y')``, returned as a ``D x M'`` array.

    Row s is ``(1/D) F'_s(v) - (1^T v) u_{M'} / D``; with the seed-in-high-bits
    encoding this is the weak Delta map reshaped.
    """
    if not fam.is_strong:
        raise ValidationError("family is not strong")
    return delta_map(fam, v).reshape(fam.D, fam.M_prime)


def flat_subsets(n_points: int, size: int, limit: int = DEFAULT_LIMIT):
    """Yield arrays of ``size``-subsets of ``range(n_points)`` in lexicographic chunks."""
    check_enumeration(math.comb(n_points, size), limit, f"{size}-subsets of {n_points} points")
    it = itertools.combinations(range(n_points), size)
    while True:
        chunk = list(itertools.islice(it, CHUNK))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64).reshape(len(chunk), size)


def _flat_images(w: np.ndarray, subsets: np.ndarray, size: int) -> np.ndarray:
    """Columns ``W 1_S / K`` for each subset S, shape (count, rows)."""
    return w[:, subsets].sum(axis=2).T / size


def ext_error_witness(fam: FunctionFamily, k: float, limit: int = DEFAULT_LIMIT):
    """Exact worst-case error over sources of min-entropy k and a flat maximizer."""
    kk = exact_power(k)
    if kk > fam.N:
        raise ValidationError(f"k = {k} exceeds n = {fam.n}")
    w = fam.transition()
    best, best_set = -1.0, None
    for subsets in flat_subsets(fam.N, kk, limit):
        errs = np.abs(_flat_images(w, subsets, kk) - 1.0 / fam.M).sum(axis=1)
        i = int(np.argmax(errs))
        if errs[i] > best + 1e-15:
            best, best_set = float(errs[i]), subsets[i].copy()
    return best, best_set


def ext_error(fam: FunctionFamily, k: float, limit: int = DEFAULT_LIMIT) -> float:
    return ext_error_witness(fam, k, limit)[0]


def ext_bounded_norm(fam: FunctionFamily, k: float, limit: int = DEFAULT_LIMIT) -> float:
    """``|Delta : cap{2^k l_inf, l_1} -> l_1|`` via sign vectors on the output side."""
    check_enumeration(1 << max(fam.M - 1, 0), limit, "output sign enumeration")
    dt = delta_matrix(fam).T
    kk = 2.0 ** k
    best = 0.0
    signs = _sign_vectors(fam.M)
    for start in range(0, signs.shape[0], CHUNK):
        wv = np.abs(signs[start:start + CHUNK] @ dt.T)
        a = -np.sort(-wv, axis=1)
        prefix = np.cumsum(a, axis=1)
        j = np.arange(a.shape[1]) + 1
        vals = np.minimum((kk * a + prefix - j * a).min(axis=1), a.sum(axis=1))
        best = max(best, float(vals.max()) / kk)
    return best


def ext_bounded_norm_primal(fam: FunctionFamily, k: float, limit: int = DEFAULT_LIMIT) -> float:
    """Same norm by enumerating signed vertices of the cap ball (integer 2^k only)."""
    kk = exact_power(k)
    dm = delta_matrix(fam)
    signs = _sign_vectors(kk)
    check_enumeration(math.comb(fam.N, kk) * signs.shape[0], limit, "signed vertex enumeration")
    best = 0.0
    for subsets in flat_subsets(fam.N, kk, limit):
        cols = dm[:, subsets]  # (M, count, K)
        vals = np.einsum("mck,sk->csm", cols, signs) / kk
        best = max(best, float(np.abs(vals).sum(axis=2).max()))
    return best


def attack_value(fam: FunctionFamily, rho) -> float:
    """``|| (1/D) sum_s (id (x) F_s)(rho) - rho_Q (x) u_M ||_1``."""
    blocks = rho.blocks if isinstance(rho, CqState) else np.asarray(rho)
    if blocks.shape[0] != fam.N:
        raise ValidationError(f"state has {blocks.shape[0]} classical values, family has N = {fam.N}")
    out = np.tensordot(delta_matrix(fam), blocks, axes=1)
    return float(sum(herm_trace_norm(o) for o in out))


@dataclass
class SeesawResult:
    value: float
    witness: CqState | None
    history: list[float] = field(default_factory=list)
    q: int = 1
    extra: dict = field(default_factory=dict)


def repair_cq_witness(blocks: np.ndarray, omega: np.ndarray, k: float) -> np.ndarray:
    """Turn an approximate SDP solution into an exact member of the constraint set.

    The result satisfies ``rho(x) <= 2**-k omega'`` for a unit-trace omega'
    (checked by eigenvalues) and has total trace 1.
    """
    n, q = blocks.shape[0], blocks.shape[1]
    kk = 2.0 ** k
    rho = np.array([psd_clip(b) for b in blocks])
    rho /= np.trace(rho, axis1=1, axis2=2).real.sum()
    om = psd_clip(omega)
    om = om / np.trace(om).real
    om = (1 - 1e-9) * om + 1e-9 * np.eye(q) / q
    isq = psd_inv_sqrt(om)
    lam = max(np.linalg.eigvalsh(hermitize(isq @ b @ isq))[-1] for b in rho) * kk
    floor = kk / n
    if lam > 1.0:
        t = (lam - 1.0) / (lam - floor)
        rho = (1 - t) * rho + t * om[None] / n
    return hermitize(rho)


def _rho_step(dm: np.ndarray, us: np.ndarray, k: float, q: int, tol: float):
    n = dm.shape[1]
    wx = np.tensordot(dm.T, us, axes=1)  # W(x) = sum_y Delta[y, x] U(y)
    b = SdpBuilder()
    om = b.herm(q)
    rv = [b.herm(q) for _ in range(n)]
    kk = 2.0 ** -k
    for x in range(n):
        b.add_operator([Term(rv[x]), Term(om, coef=-kk)], "<=", np.zeros((q, q)))
    b.add_scalar([(om, 1.0)], "==", 1.0)
    b.add_scalar([(v, 1.0) for v in rv], "==", 1.0)
    b.set_objective([(rv[x], wx[x]) for x in range(n)], "max")
    sol = b.solve(tol)
    return np.array([sol.value(v) for v in rv]), sol.value(om)


def _product_state(fam: FunctionFamily, q: int) -> CqState:
    sig = np.zeros((q, q), dtype=complex)
    sig[0, 0] = 1
    return CqState.product(sig, np.full(fam.N, 1.0 / fam.N))


def classical_embedding(fam: FunctionFamily, support, q: int) -> CqState:
    """Flat source on ``support`` with all blocks on the first basis vector."""
    blocks = np.zeros((fam.N, q, q), dtype=complex)
    support = np.asarray(support)
    blocks[support, 0, 0] = 1.0 / len(support)
    return CqState(blocks)


def _seesaw_from(fam, k, q, start: np.ndarray, iters, tol, improve_tol):
    dm = delta_matrix(fam)
    rho = start
    val = attack_value(fam, rho)
    best_val, best_rho = val, rho
    history = [val]
    for _ in range(iters):
        out = np.tensordot(dm, rho, axes=1)
        us = np.array([sign_unitary(o) for o in out])
        try:
            raw, om = _rho_step(dm, us, k, q, tol)
        except SolverError:
            break
        rho = repair_cq_witness(raw, om, k)
        val = attack_value(fam, rho)
        history.append(val)
        if val > best_val:
            gain = val - best_val
            best_val, best_rho = val, rho
            if gain < improve_tol:
                break
        else:
            break
    return best_val, best_rho, history


def cb_lower_seesaw(fam: FunctionFamily, k: float, q: int, iters: int = 50, restarts: int = 8,
                    seed: int = 0, tol: float = 1e-8, init: CqState | None = None,
                    limit: int = DEFAULT_LIMIT, improve_tol: float = 1e-9) -> SeesawResult:
    """Best attack value found over cq states of dimension ``q`` with ``H_min(N|Q) >= k``.

    Starts from the classical optimum embedded on one basis vector (or from
    ``init``, zero-padded to dimension q), then from ``restarts - 1`` random
    Hermitian unitaries. Every reported value is recomputed from a witness
    that satisfies the constraints exactly.
    """
    if q < 1 or q > 8:
        raise ValidationError("Q must lie in [1, 8]")
    if not 0 <= k <= fam.n:
        raise ValidationError(f"k must lie in [0, n = {fam.n}]")
    if 2.0 ** k >= fam.N * (1 - 1e-12):
        # Only the product state qualifies.
        rho = _product_state(fam, q)
        return SeesawResult(attack_value(fam, rho), rho, [attack_value(fam, rho)], q)
    starts = []
    if init is not None:
        blocks = np.zeros((fam.N, q, q), dtype=complex)
        qi = init.q
        if qi > q:
            raise ValidationError("initial witness has larger dimension than Q")
        blocks[:, :qi, :qi] = init.blocks
        starts.append(blocks)
    try:
        _, support = ext_error_witness(fam, k, limit)
        starts.append(classical_embedding(fam, support, q).blocks)
    except (ValidationError, ExactModeError):
        pass
    rng = np.random.default_rng(seed)
    best = SeesawResult(-1.0, None, [], q)
    dm = delta_matrix(fam)
    for r in range(max(restarts, 1) + len(starts) - 1):
        if r < len(starts):
            start = starts[r]
        else:
            # random sign pattern -> one rho step gives a random feasible start
            us = []
            for _ in range(fam.M):
                z = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
                us.append(sign_unitary(hermitize(z)))
            try:
                raw, om = _rho_step(dm, np.array(us), k, q, tol)
            except SolverError:
                continue
            start = repair_cq_witness(raw, om, k)
        val, rho, hist = _seesaw_from(fam, k, q, start, iters, tol, improve_tol)
        if val > best.value:
            best = SeesawResult(val, CqState(rho), hist, q)
    return best


def cb_lower_trend(fam: FunctionFamily, k: float, qs, iters=50, restarts=8, seed=0, tol=1e-8,
                   limit=DEFAULT_LIMIT) -> list[SeesawResult]:
    """Run the see-saw for increasing Q, warm-starting each from the previous witness."""
    out, prev = [], None
    for i, q in enumerate(sorted(set(int(v) for v in qs))):
        res = cb_lower_seesaw(fam, k, q, iters, restarts, seed + i, tol, prev, limit)
        if prev is not None and out and res.value < out[-1].value:
            res = SeesawResult(out[-1].value, _pad(prev, q), res.history, q)
        out.append(res)
        prev = res.witness
    return out


def _pad(rho: CqState, q: int) -> CqState:
    blocks = np.zeros((rho.n_points, q, q), dtype=complex)
    blocks[:, :rho.q, :rho.q] = rho.blocks
    return CqState(blocks)


def cb_upper_bounds(fam: FunctionFamily, k: float, eps: float) -> dict:
    """Three closed-form ``(k_shift, eps_bound)`` pairs for quantum-proofness.

    ``dim_bound``: ``(k + 1, 6 sqrt(2^m) eps)``; ``small_output_bound`` (strong
    families only, ``eps > 0``): ``(k + log2(2/eps), 12 sqrt(2^m') sqrt(2 eps))``;
    ``high_entropy_bound``: ``(k + 1, 6 K_G 2^(n-k) eps)`` with ``K_G = 1.8``.
    """
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    out = {
        "dim_bound": (k + 1.0, 6.0 * math.sqrt(2.0 ** fam.m) * eps),
        "small_output_bound": None,
        "high_entropy_bound": (k + 1.0, 6.0 * GROTHENDIECK_BOUND * 2.0 ** (fam.n - k) * eps),
    }
    if fam.is_strong and eps > 0:
        out["small_output_bound"] = (k + math.log2(2.0 / eps),
                                     12.0 * math.sqrt(2.0 ** fam.strong_m_prime) * math.sqrt(2.0 * eps))
    return out


def converse_slack(fam: FunctionFamily, k: float, eps: float) -> float | None:
    """Report-only: ``k - 2 log2(1/eps) - m`` (the output-length trade-off up to O(1))."""
    if eps <= 0:
        return None
    return k - 2.0 * math.log2(1.0 / eps) - fam.m


@dataclass
class ExtractorReport:
    k: float
    eps_classical: float
    bounded_norm: float
    cb_lower: dict
    upper_bounds: dict
    converse_slack: float | None = None
    timings: dict = field(default_factory=dict)

    def to_dict(self, with_timings: bool = False) -> dict:
        d = {"k": self.k, "eps_classical": self.eps_classical, "bounded_norm": self.bounded_norm}
        for q, v in self.cb_lower.items():
            d[f"cb_lower.q{q}"] = v
        for name, val in self.upper_bounds.items():
            if val is not None:
                d[f"upper_bounds.{name}.k_shift"] = val[0]
                d[f"upper_bounds.{name}.eps_bound"] = val[1]
        if self.converse_slack is not None:
            d["converse_slack"] = self.converse_slack
        if with_timings:
            for name, t in self.timings.items():
                d[f"timings.{name}"] = t
        return d


def analyze_extractor(fam: FunctionFamily, k: float, qs=(1,), iters: int = 50, restarts: int = 8,
                      seed: int = 0, tol: float = 1e-8, limit: int = DEFAULT_LIMIT) -> ExtractorReport:
    timings = {}
    t0 = time.perf_counter()
    eps = ext_error(fam, k, limit)
    timings["ext_error"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    norm = ext_bounded_norm(fam, k, limit)
    timings["bounded_norm"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    trend = cb_lower_trend(fam, k, qs, iters, restarts, seed, tol, limit)
    timings["cb_lower"] = time.perf_counter() - t0
    return ExtractorReport(k, eps, norm, {r.q: r.value for r in trend},
                           cb_upper_bounds(fam, k, eps), converse_slack(fam, k, eps), timings)
