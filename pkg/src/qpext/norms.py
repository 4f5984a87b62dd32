"""Vector and block-matrix norms, and (smooth, conditional) min-entropies.

Notation: ``K = 2**k``. The cap norm is ``max(K |v|_inf, |v|_1)`` and the
sigma norm is the infimal split ``inf_{v = v1 + v2} K |v1|_inf + |v2|_1``.
The exact dual of ``cap_norm(., k)`` is ``2**-k * sigma_norm(., k)``.

Block matrices on ``Q (x) N`` are passed either as full ``QN x QN``
arrays (Q-major ordering) or, when block diagonal over N, as an
``(N, Q, Q)`` stack.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import SizeLimitError, ValidationError
from .linalg import hermitize, min_eig, op_norm, partial_trace
from .model import DEFAULT_LIMIT, CqState, Distribution, check_enumeration
from .sdp import SdpBuilder, Term

MAX_SDP_DIM = 32
EPS_ZERO = 1e-12


# ----------------------------------------------------------------------
# vector norms
# ----------------------------------------------------------------------

def cap_norm(v, k: float) -> float:
    a = np.abs(np.asarray(v, dtype=float))
    if a.size == 0:
        return 0.0
    return float(max(2.0 ** k * a.max(), a.sum()))


def sigma_norm(v, k: float) -> float:
    """Minimum of the convex piecewise-linear ``t -> K t + sum (|v_i| - t)_+``."""
    a = np.sort(np.abs(np.asarray(v, dtype=float)))[::-1]
    if a.size == 0:
        return 0.0
    kk = 2.0 ** k
    # With thresholds t = a[j] the tail sum is prefix[j] - (j+1) t over the j+1 largest.
    prefix = np.cumsum(a)
    j = np.arange(a.size)
    vals = kk * a + prefix - (j + 1) * a
    return float(min(a.sum(), vals.min()))


def cap_dual_norm(w, k: float) -> float:
    """Exact dual of ``cap_norm(., k)``."""
    return 2.0 ** -k * sigma_norm(w, k)


def supporting_functional(v, k: float) -> np.ndarray:
    """A ``w`` with ``cap_dual_norm(w) <= 1`` and ``<v, w> = cap_norm(v)``."""
    v = np.asarray(v, dtype=float)
    kk = 2.0 ** k
    a = np.abs(v)
    i = int(np.argmax(a))
    if kk * a[i] >= a.sum():
        w = np.zeros_like(v)
        w[i] = kk * (1.0 if v[i] >= 0 else -1.0)
        return w
    return np.where(v >= 0, 1.0, -1.0)


def dual_pairing_check(v, w, k: float, tol: float = 1e-9) -> bool:
    """``|<v, w>| <= cap_norm(v, k) * sigma_norm(w, k) + tol``."""
    lhs = abs(float(np.dot(np.asarray(v, float), np.asarray(w, float))))
    return lhs <= cap_norm(v, k) * sigma_norm(w, k) + tol


# ----------------------------------------------------------------------
# entropies
# ----------------------------------------------------------------------

def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else Distribution(p).probs


def min_entropy(p) -> float:
    return float(-math.log2(_probs(p).max()))


def smooth_max_prob(p, eps: float) -> float:
    """Smallest achievable ``max_x R(x)`` over distributions R with ``|R - P|_1 <= eps``.

    Lowering every entry above t costs ``sum (P - t)_+`` of mass, which must be
    at most ``eps / 2``; the mass can be placed elsewhere as long as ``t >= 1/N``.
    """
    if not 0 <= eps <= 2:
        raise ValidationError("eps must lie in [0, 2]")
    a = np.sort(_probs(p))[::-1]
    n = a.size
    budget = eps / 2.0
    prefix = np.cumsum(a)
    # On [a[j+1], a[j]] the removed mass is prefix[j] - (j+1) t.
    t = a[0]
    for j in range(n):
        lo = a[j + 1] if j + 1 < n else 0.0
        t_needed = (prefix[j] - budget) / (j + 1)
        if t_needed >= lo:
            t = t_needed
            break
    else:
        t = 0.0
    return float(max(1.0 / n, min(a[0], t)))


def smooth_min_entropy(p, eps: float) -> float:
    return float(-math.log2(smooth_max_prob(p, eps)))


def _state(rho) -> CqState:
    return rho if isinstance(rho, CqState) else CqState(rho)


def guessing_probability(rho, tol: float = 1e-9) -> float:
    """``min {Tr S : S >= rho(x) for all x}`` (equal to ``2**-H_min(N|Q)``)."""
    rho = _state(rho)
    if rho.q == 1:
        return float(rho.blocks[:, 0, 0].real.max())
    b = SdpBuilder()
    s = b.herm(rho.q)
    for blk in rho.blocks:
        b.add_operator([Term(s)], ">=", blk)
    b.set_objective([(s, 1.0)], "min")
    return b.solve(tol).primal_value


def cond_min_entropy(rho, tol: float = 1e-9) -> float:
    return float(-math.log2(guessing_probability(rho, tol)))


def smooth_guessing_probability(rho, eps: float, tol: float = 1e-9, normalized: bool = True) -> float:
    """Smallest ``Tr S`` over cq states within trace distance eps.

    With ``normalized=False`` the smoothing ball also contains sub-normalized
    states (trace at most one).
    """
    if not 0 <= eps <= 2:
        raise ValidationError("eps must lie in [0, 2]")
    rho = _state(rho)
    if eps <= EPS_ZERO:
        return guessing_probability(rho, tol)
    q, n = rho.q, rho.n_points
    b = SdpBuilder()
    s = b.herm(q)
    rp = [b.herm(q) for _ in range(n)]
    y1 = [b.herm(q) for _ in range(n)]
    y2 = [b.herm(q) for _ in range(n)]
    for x in range(n):
        b.add_operator([Term(s), Term(rp[x], coef=-1.0)], ">=", np.zeros((q, q)))
        b.add_operator([Term(rp[x]), Term(y1[x], coef=-1.0), Term(y2[x])], "==", rho.blocks[x])
    b.add_scalar([(v, 1.0) for v in rp], "==" if normalized else "<=", 1.0)
    b.add_scalar([(v, 1.0) for v in y1 + y2], "<=", eps)
    b.set_objective([(s, 1.0)], "min")
    return b.solve(tol).primal_value


def smooth_cond_min_entropy(rho, eps: float, tol: float = 1e-9, normalized: bool = True) -> float:
    p = smooth_guessing_probability(rho, eps, tol, normalized)
    return math.inf if p <= tol else float(-math.log2(p))


# ----------------------------------------------------------------------
# operator-space norms on positive block matrices
# ----------------------------------------------------------------------

def _psd_blocks(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[1] != x.shape[2]:
        raise ValidationError("expected blocks of shape (N, Q, Q)")
    if np.abs(x - x.conj().transpose(0, 2, 1)).max(initial=0.0) > 1e-9:
        raise ValidationError("blocks must be Hermitian")
    x = hermitize(x)
    if np.linalg.eigvalsh(x).min() < -1e-9:
        raise ValidationError("blocks must be positive semidefinite")
    return x


def infty_one_norm_pos(x: np.ndarray, q: int, n: int, tol: float = 1e-9) -> float:
    """``max {Tr YX : 0 <= Y <= sigma (x) 1_N, Tr sigma <= 1}`` for PSD X on Q (x) N."""
    x = hermitize(np.asarray(x, dtype=complex))
    if x.shape != (q * n, q * n):
        raise ValidationError(f"X must be {q * n} x {q * n}")
    if min_eig(x) < -1e-9:
        raise ValidationError("X must be positive semidefinite")
    if q * n > MAX_SDP_DIM:
        raise SizeLimitError(f"Q*N = {q * n} exceeds the SDP size limit {MAX_SDP_DIM}")
    b = SdpBuilder()
    y = b.herm(q * n)
    sig = b.herm(q)
    b.add_operator([Term(y), Term(sig, "kron", -1.0, n)], "<=", np.zeros((q * n, q * n)))
    b.add_scalar([(sig, 1.0)], "<=", 1.0)
    b.set_objective([(y, x)], "max")
    return b.solve(tol).primal_value


def infty_one_norm_pos_closed(x: np.ndarray, q: int, n: int) -> float:
    """Closed form of :func:`infty_one_norm_pos`: ``lambda_max(Tr_N X)``."""
    return float(np.linalg.eigvalsh(hermitize(partial_trace(x, (q, n), keep=0)))[-1])


def capcap_norm_pos(blocks, k: float) -> float:
    """``max(2**k max_x |X(x)|, |sum_x X(x)|)`` for PSD blocks."""
    x = _psd_blocks(blocks)
    top = max(op_norm(b) for b in x)
    return float(max(2.0 ** k * top, op_norm(x.sum(axis=0))))


def capcap_factor_norm(a, k: float) -> float:
    """``max(sqrt(2**k) max_x |a(x)|, |Gamma(a)|)`` with Gamma the row concatenation."""
    a = np.asarray(a)
    if a.ndim != 3:
        raise ValidationError("factor must have shape (N, Q, C)")
    gam = np.concatenate(list(a), axis=1)
    return float(max(math.sqrt(2.0 ** k) * max(op_norm(b) for b in a), op_norm(gam)))


def capcap_upper(a, b, k: float) -> float:
    """Factorization bound on the cap-cap norm of the blocks ``a(x) b(x)^*``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim != 3 or b.ndim != 3 or a.shape[:2] != b.shape[:2] or a.shape[2] != b.shape[2]:
        raise ValidationError(f"factor shapes {a.shape} and {b.shape} are incompatible")
    return capcap_factor_norm(a, k) * capcap_factor_norm(b, k)


def factor_product(a, b) -> np.ndarray:
    return np.einsum("xqc,xpc->xqp", np.asarray(a), np.asarray(b).conj())


def positive_decomposition(a, b, k: float | None = None) -> list[np.ndarray]:
    """Four PSD block matrices x_j with ``sum_j i**j x_j = a b^*`` blockwise.

    ``x_j = (a + i**j b)(a + i**j b)^* / 4``. When ``k`` is given the factors
    are first rescaled to equal factor norms, which gives
    ``capcap_norm_pos(x_j) <= capcap_upper(a, b, k)`` for every j.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if k is not None:
        fa, fb = capcap_factor_norm(a, k), capcap_factor_norm(b, k)
        if fa > 0 and fb > 0:
            lam = math.sqrt(fb / fa)
            a, b = a * lam, b / lam
    out = []
    for j in range(4):
        c = a + (1j ** j) * b
        out.append(0.25 * factor_product(c, c))
    return out


def sigsig_primal(blocks, k: float, tol: float = 1e-9):
    """Primal SDP; returns ``(value, yhat, sigma)``."""
    x = _psd_blocks(blocks)
    n, q = x.shape[0], x.shape[1]
    kk = 2.0 ** -k
    b = SdpBuilder()
    sig = b.herm(q)
    yh = [b.herm(q) for _ in range(n)]
    zero = np.zeros((q, q))
    for j in range(n):
        b.add_operator([Term(yh[j]), Term(sig, coef=-kk)], "<=", zero)
    b.add_operator([Term(v) for v in yh] + [Term(sig, coef=-1.0)], "<=", zero)
    b.add_scalar([(sig, 1.0)], "<=", 1.0)
    b.set_objective([(yh[j], x[j]) for j in range(n)], "max")
    sol = b.solve(tol)
    return sol.primal_value, np.array([sol.value(v) for v in yh]), sol.value(sig)


def sigsig_dual(blocks, k: float, tol: float = 1e-9):
    """Dual SDP; returns ``(value, A, B)`` with ``X(j) <= A(j) + B``."""
    x = _psd_blocks(blocks)
    n, q = x.shape[0], x.shape[1]
    kk = 2.0 ** -k
    b = SdpBuilder()
    t = b.nonneg(1)
    av = [b.herm(q) for _ in range(n)]
    bv = b.herm(q)
    b.add_operator([Term(v, coef=kk) for v in av] + [Term(bv), Term(t, "scal", -1.0)],
                   "<=", np.zeros((q, q)))
    for j in range(n):
        b.add_operator([Term(av[j]), Term(bv)], ">=", x[j])
    b.set_objective([(t, 1.0)], "min")
    sol = b.solve(tol)
    return sol.primal_value, np.array([sol.value(v) for v in av]), sol.value(bv)


def sigsig_norm_pos(blocks, k: float, tol: float = 1e-9) -> tuple[float, float]:
    """Primal and dual values of the sigma-sigma estimate for PSD blocks."""
    return sigsig_primal(blocks, k, tol)[0], sigsig_dual(blocks, k, tol)[0]


def water_filling(values, k: float) -> float:
    """Q = 1 value of the sigma-sigma program: weights ``2**-k`` on the largest entries."""
    a = np.sort(np.asarray(values, dtype=float))[::-1]
    w = 2.0 ** -k
    total, left = 0.0, 1.0
    for v in a:
        take = min(w, left)
        total += take * v
        left -= take
        if left <= 0:
            break
    return float(total)


def trace_pairing_pos(blocks, k: float, tol: float = 1e-9) -> float:
    """``max sum Tr X(j) x(j)`` over ``0 <= x(j) <= 2**-k I``, ``sum x(j) <= I``."""
    x = _psd_blocks(blocks)
    n, q = x.shape[0], x.shape[1]
    b = SdpBuilder()
    xv = [b.herm(q) for _ in range(n)]
    for j in range(n):
        b.add_operator([Term(xv[j])], "<=", 2.0 ** -k * np.eye(q))
    b.add_operator([Term(v) for v in xv], "<=", np.eye(q))
    b.set_objective([(xv[j], x[j]) for j in range(n)], "max")
    return b.solve(tol).primal_value


# ----------------------------------------------------------------------
# classical (inf -> 1) norms and the Grothendieck relaxation
# ----------------------------------------------------------------------

def _sign_vectors(n: int) -> np.ndarray:
    """All sign vectors of length n with first entry +1 (the rest by symmetry)."""
    if n == 0:
        return np.ones((1, 0))
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1))).reshape(-1, n - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


def linfty_to_l1_norm(a, k: float = 0.0, limit: int = DEFAULT_LIMIT) -> float:
    """Exact ``|2**-k A : l_inf -> l_1|`` by sign enumeration on the smaller side."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValidationError("expected a matrix")
    if a.size == 0:
        return 0.0
    if a.shape[1] > a.shape[0]:
        a = a.T
    n = a.shape[1]
    check_enumeration(1 << max(n - 1, 0), limit, "sign enumeration")
    signs = _sign_vectors(n)
    best = 0.0
    for chunk in range(0, signs.shape[0], 4096):
        s = signs[chunk:chunk + 4096]
        best = max(best, float(np.abs(s @ a.T).sum(axis=1).max()))
    return 2.0 ** -k * best


def sign_max(a, limit: int = DEFAULT_LIMIT) -> float:
    """``max_{s, t in {+-1}} s^T A t``."""
    return linfty_to_l1_norm(a, 0.0, limit)


def grothendieck_sdp(a, tol: float = 1e-9) -> float:
    """Vector relaxation ``max sum A_ij <u_i, v_j>`` over unit vectors."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValidationError("expected a matrix")
    mr, nc = a.shape
    if max(mr, nc) > MAX_SDP_DIM:
        raise SizeLimitError(f"matrix dimensions above {MAX_SDP_DIM}")
    dim = mr + nc
    cost = np.zeros((dim, dim))
    cost[:mr, mr:] = a / 2
    cost[mr:, :mr] = a.T / 2
    b = SdpBuilder()
    g = b.sym(dim)
    for i in range(dim):
        e = np.zeros((dim, dim))
        e[i, i] = 1
        b.add_scalar([(g, e)], "==", 1.0)
    b.set_objective([(g, cost)], "max")
    return b.solve(tol).primal_value
