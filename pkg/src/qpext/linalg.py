"""Dense Hermitian linear algebra helpers.

Everything here operates on plain numpy arrays. Hermitian inputs are
symmetrized on entry so that round-off in callers never leaks into
eigen-solvers.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError

HERM_TOL = 1e-12
PSD_TOL = 1e-10
MAX_EIG_DIM = 512


def hermitize(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def herm_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with ``a @ v[:, i] == w[i] * v[:, i]``.
    """
    a = hermitize(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_EIG_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds {MAX_EIG_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvalsh(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (or a stack of them)."""
    return np.linalg.eigvalsh(hermitize(a))


def min_eig(a: np.ndarray) -> float:
    return float(eigvalsh(a)[..., 0].min())


def max_eig(a: np.ndarray) -> float:
    return float(eigvalsh(a)[..., -1].max())


def op_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values, ``Tr sqrt(A* A)``."""
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def herm_trace_norm(a: np.ndarray) -> float:
    """Trace norm of a Hermitian matrix via its spectrum (cheaper than SVD)."""
    return float(np.abs(eigvalsh(a)).sum())


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix; negative eigenvalues from drift are clipped."""
    w, v = np.linalg.eigh(hermitize(a))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def psd_inv_sqrt(a: np.ndarray, floor: float = 1e-14) -> np.ndarray:
    """Generalized inverse square root; eigenvalues below ``floor`` are dropped."""
    w, v = np.linalg.eigh(hermitize(a))
    inv = np.where(w > floor, 1.0 / np.sqrt(np.where(w > floor, w, 1.0)), 0.0)
    return (v * inv) @ v.conj().T


def psd_clip(a: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm."""
    w, v = np.linalg.eigh(hermitize(a))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def sign_unitary(a: np.ndarray) -> np.ndarray:
    """Hermitian unitary ``sign(A)``; zero eigenvalues map to +1."""
    w, v = np.linalg.eigh(hermitize(a))
    s = np.where(w >= 0, 1.0, -1.0)
    return (v * s) @ v.conj().T


def is_psd(a: np.ndarray, tol: float = PSD_TOL) -> bool:
    return min_eig(a) >= -tol


def partial_trace(x: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Partial trace of an operator on ``A (x) B``; ``keep`` is 0 for A, 1 for B."""
    da, db = dims
    t = np.asarray(x).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    return np.einsum("iaib->ab", t)


def block_diag_cq(blocks: np.ndarray) -> np.ndarray:
    """Embed N blocks of size Q as the block-diagonal operator on ``Q (x) N``.

    Index order is Q-major, i.e. entry ``((i, x), (j, x))`` equals
    ``blocks[x][i, j]``.
    """
    blocks = np.asarray(blocks)
    n, q, _ = blocks.shape
    out = np.zeros((q, n, q, n), dtype=np.result_type(blocks.dtype, float))
    for x in range(n):
        out[:, x, :, x] = blocks[x]
    return out.reshape(q * n, q * n)


def random_hermitian(rng: np.random.Generator, dim: int, complex_: bool = True) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    if complex_:
        a = a + 1j * rng.standard_normal((dim, dim))
    return hermitize(a)


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None,
               complex_: bool = True) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank))
    if complex_:
        g = g + 1j * rng.standard_normal((dim, rank))
    return g @ g.conj().T


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None,
                   complex_: bool = True) -> np.ndarray:
    p = random_psd(rng, dim, rank, complex_)
    return p / np.trace(p).real


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    qm, r = np.linalg.qr(z)
    return qm * (np.diag(r) / np.abs(np.diag(r)))
