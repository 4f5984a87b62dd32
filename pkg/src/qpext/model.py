"""Domain types: function families, distributions, cq states, graphs.

A function family ``{f_s : [N] -> [M]}`` is stored as an explicit ``D x N``
integer table. Strong families put the seed in the high bits of the
output, ``y = s * 2**m' + y'``, so every strong quantity is the weak one
on the product output space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ExactModeError, SizeLimitError, ValidationError
from .linalg import hermitize

DEFAULT_LIMIT = 1_000_000
PROB_TOL = 1e-12
STATE_TOL = 1e-10


def exact_power(k: float, what: str = "k") -> int:
    """Return ``2**k`` as an int, refusing non-integer powers (exact mode)."""
    val = 2.0 ** k
    r = round(val)
    if r < 1 or abs(val - r) > 1e-9 * max(1.0, val):
        raise ExactModeError(f"non-integer 2^{what} (2^{k} = {val:g}); exact mode needs an integer")
    return int(r)


def check_enumeration(count: int, limit: int, what: str) -> None:
    if count > limit:
        raise SizeLimitError(f"{what} needs {count} cases, above the enumeration limit {limit}")


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    n: int
    m: int
    d: int
    table: np.ndarray
    strong_m_prime: int | None = None

    def __post_init__(self):
        for name in ("n", "m", "d"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
                raise ValidationError(f"{name} must be a nonnegative integer, got {v!r}")
        try:
            raw = np.asarray(self.table)
        except Exception as exc:  # ragged lists
            raise ValidationError(f"table is not rectangular: {exc}") from exc
        if raw.dtype == object or raw.ndim != 2:
            raise ValidationError("table must be a rectangular D x N array of integers")
        if raw.size and not np.issubdtype(raw.dtype, np.integer):
            if not np.all(np.mod(raw, 1) == 0):
                raise ValidationError("table entries must be integers")
        table = raw.astype(np.int64)
        if table.shape != (self.D, self.N):
            raise ValidationError(f"table shape {table.shape} does not match D x N = {(self.D, self.N)}")
        if table.size and (table.min() < 0 or table.max() >= self.M):
            bad = np.argwhere((table < 0) | (table >= self.M))[0]
            raise ValidationError(
                f"table[{bad[0]}][{bad[1]}] = {table[bad[0], bad[1]]} is outside [0, {self.M})")
        mp = self.strong_m_prime
        if mp is not None:
            if not isinstance(mp, (int, np.integer)) or mp < 0:
                raise ValidationError("strong_m_prime must be a nonnegative integer")
            if self.m != self.d + mp:
                raise ValidationError(f"strong family needs m = d + m' ({self.m} != {self.d} + {mp})")
            seeds = table >> mp
            expect = np.arange(self.D)[:, None]
            if np.any(seeds != expect):
                s, x = np.argwhere(seeds != expect)[0]
                raise ValidationError(
                    f"strong encoding violated: table[{s}][{x}] decodes to seed {seeds[s, x]}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def M(self) -> int:
        return 1 << self.m

    @property
    def D(self) -> int:
        return 1 << self.d

    @property
    def is_strong(self) -> bool:
        return self.strong_m_prime is not None

    @property
    def M_prime(self) -> int:
        if self.strong_m_prime is None:
            raise ValidationError("family is not strong")
        return 1 << self.strong_m_prime

    def decode(self, y):
        """Split a strong output into ``(seed, y')``."""
        mp = self.strong_m_prime
        if mp is None:
            raise ValidationError("family is not strong")
        y = np.asarray(y)
        return y >> mp, y & ((1 << mp) - 1)

    def inner_table(self) -> np.ndarray:
        """Strong families: the ``D x N`` table of ``f'_s`` values in ``[0, M')``."""
        return self.decode(self.table)[1]

    def induced_weak(self) -> "FunctionFamily":
        """The weak family ``{f'_s}`` with outputs in ``[0, M')``."""
        return FunctionFamily(self.n, self.strong_m_prime, self.d, self.inner_table())

    def transition(self) -> np.ndarray:
        """``W[y, x] = Pr_s[f_s(x) = y]``, the M x N matrix of ``(1/D) sum_s F_s``."""
        w = np.zeros((self.M, self.N))
        cols = np.broadcast_to(np.arange(self.N), self.table.shape)
        np.add.at(w, (self.table, cols), 1.0 / self.D)
        return w

    def counts(self) -> np.ndarray:
        """Integer edge multiplicities ``c[x, y] = #{s : f_s(x) = y}``."""
        c = np.zeros((self.N, self.M), dtype=np.int64)
        rows = np.broadcast_to(np.arange(self.N), self.table.shape)
        np.add.at(c, (rows, self.table), 1)
        return c

    def to_dict(self) -> dict:
        return {"n": int(self.n), "m": int(self.m), "d": int(self.d),
                "table": self.table.tolist(),
                "strong_m_prime": None if self.strong_m_prime is None else int(self.strong_m_prime)}

    @classmethod
    def from_dict(cls, obj) -> "FunctionFamily":
        if not isinstance(obj, dict):
            raise ValidationError("family must be a JSON object")
        missing = [k for k in ("n", "m", "d", "table") if k not in obj]
        if missing:
            raise ValidationError(f"family is missing fields {missing}")
        return cls(obj["n"], obj["m"], obj["d"], obj["table"], obj.get("strong_m_prime"))

    def __eq__(self, other):
        if not isinstance(other, FunctionFamily):
            return NotImplemented
        return (self.n, self.m, self.d, self.strong_m_prime) == (
            other.n, other.m, other.d, other.strong_m_prime) and np.array_equal(self.table, other.table)

    __hash__ = None


def identity_family(n: int) -> FunctionFamily:
    return FunctionFamily(n, n, 0, np.arange(1 << n)[None, :])


def constant_family(n: int, m: int, d: int = 0, value: int = 0) -> FunctionFamily:
    return FunctionFamily(n, m, d, np.full((1 << d, 1 << n), value))


def strong_family(n: int, m_prime: int, d: int, inner: np.ndarray) -> FunctionFamily:
    """Wrap a ``D x N`` table of ``f'_s`` values as a strong family."""
    inner = np.asarray(inner, dtype=np.int64)
    seeds = np.arange(1 << d)[:, None]
    return FunctionFamily(n, d + m_prime, d, (seeds << m_prime) + inner, m_prime)


def random_family(n: int, m: int, d: int, seed: int, limit: int = DEFAULT_LIMIT,
                  strong_m_prime: int | None = None) -> FunctionFamily:
    """Family with i.i.d. uniform table entries from ``numpy.random.default_rng(seed)``.

    With ``strong_m_prime`` set, the inner values ``f'_s(x)`` are uniform on
    ``[0, 2**m')`` and ``m`` must equal ``d + m'``.
    """
    for name, v in (("n", n), ("m", m), ("d", d)):
        if v < 0:
            raise ValidationError(f"{name} must be nonnegative")
    check_enumeration(1 << (n + d), limit, "random family table")
    rng = np.random.default_rng(seed)
    if strong_m_prime is not None:
        if m != d + strong_m_prime:
            raise ValidationError("strong family needs m = d + m'")
        inner = rng.integers(0, 1 << strong_m_prime, size=(1 << d, 1 << n))
        return strong_family(n, strong_m_prime, d, inner)
    return FunctionFamily(n, m, d, rng.integers(0, 1 << m, size=(1 << d, 1 << n)))


def load_family(path) -> FunctionFamily:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read family file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}") from exc
    return FunctionFamily.from_dict(obj)


def save_family(fam: FunctionFamily, path) -> None:
    Path(path).write_text(json.dumps(fam.to_dict()) + "\n")


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0 or not np.all(np.isfinite(p)):
            raise ValidationError("distribution needs finite entries")
        if p.min() < 0:
            raise ValidationError("distribution has a negative entry")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"distribution sums to {p.sum():.17g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, size: int) -> "Distribution":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def flat(cls, size: int, support) -> "Distribution":
        p = np.zeros(size)
        support = list(support)
        p[support] = 1.0 / len(support)
        return cls(p)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True, eq=False)
class CqState:
    """Classical-quantum state ``sum_x |x><x| (x) rho(x)`` stored as N blocks."""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1] != b.shape[2] or b.shape[0] == 0:
            raise ValidationError("cq state blocks must have shape (N, Q, Q)")
        if not np.all(np.isfinite(b)):
            raise ValidationError("cq state has non-finite entries")
        herm_err = np.abs(b - b.conj().transpose(0, 2, 1)).max()
        if herm_err > 1e-10:
            raise ValidationError(f"cq block not Hermitian (error {herm_err:.2e})")
        b = hermitize(b)
        if np.linalg.eigvalsh(b).min() < -STATE_TOL:
            raise ValidationError("cq block is not positive semidefinite")
        tr = np.trace(b, axis1=1, axis2=2).real.sum()
        if abs(tr - 1.0) > STATE_TOL:
            raise ValidationError(f"cq state has trace {tr:.17g}, not 1")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @property
    def q(self) -> int:
        return self.blocks.shape[1]

    @property
    def n_points(self) -> int:
        return self.blocks.shape[0]

    def marginal(self) -> np.ndarray:
        """Reduced state on the quantum register, ``rho_Q = sum_x rho(x)``."""
        return self.blocks.sum(axis=0)

    def classical_marginal(self) -> np.ndarray:
        return np.trace(self.blocks, axis1=1, axis2=2).real

    @classmethod
    def classical(cls, probs) -> "CqState":
        p = np.asarray(probs, dtype=float)
        return cls(p.reshape(-1, 1, 1))

    @classmethod
    def product(cls, sigma: np.ndarray, probs) -> "CqState":
        p = np.asarray(probs, dtype=float)
        return cls(p[:, None, None] * np.asarray(sigma)[None])


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    n_left: int
    n_right: int
    degree: int
    neighbors: np.ndarray

    def __post_init__(self):
        nb = np.asarray(self.neighbors, dtype=np.int64)
        if nb.shape != (self.degree, self.n_left):
            raise ValidationError(f"neighbors shape {nb.shape} is not D x N = {(self.degree, self.n_left)}")
        if nb.size and (nb.min() < 0 or nb.max() >= self.n_right):
            raise ValidationError("neighbor outside the right vertex set")
        nb.setflags(write=False)
        object.__setattr__(self, "neighbors", nb)

    def multiplicity(self) -> np.ndarray:
        """``c[x, y]`` = number of seeds s with ``Gamma(x, s) = y``."""
        c = np.zeros((self.n_left, self.n_right), dtype=np.int64)
        rows = np.broadcast_to(np.arange(self.n_left), self.neighbors.shape)
        np.add.at(c, (rows, self.neighbors), 1)
        return c


def to_graph(fam: FunctionFamily) -> BipartiteGraph:
    return BipartiteGraph(fam.N, fam.M, fam.D, fam.table.copy())


def from_graph(g: BipartiteGraph, strong_m_prime: int | None = None) -> FunctionFamily:
    def log2(v, what):
        l = int(v).bit_length() - 1
        if v <= 0 or (1 << l) != v:
            raise ValidationError(f"{what} = {v} is not a power of two")
        return l

    return FunctionFamily(log2(g.n_left, "N"), log2(g.n_right, "M"), log2(g.degree, "D"),
                          g.neighbors.copy(), strong_m_prime)


@dataclass(frozen=True)
class AnalysisParams:
    k: float
    k_prime: float = 0.0
    eps: float = 0.0
    q_dim: int = 1
    tol: float = 1e-7
    seed: int = 0
    enumeration_limit: int = DEFAULT_LIMIT

    def validate(self, fam: FunctionFamily | None = None) -> "AnalysisParams":
        if not math.isfinite(self.k) or self.k < 0:
            raise ValidationError("k must be a finite nonnegative number")
        if not math.isfinite(self.k_prime) or self.k_prime < 0:
            raise ValidationError("k' must be a finite nonnegative number")
        if fam is not None:
            if self.k > fam.n:
                raise ValidationError(f"k = {self.k} exceeds n = {fam.n}")
            if self.k_prime > fam.m:
                raise ValidationError(f"k' = {self.k_prime} exceeds m = {fam.m}")
        if not 0 <= self.eps <= 2:
            raise ValidationError("eps must lie in [0, 2]")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.q_dim < 1:
            raise ValidationError("Q must be at least 1")
        if self.enumeration_limit < 1:
            raise ValidationError("enumeration limit must be positive")
        return self


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------

def flatten_report(obj: dict, prefix: str = "") -> dict:
    """Flatten nested dicts into dotted keys; lists and scalars are kept."""
    out = {}
    for key, val in obj.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(flatten_report(val, name + "."))
        else:
            out[name] = val
    return out


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "null"
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        return _fmt(v.tolist())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_report(report: dict) -> str:
    """Flat JSON with ``schema_version`` first and floats at 17 significant digits."""
    flat = flatten_report(report)
    flat.pop("schema_version", None)
    lines = ['  "schema_version": 1']
    for key in sorted(flat):
        lines.append(f"  {json.dumps(key)}: {_fmt(flat[key])}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def format_text(report: dict) -> str:
    """Human-readable ``key: value`` lines with 6 significant digits."""

    def short(v):
        if isinstance(v, (bool, np.bool_)):
            return str(bool(v)).lower()
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".6g")
        if isinstance(v, (list, tuple, np.ndarray)):
            return "[" + ", ".join(short(x) for x in v) + "]"
        return str(v)

    flat = flatten_report(report)
    return "".join(f"{k}: {short(flat[k])}\n" for k in sorted(flat))
