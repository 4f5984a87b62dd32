"""Small dense semidefinite programming.

The core solver handles the standard primal/dual pair

    minimize   <C, X>            maximize   b^T y
    subject to <A_i, X> = b_i    subject to C - sum_i y_i A_i = S >= 0
               X >= 0

over a product of real symmetric PSD blocks ("sym") and one or more
nonnegative orthants ("lin"). It is an infeasible-start primal-dual
interior point method with the HKM search direction and a Mehrotra
predictor-corrector step. Complex Hermitian variables are handled by
:class:`SdpBuilder`, which embeds them as real symmetric blocks of twice
the size.

Problems here are tiny (embedded block sizes of a few dozen), so every
factorization is dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError

DEFAULT_TOL = 1e-7
MAX_ITERS = 200


@dataclass
class SdpProblem:
    """Standard-form SDP over a block-diagonal cone.

    ``blocks`` lists ``(kind, dim)`` with kind ``"sym"`` or ``"lin"``.
    ``c[b]`` is the cost for block b (``dim x dim`` or length ``dim``).
    ``a[b]`` is ``(rows, mats)``: the constraint indices that touch block b
    and their coefficient matrices stacked along axis 0.
    """

    blocks: list[tuple[str, int]]
    c: list[np.ndarray]
    a: list[tuple[np.ndarray, np.ndarray]]
    b: np.ndarray
    sense: str = "min"

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.sense not in ("min", "max"):
            raise ValidationError(f"unknown sense {self.sense!r}")
        if not (len(self.blocks) == len(self.c) == len(self.a)):
            raise ValidationError("blocks, costs and constraint lists differ in length")
        for (kind, n), cb, (rows, mats) in zip(self.blocks, self.c, self.a):
            if kind == "sym":
                if cb.shape != (n, n) or mats.shape[1:] != (n, n):
                    raise ValidationError("symmetric block data has the wrong shape")
            elif kind == "lin":
                if cb.shape != (n,) or mats.shape[1:] != (n,):
                    raise ValidationError("linear block data has the wrong shape")
            else:
                raise ValidationError(f"unknown block kind {kind!r}")
            if len(rows) != mats.shape[0]:
                raise ValidationError("row index list does not match coefficient stack")
            if len(rows) and (rows.min() < 0 or rows.max() >= self.b.size):
                raise ValidationError("constraint index out of range")

    @property
    def n_constraints(self) -> int:
        return self.b.size

    @classmethod
    def dense(cls, c: np.ndarray, constraints: list[tuple[np.ndarray, float]],
              sense: str = "min") -> "SdpProblem":
        """Single real symmetric block, constraints given as ``(A_i, b_i)``."""
        c = _sym(np.asarray(c, dtype=float))
        n = c.shape[0]
        mats = np.array([_sym(np.asarray(a, dtype=float)) for a, _ in constraints]).reshape(-1, n, n)
        b = np.array([bi for _, bi in constraints], dtype=float)
        return cls([("sym", n)], [c], [(np.arange(len(b)), mats)], b, sense)


@dataclass
class SdpSolution:
    primal_value: float
    dual_value: float
    primal_x: list[np.ndarray]
    dual_y: np.ndarray
    dual_s: list[np.ndarray]
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


class _Ipm:
    """One solver instance; holds the scaled problem and mutable iterates."""

    def __init__(self, p: SdpProblem):
        self.kinds = [k for k, _ in p.blocks]
        self.dims = [n for _, n in p.blocks]
        m = p.n_constraints
        self.m = m
        sign = -1.0 if p.sense == "max" else 1.0
        c = [sign * (_sym(cb) if k == "sym" else cb.astype(float)) for (k, _), cb in zip(p.blocks, p.c)]
        a = []
        for k, (rows, mats) in zip(self.kinds, p.a):
            mats = np.asarray(mats, dtype=float)
            if k == "sym":
                mats = 0.5 * (mats + mats.transpose(0, 2, 1))
            a.append((np.asarray(rows, dtype=int), mats))
        # Row normalization keeps the Schur complement well scaled.
        rn = np.zeros(m)
        for rows, mats in a:
            np.add.at(rn, rows, (mats.reshape(len(rows), -1) ** 2).sum(axis=1))
        rn = np.sqrt(rn)
        if m and np.any(rn == 0):
            raise ValidationError("constraint with all-zero coefficients")
        self.row_scale = rn if m else np.ones(0)
        self.a = [(rows, mats / rn[rows].reshape((-1,) + (1,) * (mats.ndim - 1))) for rows, mats in a]
        b = p.b / rn if m else p.b.copy()
        self.b_scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        self.c_scale = max(1.0, max((float(np.abs(cb).max(initial=0.0)) for cb in c), default=1.0))
        self.b = b / self.b_scale
        self.c = [cb / self.c_scale for cb in c]
        self.nu = float(sum(self.dims))
        self.sign = sign

    # linear maps -------------------------------------------------------
    def amap(self, x: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for (rows, mats), xb in zip(self.a, x):
            if len(rows):
                np.add.at(out, rows, mats.reshape(len(rows), -1) @ xb.ravel())
        return out

    def aadj(self, y: np.ndarray) -> list[np.ndarray]:
        out = []
        for (rows, mats), n, k in zip(self.a, self.dims, self.kinds):
            if len(rows):
                out.append(np.tensordot(y[rows], mats, axes=1))
            else:
                out.append(np.zeros((n, n)) if k == "sym" else np.zeros(n))
        return out

    @staticmethod
    def inner(u: list[np.ndarray], v: list[np.ndarray]) -> float:
        return float(sum(np.vdot(ub, vb).real for ub, vb in zip(u, v)))

    # iteration pieces --------------------------------------------------
    def schur(self, x, sinv):
        mm = np.zeros((self.m, self.m))
        for (rows, mats), xb, sb, k in zip(self.a, x, sinv, self.kinds):
            r = len(rows)
            if not r:
                continue
            flat = mats.reshape(r, -1)
            if k == "sym":
                g = (xb @ mats @ sb).reshape(r, -1)
                mb = flat @ g.T
            else:
                mb = (flat * (xb * sb)) @ flat.T
            mm[np.ix_(rows, rows)] += mb
        return 0.5 * (mm + mm.T)

    def step_len(self, x, dx) -> float:
        alpha = np.inf
        for xb, db, k in zip(x, dx, self.kinds):
            if k == "sym":
                try:
                    l = np.linalg.cholesky(xb)
                except np.linalg.LinAlgError:
                    return 0.0
                li = np.linalg.solve(l, db)
                t = np.linalg.solve(l, li.T)
                lam = np.linalg.eigvalsh(_sym(t))[0]
            else:
                neg = db < 0
                lam = float((db[neg] / xb[neg]).min()) if np.any(neg) else 0.0
            if lam < 0:
                alpha = min(alpha, -1.0 / lam)
        return alpha

    def direction(self, x, s, sinv, chol, rp, rd, k_rhs):
        """Solve the HKM Newton system for a given complementarity target."""
        xrs = []
        for xb, rb, sb, kk in zip(x, rd, sinv, self.kinds):
            xrs.append(xb @ rb @ sb if kk == "sym" else xb * rb * sb)
        rhs = rp - self.amap(k_rhs) + self.amap(xrs)
        dy = _chol_solve(chol, rhs)
        ady = self.aadj(dy)
        ds = [rb - ab for rb, ab in zip(rd, ady)]
        dx = []
        for kb, xb, db, sb, kk in zip(k_rhs, x, ds, sinv, self.kinds):
            if kk == "sym":
                dx.append(kb - _sym(xb @ db @ sb))
            else:
                dx.append(kb - xb * db * sb)
        return dx, dy, ds

    def run(self, tol: float, max_iters: int) -> SdpSolution:
        kinds, dims = self.kinds, self.dims
        # SDPT3-style starting point.
        anorms = np.zeros(self.m)
        for rows, mats in self.a:
            np.add.at(anorms, rows, (mats.reshape(len(rows), -1) ** 2).sum(axis=1))
        anorms = np.sqrt(anorms)
        xi, eta = 10.0, 10.0
        for n in dims:
            if self.m:
                xi = max(xi, np.sqrt(n) * float(np.max((1 + np.abs(self.b)) / (1 + anorms))))
            eta = max(eta, np.sqrt(n))
        eta = max(eta, 1 + max(float(np.linalg.norm(cb)) for cb in self.c))
        x = [xi * np.eye(n) if k == "sym" else xi * np.ones(n) for k, n in zip(kinds, dims)]
        s = [eta * np.eye(n) if k == "sym" else eta * np.ones(n) for k, n in zip(kinds, dims)]
        y = np.zeros(self.m)
        bnorm = 1 + float(np.linalg.norm(self.b))
        cnorm = 1 + float(np.sqrt(sum(np.linalg.norm(cb) ** 2 for cb in self.c)))
        status = "limit"
        stall = 0
        it = 0
        best = None
        for it in range(1, max_iters + 1):
            ax = self.amap(x)
            rp = self.b - ax
            aty = self.aadj(y)
            rd = [cb - ab - sb for cb, ab, sb in zip(self.c, aty, s)]
            pobj = self.inner(self.c, x)
            dobj = float(self.b @ y)
            mu = self.inner(x, s) / self.nu
            perr = float(np.linalg.norm(rp)) / bnorm
            derr = float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd))) / cnorm
            gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
            cgap = self.inner(x, s) / (1 + abs(pobj) + abs(dobj))
            score = max(perr, derr, gap, cgap)
            if best is None or score < best[0]:
                best = (score, [xb.copy() for xb in x], y.copy(), [sb.copy() for sb in s], perr, derr, gap)
            if score <= tol:
                status = "optimal"
                break
            # Farkas-type certificates of infeasibility.
            by = dobj
            if by > 0:
                r = np.sqrt(sum(np.linalg.norm(ab + sb) ** 2 for ab, sb in zip(aty, s)))
                if r / by < 1e-8 and perr > tol:
                    status = "infeasible"
                    break
            if pobj < 0:
                if np.linalg.norm(ax) / -pobj < 1e-8 and derr > tol:
                    status = "infeasible"
                    break
            sinv = []
            for sb, k in zip(s, kinds):
                sinv.append(_sym(np.linalg.inv(sb)) if k == "sym" else 1.0 / sb)
            chol = _chol_factor(self.schur(x, sinv))
            # predictor
            kp = [-xb for xb in x]
            dxa, dya, dsa = self.direction(x, s, sinv, chol, rp, rd, kp)
            ap = min(1.0, self.step_len(x, dxa))
            ad = min(1.0, self.step_len(s, dsa))
            mu_aff = self.inner([xb + ap * d for xb, d in zip(x, dxa)],
                                [sb + ad * d for sb, d in zip(s, dsa)]) / self.nu
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
            # corrector
            kc = []
            for xb, sb, si, dxb, dsb, k in zip(x, s, sinv, dxa, dsa, kinds):
                if k == "sym":
                    kc.append(sigma * mu * si - xb - _sym(dxb @ dsb @ si))
                else:
                    kc.append(sigma * mu * si - xb - dxb * dsb * si)
            dx, dy, ds = self.direction(x, s, sinv, chol, rp, rd, kc)
            ap = self.step_len(x, dx)
            ad = self.step_len(s, ds)
            gamma = 0.9 + 0.09 * min(1.0, ap, ad)
            ap = min(1.0, gamma * ap)
            ad = min(1.0, gamma * ad)
            if max(ap, ad) < 1e-10:
                stall += 1
                if stall >= 3:
                    break
            else:
                stall = 0
            x = [xb + ap * d for xb, d in zip(x, dx)]
            x = [_sym(xb) if k == "sym" else xb for xb, k in zip(x, kinds)]
            y = y + ad * dy
            s = [sb + ad * d for sb, d in zip(s, ds)]
            s = [_sym(sb) if k == "sym" else sb for sb, k in zip(s, kinds)]
        else:
            it = max_iters
        if status != "optimal" and status != "infeasible" and best is not None:
            score, x, y, s, perr, derr, gap = best
            if score <= 100 * tol:
                status = "inaccurate"
        elif best is not None and status == "optimal":
            perr, derr, gap = best[4], best[5], best[6]
        else:
            perr = derr = gap = np.inf
        return self._unscale(x, y, s, status, it, perr, derr, gap)

    def _unscale(self, x, y, s, status, it, perr, derr, gap) -> SdpSolution:
        xs = [xb * self.b_scale for xb in x]
        ss = [sb * self.c_scale for sb in s]
        yy = y * self.c_scale
        y_orig = yy / self.row_scale if self.m else yy
        pval = self.sign * sum(float(np.vdot(cb, xb).real) for cb, xb in zip(self.c, x)) * self.c_scale * self.b_scale
        dval = self.sign * float(self.b @ y) * self.b_scale * self.c_scale
        return SdpSolution(pval, dval, xs, self.sign * y_orig, ss, status, it, perr, derr, gap)


def _chol_factor(mm: np.ndarray):
    n = mm.shape[0]
    if n == 0:
        return ("empty", None)
    reg = 0.0
    scale = max(1.0, float(np.abs(np.diag(mm)).max()))
    for _ in range(8):
        try:
            return ("chol", np.linalg.cholesky(mm + reg * scale * np.eye(n)))
        except np.linalg.LinAlgError:
            reg = 1e-14 if reg == 0 else reg * 100
    return ("lstsq", mm)


def _chol_solve(f, rhs):
    kind, data = f
    if kind == "empty":
        return np.zeros(0)
    if kind == "chol":
        z = np.linalg.solve(data, rhs)
        return np.linalg.solve(data.T, z)
    return np.linalg.lstsq(data, rhs, rcond=None)[0]


def solve_sdp(p: SdpProblem, tol: float = DEFAULT_TOL, max_iters: int = MAX_ITERS) -> SdpSolution:
    """Solve ``p``; ``status`` is ``optimal``, ``infeasible`` or ``limit``."""
    if not tol > 0:
        raise ValidationError("tol must be positive")
    return _Ipm(p).run(tol, max_iters)


# ----------------------------------------------------------------------
# Builder
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    """Handle to a decision variable of an :class:`SdpBuilder`."""

    index: int
    kind: str  # "herm", "sym" or "lin"
    dim: int


@dataclass(frozen=True)
class Term:
    """One linear piece of an operator-valued expression.

    ``op`` is ``"id"`` (``coef * X``), ``"kron"`` (``coef * X (x) I_n``)
    or ``"scal"`` (``coef * x[pos] * I``, for a nonnegative scalar entry).
    """

    var: Var
    op: str = "id"
    coef: float = 1.0
    n: int = 1
    pos: int = 0


def herm_basis(d: int, complex_: bool = True) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian (or real symmetric) matrices."""
    mats = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        mats.append(e)
    r2 = np.sqrt(0.5)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = r2
            mats.append(e)
            if complex_:
                f = np.zeros((d, d), dtype=complex)
                f[i, j] = -1j * r2
                f[j, i] = 1j * r2
                mats.append(f)
    out = np.array(mats)
    return out if complex_ else out.real


def _embed(a: np.ndarray) -> np.ndarray:
    """Real symmetric image of a Hermitian matrix, ``[[Re, -Im], [Im, Re]]``."""
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def _embed_stack(a: np.ndarray) -> np.ndarray:
    re, im = a.real, a.imag
    top = np.concatenate([re, -im], axis=2)
    bot = np.concatenate([im, re], axis=2)
    return np.concatenate([top, bot], axis=1)


@dataclass
class BuiltSolution:
    status: str
    primal_value: float
    dual_value: float
    raw: SdpSolution
    values: dict = field(default_factory=dict)

    def value(self, v: Var) -> np.ndarray:
        return self.values[v.index]


class SdpBuilder:
    """Assemble an SDP from Hermitian, real symmetric and nonnegative variables.

    Scalar constraints are ``sum <coef, X> (==, <=, >=) rhs`` with the real
    inner product ``Re Tr(coef^* X)``. Operator constraints
    ``sum_t L_t(X_t) (==, <=, >=) rhs`` are expanded along an orthonormal
    Hermitian basis; inequalities get a PSD slack block.
    """

    def __init__(self):
        self.vars: list[Var] = []
        self._lin_size = 0
        self._lin_offset: dict[int, int] = {}
        # Each row: (dict var_index -> coefficient, rhs)
        self._rows: list[tuple[dict, float]] = []
        self._scalar_slacks: list[tuple[int, float]] = []  # (row, sign)
        self._obj: dict = {}
        self._offset = 0.0
        self._sense = "min"

    # variables ---------------------------------------------------------
    def herm(self, dim: int) -> Var:
        return self._new("herm", dim)

    def sym(self, dim: int) -> Var:
        return self._new("sym", dim)

    def nonneg(self, size: int = 1) -> Var:
        v = self._new("lin", size)
        self._lin_offset[v.index] = self._lin_size
        self._lin_size += size
        return v

    def _new(self, kind, dim) -> Var:
        if dim < 1:
            raise ValidationError("variable dimension must be positive")
        v = Var(len(self.vars), kind, dim)
        self.vars.append(v)
        return v

    # helpers -----------------------------------------------------------
    @staticmethod
    def _coef(v: Var, c) -> np.ndarray:
        c = np.asarray(c)
        if v.kind == "lin":
            c = np.broadcast_to(np.asarray(c, dtype=float), (v.dim,)).astype(float)
            return c
        if c.ndim == 0:
            c = c * np.eye(v.dim)
        if c.shape != (v.dim, v.dim):
            raise ValidationError(f"coefficient shape {c.shape} does not match variable dim {v.dim}")
        c = 0.5 * (c + c.conj().T)
        return c if v.kind == "herm" else c.real

    def _add_row(self, coefs: dict, rhs: float) -> int:
        self._rows.append((coefs, float(rhs)))
        return len(self._rows) - 1

    # constraints -------------------------------------------------------
    def add_scalar(self, terms, sense: str, rhs: float) -> None:
        """``sum_{(v, coef)} <coef, v>  sense  rhs``; a scalar coef means ``coef * Tr``."""
        coefs: dict = {}
        for v, c in terms:
            cc = self._coef(v, c)
            coefs[v.index] = coefs.get(v.index, 0) + cc
        row = self._add_row(coefs, rhs)
        if sense == "<=":
            self._scalar_slacks.append((row, 1.0))
        elif sense == ">=":
            self._scalar_slacks.append((row, -1.0))
        elif sense != "==":
            raise ValidationError(f"unknown sense {sense!r}")

    def add_operator(self, terms: list[Term], sense: str, rhs, complex_: bool = True) -> None:
        """``sum_t L_t(X_t)  sense  rhs`` as an operator (in)equality."""
        rhs = np.asarray(rhs)
        if rhs.ndim == 0:
            raise ValidationError("operator right-hand side must be a matrix")
        d = rhs.shape[0]
        basis = herm_basis(d, complex_)
        adj: dict = {}
        for t in terms:
            v = t.var
            if t.op == "id":
                if v.dim != d:
                    raise ValidationError("operator term dimension mismatch")
                co = t.coef * basis
            elif t.op == "kron":
                if v.dim * t.n != d:
                    raise ValidationError("kron term dimension mismatch")
                co = t.coef * np.einsum("kajbj->kab", basis.reshape(-1, v.dim, t.n, v.dim, t.n))
            elif t.op == "scal":
                if v.kind != "lin":
                    raise ValidationError("scalar term needs a nonnegative variable")
                tr = np.trace(basis, axis1=1, axis2=2).real
                co = np.zeros((len(basis), v.dim))
                co[:, t.pos] = t.coef * tr
            else:
                raise ValidationError(f"unknown term op {t.op!r}")
            if v.kind == "sym":
                co = co.real
            adj[v.index] = adj.get(v.index, 0) + co
        if sense in ("<=", ">="):
            z = self.herm(d) if complex_ else self.sym(d)
            adj[z.index] = (1.0 if sense == "<=" else -1.0) * (basis if complex_ else basis.real)
        elif sense != "==":
            raise ValidationError(f"unknown sense {sense!r}")
        rhs_c = np.einsum("kab,ba->k", basis, rhs).real if complex_ else np.einsum("kab,ab->k", basis.real, rhs.real)
        for i in range(len(basis)):
            self._add_row({vi: c[i] for vi, c in adj.items()}, rhs_c[i])

    def set_objective(self, terms, sense: str = "max", offset: float = 0.0) -> None:
        if sense not in ("min", "max"):
            raise ValidationError(f"unknown sense {sense!r}")
        self._obj = {}
        for v, c in terms:
            cc = self._coef(v, c)
            self._obj[v.index] = self._obj.get(v.index, 0) + cc
        self._sense = sense
        self._offset = float(offset)

    # compile and solve ---------------------------------------------------
    def compile(self) -> tuple[SdpProblem, dict]:
        lin_total = self._lin_size + len(self._scalar_slacks)
        blocks = []
        block_of: dict[int, int] = {}
        for v in self.vars:
            if v.kind == "herm":
                block_of[v.index] = len(blocks)
                blocks.append(("sym", 2 * v.dim))
            elif v.kind == "sym":
                block_of[v.index] = len(blocks)
                blocks.append(("sym", v.dim))
        lin_block = None
        if lin_total:
            lin_block = len(blocks)
            blocks.append(("lin", lin_total))
        nrow = len(self._rows)
        per_block_rows = [[] for _ in blocks]
        per_block_mats = [[] for _ in blocks]

        def conv(v: Var, c):
            if v.kind == "herm":
                c = np.asarray(c)
                return _embed_stack(c) / 2 if c.ndim == 3 else _embed(c) / 2
            return np.asarray(c, dtype=float)

        lin_rows: dict[int, np.ndarray] = {}
        for r, (coefs, _) in enumerate(self._rows):
            for vi, c in coefs.items():
                v = self.vars[vi]
                if v.kind == "lin":
                    vec = lin_rows.setdefault(r, np.zeros(lin_total))
                    off = self._lin_offset[vi]
                    vec[off:off + v.dim] += c
                else:
                    b = block_of[vi]
                    per_block_rows[b].append(r)
                    per_block_mats[b].append(conv(v, c))
        for j, (r, sgn) in enumerate(self._scalar_slacks):
            vec = lin_rows.setdefault(r, np.zeros(lin_total))
            vec[self._lin_size + j] += sgn
        if lin_block is not None:
            for r in sorted(lin_rows):
                per_block_rows[lin_block].append(r)
                per_block_mats[lin_block].append(lin_rows[r])
        a = []
        for bi, (kind, n) in enumerate(blocks):
            rows = np.array(per_block_rows[bi], dtype=int)
            shape = (0, n, n) if kind == "sym" else (0, n)
            mats = np.array(per_block_mats[bi], dtype=float) if len(rows) else np.zeros(shape)
            a.append((rows, mats))
        c = [np.zeros((n, n)) if k == "sym" else np.zeros(n) for k, n in blocks]
        for vi, cc in self._obj.items():
            v = self.vars[vi]
            if v.kind == "lin":
                off = self._lin_offset[vi]
                c[lin_block][off:off + v.dim] += cc
            else:
                c[block_of[vi]] += conv(v, cc)
        b = np.array([rhs for _, rhs in self._rows], dtype=float)
        if nrow == 0:
            b = np.zeros(0)
        prob = SdpProblem(blocks, c, a, b, self._sense)
        return prob, {"block_of": block_of, "lin_block": lin_block}

    def solve(self, tol: float = DEFAULT_TOL, max_iters: int = MAX_ITERS,
              require_optimal: bool = True) -> BuiltSolution:
        prob, meta = self.compile()
        sol = solve_sdp(prob, tol, max_iters)
        if require_optimal and sol.status not in ("optimal", "inaccurate"):
            raise SolverError(
                f"SDP solver finished with status {sol.status!r} "
                f"(primal residual {sol.primal_residual:.2e}, dual residual "
                f"{sol.dual_residual:.2e}, gap {sol.gap:.2e})")
        values = {}
        for v in self.vars:
            if v.kind == "lin":
                off = self._lin_offset[v.index]
                values[v.index] = sol.primal_x[meta["lin_block"]][off:off + v.dim].copy()
            else:
                z = sol.primal_x[meta["block_of"][v.index]]
                if v.kind == "herm":
                    n = v.dim
                    xr = 0.5 * (z[:n, :n] + z[n:, n:])
                    xi = 0.5 * (z[n:, :n] - z[:n, n:])
                    values[v.index] = xr + 1j * xi
                else:
                    values[v.index] = z.copy()
        return BuiltSolution(sol.status, sol.primal_value + self._offset,
                             sol.dual_value + self._offset, sol, values)
