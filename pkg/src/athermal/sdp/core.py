"""Dense SDPs over Hermitian blocks, solved by cvxopt's primal-dual interior-point method.

A problem reads

    minimize    c . x
    subject to  F0_k + sum_i x_i F_ik  >= 0     (Hermitian blocks k)
                A x = b

over real scalar variables ``x``.  Complex Hermitian blocks are handed to the
solver through the real embedding ``[[Re, -Im], [Im, Re]]``, which is PSD
exactly when the block is.  Matrix-valued unknowns are expanded in a real
basis by :class:`Builder`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import cvxopt
import numpy as np
from cvxopt import solvers

from ..errors import ShapeError, SizeError

MAX_TOTAL_DIM = 128
GAP_TOL = 1e-7
RESIDUAL_TOL = 1e-8


@dataclass
class Block:
    """``const + sum_i x_i coeffs[i] >= 0`` with Hermitian ``d x d`` matrices."""

    const: np.ndarray
    coeffs: dict[int, np.ndarray]
    name: str = ""

    @property
    def dim(self) -> int:
        return self.const.shape[0]


@dataclass
class SDPProblem:
    n_vars: int
    objective: np.ndarray
    blocks: list[Block]
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    objective_const: float = 0.0
    sense: str = "min"

    def validate(self):
        if self.objective.shape != (self.n_vars,):
            raise ShapeError("objective length does not match the number of variables")
        total = sum(b.dim for b in self.blocks)
        if total > MAX_TOTAL_DIM:
            raise SizeError(f"total block dimension {total} exceeds {MAX_TOTAL_DIM}")
        for b in self.blocks:
            mats = [b.const, *b.coeffs.values()]
            for m in mats:
                if m.shape != (b.dim, b.dim):
                    raise ShapeError(f"block {b.name!r} has a coefficient of shape {m.shape}")
                if np.abs(m - m.conj().T).max() > 1e-12 * max(1.0, np.abs(m).max()):
                    raise ShapeError(f"block {b.name!r} has a non-Hermitian coefficient")
            if any(not 0 <= i < self.n_vars for i in b.coeffs):
                raise ShapeError(f"block {b.name!r} references an unknown variable")
        if self.eq_matrix.shape != (len(self.eq_rhs), self.n_vars):
            raise ShapeError("equality matrix has the wrong shape")


@dataclass
class SDPSolution:
    primal_value: float
    dual_value: float
    variables: np.ndarray
    duality_gap: float
    status: str
    iterations: int = 0
    residual: float = float("nan")
    extras: dict = field(default_factory=dict)


# --- affine expressions ------------------------------------------------------


class Affine:
    """Matrix-valued affine function of the real variables: ``const + sum_i x_i terms[i]``."""

    __slots__ = ("const", "terms")
    __array_ufunc__ = None  # make ``ndarray - Affine`` defer to Affine

    def __init__(self, const, terms=None):
        self.const = np.asarray(const, dtype=complex)
        self.terms = dict(terms or {})

    @property
    def shape(self):
        return self.const.shape

    def _map(self, fn):
        return Affine(fn(self.const), {k: fn(v) for k, v in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, Affine):
            other = Affine(np.broadcast_to(np.asarray(other, dtype=complex), self.shape))
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Affine(self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return self._map(lambda m: -m)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Affine) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        return self._map(lambda m: m * scalar)

    __rmul__ = __mul__

    def dag(self):
        return self._map(lambda m: m.conj().T)

    def left(self, mat):
        mat = np.asarray(mat)
        return self._map(lambda m: mat @ m)

    def right(self, mat):
        mat = np.asarray(mat)
        return self._map(lambda m: m @ mat)

    def kron_left(self, mat):
        """``mat (x) self``."""
        return self._map(lambda m: np.kron(mat, m))

    def kron_right(self, mat):
        """``self (x) mat``."""
        return self._map(lambda m: np.kron(m, mat))

    def ptrace_right(self, d_keep: int, d_out: int):
        """Trace out the right factor of dimension ``d_out``."""
        return self._map(lambda m: np.einsum("iaja->ij", m.reshape(d_keep, d_out, d_keep, d_out)))

    def ptrace_left(self, d_out: int, d_keep: int):
        """Trace out the left factor of dimension ``d_out``."""
        return self._map(lambda m: np.einsum("aiaj->ij", m.reshape(d_out, d_keep, d_out, d_keep)))

    def trace(self):
        return self._map(lambda m: np.trace(m).reshape(1, 1))

    def herm_part(self):
        return self._map(lambda m: 0.5 * (m + m.conj().T))

    def value(self, x) -> np.ndarray:
        out = self.const.copy()
        for k, v in self.terms.items():
            out = out + x[k] * v
        return out


def block_matrix(rows) -> Affine:
    """Assemble a block matrix from a nested list of :class:`Affine` (or constant) entries."""
    rows = [[r if isinstance(r, Affine) else Affine(r) for r in row] for row in rows]
    heights = [row[0].shape[0] for row in rows]
    widths = [a.shape[1] for a in rows[0]]
    keys = set()
    for row in rows:
        for a in row:
            keys.update(a.terms)

    def assemble(get):
        return np.block([[get(a) for a in row] for row in rows])

    const = assemble(lambda a: a.const)
    zero = {(h, w): np.zeros((h, w), dtype=complex) for h in heights for w in widths}
    terms = {
        k: assemble(lambda a, k=k: a.terms.get(k, zero[a.shape]))
        for k in sorted(keys)
    }
    return Affine(const, terms)


class Builder:
    """Incremental construction of an :class:`SDPProblem`."""

    def __init__(self):
        self.n = 0
        self.blocks: list[Block] = []
        self.eq_rows: list[dict[int, float]] = []
        self.eq_rhs: list[float] = []
        self.objective: dict[int, float] = {}
        self.objective_const = 0.0
        self.sense = "min"

    def scalar(self) -> Affine:
        i = self.n
        self.n += 1
        return Affine(np.zeros((1, 1)), {i: np.ones((1, 1), dtype=complex)})

    def hermitian(self, d: int) -> Affine:
        """A ``d x d`` Hermitian unknown; its real parameters are its entries."""
        terms = {}
        for k in range(d):
            for l in range(k, d):
                e = np.zeros((d, d), dtype=complex)
                if k == l:
                    e[k, k] = 1
                    terms[self.n] = e
                    self.n += 1
                else:
                    e[k, l] = e[l, k] = 1
                    terms[self.n] = e
                    self.n += 1
                    f = np.zeros((d, d), dtype=complex)
                    f[k, l], f[l, k] = 1j, -1j
                    terms[self.n] = f
                    self.n += 1
        return Affine(np.zeros((d, d)), terms)

    def general(self, rows: int, cols: int) -> Affine:
        """A complex ``rows x cols`` unknown (two real parameters per entry)."""
        terms = {}
        for k in range(rows):
            for l in range(cols):
                for val in (1.0, 1j):
                    e = np.zeros((rows, cols), dtype=complex)
                    e[k, l] = val
                    terms[self.n] = e
                    self.n += 1
        return Affine(np.zeros((rows, cols)), terms)

    def psd(self, expr: Affine, name: str = ""):
        expr = expr.herm_part()
        terms = {k: v for k, v in expr.terms.items() if np.any(v != 0)}
        self.blocks.append(Block(expr.const, terms, name))

    def nonneg(self, expr: Affine, name: str = ""):
        if expr.shape != (1, 1):
            raise ShapeError("nonneg expects a scalar expression")
        self.psd(expr, name)

    def equal(self, expr: Affine, rhs=0.0, skip=()):
        """``expr == rhs`` for a Hermitian (or scalar real) matrix expression.

        Entries ``(k, l)`` listed in ``skip`` are left out, which removes
        constraints already implied by others (the solver needs independent rows).
        """
        diff = expr - np.broadcast_to(np.asarray(rhs, dtype=complex), expr.shape)
        d = diff.shape[0]
        for k in range(d):
            for l in range(k, d):
                if (k, l) in skip:
                    continue
                parts = (np.real,) if k == l else (np.real, np.imag)
                for part in parts:
                    row = {i: float(part(m[k, l])) for i, m in diff.terms.items()}
                    row = {i: v for i, v in row.items() if v != 0.0}
                    self.eq_rows.append(row)
                    self.eq_rhs.append(-float(part(diff.const[k, l])))

    def minimize(self, expr: Affine):
        self._objective(expr, 1.0)

    def maximize(self, expr: Affine):
        self._objective(expr, -1.0)

    def _objective(self, expr: Affine, sign: float):
        if expr.shape != (1, 1):
            raise ShapeError("objective must be a scalar expression")
        self.objective = {i: sign * float(np.real(m[0, 0])) for i, m in expr.terms.items()}
        self.objective_const = sign * float(np.real(expr.const[0, 0]))
        self.sense = "min" if sign > 0 else "max"

    def problem(self) -> SDPProblem:
        c = np.zeros(self.n)
        for i, v in self.objective.items():
            c[i] = v
        a = np.zeros((len(self.eq_rows), self.n))
        for r, row in enumerate(self.eq_rows):
            for i, v in row.items():
                a[r, i] = v
        return SDPProblem(
            self.n, c, list(self.blocks), a, np.asarray(self.eq_rhs, dtype=float),
            objective_const=self.objective_const, sense=self.sense,
        )


# --- solver ----------------------------------------------------------------------


def _embed(m: np.ndarray) -> np.ndarray:
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def _block_residual(b: Block, x: np.ndarray) -> float:
    m = b.const.copy()
    for i, c in b.coeffs.items():
        m = m + x[i] * c
    return float(max(0.0, -np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]))


def solve(p: SDPProblem, tol: float = 1e-8, max_iters: int = 80) -> SDPSolution:
    """Solve ``p``; the status is ``optimal`` only when the gap and residual targets are met.

    Objective values are reported in the user's sense (a maximization reports
    its maximum).  Infeasibility certificates give ``infeasible``; anything
    short of the targets gives ``max_iter`` with the diagnostics filled in.
    """
    p.validate()
    n = p.n_vars
    sign = 1.0 if p.sense == "min" else -1.0
    # constant blocks are checked here; cvxopt needs every variable to appear somewhere
    live_blocks = []
    for b in p.blocks:
        if b.coeffs:
            live_blocks.append(b)
        elif _block_residual(b, np.zeros(n)) > RESIDUAL_TOL:
            return SDPSolution(sign * np.inf, sign * np.inf, np.full(n, np.nan), np.nan, "infeasible")
    used = np.zeros(n, dtype=bool)
    for b in live_blocks:
        used[list(b.coeffs)] = True
    used |= np.any(p.eq_matrix != 0, axis=0)
    if np.any(p.objective[~used] != 0):
        return SDPSolution(-sign * np.inf, -sign * np.inf, np.full(n, np.nan), np.nan, "unbounded")
    if not used.all():
        keep = np.flatnonzero(used)
        remap = {int(old): new for new, old in enumerate(keep)}
        sub = SDPProblem(
            len(keep), p.objective[keep],
            [Block(b.const, {remap[i]: c for i, c in b.coeffs.items()}, b.name) for b in live_blocks],
            p.eq_matrix[:, keep], p.eq_rhs, p.objective_const, p.sense,
        )
        sol = solve(sub, tol, max_iters)
        full = np.zeros(n)
        full[keep] = sol.variables
        sol.variables = full
        return sol
    gs, hs = [], []
    for b in live_blocks:
        d2 = (2 * b.dim) ** 2
        g = np.zeros((d2, n))
        for i, c in b.coeffs.items():
            g[:, i] = -_embed(c).reshape(-1, order="F")
        gs.append(cvxopt.matrix(g))
        hs.append(cvxopt.matrix(_embed(b.const)))
    kwargs = {}
    if len(p.eq_rhs):
        kwargs["A"] = cvxopt.matrix(p.eq_matrix)
        kwargs["b"] = cvxopt.matrix(p.eq_rhs)
    best = None
    # tight tolerances first; cvxopt occasionally breaks down near the optimum, so loosen
    for scale in (1e-2, 1e-1, 1.0, 10.0):
        opts = {
            "show_progress": False,
            "abstol": tol * scale,
            "reltol": tol * scale,
            "feastol": tol * scale,
            "maxiters": max_iters,
        }
        sol = _run(p, live_blocks, gs, hs, kwargs, opts)
        if sol.status in ("optimal", "infeasible", "unbounded"):
            return sol
        if best is None or (np.isfinite(sol.duality_gap) and sol.duality_gap < best.duality_gap):
            best = sol
    return best


def _run(p, live_blocks, gs, hs, kwargs, opts) -> SDPSolution:
    n = p.n_vars
    sign = 1.0 if p.sense == "min" else -1.0
    try:
        res = solvers.sdp(cvxopt.matrix(p.objective), Gs=gs, hs=hs, options=opts, **kwargs)
    except (ValueError, ArithmeticError) as exc:
        return SDPSolution(np.nan, np.nan, np.full(n, np.nan), np.inf, "max_iter", extras={"error": str(exc)})
    iters = int(res.get("iterations") or 0)
    if res["status"] == "primal infeasible":
        return SDPSolution(sign * np.inf, sign * np.inf, np.full(n, np.nan), np.nan, "infeasible", iterations=iters)
    if res["status"] == "dual infeasible":
        return SDPSolution(-sign * np.inf, -sign * np.inf, np.full(n, np.nan), np.nan, "unbounded", iterations=iters)
    if res["x"] is None:
        return SDPSolution(np.nan, np.nan, np.full(n, np.nan), np.inf, "max_iter", iterations=iters)
    x = np.array(res["x"]).reshape(-1)
    primal = float(p.objective @ x) + p.objective_const
    dual = res["dual objective"] if res["dual objective"] is not None else np.nan
    dual = float(dual) + p.objective_const
    residual = max([_block_residual(b, x) for b in live_blocks] + [0.0])
    if len(p.eq_rhs):
        residual = max(residual, float(np.abs(p.eq_matrix @ x - p.eq_rhs).max()))
    gap = abs(primal - dual)
    ok = gap <= GAP_TOL and residual <= RESIDUAL_TOL
    return SDPSolution(
        sign * primal, sign * dual, x, gap, "optimal" if ok else "max_iter",
        iterations=iters, residual=residual,
    )


def dump(p: SDPProblem) -> str:
    """Text dump in a sparse SDPA-like layout (real embedding, 1-based indices).

    Line 1: number of variables; line 2: number of blocks; line 3: block sizes;
    line 4: objective; then ``matno blkno i j value`` entries with ``matno = 0``
    for the constant (stored as ``-F0`` following the SDPA sign convention).
    Equalities follow as ``eq row col value`` and ``rhs row value`` lines.
    """
    out = io.StringIO()
    out.write(f"{p.n_vars}\n{len(p.blocks)}\n")
    out.write(" ".join(str(2 * b.dim) for b in p.blocks) + "\n")
    out.write(" ".join(f"{v:.17g}" for v in p.objective) + "\n")
    for k, b in enumerate(p.blocks, 1):
        mats = [(0, -b.const)] + [(i + 1, c) for i, c in sorted(b.coeffs.items())]
        for matno, m in mats:
            e = _embed(m)
            for i, j in zip(*np.nonzero(np.triu(e))):
                out.write(f"{matno} {k} {i + 1} {j + 1} {e[i, j]:.17g}\n")
    for r, j in zip(*np.nonzero(p.eq_matrix)):
        out.write(f"eq {r + 1} {j + 1} {p.eq_matrix[r, j]:.17g}\n")
    for r, v in enumerate(p.eq_rhs):
        out.write(f"rhs {r + 1} {v:.17g}\n")
    return out.getvalue()
