"""Multi-start Riemannian gradient ascent over pure states of ``R (x) A'``.

All restarts advance together as one batch.  Each step is a Barzilai-Borwein
trial length along the projected gradient, retracted to the sphere by
renormalization and shortened by Armijo backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import DomainError

#: ``objective(X) -> (values, grads)`` with ``X`` of shape ``(B, dR, din)``; ``grads`` may be ``None``.
Objective = Callable[[np.ndarray], tuple]

LADDER = 8


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the multi-start optimizer.

    ``seed`` is split into one independent stream per restart, so results
    depend only on the configuration.  ``fd_step`` is the central-difference
    step used when an objective has no analytic gradient.
    """

    restarts: int = 32
    max_iters: int = 2000
    grad_tol: float = 1e-8
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    initial_step: float = 0.1
    stall_iters: int = 30
    stall_tol: float = 1e-13
    fd_step: float = 1e-6
    seed: int = 42
    include_maximally_entangled: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")
        if not (self.grad_tol > 0 and self.fd_step > 0 and 0 < self.armijo < 1 and 0 < self.backtrack < 1):
            raise DomainError("tolerances and line-search parameters must be positive (and below 1 where relevant)")

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


@dataclass
class DivergenceResult:
    """Best value over restarts with the maximizing pure state and diagnostics."""

    value: float
    argmax_state: np.ndarray
    converged: bool
    restart_values: list
    iterations: int = 0
    grad_norm: float = float("nan")
    extras: dict = field(default_factory=dict)

    @property
    def restarts_used(self) -> int:
        return len(self.restart_values)


def _normalize(x):
    nrm = np.linalg.norm(x.reshape(x.shape[0], -1), axis=1)
    return x / nrm[:, None, None]


def _inner(a, b):
    return np.real(np.sum(np.conj(a) * b, axis=(1, 2)))


def fd_gradient(objective: Objective, x: np.ndarray, step: float) -> np.ndarray:
    """Central differences along every real coordinate of ``X`` (real and imaginary parts)."""
    b, dr, din = x.shape
    n = dr * din
    grad = np.zeros(x.shape, dtype=complex)
    for k in range(n):
        for unit in (1.0, 1j):
            e = np.zeros(n, dtype=complex)
            e[k] = unit * step
            e = e.reshape(dr, din)
            fp = objective(x + e)[0]
            fm = objective(x - e)[0]
            grad.reshape(b, n)[:, k] += unit * (fp - fm) / (2 * step)
    return grad


def random_starts(n_states: int, dr: int, din: int, seed: int) -> np.ndarray:
    streams = np.random.SeedSequence(seed).spawn(n_states)
    out = np.empty((n_states, dr, din), dtype=complex)
    for k, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        out[k] = rng.normal(size=(dr, din)) + 1j * rng.normal(size=(dr, din))
    return _normalize(out)


def maximize(
    objective: Objective,
    dr: int,
    din: int,
    cfg: OptimizerConfig | None = None,
    init_states: Optional[Sequence[np.ndarray]] = None,
) -> DivergenceResult:
    """Maximize ``objective`` over unit vectors ``X`` in ``C^{dR x din}``.

    Starts are: any ``init_states`` (warm starts), the maximally entangled
    state when ``dR == din`` and the configuration asks for it, then
    ``cfg.restarts`` Haar-random states.
    """
    cfg = cfg or OptimizerConfig()
    starts = []
    for s in init_states or ():
        starts.append(np.asarray(s, dtype=complex).reshape(dr, din))
    if cfg.include_maximally_entangled and dr == din:
        starts.append(np.eye(din, dtype=complex) / np.sqrt(din))
    x = np.concatenate([np.array(starts).reshape(-1, dr, din), random_starts(cfg.restarts, dr, din, cfg.seed)])
    x = _normalize(x)
    nb = x.shape[0]

    def evaluate(xs, need_grad=True):
        vals, grads = objective(xs)
        vals = np.asarray(vals, dtype=float)
        if need_grad and grads is None:
            grads = fd_gradient(objective, xs, cfg.fd_step)
        return vals, grads

    f, g = evaluate(x)
    if np.any(np.isposinf(f)):
        k = int(np.argmax(np.isposinf(f)))
        return DivergenceResult(float("inf"), x[k].reshape(-1), True, [float(v) for v in f], 0, 0.0)
    f = np.where(np.isnan(f), -np.inf, f)

    def riemannian(xs, gs):
        return gs - _inner(xs, gs)[:, None, None] * xs

    rg = riemannian(x, g)
    gnorm = np.sqrt(_inner(rg, rg))
    step = np.full(nb, cfg.initial_step)
    active = gnorm > cfg.grad_tol
    prev_x = prev_rg = None
    history = [f.copy()]
    it = 0
    for it in range(1, cfg.max_iters + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        if prev_x is not None:
            s = x[idx] - prev_x[idx]
            y = rg[idx] - prev_rg[idx]
            sy = np.abs(_inner(s, y))
            ss = _inner(s, s)
            with np.errstate(divide="ignore", invalid="ignore"):
                bb = np.where(sy > 1e-300, ss / sy, step[idx])
            step[idx] = np.clip(bb, 1e-8, 1e4)
        prev_x, prev_rg = x.copy(), rg.copy()

        t = step[idx].copy()
        xa, fa, da = x[idx], f[idx], rg[idx]
        slope = _inner(da, da)
        pending = np.ones(idx.size, dtype=bool)
        new_x = xa.copy()
        new_f = fa.copy()
        # a ladder of trial lengths t, t b, t b^2, ... is evaluated in one batched call
        rungs = min(LADDER, cfg.max_backtracks)
        shrink = cfg.backtrack ** np.arange(rungs)
        for _ in range(-(-cfg.max_backtracks // rungs)):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            tl = t[p, None] * shrink[None, :]
            trial = xa[p, None] + tl[..., None, None] * da[p, None]
            trial = _normalize(trial.reshape(-1, dr, din)).reshape(p.size, rungs, dr, din)
            ft, _ = objective(trial.reshape(-1, dr, din))
            ft = np.asarray(ft, dtype=float).reshape(p.size, rungs)
            ft = np.where(np.isnan(ft), -np.inf, ft)
            ok = ft >= fa[p, None] + cfg.armijo * tl * slope[p, None]
            any_ok = ok.any(axis=1)
            first = np.argmax(ok, axis=1)
            hit = p[any_ok]
            rows = np.flatnonzero(any_ok)
            new_x[hit] = trial[rows, first[any_ok]]
            new_f[hit] = ft[rows, first[any_ok]]
            t[hit] = tl[rows, first[any_ok]]
            pending[hit] = False
            t[p[~any_ok]] *= cfg.backtrack**rungs
        moved = ~pending
        step[idx] = t
        x[idx[moved]] = new_x[moved]
        f[idx[moved]] = new_f[moved]
        _, g_new = evaluate(x[idx])
        rg[idx] = riemannian(x[idx], g_new)
        gnorm[idx] = np.sqrt(_inner(rg[idx], rg[idx]))
        history.append(f.copy())
        done = gnorm[idx] <= cfg.grad_tol
        done |= pending  # no ascent step found: numerically stationary
        if len(history) > cfg.stall_iters:
            old = history[-cfg.stall_iters - 1][idx]
            done |= (f[idx] - old) <= cfg.stall_tol * (1 + np.abs(f[idx]))
        active[idx[done]] = False

    best = int(np.argmax(f))
    return DivergenceResult(
        value=float(f[best]),
        argmax_state=x[best].reshape(-1).copy(),
        converged=bool(gnorm[best] <= max(cfg.grad_tol, 1e-6)),
        restart_values=[float(v) for v in f],
        iterations=it,
        grad_norm=float(gnorm[best]),
    )


def minimize(objective: Objective, dr: int, din: int, cfg=None, init_states=None) -> DivergenceResult:
    """Minimize by maximizing the negated objective; the returned value is the minimum."""

    def neg(xs):
        v, g = objective(xs)
        return -np.asarray(v), (None if g is None else -g)

    res = maximize(neg, dr, din, cfg, init_states)
    res.value = -res.value
    res.restart_values = [-v for v in res.restart_values]
    return res
