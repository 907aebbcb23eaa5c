"""Batched objectives on pure inputs ``X`` (shape ``(B, dR, din)``) with Euclidean gradients.

The input state is ``psi = sum_ri X[r, i] |r>|i>``, so ``psi_R = X X^dag`` and
``(id (x) N)(psi) = (X (x) 1) Gamma^N (X (x) 1)^dag``.  For a Hermitian derivative
``G`` of a function of that output, the derivative with respect to ``X`` is
``2 sum G[r,a,s,b] X[s,j] Gamma[j,b,i,a]``.
"""

from __future__ import annotations

import numpy as np

from .. import statediv
from ..channels import Channel
from ..statediv import DivergenceKind


def gamma4(n: Channel) -> np.ndarray:
    return n.gamma.reshape(n.din, n.dout, n.din, n.dout)


def output(g4: np.ndarray, x: np.ndarray) -> np.ndarray:
    b, dr, din = x.shape
    dout = g4.shape[1]
    t = (x.reshape(b * dr, din) @ g4.reshape(din, -1)).reshape(b, dr * dout * din, dout)
    t = np.swapaxes(t.reshape(b, dr * dout, din, dout), 2, 3).reshape(b, dr * dout * dout, din)
    rho = (t @ np.conj(np.swapaxes(x, 1, 2))).reshape(b, dr, dout, dout, dr)
    return np.transpose(rho, (0, 1, 2, 4, 3)).reshape(b, dr * dout, dr * dout)


def pullback(g4: np.ndarray, x: np.ndarray, g: np.ndarray) -> np.ndarray:
    b, dr, din = x.shape
    dout = g4.shape[1]
    g5 = np.transpose(g.reshape(b, dr, dout, dr, dout), (0, 1, 2, 4, 3)).reshape(b, dr * dout * dout, dr)
    u = (g5 @ x).reshape(b, dr, dout, dout, din)  # [b, r, a, c, j]
    u = np.transpose(u, (0, 1, 4, 3, 2)).reshape(b * dr, din * dout * dout)
    k = np.transpose(g4, (0, 1, 3, 2)).reshape(din * dout * dout, din)  # [j, c, a] x i
    return 2.0 * (u @ k).reshape(b, dr, din)


def reduced_input(x: np.ndarray) -> np.ndarray:
    """``psi_R = X X^dag``."""
    return x @ np.conj(np.swapaxes(x, -1, -2))


def marginal_out(rho: np.ndarray, dr: int, dout: int) -> np.ndarray:
    return np.einsum("brarc->bac", rho.reshape(-1, dr, dout, dr, dout))


def entropy_grad(rho: np.ndarray):
    """Von Neumann entropy of a stack with derivative ``-(ln rho + 1)`` on the support."""
    w, v = np.linalg.eigh(rho)
    keep = w > statediv.SUPPORT_RTOL * np.max(np.abs(w), axis=-1, keepdims=True)
    with np.errstate(all="ignore"):
        lw = np.where(keep, np.log(np.where(keep, w, 1.0)), 0.0)
    s = -np.sum(np.where(keep, w * lw, 0.0), axis=-1)
    g = -(v * np.where(keep, lw + 1.0, 0.0)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return s, g


def _kernel(kind: DivergenceKind, leak_tol: float):
    if kind.tag == "umegaki":
        return (lambda r, s: statediv.umegaki_grad(r, s, leak_tol)), True
    if kind.tag == "renyi":
        return (lambda r, s: statediv.renyi_grad(r, s, kind.alpha, leak_tol)), True
    if kind.tag == "hypothesis":
        return (lambda r, s: statediv.hypothesis_grad(r, s, kind.eps)), kind.eps > 0
    raise ValueError(f"no smooth objective for divergence kind {kind}")


def pair_divergence(n: Channel, m: Channel, kind: DivergenceKind, nested: bool = False):
    """``X -> D((id (x) N)(psi) || (id (x) M)(psi))`` for the given kind.

    ``nested=True`` asserts ``supp Phi^N`` lies in ``supp Phi^M``; then no input can
    leave the support and near-singular inputs are not mistaken for infinite values.
    """
    gn, gm = gamma4(n), gamma4(m)
    fn, analytic = _kernel(kind, np.inf if nested else statediv.LEAK_TOL)

    def objective(x):
        rho = output(gn, x)
        sigma = output(gm, x)
        val, g_rho, g_sigma = fn(rho, sigma)
        if not analytic:
            return val, None
        finite = np.isfinite(val)
        g_rho = np.where(finite[:, None, None], g_rho, 0.0)
        g_sigma = np.where(finite[:, None, None], g_sigma, 0.0)
        return val, pullback(gn, x, g_rho) + pullback(gm, x, g_sigma)

    return objective


def entropic(n: Channel, a: float = 0.0, b: float = 0.0, c: float = 0.0, linear=None):
    """``X -> a S(RA) + b S(R) + c S(A) + tr(rho_RA L)`` on the output of ``N``.

    ``linear`` is an operator on ``R (x) A`` (or ``None``).
    """
    g4 = gamma4(n)
    dout = n.dout

    def objective(x):
        bsz, dr, _ = x.shape
        rho = output(g4, x)
        val = np.zeros(bsz)
        g_out = np.zeros_like(rho)
        grad = np.zeros_like(x)
        if a:
            s, g = entropy_grad(rho)
            val += a * s
            g_out += a * g
        if c:
            s, g = entropy_grad(marginal_out(rho, dr, dout))
            val += c * s
            g_out += c * np.einsum("rs,bac->brasc", np.eye(dr), g).reshape(rho.shape)
        if linear is not None:
            lin = np.asarray(linear)
            val += np.real(np.einsum("ij,bji->b", lin, rho))
            g_out += lin
        if b:
            s, g = entropy_grad(reduced_input(x))
            val += b * s
            grad += 2.0 * b * (g @ x)
        grad += pullback(g4, x, g_out)
        return val, grad

    return objective
