"""State divergences: Umegaki, sandwiched Renyi, max, hypothesis testing, fidelity and smoothing.

Public functions take single matrices.  The ``*_grad`` kernels work on stacks
of matrices (leading batch axes) and also return the Hermitian derivatives
``G_rho = dD/drho`` and ``G_sigma = dD/dsigma`` in the sense
``dD = Re tr(G_rho drho) + Re tr(G_sigma dsigma)``.  The channel optimizer
is built on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError, SolverError
from .quantum import density_operator, psd

SUPPORT_RTOL = linalg.SUPPORT_RTOL
#: Weight of ``rho`` outside ``supp(sigma)`` above which a divergence is reported infinite.
LEAK_TOL = 1e-12
NP_TARGET_TOL = 1e-12


@dataclass(frozen=True)
class DivergenceKind:
    """Which divergence: ``umegaki``, ``renyi`` (with ``alpha``), ``max``, ``hypothesis`` or
    ``smoothed_max`` (with ``eps``)."""

    tag: str
    alpha: float | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.tag not in ("umegaki", "renyi", "max", "hypothesis", "smoothed_max"):
            raise DomainError(f"unknown divergence kind {self.tag!r}")
        if self.tag == "renyi":
            a = self.alpha
            if a is None or not a >= 0.5 or a == 1 or np.isnan(a):
                raise DomainError(f"Renyi order must lie in [1/2, 1) or (1, inf], got {a!r}")
        if self.tag in ("hypothesis", "smoothed_max"):
            e = self.eps
            if e is None or not 0 <= e <= 1:
                raise DomainError(f"eps must lie in [0, 1], got {e!r}")

    @classmethod
    def umegaki(cls) -> "DivergenceKind":
        return cls("umegaki")

    @classmethod
    def renyi(cls, alpha: float) -> "DivergenceKind":
        alpha = float(alpha)
        if alpha == 1:
            return cls("umegaki")
        if np.isinf(alpha):
            return cls("max")
        return cls("renyi", alpha=alpha)

    @classmethod
    def max(cls) -> "DivergenceKind":
        return cls("max")

    @classmethod
    def hypothesis(cls, eps: float) -> "DivergenceKind":
        return cls("hypothesis", eps=float(eps))

    @classmethod
    def smoothed_max(cls, eps: float) -> "DivergenceKind":
        return cls("smoothed_max", eps=float(eps))

    def __str__(self) -> str:
        if self.tag == "renyi":
            return f"renyi({self.alpha:g})"
        if self.eps is not None:
            return f"{self.tag}({self.eps:g})"
        return self.tag


# --- batched spectral helpers ----------------------------------------------


def _eigh(m):
    w, v = np.linalg.eigh(0.5 * (m + np.conj(np.swapaxes(m, -1, -2))))
    return w, v


def _herm(x):
    return 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))


def _rebuild(v, w):
    return _herm((v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2)))


def _support(w):
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    return w > SUPPORT_RTOL * scale


def _safe(fn, w, keep, fill=0.0):
    with np.errstate(all="ignore"):
        out = fn(np.where(keep, w, 1.0))
    return np.where(keep, out, fill)


def _divided_difference(w, keep, f, df):
    """Loewner matrix ``(f(w_i) - f(w_j)) / (w_i - w_j)`` restricted to the support."""
    wi = w[..., :, None]
    wj = w[..., None, :]
    fw = _safe(f, w, keep)
    num = fw[..., :, None] - fw[..., None, :]
    den = wi - wj
    scale = np.max(np.abs(w), axis=-1, keepdims=True)[..., None]
    close = np.abs(den) <= 1e-9 * scale
    with np.errstate(all="ignore"):
        mid = 0.5 * (wi + wj)
        deriv = df(np.where(mid > 0, mid, 1.0))
        out = np.where(close, deriv, num / np.where(close, 1.0, den))
    both = keep[..., :, None] & keep[..., None, :]
    return np.where(both, out, 0.0)


def _frechet(v, loewner, e):
    # D f[sigma](e) in the eigenbasis v of sigma
    vh = np.conj(np.swapaxes(v, -1, -2))
    return _herm(v @ (loewner * (vh @ e @ v)) @ vh)


def _leak(rho, w_s, v_s):
    """Weight of ``rho`` on the kernel of ``sigma``."""
    off = ~_support(w_s)
    proj = v_s * off[..., None, :]
    return np.real(np.einsum("...ik,...ij,...jk->...", np.conj(proj), rho, proj))


# --- Umegaki -------------------------------------------------------------------


def umegaki_grad(rho, sigma, leak_tol: float = LEAK_TOL):
    """Relative entropy with derivatives; ``+inf`` where ``rho`` leaks more than ``leak_tol`` off ``supp(sigma)``."""
    wr, vr = _eigh(rho)
    ws, vs = _eigh(sigma)
    kr, ks = _support(wr), _support(ws)
    log_r = _safe(np.log, wr, kr)
    log_s = _safe(np.log, ws, ks)
    ln_sigma = _rebuild(vs, log_s)
    neg_s = np.sum(np.where(kr, wr * log_r, 0.0), axis=-1)
    cross = np.real(np.einsum("...ij,...ji->...", rho, ln_sigma))
    value = neg_s - cross
    g_rho = _rebuild(vr, np.where(kr, log_r + 1.0, 0.0)) - ln_sigma
    loew = _divided_difference(ws, ks, np.log, lambda x: 1.0 / x)
    g_sigma = -_frechet(vs, loew, rho)
    value = np.where(_leak(rho, ws, vs) > leak_tol, np.inf, value)
    return value, g_rho, g_sigma


# --- sandwiched Renyi ----------------------------------------------------------


def renyi_grad(rho, sigma, alpha: float, leak_tol: float = LEAK_TOL):
    """Sandwiched Renyi divergence of order ``alpha`` with derivatives."""
    s = (1.0 - alpha) / (2.0 * alpha)
    ws, vs = _eigh(sigma)
    ks = _support(ws)
    sig_s = _rebuild(vs, _safe(lambda x: x**s, ws, ks))
    m = _herm(sig_s @ rho @ sig_s)
    wm, vm = _eigh(m)
    km = _support(wm)
    q = np.sum(_safe(lambda x: x**alpha, wm, km), axis=-1)
    m_pow = _rebuild(vm, _safe(lambda x: x ** (alpha - 1.0), wm, km))
    gq_rho = alpha * _herm(sig_s @ m_pow @ sig_s)
    b = rho @ sig_s @ m_pow
    b = b + np.conj(np.swapaxes(b, -1, -2))
    loew = _divided_difference(ws, ks, lambda x: x**s, lambda x: s * x ** (s - 1.0))
    gq_sigma = alpha * _frechet(vs, loew, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.log(q) / (alpha - 1.0)
        scale = 1.0 / ((alpha - 1.0) * q)
        g_rho = gq_rho * scale[..., None, None]
        g_sigma = gq_sigma * scale[..., None, None]
    if alpha > 1:
        value = np.where(_leak(rho, ws, vs) > leak_tol, np.inf, value)
    value = np.where(q > 0, value, np.inf)
    return value, g_rho, g_sigma


# --- hypothesis testing --------------------------------------------------------


def neyman_pearson(rho, sigma, eps: float, iters: int = 200):
    """Optimal tests for ``min tr(L sigma)`` subject to ``tr(L rho) >= 1 - eps``.

    Works on stacks.  Returns ``(p, test, t)`` with ``p`` the minimal type-II
    weight and ``t`` the threshold of ``L = P_+(rho - t sigma)`` (plus a fractional
    boundary part); ``p = 0`` flags an infinite divergence.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    batch = rho.shape[:-2]
    target = 1.0 - eps
    tr_rho = np.real(np.trace(rho, axis1=-2, axis2=-1))
    ws, vs = _eigh(sigma)
    leak = _leak(rho, ws, vs)

    if eps == 0:
        wr, vr = _eigh(rho)
        lam = _rebuild(vr, _support(wr).astype(float))
        p = np.real(np.einsum("...ij,...ji->...", lam, sigma))
        return p, lam, np.zeros(batch)

    def weights(t, r=rho, s=sigma):
        return _eigh(r - t[..., None, None] * s)

    def mass(t, r=rho, s=sigma):
        w, v = weights(t, r, s)
        diag = np.real(np.sum(np.conj(v) * (r @ v), axis=-2))
        return np.sum(np.where(w > 0, diag, 0.0), axis=-1)

    infinite = leak >= target * tr_rho - NP_TARGET_TOL
    lo = np.zeros(batch)
    hi = np.ones(batch)
    jump = np.full(batch, np.nan)
    # mass(t) jumps where an eigenvalue of rho - t sigma crosses zero, i.e. at the
    # generalized eigenvalues; with sigma invertible these give the bracket directly
    full = np.all(_support(ws), axis=-1) & ~infinite
    if full.any():
        inv_sqrt = _rebuild(vs, _safe(lambda x: x**-0.5, ws, _support(ws)))
        gen = np.linalg.eigvalsh(_herm(inv_sqrt @ rho @ inv_sqrt))
        gen = np.clip(gen, 0.0, None)
        delta = 1e-9
        cand = np.concatenate([gen * (1 - delta), gen * (1 + delta)], axis=-1)
        cand = np.maximum(cand, 1e-300)
        m_c = mass(cand, rho[..., None, :, :], sigma[..., None, :, :])
        ok = m_c >= target
        lo_c = np.max(np.where(ok, cand, 0.0), axis=-1)
        hi_c = np.min(np.where(ok, np.inf, cand), axis=-1)
        hi_c = np.where(np.isfinite(hi_c), hi_c, 2 * np.max(cand, axis=-1) + 1.0)
        lo = np.where(full, lo_c, lo)
        hi = np.where(full, hi_c, hi)
        straddle = full & (lo_c > 0) & (hi_c <= lo_c * (1 + delta) / (1 - delta) * (1 + 1e-12))
        jump = np.where(straddle, 0.5 * (lo_c + hi_c), jump)
    m_lo = mass(lo)
    m_hi = mass(hi)
    for _ in range(1100):
        low = (m_hi >= target) & ~infinite & ~full
        if not low.any():
            break
        lo = np.where(low, hi, lo)
        m_lo = np.where(low, m_hi, m_lo)
        hi = np.where(low, 2 * hi, hi)
        m_hi = mass(hi)
    # bracketed false position (Illinois); brackets that may still hide a jump
    # (singular sigma) also take a bisection step every third round;
    # invariant: mass(lo) >= target > mass(hi)
    side = np.zeros(batch)
    for k in range(iters):
        width = hi - lo
        done = (width <= 1e-15 * np.maximum(hi, 1e-300)) | infinite | ~np.isnan(jump)
        if np.all(done):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            secant = hi - (m_hi - target) * width / (m_hi - m_lo)
        ok_secant = np.isfinite(secant) & (secant > lo) & (secant < hi)
        mid = 0.5 * (lo + hi)
        bisect = ~ok_secant | (~full & (k % 3 == 2))
        t = np.where(bisect, mid, secant)
        t = np.where(done, lo, t)
        m_t = mass(t)
        above = m_t >= target
        exact = np.abs(m_t - target) <= NP_TARGET_TOL * 1e-2
        lo_new = np.where(above, t, lo)
        hi_new = np.where(above, hi, t)
        ml_new = np.where(above, m_t, m_lo)
        mh_new = np.where(above, m_hi, m_t)
        # Illinois: halve the weight of an endpoint retained twice in a row
        mh_new = np.where(above & (side > 0), target + 0.5 * (mh_new - target), mh_new)
        ml_new = np.where(~above & (side < 0), target + 0.5 * (ml_new - target), ml_new)
        side = np.where(above, 1.0, -1.0)
        lo_new = np.where(exact, t, lo_new)
        hi_new = np.where(exact, t, hi_new)
        lo = np.where(done, lo, lo_new)
        hi = np.where(done, hi, hi_new)
        m_lo = np.where(done, m_lo, ml_new)
        m_hi = np.where(done, m_hi, mh_new)

    lo = np.where(np.isnan(jump), lo, jump)
    w, v = weights(lo)
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    diag = np.real(np.einsum("...ki,...kl,...li->...i", np.conj(v), rho, v))
    # at a jump rho - t sigma may vanish on a whole eigenspace, so the cut is
    # measured against the size of rho and t sigma rather than of their difference
    tr_sigma = np.real(np.trace(sigma, axis1=-2, axis2=-1))
    scale = (np.abs(tr_rho) + np.abs(lo) * np.abs(tr_sigma))[..., None]
    eligible = w > -1e-10 * scale
    d = np.where(eligible, np.clip(diag, 0, None), 0.0)
    before = np.cumsum(d, axis=-1) - d
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(d > 0, (target - before) / d, (before < target).astype(float))
    frac = np.where(eligible, np.clip(frac, 0.0, 1.0), 0.0)
    lam = _rebuild(v, frac)
    p = np.real(np.einsum("...ij,...ji->...", lam, sigma))

    if infinite.any():
        kproj = _rebuild(vs, (~_support(ws)).astype(float))
        scale = np.where(leak > 0, target / np.where(leak > 0, leak, 1.0), 0.0)
        lam = np.where(infinite[..., None, None], kproj * scale[..., None, None], lam)
        p = np.where(infinite, 0.0, p)
    return p, lam, lo


def hypothesis_grad(rho, sigma, eps: float):
    """``D_H^eps`` with envelope derivatives from the optimal test."""
    p, lam, t = neyman_pearson(rho, sigma, eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(p > 0, -np.log(np.where(p > 0, p, 1.0)), np.inf)
        inv_p = np.where(p > 0, 1.0 / p, 0.0)
        nu = np.where(t > 0, 1.0 / np.where(t > 0, t, 1.0), 0.0)
    g_rho = lam * (nu * inv_p)[..., None, None]
    g_sigma = -lam * inv_p[..., None, None]
    return value, g_rho, g_sigma


# --- public single-matrix API -------------------------------------------------


def _second(sigma, allow_unnormalized: bool) -> np.ndarray:
    s = psd(sigma)
    if not allow_unnormalized:
        tr = float(np.real(np.trace(s)))
        if abs(tr - 1) > 1e-10:
            raise DomainError(
                f"second argument has trace {tr!r}; pass allow_unnormalized=True for non-states"
            )
    return s


def _first(rho) -> np.ndarray:
    return density_operator(rho)


def rel_entropy(rho, sigma, allow_unnormalized: bool = False) -> float:
    """Umegaki relative entropy ``tr rho (ln rho - ln sigma)``; ``+inf`` off support."""
    r, s = _first(rho), _second(sigma, allow_unnormalized)
    if r.shape != s.shape:
        raise DomainError("arguments have different dimensions")
    return float(umegaki_grad(r, s)[0])


def max_rel_entropy(rho, sigma, allow_unnormalized: bool = False) -> float:
    """``ln || sigma^{-1/2} rho sigma^{-1/2} ||_inf`` with support-restricted inverse.

    ``rho`` may be subnormalized.
    """
    r = psd(rho)
    s = _second(sigma, allow_unnormalized)
    ws, vs = _eigh(s)
    if _leak(r, ws, vs) > LEAK_TOL:
        return float("inf")
    inv_sqrt = _rebuild(vs, _safe(lambda x: x**-0.5, ws, _support(ws)))
    top = np.linalg.eigvalsh(_herm(inv_sqrt @ r @ inv_sqrt))[-1]
    return float(np.log(top)) if top > 0 else float("-inf")


def sandwiched_renyi(rho, sigma, alpha: float, allow_unnormalized: bool = False) -> float:
    alpha = float(alpha)
    if np.isinf(alpha) and alpha > 0:
        return max_rel_entropy(rho, sigma, allow_unnormalized)
    if not alpha >= 0.5:
        raise DomainError(f"Renyi order must be at least 1/2, got {alpha!r}")
    if alpha == 1:
        return rel_entropy(rho, sigma, allow_unnormalized)
    r, s = _first(rho), _second(sigma, allow_unnormalized)
    return float(renyi_grad(r, s, alpha)[0])


def hypothesis_testing(rho, sigma, eps: float, allow_unnormalized: bool = False) -> tuple[float, np.ndarray]:
    """Hypothesis-testing divergence and an optimal Neyman-Pearson test.

    The test ``L`` satisfies ``tr(L rho) = 1 - eps`` and the value is ``-ln tr(L sigma)``.
    """
    eps = float(eps)
    if not 0 <= eps <= 1:
        raise DomainError(f"eps must lie in [0, 1], got {eps!r}")
    r, s = _first(rho), _second(sigma, allow_unnormalized)
    if eps == 1:
        return float("inf"), np.zeros_like(r)
    p, lam, _ = neyman_pearson(r, s, eps)
    value = float("inf") if p <= 0 else float(-np.log(p))
    return value, lam


def fidelity(rho, sigma) -> float:
    """``|| sqrt(rho) sqrt(sigma) ||_1^2``."""
    r, s = psd(rho), psd(sigma)
    return float(min(1.0, linalg.trace_norm(linalg.sqrtm_psd(r) @ linalg.sqrtm_psd(s)) ** 2))


def generalized_fidelity(rho, sigma) -> float:
    """Fidelity extended to subnormalized arguments."""
    r, s = psd(rho), psd(sigma)
    f = linalg.trace_norm(linalg.sqrtm_psd(r) @ linalg.sqrtm_psd(s))
    tr_r, tr_s = np.real(np.trace(r)), np.real(np.trace(s))
    return float(min(1.0, (f + np.sqrt(max(0.0, (1 - tr_r) * (1 - tr_s)))) ** 2))


def purified_distance(rho, sigma) -> float:
    return float(np.sqrt(max(0.0, 1.0 - generalized_fidelity(rho, sigma))))


def smoothed_max_rel_entropy(rho, sigma, eps: float) -> float:
    """``min D_inf(omega || sigma)`` over subnormalized ``omega`` within purified distance ``eps``.

    Solved as a semidefinite program; ``eps = 0`` reduces to the closed form.
    """
    eps = float(eps)
    if not 0 <= eps < 1:
        raise DomainError(f"eps must lie in [0, 1), got {eps!r}")
    if eps == 0:
        return max_rel_entropy(rho, sigma)
    from .sdp import smoothed_max_state_sdp

    sol = smoothed_max_state_sdp(_first(rho), _second(sigma, False), eps)
    if sol.status != "optimal":
        raise SolverError(
            f"smoothed max-divergence SDP ended with status {sol.status}",
            status=sol.status,
            duality_gap=sol.duality_gap,
        )
    return float(np.log(sol.primal_value))


def divergence(rho, sigma, kind: DivergenceKind, allow_unnormalized: bool = False) -> float:
    """Dispatch on ``kind``."""
    if kind.tag == "umegaki":
        return rel_entropy(rho, sigma, allow_unnormalized)
    if kind.tag == "renyi":
        return sandwiched_renyi(rho, sigma, kind.alpha, allow_unnormalized)
    if kind.tag == "max":
        return max_rel_entropy(rho, sigma, allow_unnormalized)
    if kind.tag == "hypothesis":
        return hypothesis_testing(rho, sigma, kind.eps, allow_unnormalized)[0]
    return smoothed_max_rel_entropy(rho, sigma, kind.eps)
