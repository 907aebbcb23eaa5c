"""Concrete semidefinite programs: max free energy, hypothesis testing, diamond norm, smoothing."""

from __future__ import annotations

import numpy as np

from ..channels import Channel
from ..errors import DomainError, ShapeError, SolverError
from ..quantum import ThermalContext
from .core import Affine, Builder, SDPSolution, block_matrix, solve


def _require(sol: SDPSolution, what: str) -> SDPSolution:
    if sol.status != "optimal":
        raise SolverError(
            f"{what}: solver ended with status {sol.status} (gap {sol.duality_gap:.2e})",
            status=sol.status,
            duality_gap=sol.duality_gap,
        )
    return sol


def _thermal_choi(n: Channel, ctx: ThermalContext) -> np.ndarray:
    if ctx.dim != n.dout:
        raise ShapeError(f"thermal context of dimension {ctx.dim} does not match channel output {n.dout}")
    return np.kron(np.eye(n.din) / n.din, ctx.gibbs_state)


def max_free_energy_sdp(n: Channel, ctx: ThermalContext, tol: float = 1e-8) -> SDPSolution:
    """``minimize lam`` subject to ``Phi^N <= lam (pi (x) gamma)``.

    ``ln(primal_value)`` is the max-divergence of ``N`` from the thermal
    channel.  The solver's dual value is the optimum of
    ``maximize tr(Phi^N X)`` subject to ``tr((pi (x) gamma) X) = 1, X >= 0``.
    """
    b = Builder()
    lam = b.scalar()
    b.psd(lam.kron_right(_thermal_choi(n, ctx)) - n.choi, "lam*sigma - choi")
    b.minimize(lam)
    return solve(b.problem(), tol)


def max_free_energy_dual_sdp(n: Channel, ctx: ThermalContext, tol: float = 1e-8) -> SDPSolution:
    """The dual program stated on its own: ``maximize tr(Phi^N X)``, ``tr(sigma X) <= 1``, ``X >= 0``."""
    sigma = _thermal_choi(n, ctx)
    b = Builder()
    x = b.hermitian(n.din * n.dout)
    b.psd(x, "X")
    b.nonneg(1.0 - x.left(sigma).trace(), "normalization")
    b.maximize(x.left(n.choi).trace())
    return solve(b.problem(), tol)


def hypothesis_testing_sdp(rho, sigma, eps: float, tol: float = 1e-8) -> SDPSolution:
    """``minimize tr(L sigma)`` over ``0 <= L <= 1`` with ``tr(L rho) >= 1 - eps``.

    ``-ln(primal_value)`` is the hypothesis-testing divergence.
    """
    eps = float(eps)
    if not 0 <= eps <= 1:
        raise DomainError(f"eps must lie in [0, 1], got {eps!r}")
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    d = rho.shape[0]
    if eps == 0:
        return _hypothesis_testing_face(rho, sigma, tol)
    b = Builder()
    lam = b.hermitian(d)
    b.psd(lam, "L >= 0")
    b.psd(np.eye(d) - lam, "L <= 1")
    b.nonneg(lam.left(rho).trace() - (1.0 - eps), "type-I")
    b.minimize(lam.left(sigma).trace())
    sol = solve(b.problem(), tol)
    sol.extras["test"] = lam.value(sol.variables) if sol.status == "optimal" else None
    return sol


def _hypothesis_testing_face(rho, sigma, tol: float) -> SDPSolution:
    # eps = 0 forces L = 1 on supp rho, so the feasible set has no interior;
    # pose the program on that face, L = P + K L' K^dag with K spanning ker rho
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    on = w > 1e-10 * max(w[-1], 0.0)
    proj = v[:, on] @ v[:, on].conj().T
    ker = v[:, ~on]
    base = float(np.real(np.trace(proj @ sigma)))
    k = ker.shape[1]
    if k == 0:
        return SDPSolution(base, base, np.zeros(0), 0.0, "optimal", extras={"test": proj})
    b = Builder()
    inner = b.hermitian(k)
    b.psd(inner, "L' >= 0")
    b.psd(np.eye(k) - inner, "L' <= 1")
    lam = inner.left(ker).right(ker.conj().T) + proj
    b.minimize(lam.left(sigma).trace())
    sol = solve(b.problem(), tol)
    sol.extras["test"] = lam.value(sol.variables) if sol.status == "optimal" else None
    return sol


def hypothesis_testing_dual_sdp(rho, sigma, eps: float, tol: float = 1e-8) -> SDPSolution:
    """``maximize mu (1 - eps) - tr Y`` subject to ``sigma - mu rho + Y >= 0``, ``Y >= 0``, ``mu >= 0``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    b = Builder()
    mu = b.scalar()
    y = b.hermitian(rho.shape[0])
    b.psd(y, "Y >= 0")
    b.nonneg(mu, "mu >= 0")
    b.psd(sigma - mu.kron_right(rho) + y, "sigma - mu rho + Y >= 0")
    b.maximize(mu * (1.0 - float(eps)) - y.trace())
    return solve(b.problem(), tol)


def channel_hypothesis_testing_sdp(n: Channel, m: Channel, eps: float, tol: float = 1e-8) -> SDPSolution:
    """Optimal input and test jointly: ``minimize tr(Q Gamma^M)`` over ``0 <= Q <= omega (x) 1``,
    ``tr(Q Gamma^N) >= 1 - eps``, ``tr omega = 1``.

    With ``X = sqrt(omega)`` the input is ``vec(X)`` and the test is
    ``(X^+ (x) 1) Q (X^+ (x) 1)``; ``-ln(primal_value)`` is the channel divergence.
    Requires ``eps > 0`` (at zero the feasible set has no interior; use the dual).
    """
    eps = float(eps)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    if (n.din, n.dout) != (m.din, m.dout):
        raise ShapeError("channels have different dimensions")
    din, dout = n.din, n.dout
    b = Builder()
    q = b.hermitian(din * dout)
    om = b.hermitian(din)
    b.psd(q, "Q >= 0")
    b.psd(om.kron_right(np.eye(dout)) - q, "Q <= omega x 1")
    b.nonneg(q.left(n.gamma).trace() - (1.0 - eps), "type-I")
    b.equal(om.trace(), 1.0)
    b.minimize(q.left(m.gamma).trace())
    sol = solve(b.problem(), tol)
    if sol.status == "optimal":
        omega = om.value(sol.variables)
        qv = q.value(sol.variables)
        w, v = np.linalg.eigh(0.5 * (omega + omega.conj().T))
        w = np.clip(w, 0, None)
        x = (v * np.sqrt(w)) @ v.conj().T
        keep = w > 1e-12 * max(w.max(), 1e-300)
        xp = (v * np.where(keep, 1 / np.sqrt(np.where(keep, w, 1)), 0)) @ v.conj().T
        big = np.kron(xp, np.eye(dout))
        sol.extras["input_state"] = x.reshape(-1) / np.linalg.norm(x)
        sol.extras["test"] = big @ qv @ big
    return sol


def channel_hypothesis_testing_dual_sdp(n: Channel, m: Channel, eps: float, tol: float = 1e-8) -> SDPSolution:
    """``maximize mu (1 - eps) - s`` over ``Y >= 0``, ``mu >= 0`` with
    ``Gamma^M + Y - mu Gamma^N >= 0`` and ``tr_A Y <= s 1``."""
    eps = float(eps)
    if not 0 <= eps < 1:
        raise DomainError(f"eps must lie in [0, 1), got {eps!r}")
    if (n.din, n.dout) != (m.din, m.dout):
        raise ShapeError("channels have different dimensions")
    din, dout = n.din, n.dout
    b = Builder()
    mu = b.scalar()
    sc = b.scalar()
    y = b.hermitian(din * dout)
    b.psd(y, "Y >= 0")
    b.nonneg(mu, "mu >= 0")
    b.psd(m.gamma + y - mu.kron_right(n.gamma), "Gamma^M + Y - mu Gamma^N >= 0")
    b.psd(sc.kron_right(np.eye(din)) - y.ptrace_right(din, dout), "tr_A Y <= s")
    b.maximize(mu * (1.0 - eps) - sc)
    return solve(b.problem(), tol)


def diamond_norm_choi(j, din: int, dout: int, tol: float = 1e-8) -> SDPSolution:
    """Diamond norm of the Hermiticity-preserving map with unnormalized Choi operator ``j``.

    ``maximize tr(J W)`` subject to ``-rho (x) 1 <= W <= rho (x) 1``, ``tr rho = 1``.
    """
    j = np.asarray(j, dtype=complex)
    if j.shape != (din * dout, din * dout):
        raise ShapeError("Choi operator does not match the declared dimensions")
    b = Builder()
    w = b.hermitian(din * dout)
    rho = b.hermitian(din)
    big = rho.kron_right(np.eye(dout))
    b.psd(big - w, "W <= rho x 1")
    b.psd(big + w, "W >= -rho x 1")
    b.psd(rho, "rho >= 0")
    b.equal(rho.trace(), 1.0)
    b.maximize(w.left(j).trace())
    sol = solve(b.problem(), tol)
    if sol.status == "optimal":
        sol.extras["input_state"] = rho.value(sol.variables)
    return sol


def diamond_norm(n: Channel, m: Channel, tol: float = 1e-8) -> float:
    """``||N - M||_diamond`` (the full norm; the distinguishing advantage is half of it)."""
    if (n.din, n.dout) != (m.din, m.dout):
        raise ShapeError("channels have different dimensions")
    sol = _require(diamond_norm_choi(n.gamma - m.gamma, n.din, n.dout, tol), "diamond norm")
    return max(0.0, sol.primal_value)


def gibbs_preserving_channel_sdp(ctx: ThermalContext, weight, tol: float = 1e-8) -> SDPSolution:
    """``maximize tr(Gamma W)`` over Choi operators of channels ``C`` on ``A`` with ``C(gamma) = gamma``.

    A random Hermitian ``weight`` picks out a random boundary point of the set of
    Gibbs-preserving channels.  ``extras["channel"]`` holds the repaired channel.
    """
    d = ctx.dim
    weight = np.asarray(weight, dtype=complex)
    if weight.shape != (d * d, d * d):
        raise ShapeError("weight must act on A (x) A")
    gamma = ctx.gibbs_state
    b = Builder()
    j = b.hermitian(d * d)
    b.psd(j, "Gamma >= 0")
    b.equal(j.ptrace_right(d, d), np.eye(d))
    # the last diagonal entry follows from trace preservation
    b.equal(j.left(np.kron(gamma.T, np.eye(d))).ptrace_left(d, d).herm_part(), gamma, skip={(d - 1, d - 1)})
    b.maximize(j.left(weight).trace().herm_part())
    sol = solve(b.problem(), tol)
    if sol.status == "optimal":
        sol.extras["channel"] = _repair_choi(j.value(sol.variables), d, d)
    return sol


def _repair_choi(gamma_op: np.ndarray, din: int, dout: int) -> Channel:
    """Clip negative eigenvalues and restore trace preservation exactly."""
    from ..channels import from_choi

    g = 0.5 * (gamma_op + gamma_op.conj().T)
    w, v = np.linalg.eigh(g)
    g = (v * np.clip(w, 0, None)) @ v.conj().T
    t = np.einsum("iaja->ij", g.reshape(din, dout, din, dout))
    wt, vt = np.linalg.eigh(0.5 * (t + t.conj().T))
    fix = np.kron((vt / np.sqrt(wt)) @ vt.conj().T, np.eye(dout))
    g = fix @ g @ fix
    return from_choi(0.5 * (g + g.conj().T) / din, din, dout)


def smoothed_channel_max_div_sdp(
    n: Channel, ctx: ThermalContext, eps: float, mode: str = "diamond", tol: float = 1e-8
) -> SDPSolution:
    """Jointly optimize a channel ``E`` near ``N`` and ``lam`` with ``Phi^E <= lam (pi (x) gamma)``.

    ``mode="diamond"``: ``(1/2)||N - E||_diamond <= eps`` through the slack ``Z >= 0``,
    ``Z >= Gamma^N - Gamma^E``, ``tr_A Z <= eps 1``.
    ``mode="purified"``: the channel root fidelity is at least ``sqrt(1 - eps^2)``,
    certified by ``Q`` with ``[[Gamma^N, Q], [Q^dag, Gamma^E]] >= 0`` and
    ``Re tr_A Q >= sqrt(1 - eps^2) 1``.
    """
    eps = float(eps)
    if not 0 <= eps < 1:
        raise DomainError(f"eps must lie in [0, 1), got {eps!r}")
    din, dout = n.din, n.dout
    d = din * dout
    gamma_t = np.kron(np.eye(din), ctx.gibbs_state)
    if ctx.dim != dout:
        raise ShapeError("thermal context does not match the channel output")
    if eps == 0:
        # the ball collapses to E = N and the slack block has no interior
        sol = max_free_energy_sdp(n, ctx, tol)
        sol.extras["choi"] = n.choi.copy()
        return sol
    b = Builder()
    lam = b.scalar()
    ge = b.hermitian(d)
    b.psd(ge, "Gamma^E >= 0")
    b.equal(ge.ptrace_right(din, dout), np.eye(din))
    b.psd(lam.kron_right(gamma_t) - ge, "Gamma^E <= lam Gamma^T")
    if mode == "diamond":
        z = b.hermitian(d)
        b.psd(z, "Z >= 0")
        b.psd(z - (n.gamma - ge), "Z >= J")
        b.psd(eps * np.eye(din) - z.ptrace_right(din, dout), "tr_A Z <= eps")
    elif mode == "purified":
        q = b.general(d, d)
        b.psd(block_matrix([[Affine(n.gamma), q], [q.dag(), ge]]), "fidelity block")
        root = np.sqrt(1.0 - eps**2)
        b.psd(q.ptrace_right(din, dout).herm_part() - root * np.eye(din), "Re tr_A Q >= sqrt(1-eps^2)")
    else:
        raise DomainError(f"unknown smoothing mode {mode!r}")
    b.minimize(lam)
    sol = solve(b.problem(), tol)
    if sol.status == "optimal":
        sol.extras["choi"] = ge.value(sol.variables) / din
    return sol


def smoothed_channel_max_div(n: Channel, ctx: ThermalContext, eps: float, mode: str = "diamond") -> float:
    """Smoothed max-divergence of ``N`` from the thermal channel (natural log)."""
    sol = _require(smoothed_channel_max_div_sdp(n, ctx, eps, mode), "smoothed channel max-divergence")
    return float(np.log(sol.primal_value))


def smoothed_max_state_sdp(rho, sigma, eps: float, tol: float = 1e-8) -> SDPSolution:
    """``minimize lam`` over subnormalized ``omega <= lam sigma`` within purified distance ``eps`` of ``rho``.

    The ball is encoded by ``[[rho, X], [X^dag, omega]] >= 0`` and ``Re tr X >= sqrt(1 - eps^2)``.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    d = rho.shape[0]
    b = Builder()
    lam = b.scalar()
    om = b.hermitian(d)
    x = b.general(d, d)
    b.psd(om, "omega >= 0")
    b.nonneg(1.0 - om.trace(), "tr omega <= 1")
    b.psd(lam.kron_right(sigma) - om, "omega <= lam sigma")
    b.psd(block_matrix([[Affine(rho), x], [x.dag(), om]]), "fidelity block")
    b.nonneg(x.trace().herm_part() - np.sqrt(1.0 - eps**2), "Re tr X")
    b.minimize(lam)
    sol = solve(b.problem(), tol)
    if sol.status == "optimal":
        sol.extras["omega"] = om.value(sol.variables)
    return sol
