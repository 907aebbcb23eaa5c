"""Channel divergences, free energies, entropies, energy and mutual information."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .. import statediv
from ..channels import Channel, replacer_channel, thermal_channel
from ..errors import DomainError, ShapeError
from ..quantum import ThermalContext, maximally_mixed
from ..statediv import DivergenceKind
from . import objectives as obj
from .optimizer import DivergenceResult, OptimizerConfig, maximize, minimize


def _check_pair(n: Channel, m: Channel):
    if (n.din, n.dout) != (m.din, m.dout):
        raise ShapeError(f"channels {n.din}->{n.dout} and {m.din}->{m.dout} do not match")


def _check_ctx(n: Channel, ctx: ThermalContext):
    if ctx.dim != n.dout:
        raise ShapeError(f"thermal context of dimension {ctx.dim} does not fit channel output {n.dout}")


def channel_divergence(
    n: Channel,
    m: Channel,
    kind: DivergenceKind,
    cfg: OptimizerConfig | None = None,
    init_states: Optional[Sequence[np.ndarray]] = None,
) -> DivergenceResult:
    """``sup_psi D((id (x) N)(psi) || (id (x) M)(psi))`` over pure ``psi`` on ``R A'`` with ``|R| = |A'|``.

    The value is the best restart and therefore a lower bound on the supremum.
    Max-type kinds have exact closed forms and are rejected here.
    """
    _check_pair(n, m)
    if kind.tag in ("max", "smoothed_max"):
        raise DomainError(f"{kind} is computed exactly by channel_max_divergence or the SDP module, not by the optimizer")
    nested = False
    if kind.tag == "umegaki" or (kind.tag == "renyi" and kind.alpha > 1):
        # the supremum is infinite exactly when the Choi supports are not nested
        ws, vs = statediv._eigh(m.choi)
        if statediv._leak(n.choi, ws, vs) > statediv.LEAK_TOL:
            phi = np.eye(n.din).reshape(-1) / np.sqrt(n.din)
            return DivergenceResult(float("inf"), phi.astype(complex), True, [float("inf")], 0, 0.0)
        nested = True
    return maximize(obj.pair_divergence(n, m, kind, nested), n.din, n.din, cfg, init_states)


def channel_max_divergence(n: Channel, target: Union[ThermalContext, Channel]) -> float:
    """Max-divergence of ``N`` from a channel (or from the thermal channel of a context), via Choi states."""
    if isinstance(target, ThermalContext):
        _check_ctx(n, target)
        sigma = np.kron(maximally_mixed(n.din), target.gibbs_state)
    else:
        _check_pair(n, target)
        sigma = target.choi
    return statediv.max_rel_entropy(n.choi, sigma)


@dataclass
class FreeEnergyReport:
    """Resource free energy ``F`` and thermal free energy ``F_T = F - ln Z / beta`` of a channel."""

    beta: float
    resource: float
    thermal: float
    kind: DivergenceKind
    diagnostics: dict = field(default_factory=dict)

    @property
    def divergence(self) -> float:
        return self.beta * self.resource


def free_energy(
    n: Channel,
    ctx: ThermalContext,
    kind: DivergenceKind | None = None,
    cfg: OptimizerConfig | None = None,
    init_states=None,
    smoothing: str = "diamond",
) -> FreeEnergyReport:
    """``F = D[N || T] / beta`` for the divergence ``kind`` (Umegaki by default)."""
    _check_ctx(n, ctx)
    kind = kind or DivergenceKind.umegaki()
    diag: dict = {}
    if kind.tag == "max":
        d = channel_max_divergence(n, ctx)
        diag.update(converged=True, exact=True, restarts_used=0)
    elif kind.tag == "smoothed_max":
        from ..sdp import smoothed_channel_max_div

        d = smoothed_channel_max_div(n, ctx, kind.eps, smoothing)
        diag.update(converged=True, exact=True, restarts_used=0, smoothing=smoothing)
    else:
        res = channel_divergence(n, thermal_channel(ctx, n.din), kind, cfg, init_states)
        d = res.value
        diag.update(
            converged=res.converged,
            exact=False,
            restarts_used=res.restarts_used,
            restart_values=res.restart_values,
            argmax_state=res.argmax_state,
            iterations=res.iterations,
            grad_norm=res.grad_norm,
        )
    resource = d / ctx.beta
    return FreeEnergyReport(ctx.beta, resource, resource - ctx.log_partition / ctx.beta, kind, diag)


def choi_free_energy(n: Channel, ctx: ThermalContext) -> tuple[float, float]:
    """State free energies ``(F, F_T)`` of the Choi state against ``pi (x) gamma``, built on ``R (x) A``."""
    _check_ctx(n, ctx)
    sigma = np.kron(maximally_mixed(n.din), ctx.gibbs_state)
    f = statediv.rel_entropy(n.choi, sigma) / ctx.beta
    return f, f - ctx.log_partition / ctx.beta


def channel_entropy(n: Channel, cfg: OptimizerConfig | None = None) -> DivergenceResult:
    """``S[N] = inf_psi [S(RA) - S(R)]``."""
    return minimize(obj.entropic(n, a=1.0, b=-1.0), n.din, n.din, cfg)


def thermal_entropy(n: Channel, ctx: ThermalContext, cfg: OptimizerConfig | None = None) -> DivergenceResult:
    """``S^beta[N] = inf_psi [S(RA) - S(R) - beta <H_A>]`` (the unnormalized thermal replacer, negated)."""
    _check_ctx(n, ctx)
    lin = -ctx.beta * np.kron(np.eye(n.din), ctx.hamiltonian)
    return minimize(obj.entropic(n, a=1.0, b=-1.0, linear=lin), n.din, n.din, cfg)


def private_randomness(n: Channel, cfg: OptimizerConfig | None = None) -> DivergenceResult:
    """``P[N] = D[N || R^pi]``."""
    return channel_divergence(n, replacer_channel(maximally_mixed(n.dout), n.din), DivergenceKind.umegaki(), cfg)


def channel_mutual_information(n: Channel, cfg: OptimizerConfig | None = None) -> DivergenceResult:
    """``I[N] = sup_psi I(R; A)``."""
    return maximize(obj.entropic(n, a=-1.0, b=1.0, c=1.0), n.din, n.din, cfg)


def output_free_energy(n: Channel, ctx: ThermalContext, cfg: OptimizerConfig | None = None) -> DivergenceResult:
    """``sup_rho F(N(rho))`` over input states (pure inputs suffice by convexity)."""
    _check_ctx(n, ctx)
    res = maximize(obj.entropic(n, a=-1.0, linear=-ctx.log_gibbs_state), 1, n.din, cfg)
    res.value /= ctx.beta
    res.restart_values = [v / ctx.beta for v in res.restart_values]
    return res


def energy_form(n: Channel, h_out, h_int=None) -> np.ndarray:
    """Hermitian ``Q`` on ``R (x) A'`` with ``<psi|Q|psi> = tr[(id (x) N)(psi) (1 (x) H_A + H_int)]``."""
    h_out = np.asarray(h_out, dtype=complex)
    if h_out.shape != (n.dout, n.dout):
        raise ShapeError(f"output Hamiltonian must be {n.dout}x{n.dout}")
    k = np.kron(np.eye(n.din), h_out)
    if h_int is not None:
        h_int = np.asarray(h_int, dtype=complex)
        if h_int.shape != k.shape:
            raise ShapeError(f"interaction Hamiltonian must be {k.shape[0]}x{k.shape[0]}")
        k = k + h_int
    g4 = obj.gamma4(n)
    k4 = k.reshape(n.din, n.dout, n.din, n.dout)
    q = np.einsum("sbra,iajb->sjri", k4, g4).reshape(n.din * n.din, n.din * n.din)
    return 0.5 * (q + q.conj().T)


def channel_energy(n: Channel, h_out, h_ref=None, h_int=None) -> float:
    """``E[N] = sup_psi [<H_RA>_{N(psi)} - <H_R>_psi]``.

    The reference Hamiltonian cancels, leaving the top eigenvalue of a quadratic
    form in ``psi``; this is exact with or without an interaction term.
    """
    if h_ref is not None and np.shape(h_ref) != (n.din, n.din):
        raise ShapeError(f"reference Hamiltonian must be {n.din}x{n.din}")
    return float(np.linalg.eigvalsh(energy_form(n, h_out, h_int))[-1])
