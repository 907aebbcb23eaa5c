"""One-shot distillation and formation, and work extraction by partial thermalization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channels import Channel, Superchannel, apply, distill_superchannel, thermal_channel
from ..errors import DomainError, ShapeError
from ..quantum import ThermalContext, mutual_information, projector, state_free_energy
from ..statediv import DivergenceKind, hypothesis_testing
from . import objectives as obj
from .optimizer import DivergenceResult, OptimizerConfig, maximize
from .quantities import _check_ctx, channel_divergence, channel_max_divergence


@dataclass
class DistillReport:
    """One-shot yield (distillation) or cost (formation) in nats of golden units.

    For distillation ``witness`` holds ``psi``, the test ``lam``, the integer
    ``m`` and the superchannel; for formation it holds the smoothed Choi operator.
    """

    eps: float
    value_nats: float
    witness: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def golden_dimension(value_nats: float) -> int:
    """Largest integer ``m >= 1`` with ``ln m <= value_nats`` (guarding against round-off at integers)."""
    if not np.isfinite(value_nats):
        raise DomainError("distillable value is infinite; no finite golden unit dimension")
    m = int(np.floor(np.exp(value_nats) * (1 + 1e-12)))
    while m > 1 and np.log(m) > value_nats + 1e-12:
        m -= 1
    return max(m, 1)


def one_shot_distill(
    n: Channel, ctx: ThermalContext, eps: float, cfg: OptimizerConfig | None = None, witness: bool = True
) -> DistillReport:
    """Half the hypothesis-testing channel divergence from the thermal channel, with a Gibbs-preserving witness.

    The test found at the optimal input is raised towards the identity until its
    weight on the thermal output is exactly ``1/m^2``; this keeps the thermal
    channel mapped onto the uniformly mixing one and only lowers the error.
    ``witness=False`` skips building the superchannel, whose size grows as ``m^4``.
    """
    eps = float(eps)
    if not 0 <= eps < 1:
        raise DomainError(f"eps must lie in [0, 1), got {eps!r}")
    _check_ctx(n, ctx)
    t = thermal_channel(ctx, n.din)
    res = channel_divergence(n, t, DivergenceKind.hypothesis(eps), cfg)
    value = 0.5 * res.value
    psi = res.argmax_state
    state = projector(psi)
    rho = apply(n, state, n.din)
    sigma = apply(t, state, n.din)
    d_h, lam = hypothesis_testing(rho, sigma, eps)
    m = golden_dimension(0.5 * d_h)
    p = float(np.real(np.trace(lam @ sigma)))
    target = 1.0 / m**2
    s = (target - p) / (1.0 - p) if p < 1 else 0.0
    lam = lam + s * (np.eye(lam.shape[0]) - lam)
    theta = distill_superchannel(psi, lam, m) if witness else None
    error = 1.0 - float(np.real(np.trace(lam @ rho)))
    return DistillReport(
        eps,
        value,
        witness={"psi": psi, "lam": lam, "m": m, "superchannel": theta},
        diagnostics={
            "converged": res.converged,
            "restarts_used": res.restarts_used,
            "restart_values": res.restart_values,
            "conversion_error": error,
            "thermal_weight": float(np.real(np.trace(lam @ sigma))),
        },
    )


def conversion_distance(theta: Superchannel, n: Channel, m: int) -> float:
    """``(1/2)||Theta(N) - id_m||_diamond`` via the SDP."""
    from ..channels import identity_channel
    from ..sdp import diamond_norm

    return 0.5 * diamond_norm(theta(n), identity_channel(m))


def one_shot_cost(n: Channel, ctx: ThermalContext, eps: float, mode: str = "diamond") -> DistillReport:
    """Half the smoothed channel max-divergence from the thermal channel (single smoothing)."""
    eps = float(eps)
    if not 0 <= eps < 1:
        raise DomainError(f"eps must lie in [0, 1), got {eps!r}")
    _check_ctx(n, ctx)
    if eps == 0:
        return DistillReport(eps, 0.5 * channel_max_divergence(n, ctx), {"choi": n.choi}, {"exact": True})
    from ..sdp import smoothed_channel_max_div_sdp
    from ..sdp.programs import _require

    sol = _require(smoothed_channel_max_div_sdp(n, ctx, eps, mode), "smoothed channel max-divergence")
    return DistillReport(
        eps,
        0.5 * float(np.log(sol.primal_value)),
        {"choi": sol.extras.get("choi")},
        {"exact": False, "duality_gap": sol.duality_gap, "mode": mode},
    )


@dataclass
class WorkReport:
    """Work yields of the decouple, quench and reversible-drive steps."""

    decoupling: float
    quench: float
    reversible: float
    total: float


def work_extraction(n: Channel, psi, ctx: ThermalContext) -> WorkReport:
    """Work drawn from ``N(psi)`` by decoupling ``R`` from ``A``, quenching ``A`` and driving back to ``gamma``."""
    _check_ctx(n, ctx)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != n.din * n.din:
        raise ShapeError(f"input must live on R (x) A' of dimension {n.din * n.din}")
    psi = psi / np.linalg.norm(psi)
    rho = apply(n, projector(psi), n.din)
    decoupling = mutual_information(rho, (n.din, n.dout)) / ctx.beta
    marginal = np.einsum("rarb->ab", rho.reshape(n.din, n.dout, n.din, n.dout))
    quench = state_free_energy(marginal, ctx)[1]
    reversible = ctx.log_partition / ctx.beta
    return WorkReport(decoupling, quench, reversible, decoupling + quench + reversible)


def work_objective(n: Channel, ctx: ThermalContext):
    """Total extracted work as a function of the pure input, summed step by step."""
    inv = 1.0 / ctx.beta
    decouple = obj.entropic(n, a=-inv, b=inv, c=inv)
    quench = obj.entropic(n, c=-inv, linear=np.kron(np.eye(n.din), ctx.hamiltonian))
    reversible = ctx.log_partition * inv

    def objective(x):
        v1, g1 = decouple(x)
        v2, g2 = quench(x)
        return v1 + v2 + reversible, g1 + g2

    return objective


def max_extractable_work(
    n: Channel, ctx: ThermalContext, cfg: OptimizerConfig | None = None
) -> DivergenceResult:
    """``sup_psi`` of the partial-thermalization work."""
    _check_ctx(n, ctx)
    return maximize(work_objective(n, ctx), n.din, n.din, cfg)
