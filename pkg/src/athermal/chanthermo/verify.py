"""Checks of the axioms and inequalities satisfied by channel free energies.

Every check reports a margin: the slack left in the inequality after its
tolerance, so ``margin >= 0`` means pass.  Optimized values are lower bounds;
where one sits on the unsafe side of an inequality it gets warm starts from
related optima.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import statediv
from ..channels import (
    Channel,
    Superchannel,
    apply,
    apply_superchannel,
    haar_unitary,
    identity_channel,
    mixture,
    random_channel,
    replacer_channel,
    tensor,
    thermal_channel,
    unitary_channel,
)
from ..quantum import (
    ThermalContext,
    energy,
    entropy,
    maximally_mixed,
    mutual_information,
    projector,
    random_pure_state,
    state_free_energy,
    thermal_context,
)
from ..statediv import DivergenceKind
from .operational import max_extractable_work, one_shot_cost, one_shot_distill
from .optimizer import OptimizerConfig
from .quantities import (
    channel_divergence,
    channel_energy,
    channel_entropy,
    channel_max_divergence,
    channel_mutual_information,
    free_energy,
    output_free_energy,
    private_randomness,
    thermal_entropy,
)

#: Restarts used by the suite unless a configuration is passed explicitly.
SUITE_CONFIG = OptimizerConfig(restarts=8)
BETA_SMALL = 1e-4


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: dict = field(default_factory=dict)


@dataclass
class VerifyReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


class _Suite:
    def __init__(self):
        self.checks: list[CheckResult] = []

    def add(self, name: str, margin: float, **detail):
        margin = float(margin)
        self.checks.append(CheckResult(name, bool(margin >= 0), margin, detail))

    def le(self, name, lhs, rhs, tol, **detail):
        self.add(name, rhs + tol - lhs, lhs=float(lhs), rhs=float(rhs), tol=tol, **detail)

    def close(self, name, a, b, tol, **detail):
        self.add(name, tol - abs(a - b), a=float(a), b=float(b), tol=tol, **detail)

    def combine(self, name: str, parts: list[CheckResult]):
        """Fold sub-checks into one entry carrying the smallest margin."""
        worst = min(parts, key=lambda c: c.margin)
        self.checks.append(
            CheckResult(name, all(c.passed for c in parts), worst.margin, {"cases": [c.detail for c in parts]})
        )


def binary_entropy(p: float) -> float:
    return float(-sum(x * np.log(x) for x in (p, 1 - p) if x > 0))


def gibbs_unitary(ctx: ThermalContext, seed) -> np.ndarray:
    """Random unitary commuting with the Hamiltonian: Haar on each degenerate eigenspace."""
    w, v = np.linalg.eigh(ctx.hamiltonian)
    rng = np.random.default_rng(seed)
    u = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    start = 0
    while start < ctx.dim:
        stop = start + 1
        while stop < ctx.dim and abs(w[stop] - w[start]) <= 1e-12 * max(1.0, abs(w[start])):
            stop += 1
        size = stop - start
        block = haar_unitary(size, rng) if size > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1)
        u[start:stop, start:stop] = block
        start = stop
    return v @ u @ v.conj().T


def gibbs_preserving_post(ctx: ThermalContext, kind: int, seed) -> Channel:
    """Post-processor fixing ``gamma``: a commuting unitary, a mixture with the thermal channel, or an SDP sample."""
    rng = np.random.default_rng(seed)
    if kind == 0:
        return unitary_channel(gibbs_unitary(ctx, rng))
    if kind == 1:
        q = float(rng.uniform(0.2, 0.8))
        return mixture([unitary_channel(gibbs_unitary(ctx, rng)), thermal_channel(ctx, ctx.dim)], [q, 1 - q])
    from ..sdp import gibbs_preserving_channel_sdp

    d = ctx.dim
    w = rng.normal(size=(d * d, d * d)) + 1j * rng.normal(size=(d * d, d * d))
    sol = gibbs_preserving_channel_sdp(ctx, w + w.conj().T)
    if sol.status != "optimal":
        return thermal_channel(ctx, d)
    return sol.extras["channel"]


def gibbs_preserving_superchannel(n: Channel, ctx: ThermalContext, kind: int, seed) -> Superchannel:
    """Arbitrary pre-processor with a Gibbs-preserving post-processor (no memory)."""
    pre = random_channel(n.din, n.din, seed=np.random.default_rng(seed))
    post = gibbs_preserving_post(ctx, kind, np.random.default_rng([seed, 1]))
    return Superchannel(pre, post, 1)


def _swap_product(psi: np.ndarray, d: int) -> np.ndarray:
    """``psi (x) psi`` on ``(R1 A1)(R2 A2)`` reordered to ``(R1 R2)(A1 A2)``."""
    p = np.kron(psi, psi).reshape(d, d, d, d)
    return p.transpose(0, 2, 1, 3).reshape(-1)


def verify_suite(
    n: Channel,
    ctx: ThermalContext,
    cfg: OptimizerConfig | None = None,
    seed: int = 0,
    samples: int = 3,
    heavy: bool = True,
) -> VerifyReport:
    """Run every check on ``n`` and channels derived from it; failures are reported, never raised.

    ``heavy`` enables the two-copy additivity check (qubit channels only).
    """
    cfg = cfg or SUITE_CONFIG
    beta = ctx.beta
    din, dout = n.din, n.dout
    square = din == dout
    t = thermal_channel(ctx, din)
    suite = _Suite()
    rng = np.random.default_rng(seed)

    def fe(ch, init=None):
        return free_energy(ch, ctx, cfg=cfg, init_states=init)

    base = fe(n)
    f_n = base.resource
    psi_star = base.diagnostics["argmax_state"]
    d_inf = channel_max_divergence(n, ctx)

    # faithfulness
    f_t = fe(t).resource
    choi_gap = float(np.sum(np.abs(np.linalg.eigvalsh(n.choi - t.choi))))
    parts = [CheckResult("thermal", f_t <= 1e-8, 1e-8 - f_t, {"value": f_t})]
    if choi_gap >= 0.1:
        parts.append(CheckResult("resourceful", f_n >= 1e-4, f_n - 1e-4, {"value": f_n, "choi_gap": choi_gap}))
    suite.combine("faithfulness", parts)

    # reduction to states
    omega = apply(n, maximally_mixed(din))
    f_rep = fe(replacer_channel(omega, din)).resource
    suite.close("reduction", f_rep, state_free_energy(omega, ctx)[0], 1e-6)

    # monotonicity under Gibbs-preserving superchannels
    parts = []
    for k in range(samples):
        theta = gibbs_preserving_superchannel(n, ctx, k % 3, int(rng.integers(2**32)))
        f_img = fe(apply_superchannel(theta, n)).resource
        parts.append(CheckResult(f"sample{k}", f_img <= f_n + 1e-5, f_n + 1e-5 - f_img, {"image": f_img, "kind": k % 3}))
    suite.combine("monotonicity", parts)
    pre_u = haar_unitary(din, rng)
    post_u = gibbs_unitary(ctx, rng)
    theta = Superchannel(unitary_channel(pre_u), unitary_channel(post_u), 1)
    # the optimum moves with the pre-unitary: psi -> (1 (x) U^T)^-1-conjugate input
    moved = (psi_star.reshape(din, din) @ pre_u.conj()).reshape(-1)
    f_img = fe(apply_superchannel(theta, n), [moved]).resource
    suite.close("unitary_invariance", f_img, f_n, 2e-5)

    # additivity on two copies
    if heavy and din == 2 and dout == 2:
        nn = tensor(n, n)
        ctx2 = thermal_context(np.kron(ctx.hamiltonian, np.eye(2)) + np.kron(np.eye(2), ctx.hamiltonian), beta)
        res2 = channel_divergence(
            nn,
            thermal_channel(ctx2, 4),
            DivergenceKind.umegaki(),
            cfg.with_(restarts=2, include_maximally_entangled=False),
            [_swap_product(psi_star, 2)],
        )
        suite.close("additivity", res2.value, 2 * beta * f_n, 1e-4)
    else:
        suite.add("additivity", 0.0, skipped=True, reason="qubit channels only")

    # convexity
    m = random_channel(din, dout, seed=rng)
    f_m = fe(m).resource
    parts = []
    for p in (0.25, 0.5, 0.75):
        f_mix = fe(mixture([n, m], [p, 1 - p])).resource
        bound = p * f_n + (1 - p) * f_m
        parts.append(CheckResult(f"p={p}", f_mix <= bound + 1e-5, bound + 1e-5 - f_mix, {"mix": f_mix, "bound": bound}))
    suite.combine("convexity", parts)

    # continuity
    from ..sdp import diamond_norm

    delta = 0.05
    m_near = mixture([n, t], [1 - delta, delta])
    eps = 0.5 * diamond_norm(n, m_near)
    f_near = fe(m_near, [psi_star]).resource
    k_const = max(d_inf, channel_max_divergence(m_near, ctx))
    suite.le("continuity", abs(f_n - f_near), (eps * k_const + binary_entropy(min(eps, 1.0))) / beta, 1e-6, eps=eps)
    e_max = float(np.max(ctx.energies))
    bound = np.log1p(eps * din * ctx.partition_function * np.exp(beta * e_max)) / beta
    suite.le("continuity_max", abs(d_inf - channel_max_divergence(m_near, ctx)) / beta, bound, 1e-9, eps=eps)

    # order in alpha
    f_half = free_energy(n, ctx, DivergenceKind.renyi(0.5), cfg)
    f_one = fe(n, [f_half.diagnostics["argmax_state"], psi_star])
    f_two = free_energy(n, ctx, DivergenceKind.renyi(2.0), cfg, [f_one.diagnostics["argmax_state"]])
    chain = [f_half.resource, f_one.resource, f_two.resource, d_inf / beta]
    margin = min(chain[i + 1] + 1e-6 - chain[i] for i in range(3))
    suite.add("alpha_order", margin, values=chain)

    # unitaries are maximal and all alike
    if square:
        u_vals = [channel_max_divergence(unitary_channel(haar_unitary(din, rng)), ctx) for _ in range(samples)]
        id_val = channel_max_divergence(identity_channel(din), ctx)
        suite.le("unitary_maximal", d_inf / beta, min(u_vals) / beta, 1e-8)
        suite.add("unitary_alike", 1e-9 - max(abs(v - id_val) / beta for v in u_vals), values=u_vals)
        u = unitary_channel(haar_unitary(din, rng))
        f_u = fe(u).resource
        lower = (np.log(dout) + ctx.log_partition) / beta + float(np.real(np.trace(ctx.hamiltonian))) / dout
        suite.le("unitary_lower_bound", lower, f_u, 1e-6)
    else:
        for name in ("unitary_maximal", "unitary_alike", "unitary_lower_bound"):
            suite.add(name, 0.0, skipped=True, reason="square channels only")

    # Hamiltonian minimization of the golden unit
    grid = np.linspace(0.0, 3.0, 31)
    vals = [channel_max_divergence(identity_channel(2), thermal_context(np.diag([0.0, e]), beta)) / beta for e in grid]
    best = int(np.argmin(vals))
    suite.add(
        "hamiltonian_minimum",
        min(1e-9 - abs(vals[0] - 2 * np.log(2) / beta), 0.0 if best == 0 else -1.0),
        argmin=float(grid[best]),
    )

    # Pinsker
    dia = diamond_norm(n, t)
    suite.le("pinsker", dia**2 / (2 * beta), f_n, 1e-6, diamond=dia)

    # conditional output free energy at the optimum
    h_ref = ctx.hamiltonian if square else np.zeros((din, din))
    ctx_r = thermal_context(h_ref, beta)
    rho_star = apply(n, projector(psi_star), din)
    psi_r = np.einsum("rasa->rs", rho_star.reshape(din, dout, din, dout))
    ctx_ra = thermal_context(np.kron(h_ref, np.eye(dout)) + np.kron(np.eye(din), ctx.hamiltonian), beta)
    cond = state_free_energy(rho_star, ctx_ra)[0] - state_free_energy(psi_r, ctx_r)[0]
    suite.close("conditional_output", beta * cond, beta * f_n, 1e-6)

    # Helmholtz
    e_n = channel_energy(n, ctx.hamiltonian)
    s_n = channel_entropy(n, cfg).value
    suite.le("helmholtz", base.thermal, e_n - s_n / beta, 1e-5, energy=e_n, entropy=s_n)
    rep = replacer_channel(omega, din)
    ft_rep = fe(rep).thermal
    rhs = channel_energy(rep, ctx.hamiltonian) - channel_entropy(rep, cfg).value / beta
    suite.close("helmholtz_replacer", ft_rep, rhs, 1e-6)

    # Choi-state bounds (reference Hamiltonian zero)
    sigma_choi = np.kron(maximally_mixed(din), ctx.gibbs_state)
    f_choi = statediv.rel_entropy(n.choi, sigma_choi) / beta
    ft_choi = energy(n.choi, np.kron(np.eye(din), ctx.hamiltonian)) - entropy(n.choi) / beta
    suite.combine(
        "choi_bounds",
        [
            CheckResult("resource", f_n >= f_choi - 1e-6, f_n - f_choi + 1e-6, {"choi": f_choi}),
            CheckResult(
                "thermal",
                base.thermal >= ft_choi + np.log(din) / beta - 1e-6,
                base.thermal - ft_choi - np.log(din) / beta + 1e-6,
                {"choi": ft_choi},
            ),
        ],
    )

    # information bounds
    i_choi = mutual_information(n.choi, (din, dout)) / beta
    f_out_pi = state_free_energy(omega, ctx)[0]
    i_n = channel_mutual_information(n, cfg).value / beta
    f_out = output_free_energy(n, ctx, cfg).value
    suite.combine(
        "information_bounds",
        [
            CheckResult("lower", i_choi + f_out_pi - 1e-5 <= f_n, f_n - i_choi - f_out_pi + 1e-5, {}),
            CheckResult("upper", f_n <= i_n + f_out + 1e-5, i_n + f_out + 1e-5 - f_n, {}),
        ],
    )

    # vanishing inverse temperature
    ctx0 = thermal_context(ctx.hamiltonian, BETA_SMALL)
    p_res = private_randomness(n, cfg)
    d_cold = channel_divergence(n, thermal_channel(ctx0, din), DivergenceKind.umegaki(), cfg, [p_res.argmax_state])
    p_val = max(p_res.value, channel_divergence(
        n, replacer_channel(maximally_mixed(dout), din), DivergenceKind.umegaki(), cfg, [d_cold.argmax_state]
    ).value)
    suite.close("high_temperature", d_cold.value, p_val, 1e-3)

    # dualities
    s_beta = thermal_entropy(n, ctx, cfg).value
    suite.close("thermal_duality", s_beta + beta * f_n, ctx.log_partition, 2e-5)
    suite.close("purity_duality", s_n + p_val, np.log(dout), 2e-5)

    # yield never exceeds cost without error
    dist0 = one_shot_distill(n, ctx, 0.0, cfg, witness=False).value_nats
    cost0 = one_shot_cost(n, ctx, 0.0).value_nats
    suite.le("distill_below_cost", dist0, cost0, 1e-6)

    # extractable work
    work = max_extractable_work(n, ctx, cfg).value
    suite.close("work", work, f_n, 1e-4)

    # pure-state decomposition bounds for D_inf
    sigma = ctx.gibbs_state
    inv = np.linalg.inv(sigma)
    parts = []
    for k in range(samples):
        probs = rng.dirichlet(np.ones(3))
        vecs = [random_pure_state(dout, rng) for _ in range(3)]
        rho = sum(p * np.outer(v, v.conj()) for p, v in zip(probs, vecs))
        terms = [p * float(np.real(v.conj() @ inv @ v)) for p, v in zip(probs, vecs)]
        d = statediv.max_rel_entropy(rho, sigma)
        lo, hi = np.log(max(terms)), np.log(sum(terms))
        parts.append(CheckResult(f"sample{k}", lo <= d + 1e-8 and d <= hi + 1e-8, min(d + 1e-8 - lo, hi + 1e-8 - d), {}))
    suite.combine("pure_state_bounds", parts)

    return VerifyReport(suite.checks)
