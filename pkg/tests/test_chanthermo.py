import numpy as np
import pytest

from athermal import linalg
from athermal.channels import (
    apply,
    haar_unitary,
    identity_channel,
    is_gibbs_preserving,
    replacer_channel,
    thermal_channel,
    uniform_mixing,
    unitary_channel,
)
from athermal.chanthermo import (
    OptimizerConfig,
    channel_divergence,
    channel_energy,
    channel_entropy,
    channel_max_divergence,
    channel_mutual_information,
    conversion_distance,
    free_energy,
    golden_dimension,
    max_extractable_work,
    one_shot_cost,
    one_shot_distill,
    private_randomness,
    thermal_entropy,
    verify_suite,
    work_extraction,
)
from athermal.errors import DomainError, ShapeError
from athermal.quantum import (
    entropy,
    maximally_entangled,
    mutual_information,
    projector,
    random_density,
    random_pure_state,
    state_free_energy,
    thermal_context,
)
from athermal.statediv import DivergenceKind, hypothesis_testing, rel_entropy

from .conftest import LN2, chan, random_ctx

QUICK = OptimizerConfig(restarts=8)
H_LN2 = np.diag([0.0, LN2])


@pytest.fixture
def ctx():
    return thermal_context(H_LN2, 1.0)


@pytest.fixture
def flat():
    return thermal_context(np.zeros((2, 2)), 1.0)


@pytest.mark.parametrize(
    "kind",
    [DivergenceKind.umegaki(), DivergenceKind.renyi(0.5), DivergenceKind.renyi(2.0), DivergenceKind.hypothesis(0.1)],
    ids=str,
)
def test_divergence_of_channel_with_itself(kind):
    n = chan(2, 2, 1)
    expect = -np.log(0.9) if kind.tag == "hypothesis" else 0.0
    assert channel_divergence(n, n, kind, QUICK).value == pytest.approx(expect, abs=1e-7)


def test_replacer_divergence_is_state_divergence(ctx):
    omega = random_density(2, 3)
    res = channel_divergence(replacer_channel(omega, 2), thermal_channel(ctx, 2), DivergenceKind.umegaki(), QUICK)
    assert res.value == pytest.approx(rel_entropy(omega, ctx.gibbs_state), abs=1e-9)


def test_identity_against_mixing():
    res = channel_divergence(identity_channel(2), uniform_mixing(2), DivergenceKind.umegaki())
    assert res.value == pytest.approx(2 * LN2, abs=1e-5)


def test_max_divergence_examples(ctx):
    assert channel_max_divergence(thermal_channel(ctx, 2), ctx) == pytest.approx(0, abs=1e-10)
    for s in range(3):
        u = unitary_channel(haar_unitary(2, s))
        assert channel_max_divergence(u, ctx) == pytest.approx(np.log(4.5), abs=1e-9)
    for m in (2, 3, 4):
        flat = thermal_context(np.zeros((m, m)), 1.0)
        assert channel_max_divergence(identity_channel(m), flat) == pytest.approx(2 * np.log(m), abs=1e-9)


def test_free_energy_examples(ctx, flat):
    rep = free_energy(thermal_channel(ctx, 2), ctx, cfg=QUICK)
    assert rep.resource == pytest.approx(0, abs=1e-9)
    assert rep.thermal == pytest.approx(-np.log(1.5), abs=1e-9)
    omega = random_density(2, 4)
    rep = free_energy(replacer_channel(omega, 2), ctx, cfg=QUICK)
    assert rep.resource == pytest.approx(state_free_energy(omega, ctx)[0], abs=1e-9)
    beta2 = thermal_context(np.zeros((2, 2)), 2.0)
    assert free_energy(identity_channel(2), beta2).resource == pytest.approx(LN2, abs=1e-5)
    rep = free_energy(identity_channel(2), flat, DivergenceKind.max())
    assert rep.resource == pytest.approx(2 * LN2, abs=1e-12) and rep.diagnostics["exact"]


def test_free_energy_rejects_mismatched_context(ctx):
    with pytest.raises(ShapeError):
        free_energy(chan(2, 3, 0), ctx)


def test_entropy_examples(ctx):
    # S(RA) - S(R) is minimized by the maximally entangled input: 0 - ln d
    assert channel_entropy(identity_channel(2), QUICK).value == pytest.approx(-LN2, abs=1e-7)
    assert channel_entropy(unitary_channel(haar_unitary(3, 1)), QUICK).value == pytest.approx(-np.log(3), abs=1e-7)
    assert channel_entropy(uniform_mixing(2), QUICK).value == pytest.approx(LN2, abs=1e-9)
    omega = random_density(3, 2)
    assert channel_entropy(replacer_channel(omega, 2), QUICK).value == pytest.approx(entropy(omega), abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_entropy_randomness_duality(seed):
    n = chan(2, 2, seed)
    s = channel_entropy(n).value
    p = private_randomness(n).value
    assert s + p == pytest.approx(LN2, abs=2e-5)


def test_energy_examples(ctx):
    h = np.diag([0.0, 1.0])
    assert channel_energy(unitary_channel(haar_unitary(2, 5)), h) == pytest.approx(1, abs=1e-12)
    t = thermal_channel(ctx, 2)
    assert channel_energy(t, ctx.hamiltonian) == pytest.approx(np.trace(ctx.hamiltonian @ ctx.gibbs_state).real)
    assert channel_energy(uniform_mixing(2), h) == pytest.approx(0.5)


def test_energy_with_interaction_matches_sampled_inputs():
    n = chan(2, 2, 7)
    rng = np.random.default_rng(0)
    h_int = rng.normal(size=(4, 4))
    h_int = h_int + h_int.T
    h = np.diag([0.0, 1.0])
    e = channel_energy(n, h, h_int=h_int)
    k = np.kron(np.eye(2), h) + h_int
    best = max(
        np.trace(apply(n, projector(random_pure_state(4, s)), 2) @ k).real for s in range(500)
    )
    assert best <= e + 1e-12
    assert e - best <= 0.5


def test_mutual_information_examples(ctx):
    assert channel_mutual_information(replacer_channel(random_density(2, 1), 2), QUICK).value == pytest.approx(0, abs=1e-9)
    assert channel_mutual_information(identity_channel(2)).value == pytest.approx(2 * LN2, abs=1e-5)


@pytest.mark.parametrize("seed", range(3))
def test_free_energy_splits_into_information_and_output(seed):
    ctx = random_ctx(2, seed)
    n = chan(2, 2, seed)
    rep = free_energy(n, ctx)
    psi = rep.diagnostics["argmax_state"]
    out = apply(n, projector(psi), 2)
    marginal = linalg.partial_trace(out, [2, 2], 1)
    split = mutual_information(out, (2, 2)) / ctx.beta + state_free_energy(marginal, ctx)[0]
    assert split == pytest.approx(rep.resource, abs=1e-9)
    assert max_extractable_work(n, ctx).value == pytest.approx(rep.resource, abs=2e-5)


def test_distill_examples(ctx, flat):
    for eps in (0.1, 0.3):
        rep = one_shot_distill(thermal_channel(ctx, 2), ctx, eps, QUICK)
        assert rep.value_nats == pytest.approx(-0.5 * np.log(1 - eps), abs=1e-7)
    rep = one_shot_distill(identity_channel(2), flat, 0.1)
    phi = projector(maximally_entangled(2))
    choi_value = 0.5 * hypothesis_testing(phi, np.eye(4) / 4, 0.1)[0]
    assert rep.value_nats >= choi_value - 1e-9
    # the D_H value over Schmidt angles: the optimum is the maximally entangled input
    chi = np.deg2rad(np.arange(0, 90.001, 2))
    grid = []
    for c in chi:
        v = np.array([np.cos(c), 0, 0, np.sin(c)])
        r = projector(v)
        grid.append(0.5 * hypothesis_testing(r, np.kron(linalg.partial_trace(r, [2, 2], 0), np.eye(2) / 2), 0.1)[0])
    assert rep.value_nats >= max(grid) - 1e-9
    assert rep.value_nats == pytest.approx(max(grid), abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_distill_witness(seed):
    ctx = thermal_context(np.diag([0.0, 0.2]), 1.0)
    n = unitary_channel(haar_unitary(2, seed))
    eps = 0.1
    rep = one_shot_distill(n, ctx, eps, QUICK)
    m = rep.witness["m"]
    assert m == golden_dimension(rep.value_nats) and m >= 2
    theta = rep.witness["superchannel"]
    ok, res = is_gibbs_preserving(theta, ctx, thermal_context(np.zeros((m, m)), ctx.beta))
    assert ok and res <= 1e-8
    assert rep.diagnostics["conversion_error"] <= eps + 1e-9
    assert conversion_distance(theta, n, m) <= eps + 1e-6


def test_golden_dimension():
    assert golden_dimension(np.log(3)) == 3
    assert golden_dimension(np.log(3) - 1e-9) == 2
    assert golden_dimension(0.1) == 1
    with pytest.raises(DomainError):
        golden_dimension(np.inf)


def test_cost_examples(ctx, flat):
    assert one_shot_cost(identity_channel(2), flat, 0.0).value_nats == pytest.approx(LN2, abs=1e-12)
    for eps in (0.0, 0.1, 0.3):
        assert one_shot_cost(thermal_channel(ctx, 2), ctx, eps).value_nats == pytest.approx(0, abs=1e-6)
    with pytest.raises(DomainError):
        one_shot_cost(identity_channel(2), flat, 1.0)


def test_trade_off_instance():
    ctx = random_ctx(2, 1)
    n = chan(2, 2, 1)
    eps = 0.1
    cost = one_shot_cost(n, ctx, np.sqrt(eps)).value_nats
    dist = one_shot_distill(n, ctx, 1 - eps, QUICK).value_nats
    assert cost <= dist + 0.5 * np.log(1 / (1 - eps)) + 1e-6


def test_work_examples(ctx, flat):
    psi = random_pure_state(4, 3)
    assert work_extraction(thermal_channel(ctx, 2), psi, ctx).total == pytest.approx(0, abs=1e-12)
    w = work_extraction(replacer_channel(np.diag([1.0, 0]), 2), psi, ctx)
    assert w.decoupling == pytest.approx(0, abs=1e-12)
    assert w.total == pytest.approx(np.log(1.5), abs=1e-12)
    w = work_extraction(identity_channel(2), maximally_entangled(2), flat)
    assert w.decoupling == pytest.approx(2 * LN2)
    # flat Hamiltonian: the quench costs -S/beta of the marginal and the drive returns ln Z / beta
    assert w.quench == pytest.approx(-LN2, abs=1e-12)
    assert w.quench + w.reversible == pytest.approx(0, abs=1e-12)
    assert w.total == pytest.approx(2 * LN2)
    with pytest.raises(ShapeError):
        work_extraction(identity_channel(2), np.ones(3), flat)


def test_max_work_examples(ctx):
    assert max_extractable_work(thermal_channel(ctx, 2), ctx, QUICK).value == pytest.approx(0, abs=1e-9)
    omega = random_density(2, 8)
    v = max_extractable_work(replacer_channel(omega, 2), ctx, QUICK).value
    assert v == pytest.approx(state_free_energy(omega, ctx)[0], abs=1e-9)


def test_thermal_entropy_duality():
    ctx = random_ctx(2, 4)
    n = chan(2, 2, 4)
    s_beta = thermal_entropy(n, ctx).value
    f = free_energy(n, ctx).resource
    assert s_beta + ctx.beta * f == pytest.approx(ctx.log_partition, abs=2e-5)


def test_verify_thermal_channel(ctx):
    rep = verify_suite(thermal_channel(ctx, 2), ctx)
    assert rep.passed, [c.name for c in rep.failures()]
    assert rep["faithfulness"].detail.get("f_t", 0.0) <= 1e-8


def test_verify_identity_helmholtz(flat):
    rep = verify_suite(identity_channel(2), flat)
    assert rep.passed, [c.name for c in rep.failures()]
    # flat levels: F_T[id] = -S[id] / beta exactly, so the bound is tight
    d = rep["helmholtz"].detail
    assert d["lhs"] == pytest.approx(d["rhs"], abs=1e-9)
    gapped = verify_suite(identity_channel(2), thermal_context(np.diag([0.0, 1.0]), 1.0))
    assert gapped.passed, [c.name for c in gapped.failures()]


@pytest.mark.parametrize("seed", [0, 1])
def test_verify_random_qubit(seed):
    n = chan(2, 2, seed)
    rep = verify_suite(n, random_ctx(2, seed), seed=seed)
    assert rep.passed, [(c.name, c.margin) for c in rep.failures()]
    assert len(rep.checks) >= 20
