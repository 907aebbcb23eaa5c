import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from athermal import linalg
from athermal.errors import DomainError, ShapeError
from athermal.quantum import (
    energy,
    entropy,
    maximally_entangled,
    mutual_information,
    projector,
    purify,
    random_density,
    random_pure_state,
    state_free_energy,
    thermal_context,
)

from .conftest import LN2, random_ctx, seeds


def test_gibbs_examples():
    ctx = thermal_context(np.diag([0, LN2]), 1.0)
    assert ctx.partition_function == pytest.approx(1.5)
    assert np.allclose(ctx.gibbs_state, np.diag([2 / 3, 1 / 3]))
    for c in (-3.0, 0.0, 7.5):
        assert np.allclose(thermal_context(c * np.eye(2), 1.0).gibbs_state, np.eye(2) / 2)
    hot = thermal_context(np.diag([0, 1.7]), 1e-6)
    assert np.abs(hot.gibbs_state - np.eye(2) / 2).max() <= 1e-5


def test_gibbs_large_energies_do_not_overflow():
    ctx = thermal_context(np.diag([-2000.0, 0.0, 5.0]), 1.0)
    assert np.isfinite(ctx.log_partition)
    assert ctx.gibbs_state[0, 0].real == pytest.approx(1.0)


def test_nonpositive_beta():
    with pytest.raises(DomainError):
        thermal_context(np.eye(2), 0.0)
    with pytest.raises(DomainError):
        thermal_context(np.eye(2), -1.0)


def test_entropy_examples():
    assert entropy(projector(random_pure_state(3, 1))) == pytest.approx(0, abs=1e-12)
    assert entropy(np.eye(2) / 2) == pytest.approx(LN2)
    assert entropy(np.diag([0.75, 0.25])) == pytest.approx(0.562335, abs=1e-6)


def test_energy_examples():
    h = np.diag([0, 1.0])
    assert energy(np.diag([1.0, 0]), h) == 0
    assert energy(np.eye(2) / 2, h) == pytest.approx(0.5)
    ctx = thermal_context(np.diag([0, LN2]), 1.0)
    assert energy(ctx.gibbs_state, ctx.hamiltonian) == pytest.approx(0.231049, abs=1e-6)
    with pytest.raises(ShapeError):
        energy(np.eye(3) / 3, h)


def test_state_free_energy_examples():
    ctx = thermal_context(np.diag([0, LN2]), 1.0)
    res, th = state_free_energy(ctx.gibbs_state, ctx)
    assert res == pytest.approx(0, abs=1e-12)
    assert th == pytest.approx(-np.log(1.5))
    assert state_free_energy(np.diag([1.0, 0]), ctx)[0] == pytest.approx(0.405465, abs=1e-6)
    flat = thermal_context(np.zeros((2, 2)), 1.0)
    assert state_free_energy(np.eye(2) / 2, flat)[0] == pytest.approx(0, abs=1e-12)


def test_mutual_information_examples():
    a, b = random_density(2, 1), random_density(3, 2)
    assert mutual_information(np.kron(a, b), (2, 3)) == pytest.approx(0, abs=1e-10)
    assert mutual_information(projector(maximally_entangled(2)), (2, 2)) == pytest.approx(2 * LN2)
    cc = np.diag([0.5, 0, 0, 0.5])
    assert mutual_information(cc, (2, 2)) == pytest.approx(LN2)
    with pytest.raises(ShapeError):
        mutual_information(cc, (2, 3))


def test_purify_examples():
    v = random_pure_state(2, 3)
    psi = purify(projector(v))
    red = linalg.partial_trace(projector(psi), [2, 2], 0)
    assert np.allclose(red, projector(v), atol=1e-10)
    assert entropy(linalg.partial_trace(projector(psi), [2, 2], 1)) == pytest.approx(0, abs=1e-10)
    psi = purify(np.eye(2) / 2)
    assert mutual_information(projector(psi), (2, 2)) == pytest.approx(2 * LN2)
    rho = np.diag([0.75, 0.25])
    assert np.abs(linalg.partial_trace(projector(purify(rho)), [2, 2], 0) - rho).max() <= 1e-10


def test_random_pure_state_examples():
    assert np.allclose(np.abs(random_pure_state(1, 0)), [1.0])
    assert np.array_equal(random_pure_state(4, 11), random_pure_state(4, 11))
    rng = np.random.default_rng(0)
    w = [abs(random_pure_state(4, rng)[0]) ** 2 for _ in range(10000)]
    assert np.mean(w) == pytest.approx(0.25, abs=0.02)


@given(seeds, st.integers(2, 4))
def test_free_energy_nonnegative_and_faithful(seed, d):
    ctx = random_ctx(d, seed)
    rho = random_density(d, seed)
    res = state_free_energy(rho, ctx)[0]
    assert res >= 0
    gap = linalg.trace_norm(rho - ctx.gibbs_state)
    if gap > 1e-8:
        assert res > 0
    assert state_free_energy(ctx.gibbs_state, ctx)[0] <= 1e-12


@given(seeds, st.integers(2, 4), st.floats(-5, 5))
def test_free_energy_translation(seed, d, c):
    ctx = random_ctx(d, seed)
    rho = random_density(d, seed + 1)
    r0, t0 = state_free_energy(rho, ctx)
    r1, t1 = state_free_energy(rho, ctx.shifted(c))
    assert t1 - t0 == pytest.approx(c, abs=1e-9)
    assert abs(r1 - r0) <= 1e-9


@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_mutual_information_bounds_and_additivity(seed, da, db):
    rho = random_density(da * db, seed)
    i = mutual_information(rho, (da, db))
    assert -1e-12 <= i <= 2 * np.log(min(da, db)) + 1e-9
    sig = random_density(4, seed + 1)
    joint = np.kron(rho, sig).reshape(da, db, 2, 2, da, db, 2, 2)
    joint = joint.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(da * db * 4, -1)
    total = mutual_information(joint, (2 * da, 2 * db))
    assert total == pytest.approx(i + mutual_information(sig, (2, 2)), abs=1e-9)
