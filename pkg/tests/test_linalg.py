import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from athermal import linalg
from athermal.errors import DomainError, ShapeError, SizeError

from .conftest import hermitian, seeds


def test_eigh_diagonal():
    w, v = linalg.eigh(np.diag([2.0, 1.0]))
    assert np.allclose(w, [1, 2])
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])


def test_eigh_zero_and_pauli():
    assert np.allclose(linalg.eigh(np.zeros((3, 3))).eigenvalues, 0)
    assert np.allclose(linalg.eigh([[0, 1], [1, 0]]).eigenvalues, [-1, 1])


def test_matrix_functions():
    assert np.allclose(linalg.expm(np.zeros((2, 2))), np.eye(2))
    assert np.allclose(linalg.logm(np.diag([1, np.e])), np.diag([0, 1]))
    assert np.allclose(linalg.powm(np.diag([2 / 3, 1 / 3]), -1), np.diag([1.5, 3]))


def test_matrix_fn_domain_error():
    with pytest.raises(DomainError, match="-1"):
        linalg.matrix_fn(np.diag([1.0, -1.0]), np.log)


def test_kron_examples():
    assert np.allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(linalg.kron(np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0]))
    assert np.trace(linalg.kron(np.diag([1, 2]), np.diag([3, 4]))) == pytest.approx(21)


def test_kron_cap():
    with pytest.raises(SizeError):
        linalg.kron(np.eye(32), np.eye(16))


def test_partial_trace_examples():
    a = np.diag([0.3, 0.7])
    b = np.array([[0.5, 0.2], [0.2, 0.5]])
    assert np.allclose(linalg.partial_trace(np.kron(a, b), [2, 2], 0), a)
    phi = np.zeros(4)
    phi[[0, 3]] = 1 / np.sqrt(2)
    p = np.outer(phi, phi)
    assert np.allclose(linalg.partial_trace(p, [2, 2], 0), np.eye(2) / 2)
    assert np.allclose(linalg.partial_trace(p, [2, 2], 1), np.eye(2) / 2)
    with pytest.raises(ShapeError):
        linalg.partial_trace(p, [2, 3], 0)


def test_schatten_examples():
    assert linalg.schatten_norm(np.diag([1, -1]), 1) == pytest.approx(2)
    assert linalg.schatten_norm(np.diag([3, 4]), np.inf) == pytest.approx(4)
    assert linalg.schatten_norm(np.diag([3, 4]), 2) == pytest.approx(5)
    with pytest.raises(DomainError):
        linalg.schatten_norm(np.eye(2), 3)


@given(seeds, st.integers(1, 8))
def test_eigh_reconstructs(seed, d):
    m = hermitian(np.random.default_rng(seed), d)
    w, v = linalg.eigh(m)
    assert np.abs((v * w) @ v.conj().T - m).max() <= 1e-10
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-10)


@given(seeds, st.integers(1, 6))
def test_exp_log_roundtrip(seed, d):
    m = hermitian(np.random.default_rng(seed), d, 0.5)
    assert np.abs(linalg.logm(linalg.expm(m)) - m).max() <= 1e-8


@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 2, 2)]), st.data())
def test_partial_trace_positive_and_trace_preserving(seed, dims, data):
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    keep = data.draw(st.sets(st.integers(0, len(dims) - 1), min_size=1))
    red = linalg.partial_trace(rho, dims, keep)
    assert np.trace(red).real == pytest.approx(np.trace(rho).real, rel=1e-12)
    assert np.linalg.eigvalsh(red).min() >= -1e-10


@given(seeds, st.integers(1, 6))
def test_schatten_ordering(seed, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    n1, n2, ninf = (linalg.schatten_norm(x, p) for p in (1, 2, np.inf))
    assert n1 >= n2 - 1e-12 and n2 >= ninf - 1e-12
