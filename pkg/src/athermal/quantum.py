"""States, Hamiltonians, thermal contexts and state-level thermodynamic functionals.

Natural units throughout: ``k_B = hbar = 1`` and natural logarithms, so
energies and inverse temperatures are reciprocal dimensionless numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from . import linalg
from .errors import DomainError, ShapeError, ValidityError

PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10


def density_operator(m, *, atol: float = PSD_ATOL, trace_atol: float = TRACE_ATOL) -> np.ndarray:
    """Validate ``m`` as a density operator and return a repaired copy.

    Eigenvalues in ``[-atol, 0)`` are clamped to zero; anything more negative,
    or a trace off by more than ``trace_atol``, raises ``ValidityError``.
    """
    a = linalg.hermitian(m)
    w, v = np.linalg.eigh(a)
    if w[0] < -atol:
        raise ValidityError(f"operator is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    tr = float(np.sum(w))
    if abs(tr - 1.0) > trace_atol:
        raise ValidityError(f"density operator must have unit trace, got {tr!r}")
    if w[0] < 0:
        w = np.clip(w, 0, None)
        a = (v * w) @ v.conj().T
        a = 0.5 * (a + a.conj().T)
    return a


def psd(m, *, atol: float = PSD_ATOL) -> np.ndarray:
    """Validate a positive semidefinite (possibly unnormalized) operator."""
    a = linalg.hermitian(m)
    lo = np.linalg.eigvalsh(a)[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(a)))))
    if lo < -atol * scale:
        raise DomainError(f"operator is not positive semidefinite (min eigenvalue {lo:.3e})")
    return a


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def maximally_entangled(dim: int) -> np.ndarray:
    """The vector ``sum_i |ii> / sqrt(dim)``."""
    return np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)


@dataclass(frozen=True, eq=False)
class ThermalContext:
    """Inverse temperature with a Hamiltonian and its derived Gibbs objects.

    ``gibbs_operator`` is ``exp(-beta H)`` and ``gibbs_state`` its normalization;
    ``log_partition`` is ``ln tr exp(-beta H)`` computed with log-sum-exp.
    """

    beta: float
    hamiltonian: np.ndarray
    gibbs_state: np.ndarray
    gibbs_operator: np.ndarray
    log_partition: float

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def partition_function(self) -> float:
        return float(np.exp(self.log_partition))

    @cached_property
    def energies(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.hamiltonian)

    @cached_property
    def log_gibbs_state(self) -> np.ndarray:
        """``ln gamma = -beta H - ln Z``, exact even when ``gamma`` has tiny eigenvalues."""
        return -self.beta * self.hamiltonian - self.log_partition * np.eye(self.dim)

    def shifted(self, c: float) -> "ThermalContext":
        return thermal_context(self.hamiltonian + c * np.eye(self.dim), self.beta)


def thermal_context(h, beta: float) -> ThermalContext:
    """Build the thermal objects of Hamiltonian ``h`` at inverse temperature ``beta``."""
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0:
        raise DomainError(f"inverse temperature must be positive, got {beta!r}")
    h = linalg.hermitian(h)
    e, v = np.linalg.eigh(h)
    log_z = float(logsumexp(-beta * e))
    weights = np.exp(-beta * e - log_z)
    gibbs = (v * weights) @ v.conj().T
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        gibbs_op = (v * np.exp(-beta * e)) @ v.conj().T
    for arr in (h, gibbs, gibbs_op):
        arr.setflags(write=False)
    return ThermalContext(
        beta=beta,
        hamiltonian=h,
        gibbs_state=0.5 * (gibbs + gibbs.conj().T),
        gibbs_operator=0.5 * (gibbs_op + gibbs_op.conj().T),
        log_partition=log_z,
    )


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0, None)
    return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def entropy(rho) -> float:
    """Von Neumann entropy ``-tr rho ln rho`` in nats."""
    w = np.linalg.eigvalsh(linalg.hermitian(rho))
    return float(max(0.0, -np.sum(_xlogx(w))))


def energy(rho, h) -> float:
    """Mean energy ``tr(H rho)``."""
    rho = np.asarray(rho)
    h = np.asarray(h)
    if rho.shape != h.shape:
        raise ShapeError(f"state of shape {rho.shape} and Hamiltonian {h.shape} differ")
    return float(np.real(np.trace(h @ rho)))


def state_free_energy(rho, ctx: ThermalContext) -> tuple[float, float]:
    """Resource-theoretic and thermal (non-equilibrium) free energy of a state.

    Returns ``(resource, thermal)`` where ``resource = D(rho||gamma)/beta`` and
    ``thermal = <H> - S/beta``.  They differ by ``ln Z / beta``.
    """
    rho = np.asarray(rho)
    if rho.shape != (ctx.dim, ctx.dim):
        raise ShapeError(f"state of shape {rho.shape} does not match Hamiltonian dimension {ctx.dim}")
    w = np.linalg.eigvalsh(linalg.hermitian(rho))
    neg_s = float(np.sum(_xlogx(w)))
    cross = float(np.real(np.trace(rho @ ctx.log_gibbs_state)))
    resource = max(0.0, neg_s - cross) / ctx.beta
    thermal = energy(rho, ctx.hamiltonian) + neg_s / ctx.beta
    return resource, thermal


def mutual_information(rho_ab, dims) -> float:
    """``I(A;B) = S(A) + S(B) - S(AB)`` for a bipartite state with ``dims = (dA, dB)``."""
    da, db = (int(d) for d in dims)
    rho_ab = np.asarray(rho_ab)
    if rho_ab.shape != (da * db, da * db):
        raise ShapeError(f"state of shape {rho_ab.shape} does not match dims {(da, db)}")
    sa = entropy(linalg.partial_trace(rho_ab, [da, db], 0))
    sb = entropy(linalg.partial_trace(rho_ab, [da, db], 1))
    return max(0.0, sa + sb - entropy(rho_ab))


def purify(rho) -> np.ndarray:
    """Spectral purification on ``system (x) purifier``.

    With ascending eigenpairs ``(p_k, v_k)`` the output is
    ``sum_k sqrt(p_k) |v_k> (x) |k>``; tracing out the second factor
    returns ``rho``.
    """
    rho = density_operator(rho)
    p, v = linalg.eigh(rho)
    d = rho.shape[0]
    psi = np.zeros((d, d), dtype=complex)
    psi[:, :] = v * np.sqrt(np.clip(p, 0, None))
    return psi.reshape(-1)


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    """Haar-random unit vector (normalized complex Gaussian), deterministic per seed."""
    if dim < 1:
        raise DomainError("dimension must be positive")
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random density operator from a ``dim x rank`` Ginibre matrix (Hilbert-Schmidt for full rank)."""
    rng = np.random.default_rng(seed)
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
