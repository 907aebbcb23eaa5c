"""Dense Hermitian numerics: spectra, spectral calculus, tensor algebra, norms.

Matrices are plain ``numpy`` arrays.  Tensor factors follow the usual
left-factor-major (lexicographic) index order, so ``kron(a, b)[i*db + k, j*db + l]
== a[i, j] * b[k, l]``.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, ShapeError, SizeError, ValidityError

#: Eigenvalues below ``SUPPORT_RTOL * max|eigenvalue|`` are treated as outside the support.
SUPPORT_RTOL = 1e-12
#: Largest dimension ``kron`` will build.
KRON_DIM_CAP = 256

_HERMITIAN_RTOL = 1e-8


class Spectrum(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are the eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian(m, *, rtol: float = _HERMITIAN_RTOL) -> np.ndarray:
    """Return ``m`` as a complex Hermitian array, symmetrizing roundoff.

    Raises ``ValidityError`` when ``m`` is not square or its anti-Hermitian
    part exceeds ``rtol`` relative to its Frobenius norm.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidityError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidityError("matrix has non-finite entries")
    skew = np.linalg.norm(a - a.conj().T)
    if skew > rtol * max(1.0, np.linalg.norm(a)):
        raise ValidityError(f"matrix is not Hermitian (anti-Hermitian norm {skew:.3e})")
    return 0.5 * (a + a.conj().T)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # make the first non-negligible entry of every column real and positive
    idx = np.argmax(np.abs(vecs) > 1e-12, axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    phase = np.where(np.abs(lead) > 0, lead / np.where(np.abs(lead) > 0, np.abs(lead), 1), 1)
    return vecs / phase


def eigh(m) -> Spectrum:
    """Eigen-decomposition of a Hermitian matrix with a canonical phase convention.

    Eigenvalues are ascending.  Each eigenvector is scaled so that its first
    nonzero entry is real and positive, which makes the output deterministic.
    """
    a = hermitian(m)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is rare
        residual = float(np.linalg.norm(a - a.conj().T))
        raise ConvergenceError(f"eigendecomposition failed: {exc}", residual=residual) from exc
    return Spectrum(w, _fix_phases(v))


def support_mask(eigenvalues: np.ndarray, rtol: float = SUPPORT_RTOL) -> np.ndarray:
    """Boolean mask of eigenvalues counted as inside the support."""
    w = np.asarray(eigenvalues, dtype=float)
    scale = np.max(np.abs(w)) if w.size else 0.0
    return w > rtol * scale


def matrix_fn(m, f: Callable[[np.ndarray], np.ndarray], support_only: bool = False) -> np.ndarray:
    """Apply the scalar function ``f`` through the spectral decomposition of ``m``.

    With ``support_only`` set, eigenvalues below ``1e-12 * lambda_max`` are
    mapped to zero instead of being passed to ``f``.  This realizes the
    ``lim eps -> 0+`` convention for ``log`` and negative powers of singular
    operators.
    """
    w, v = eigh(m)
    if support_only:
        keep = support_mask(w)
    else:
        keep = np.ones_like(w, dtype=bool)
    fw = np.zeros(w.shape, dtype=complex)
    if keep.any():
        with np.errstate(all="ignore"):
            vals = np.asarray(f(w[keep]), dtype=complex)
        bad = ~np.isfinite(vals)
        if bad.any():
            raise DomainError(f"function undefined at eigenvalue {w[keep][bad][0]!r}")
        fw[keep] = vals
    if np.all(np.abs(fw.imag) <= 1e-300):
        fw = fw.real
    out = (v * fw) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def _real_log(x):
    return np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), np.nan)


def logm(m, support_only: bool = True) -> np.ndarray:
    """Matrix natural logarithm, restricted to the support by default."""
    return matrix_fn(m, _real_log, support_only=support_only)


def expm(m) -> np.ndarray:
    """Matrix exponential of a Hermitian matrix."""
    return matrix_fn(m, np.exp)


def powm(m, p: float, support_only: bool = True) -> np.ndarray:
    """Real power of a positive semidefinite matrix.

    Negative and fractional powers are taken on the support only unless
    ``support_only`` is cleared, in which case a nonpositive eigenvalue raises.
    """

    def f(x):
        ok = (x > 0) | ((x == 0) & (p >= 0))
        return np.where(ok, np.power(np.where(ok, x, 1.0), p), np.nan)

    return matrix_fn(m, f, support_only=support_only)


def sqrtm_psd(m) -> np.ndarray:
    """Square root of a PSD matrix; tiny negative roundoff eigenvalues are clipped."""
    return matrix_fn(m, lambda x: np.sqrt(np.clip(x, 0, None)))


def kron(a, b, *, cap: int = KRON_DIM_CAP) -> np.ndarray:
    """Tensor product with left-factor-major index order.

    Raises ``SizeError`` when the product dimension exceeds ``cap``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("kron expects two matrices")
    if a.shape[0] * b.shape[0] > cap or a.shape[1] * b.shape[1] > cap:
        raise SizeError(
            f"tensor product of shapes {a.shape} and {b.shape} exceeds the dimension cap {cap}"
        )
    return np.kron(a, b)


def kron_all(*factors, cap: int = KRON_DIM_CAP) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f, cap=cap)
    return out


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every tensor factor of ``m`` whose index is not in ``keep``.

    ``dims`` lists the factor dimensions in left-factor-major order; ``keep``
    is an index or iterable of indices into ``dims``.  Kept factors stay in
    their original order.
    """
    a = np.asarray(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ShapeError(f"dimensions must be positive, got {dims}")
    n = int(np.prod(dims))
    if a.ndim != 2 or a.shape != (n, n):
        raise ShapeError(f"matrix of shape {a.shape} does not match dims {dims}")
    if np.isscalar(keep) or isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted({int(k) for k in keep})
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ShapeError(f"keep={keep} is not a nonempty subset of factor indices")
    k = len(dims)
    t = a.reshape(dims + dims)
    traced = [i for i in range(k) if i not in keep]
    # einsum with repeated labels contracts the traced factors
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(k)]
    col = [letters[i] if i in traced else letters[i].upper() for i in range(k)]
    out_labels = [letters[i] for i in keep] + [letters[i].upper() for i in keep]
    spec = "".join(row) + "".join(col) + "->" + "".join(out_labels)
    kd = int(np.prod([dims[i] for i in keep]))
    return np.einsum(spec, t).reshape(kd, kd)


def schatten_norm(m, p) -> float:
    """Schatten ``p``-norm for ``p`` in ``{1, 2, inf}``."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError("schatten_norm expects a matrix")
    if p == 2:
        return float(np.linalg.norm(a))
    if p not in (1, np.inf, float("inf"), "inf"):
        raise DomainError(f"unsupported Schatten index {p!r}; use 1, 2 or inf")
    if a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=1e-13, rtol=0):
        s = np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))
    else:
        s = np.linalg.svd(a, compute_uv=False)
    return float(s.sum() if p == 1 else s.max(initial=0.0))


def trace_norm(m) -> float:
    return schatten_norm(m, 1)


def is_psd(m, atol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(hermitian(m))[0] >= -atol)


def is_unitary(u, atol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= atol * max(1, u.shape[0]))
