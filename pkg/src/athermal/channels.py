"""Quantum channels in the Choi picture, superchannels and the special channels of the theory.

A channel ``N: A' -> A`` is stored through its normalized Choi state
``Phi^N = (id (x) N)(Phi)`` on ``R (x) A`` with the reference (input copy)
as the left factor.  The unnormalized Choi operator is ``Gamma = din * Phi^N``
and acts as ``N(X)[a, b] = sum_ij X[i, j] Gamma[(i, a), (j, b)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from . import linalg
from .errors import AthermalError, CPTPError, DomainError, EffectError, ShapeError, ValidityError
from .quantum import ThermalContext, density_operator, maximally_entangled, projector, thermal_context

TP_ATOL = 1e-9
CHANNEL_EQ_ATOL = 1e-8


@dataclass(frozen=True, eq=False)
class Channel:
    """CPTP map ``din -> dout`` held as its normalized Choi state."""

    din: int
    dout: int
    choi: np.ndarray

    def __post_init__(self):
        din, dout = int(self.din), int(self.dout)
        if din < 1 or dout < 1:
            raise ShapeError(f"channel dimensions must be positive, got {(din, dout)}")
        c = np.asarray(self.choi, dtype=complex)
        if c.shape != (din * dout, din * dout):
            raise ShapeError(f"Choi state of shape {c.shape} does not match din={din}, dout={dout}")
        try:
            c = density_operator(c, trace_atol=TP_ATOL)
        except ValidityError as exc:
            raise CPTPError(f"not a Choi state: {exc}", residual=float("nan")) from exc
        marg = linalg.partial_trace(c, [din, dout], 0) * din
        residual = float(np.abs(marg - np.eye(din)).max())
        if residual > TP_ATOL:
            raise CPTPError(f"map is not trace preserving (residual {residual:.3e})", residual=residual)
        c.setflags(write=False)
        object.__setattr__(self, "din", din)
        object.__setattr__(self, "dout", dout)
        object.__setattr__(self, "choi", c)

    @property
    def gamma(self) -> np.ndarray:
        """Unnormalized Choi operator ``din * Phi^N``."""
        return self.din * self.choi

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix ``S`` with ``vec(N(X)) = S vec(X)`` for row-major ``vec``."""
        g = self.gamma.reshape(self.din, self.dout, self.din, self.dout)
        return g.transpose(1, 3, 0, 2).reshape(self.dout**2, self.din**2)

    def __call__(self, rho, ref_dim: int = 1) -> np.ndarray:
        return apply(self, rho, ref_dim)

    def __repr__(self) -> str:
        return f"Channel(din={self.din}, dout={self.dout})"


def _from_gamma(gamma: np.ndarray, din: int, dout: int) -> Channel:
    return Channel(din, dout, np.asarray(gamma) / din)


def from_choi(choi, din: int, dout: int, *, normalized: bool = True) -> Channel:
    c = np.asarray(choi, dtype=complex)
    return Channel(din, dout, c if normalized else c / din)


def from_kraus(ops: Sequence) -> Channel:
    """Channel with Kraus operators ``K_k`` of shape ``(dout, din)``."""
    ks = [np.atleast_2d(np.asarray(k, dtype=complex)) for k in ops]
    if not ks:
        raise ShapeError("need at least one Kraus operator")
    dout, din = ks[0].shape
    if any(k.shape != (dout, din) for k in ks):
        raise ShapeError("Kraus operators must share one shape")
    stack = np.stack(ks)
    completeness = np.einsum("kai,kaj->ij", stack.conj(), stack)
    residual = float(np.abs(completeness - np.eye(din)).max())
    if residual > TP_ATOL:
        raise CPTPError(f"Kraus operators are not complete (residual {residual:.3e})", residual=residual)
    vecs = stack.transpose(0, 2, 1).reshape(len(ks), din * dout)
    gamma = vecs.T @ vecs.conj()
    return _from_gamma(gamma, din, dout)


def apply(n: Channel, rho, ref_dim: int = 1) -> np.ndarray:
    """``(id_R (x) N)(rho)`` for ``rho`` on ``R (x) A'`` with ``|R| = ref_dim``."""
    x = np.asarray(rho, dtype=complex)
    d = ref_dim * n.din
    if x.shape != (d, d):
        raise ShapeError(f"input of shape {x.shape} does not match ref_dim*din = {d}")
    g = n.gamma.reshape(n.din, n.dout, n.din, n.dout)
    out = np.einsum("risj,iajb->rasb", x.reshape(ref_dim, n.din, ref_dim, n.din), g, optimize=True)
    out = out.reshape(ref_dim * n.dout, ref_dim * n.dout)
    return 0.5 * (out + out.conj().T)


def apply_adjoint(n: Channel, h, ref_dim: int = 1) -> np.ndarray:
    """Heisenberg-picture map ``(id_R (x) N^dagger)(h)`` for ``h`` on ``R (x) A``."""
    y = np.asarray(h, dtype=complex)
    d = ref_dim * n.dout
    if y.shape != (d, d):
        raise ShapeError(f"observable of shape {y.shape} does not match ref_dim*dout = {d}")
    g = n.gamma.reshape(n.din, n.dout, n.din, n.dout)
    out = np.einsum("sbra,iajb->sjri", y.reshape(ref_dim, n.dout, ref_dim, n.dout), g, optimize=True)
    out = out.reshape(ref_dim * n.din, ref_dim * n.din)
    return 0.5 * (out + out.conj().T)


def identity_channel(d: int) -> Channel:
    return Channel(d, d, projector(maximally_entangled(d)))


def unitary_channel(u) -> Channel:
    u = np.asarray(u, dtype=complex)
    if not linalg.is_unitary(u):
        raise ValidityError("matrix is not unitary to 1e-10")
    return from_kraus([u])


def replacer_channel(omega, din: int) -> Channel:
    """``X -> tr(X) omega``; Choi state ``pi (x) omega``."""
    omega = density_operator(omega)
    return Channel(din, omega.shape[0], np.kron(np.eye(din) / din, omega))


def thermal_channel(ctx: ThermalContext, din: int) -> Channel:
    """Absolutely thermal channel: replace every input by the Gibbs state of ``ctx``."""
    return replacer_channel(ctx.gibbs_state, din)


def uniform_mixing(m: int) -> Channel:
    return replacer_channel(np.eye(m) / m, m)


def weyl_unitaries(m: int) -> list[np.ndarray]:
    """Clock-and-shift unitaries ``X^a Z^b`` ordered by ``a*m + b``; the first is the identity."""
    if m < 2:
        raise DomainError("Weyl unitaries need m >= 2")
    omega = np.exp(2j * np.pi / m)
    shift = np.roll(np.eye(m), 1, axis=0)
    clock = np.diag(omega ** np.arange(m))
    out = []
    for a in range(m):
        xa = np.linalg.matrix_power(shift, a)
        for b in range(m):
            out.append(xa @ np.linalg.matrix_power(clock, b))
    return out


def _sequence(channels: Sequence[Channel]) -> Channel:
    # channels are listed in application order
    first = channels[0]
    state = projector(maximally_entangled(first.din))
    d_prev = first.din
    for ch in channels:
        if ch.din != d_prev:
            raise ShapeError(f"cannot feed a {d_prev}-dimensional output into a {ch.din}-dimensional input")
        state = apply(ch, state, first.din)
        d_prev = ch.dout
    return Channel(first.din, d_prev, state)


def compose(q: Channel, n: Channel, p: Channel | None = None) -> Channel:
    """``q o n o p`` (``p`` applied first); ``p`` defaults to the identity."""
    return _sequence([p, n, q] if p is not None else [n, q])


def tensor(n: Channel, m: Channel) -> Channel:
    """Parallel composition ``N (x) M`` with factor order ``(A1, A2)`` on input and output."""
    c = np.kron(n.choi, m.choi).reshape(n.din, n.dout, m.din, m.dout, n.din, n.dout, m.din, m.dout)
    c = c.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    d = n.din * m.din * n.dout * m.dout
    return Channel(n.din * m.din, n.dout * m.dout, c.reshape(d, d))


def mixture(channels: Sequence[Channel], weights: Sequence[float]) -> Channel:
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(channels),) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise DomainError("mixture weights must be a probability vector")
    shapes = {(c.din, c.dout) for c in channels}
    if len(shapes) != 1:
        raise ShapeError("mixed channels must share dimensions")
    din, dout = shapes.pop()
    return Channel(din, dout, sum(wi * c.choi for wi, c in zip(w, channels)))


def choi_distance(n: Channel, m: Channel) -> float:
    """Trace distance ``||Phi^N - Phi^M||_1`` between Choi states."""
    if (n.din, n.dout) != (m.din, m.dout):
        raise ShapeError("channels have different dimensions")
    return linalg.trace_norm(n.choi - m.choi)


def channels_equal(n: Channel, m: Channel, atol: float = CHANNEL_EQ_ATOL) -> bool:
    return (n.din, n.dout) == (m.din, m.dout) and choi_distance(n, m) <= atol


def haar_unitary(d: int, seed=None) -> np.ndarray:
    if d < 1:
        raise DomainError("dimension must be positive")
    if d == 1:
        rng = np.random.default_rng(seed)
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(d, random_state=np.random.default_rng(seed))


def random_channel(din: int, dout: int, env_dim: int | None = None, seed=None) -> Channel:
    """Stinespring channel with a Haar isometry ``A' -> A (x) E``.

    ``env_dim`` defaults to ``din * dout``, the generic full Kraus rank.
    """
    env = din * dout if env_dim is None else int(env_dim)
    if min(din, dout, env) < 1:
        raise DomainError("dimensions must be positive")
    if dout * env < din:
        raise DomainError(f"an isometry from {din} into {dout}*{env} dimensions does not exist")
    v = haar_unitary(dout * env, seed)[:, :din]
    kraus = v.reshape(dout, env, din).transpose(1, 0, 2)
    return from_kraus(list(kraus))


@dataclass(frozen=True, eq=False)
class Superchannel:
    """``Theta(N) = post o (id_aux (x) N) o pre``."""

    pre: Channel
    post: Channel
    aux_dim: int

    def __post_init__(self):
        aux = int(self.aux_dim)
        if aux < 1 or self.pre.dout % aux or self.post.din % aux:
            raise ShapeError(f"aux_dim={aux} does not divide the pre output / post input dimensions")
        object.__setattr__(self, "aux_dim", aux)

    @property
    def slot_din(self) -> int:
        return self.pre.dout // self.aux_dim

    @property
    def slot_dout(self) -> int:
        return self.post.din // self.aux_dim

    def __call__(self, n: Channel) -> Channel:
        return apply_superchannel(self, n)


def identity_superchannel(din: int, dout: int) -> Superchannel:
    return Superchannel(identity_channel(din), identity_channel(dout), 1)


def apply_superchannel(theta: Superchannel, n: Channel) -> Channel:
    if (n.din, n.dout) != (theta.slot_din, theta.slot_dout):
        raise ShapeError(
            f"superchannel slot {(theta.slot_din, theta.slot_dout)} does not fit channel {(n.din, n.dout)}"
        )
    d0 = theta.pre.din
    state = projector(maximally_entangled(d0))
    state = apply(theta.pre, state, d0)
    state = apply(n, state, d0 * theta.aux_dim)
    state = apply(theta.post, state, d0)
    return Channel(d0, theta.post.dout, state)


def is_gibbs_preserving(
    theta: Superchannel, ctx_in: ThermalContext, ctx_out: ThermalContext, tol: float = 1e-8
) -> tuple[bool, float]:
    """Whether ``theta`` maps the thermal channel of ``ctx_in`` to that of ``ctx_out``.

    Returns the verdict and the Choi trace-norm residual.
    """
    if abs(ctx_in.beta - ctx_out.beta) > 1e-12 * max(1.0, ctx_in.beta):
        raise DomainError(f"inverse temperatures differ: {ctx_in.beta} vs {ctx_out.beta}")
    if ctx_in.dim != theta.slot_dout or ctx_out.dim != theta.post.dout:
        raise ShapeError("thermal contexts do not match the superchannel dimensions")
    image = apply_superchannel(theta, thermal_channel(ctx_in, theta.slot_din))
    target = thermal_channel(ctx_out, theta.pre.din)
    residual = choi_distance(image, target)
    return residual <= tol, residual


def check_effect(lam, atol: float = 1e-10) -> np.ndarray:
    lam = linalg.hermitian(lam)
    w = np.linalg.eigvalsh(lam)
    if w[0] < -atol or w[-1] > 1 + atol:
        raise EffectError(f"operator is not an effect: spectrum spans [{w[0]:.3e}, {w[-1]:.3e}]")
    return lam


def distill_superchannel(psi, lam, m: int) -> Superchannel:
    """Measure-and-prepare superchannel producing ``q id_m + (1-q) id_perp``.

    The pre-processor keeps the input ``B'`` and appends ``psi`` on ``R A'``;
    the inner channel acts on ``A'``; the post-processor measures ``{lam, 1-lam}``
    on ``R A`` and applies either the identity or the uniform average of the
    non-identity Weyl conjugations to ``B'``.  Here ``q = tr(N(psi) lam)``.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    din = int(round(np.sqrt(psi.size)))
    if din * din != psi.size:
        raise ShapeError("psi must live on R (x) A' with |R| = |A'|")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValidityError("psi must be a unit vector")
    lam = check_effect(lam)
    if lam.shape[0] % din:
        raise ShapeError("effect dimension must be a multiple of the reference dimension")
    dout = lam.shape[0] // din
    m = int(m)
    if m < 1:
        raise DomainError("m must be a positive integer")
    aux = m * din
    pre = from_kraus([np.kron(np.eye(m), psi.reshape(-1, 1))])

    dra = din * dout
    w, v = np.linalg.eigh(lam)
    w = np.clip(w, 0, 1)
    sq_yes = (v * np.sqrt(w)) @ v.conj().T
    sq_no = (v * np.sqrt(1 - w)) @ v.conj().T
    basis = np.eye(dra)
    kraus = [np.kron(np.eye(m), basis[k : k + 1] @ sq_yes) for k in range(dra)]
    if m == 1:
        kraus += [basis[k : k + 1] @ sq_no for k in range(dra)]
    else:
        scale = 1 / np.sqrt(m * m - 1)
        for wu in weyl_unitaries(m)[1:]:
            kraus += [scale * np.kron(wu, basis[k : k + 1] @ sq_no) for k in range(dra)]
    post = from_kraus(kraus)
    return Superchannel(pre, post, aux)


# --- JSON descriptors -------------------------------------------------------

KINDS = ("choi", "kraus", "unitary", "replacer", "thermal", "mixing")


def _complex(obj, rank: int, field: str) -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    if a.ndim != rank + 1 or a.shape[-1] != 2:
        raise ValueError(f"{field}: expected nested arrays of [re, im] pairs of rank {rank}")
    return a[..., 0] + 1j * a[..., 1]


def _hamiltonian(obj, field: str = "hamiltonian") -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    if a.ndim == 2:
        return a.astype(complex)
    return _complex(obj, 2, field)


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def descriptor_errors(desc) -> list[str]:
    """Every schema violation in a channel descriptor, as ``"field: reason"`` strings."""
    errs = []
    if not isinstance(desc, dict):
        return ["channel: expected an object"]
    for key in ("din", "dout"):
        v = desc.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            errs.append(f"channel.{key}: expected a positive integer")
    kind = desc.get("kind")
    if kind not in KINDS:
        errs.append(f"channel.kind: expected one of {', '.join(KINDS)}")
    if kind in ("choi", "kraus", "unitary", "replacer") and "data" not in desc:
        errs.append("channel.data: required for kind " + str(kind))
    if kind == "thermal" and "hamiltonian" not in desc:
        errs.append("channel.hamiltonian: required for kind thermal")
    if "beta" in desc:
        b = desc["beta"]
        if not isinstance(b, (int, float)) or isinstance(b, bool) or not b > 0:
            errs.append("channel.beta: expected a positive number")
    if errs:
        return errs
    try:
        channel_from_descriptor(desc)
    except (ValueError, AthermalError) as exc:
        errs.append(f"channel.data: {exc}")
    return errs


def channel_from_descriptor(desc: dict, beta: float | None = None) -> Channel:
    din, dout, kind = int(desc["din"]), int(desc["dout"]), desc["kind"]
    if kind == "choi":
        ch = Channel(din, dout, _complex(desc["data"], 2, "channel.data"))
    elif kind == "kraus":
        ch = from_kraus(list(_complex(desc["data"], 3, "channel.data")))
    elif kind == "unitary":
        ch = unitary_channel(_complex(desc["data"], 2, "channel.data"))
    elif kind == "replacer":
        ch = replacer_channel(_complex(desc["data"], 2, "channel.data"), din)
    elif kind == "thermal":
        b = desc.get("beta", beta)
        if b is None:
            raise ValueError("channel.beta: thermal channel needs an inverse temperature")
        ch = thermal_channel(thermal_context(_hamiltonian(desc["hamiltonian"]), b), din)
    elif kind == "mixing":
        ch = replacer_channel(np.eye(dout) / dout, din)
    else:
        raise ValueError(f"channel.kind: unknown kind {kind!r}")
    if (ch.din, ch.dout) != (din, dout):
        raise ValueError(f"channel.data: built a {ch.din}->{ch.dout} channel, declared {din}->{dout}")
    return ch


def channel_to_descriptor(n: Channel) -> dict:
    return {"din": n.din, "dout": n.dout, "kind": "choi", "data": encode_matrix(n.choi)}

