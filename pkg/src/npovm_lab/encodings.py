"""Parameter-encoding families: unitary encodings, Kraus channels and open
encodings realized by a global probe-environment unitary.

Every family maps a real parameter to a channel acting on a single-qubit
probe. Open families carry the environment state with them; tracing the
environment out after the global unitary gives the CPTP action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvariantViolation
from .tensor import (
    PAULIS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    dag,
    embed_operator,
    expm_unitary,
    is_density,
    is_unitary,
    kron,
    partial_trace,
    pure_density,
)

UNITARY = "unitary"
KRAUS = "kraus"
OPEN_GLOBAL = "open_global"


@dataclass(frozen=True)
class EncodingFamily:
    """A map theta -> channel on the probe.

    Exactly one of ``hamiltonian`` (unitary kind), ``kraus_fn`` (Kraus kind)
    or ``global_unitary`` + ``env_state`` (open kind) is set.
    """

    kind: str
    label: str
    param_name: str = "theta"
    probe_dim: int = 2
    domain: tuple[float, float] | None = None
    hamiltonian: Callable[[float], np.ndarray] | None = None
    kraus_fn: Callable[[float], list[np.ndarray]] | None = None
    global_unitary: Callable[[float], np.ndarray] | None = None
    env_state: np.ndarray | None = None

    def check_domain(self, theta: float) -> None:
        if self.domain is not None:
            lo, hi = self.domain
            if not (lo <= theta <= hi):
                raise DomainError(
                    f"{self.param_name}={theta} outside [{lo}, {hi}] for '{self.label}'")


def kraus_ops(enc: EncodingFamily, theta: float, tol: float = 1e-9) -> list[np.ndarray]:
    """Kraus operators of the channel at ``theta``.

    Unitary kind gives the single conjugating unitary; the open kind is
    converted through its Stinespring dilation: K_(j,e) = sqrt(r_j) <e|X|E_j>
    over the environment eigenbasis {E_j} and output basis {e}.
    """
    enc.check_domain(theta)
    if enc.kind == UNITARY:
        return [expm_unitary(enc.hamiltonian(theta))]
    if enc.kind == KRAUS:
        ks = [np.asarray(k, dtype=complex) for k in enc.kraus_fn(theta)]
        total = sum(dag(k) @ k for k in ks)
        if np.max(np.abs(total - np.eye(enc.probe_dim))) > tol:
            raise InvariantViolation(
                f"Kraus set of '{enc.label}' not trace preserving at {theta}")
        return ks
    if enc.kind == OPEN_GLOBAL:
        x = enc.global_unitary(theta)
        if not is_unitary(x, tol):
            raise InvariantViolation(f"global unitary of '{enc.label}' not unitary at {theta}")
        if not is_density(enc.env_state, tol):
            raise InvariantViolation(f"environment state of '{enc.label}' not a density matrix")
        d_s = enc.probe_dim
        d_e = enc.env_state.shape[0]
        r, vecs = np.linalg.eigh(enc.env_state)
        xt = x.reshape(d_s, d_e, d_s, d_e)  # (s_out, e_out, s_in, e_in)
        ks = []
        for j in range(d_e):
            if r[j] < 1e-14:
                continue
            for e_out in range(d_e):
                k = math.sqrt(r[j]) * np.tensordot(xt[:, e_out, :, :], vecs[:, j], axes=([2], [0]))
                ks.append(k)
        return ks
    raise InvariantViolation(f"unknown encoding kind '{enc.kind}'")


def apply_channel(
    rho: np.ndarray,
    enc: EncodingFamily,
    theta: float,
    dims: Sequence[int] | None = None,
    slot: int = 0,
) -> np.ndarray:
    """Apply the channel at ``theta`` to the ``slot`` subsystem of ``rho``,
    identity on the rest.

    The open kind appends the environment as the last subsystem, conjugates
    by the lifted global unitary and traces the environment back out.
    """
    enc.check_domain(theta)
    dims = [enc.probe_dim] if dims is None else [int(d) for d in dims]
    total = math.prod(dims)
    if rho.shape != (total, total):
        raise InvariantViolation(f"state of dim {rho.shape[0]} inconsistent with dims {dims}")

    if enc.kind == UNITARY:
        u = embed_operator(expm_unitary(enc.hamiltonian(theta)), dims, [slot])
        out = u @ rho @ dag(u)
    elif enc.kind == KRAUS:
        out = np.zeros_like(rho)
        for k in kraus_ops(enc, theta):
            kk = embed_operator(k, dims, [slot])
            out += kk @ rho @ dag(kk)
    elif enc.kind == OPEN_GLOBAL:
        d_e = enc.env_state.shape[0]
        full_dims = dims + [d_e]
        x = embed_operator(enc.global_unitary(theta), full_dims, [slot, len(dims)])
        joint = x @ kron(rho, enc.env_state) @ dag(x)
        out = partial_trace(joint, full_dims, keep=range(len(dims)))
    else:
        raise InvariantViolation(f"unknown encoding kind '{enc.kind}'")

    if abs(np.trace(out) - np.trace(rho)) > 1e-9:
        raise InvariantViolation(f"channel '{enc.label}' did not preserve trace at {theta}")
    return out


def hamiltonian_derivative(enc: EncodingFamily, theta: float, step: float = 1e-6) -> np.ndarray:
    """Central-difference dH/dtheta for a unitary-kind family."""
    if enc.kind != UNITARY:
        raise InvariantViolation("hamiltonian_derivative applies to unitary encodings only")
    return (enc.hamiltonian(theta + step) - enc.hamiltonian(theta - step)) / (2 * step)


# ---------------------------------------------------------------------------
# presets

def amplitude_damping() -> EncodingFamily:
    """Damping toward |1>: K0 = |1><1| + sqrt(1-k_a)|0><0|, K1 = sqrt(k_a)|1><0|."""

    def ks(k: float) -> list[np.ndarray]:
        k0 = np.array([[math.sqrt(1.0 - k), 0], [0, 1]], dtype=complex)
        k1 = np.array([[0, 0], [math.sqrt(k), 0]], dtype=complex)
        return [k0, k1]

    return EncodingFamily(kind=KRAUS, label="amp_damp", param_name="k_a",
                          domain=(0.0, 1.0), kraus_fn=ks)


def dephasing() -> EncodingFamily:
    """Exchange-type dephasing, trace-preserving correction of the printed set:

    K0 = sqrt(1-k_d) I,  K1 = sqrt(k_d)|0><1|,  K2 = sqrt(k_d)|1><0|.
    """

    def ks(k: float) -> list[np.ndarray]:
        k0 = math.sqrt(1.0 - k) * np.eye(2, dtype=complex)
        k1 = np.array([[0, math.sqrt(k)], [0, 0]], dtype=complex)
        k2 = np.array([[0, 0], [math.sqrt(k), 0]], dtype=complex)
        return [k0, k1, k2]

    return EncodingFamily(kind=KRAUS, label="dephasing", param_name="k_d",
                          domain=(0.0, 1.0), kraus_fn=ks)


def xx_encoding(env_state: np.ndarray | None = None) -> EncodingFamily:
    """Probe-environment XX interaction: X(k_x) = exp(-i k_x σx⊗σx).

    The environment starts in |0><0| unless overridden.
    """
    if env_state is None:
        env_state = pure_density([1.0, 0.0])
    gen = kron(SIGMA_X, SIGMA_X)
    return EncodingFamily(
        kind=OPEN_GLOBAL, label="xx", param_name="k_x",
        global_unitary=lambda kx: expm_unitary(gen, kx), env_state=env_state)


def mixed_env_state(k: float) -> np.ndarray:
    """Environment qubit (1+k)/2 |0><0| + (1-k)/2 |1><1|."""
    if abs(k) > 1.0:
        raise DomainError(f"environment mixing parameter |k|={abs(k)} exceeds 1")
    return np.diag([(1.0 + k) / 2.0, (1.0 - k) / 2.0]).astype(complex)


def xy_hamiltonian(h: float, J: float, gamma: float) -> np.ndarray:
    """Two-qubit XY model with transverse field h, coupling J, anisotropy gamma."""
    return (h * (kron(SIGMA_Z, np.eye(2)) + kron(np.eye(2), SIGMA_Z))
            + (J / 2.0) * ((1.0 + gamma) * kron(SIGMA_X, SIGMA_X)
                           + (1.0 - gamma) * kron(SIGMA_Y, SIGMA_Y)))


def xy_encoding(
    estimate: str,
    h: float = 1.0,
    J: float = 1.0,
    gamma: float = 1.0,
    k: float = 0.0,
    t_over_hbar: float = 1.0,
) -> EncodingFamily:
    """Open encoding through the XY interaction; ``estimate`` picks which of
    h, J, gamma the channel parameter stands for (the others stay fixed).

    h and J are in units of hbar/t, so the exponent H·t/hbar is dimensionless.
    """
    if estimate not in ("h", "J", "gamma"):
        raise DomainError(f"unknown XY parameter '{estimate}'")
    fixed = {"h": h, "J": J, "gamma": gamma}

    def x(theta: float) -> np.ndarray:
        vals = dict(fixed)
        vals[estimate] = theta
        return expm_unitary(xy_hamiltonian(vals["h"], vals["J"], vals["gamma"]), t_over_hbar)

    return EncodingFamily(
        kind=OPEN_GLOBAL, label=f"xy_{estimate}", param_name=estimate,
        global_unitary=x, env_state=mixed_env_state(k))


def phase_encoding() -> EncodingFamily:
    """Unitary phase encoding H(theta) = theta·σz."""
    return EncodingFamily(kind=UNITARY, label="phase",
                          hamiltonian=lambda th: th * SIGMA_Z)


def identity_encoding() -> EncodingFamily:
    """Parameter-independent (uninformative) encoding."""
    zero = np.zeros((2, 2), dtype=complex)
    return EncodingFamily(kind=UNITARY, label="identity",
                          hamiltonian=lambda th: zero)


#: CLI-addressable presets; each factory takes the fixed-parameter mapping.
PRESETS: dict[str, Callable[..., EncodingFamily]] = {
    "amp_damp": lambda **_: amplitude_damping(),
    "dephasing": lambda **_: dephasing(),
    "xx": lambda k=1.0, **_: xx_encoding(env_state=mixed_env_state(k)),
    "xy_h": lambda J=1.0, gamma=1.0, k=0.0, t_over_hbar=1.0, **_: xy_encoding(
        "h", J=J, gamma=gamma, k=k, t_over_hbar=t_over_hbar),
    "xy_J": lambda h=1.0, gamma=1.0, k=0.0, t_over_hbar=1.0, **_: xy_encoding(
        "J", h=h, gamma=gamma, k=k, t_over_hbar=t_over_hbar),
    "xy_gamma": lambda h=1.0, J=1.0, k=0.0, t_over_hbar=1.0, **_: xy_encoding(
        "gamma", h=h, J=J, k=k, t_over_hbar=t_over_hbar),
    "phase": lambda **_: phase_encoding(),
    "identity": lambda **_: identity_encoding(),
}


def make_encoding(encoding_id: str, fixed: dict | None = None) -> EncodingFamily:
    if encoding_id not in PRESETS:
        raise DomainError(f"unknown encoding id '{encoding_id}'; "
                          f"known: {', '.join(sorted(PRESETS))}")
    return PRESETS[encoding_id](**(fixed or {}))


# ---------------------------------------------------------------------------
# Pauli decomposition of two-qubit operators

def pauli_decompose(u4: np.ndarray) -> np.ndarray:
    """Coefficients h_ij with U = Σ_ij h_ij σi⊗σj, h_ij = Tr[(σi⊗σj)† U]/4."""
    if u4.shape != (4, 4):
        raise InvariantViolation("pauli_decompose expects a 4x4 matrix")
    coeffs = np.empty((4, 4), dtype=complex)
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            coeffs[i, j] = np.trace(dag(kron(si, sj)) @ u4) / 4.0
    return coeffs


def pauli_reconstruct(coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            out += coeffs[i, j] * kron(si, sj)
    return out
