"""Dense complex linear algebra for small multi-qubit Hilbert spaces.

Everything here operates on plain complex numpy arrays. Subsystem ordering
is fixed globally as probe ⊗ auxiliary (⊗ environment when one is appended);
all higher modules rely on it.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation

DEFAULT_TOL = 1e-9

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: Ordered single-qubit operator table: identity first, then x, y, z.
PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(m - dag(m))) <= tol)


def is_unitary(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    d = m.shape[0]
    return bool(np.max(np.abs(dag(m) @ m - np.eye(d))) <= tol)


def is_density(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """Hermitian, unit trace and eigenvalues ≥ -tol."""
    if not is_hermitian(m, tol):
        return False
    if abs(np.trace(m) - 1.0) > tol:
        return False
    return bool(np.min(np.linalg.eigvalsh(m)) >= -tol)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product of one or more operators, left to right."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def basis_state(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not in ``keep``; kept factors stay in order.

    ``dims`` lists the subsystem dimensions whose product must match the
    matrix dimension.
    """
    dims = [int(d) for d in dims]
    n = len(dims)
    total = math.prod(dims)
    if m.shape != (total, total):
        raise InvariantViolation(
            f"matrix of dim {m.shape[0]} inconsistent with subsystem dims {dims}")
    keep = sorted(set(keep))
    if any(i < 0 or i >= n for i in keep):
        raise InvariantViolation(f"keep indices {keep} out of range for {n} subsystems")

    t = m.reshape(dims + dims)
    # bra labels 0..n-1; traced kets share the bra label, kept kets get n+i
    bra = list(range(n))
    ket = [i if i not in keep else n + i for i in range(n)]
    out_labels = [i for i in keep] + [n + i for i in keep]
    reduced = np.einsum(t, bra + ket, out_labels)
    d_keep = math.prod(dims[i] for i in keep) if keep else 1
    return reduced.reshape(d_keep, d_keep)


def eig_hermitian(h: np.ndarray, tol: float = DEFAULT_TOL):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a
    Hermitian matrix."""
    if not is_hermitian(h, tol):
        raise InvariantViolation("eig_hermitian requires a Hermitian matrix")
    return np.linalg.eigh(h)


def expm_unitary(h: np.ndarray, s: float = 1.0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """exp(-i·s·H) for Hermitian H, via eigendecomposition."""
    w, v = eig_hermitian(h, tol)
    return (v * np.exp(-1j * s * w)) @ dag(v)


def embed_operator(op: np.ndarray, dims: Sequence[int], slots: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on the subsystems ``slots`` (in that order) to the
    full space described by ``dims``, identity elsewhere."""
    dims = [int(d) for d in dims]
    n = len(dims)
    slots = list(slots)
    rest = [i for i in range(n) if i not in slots]
    order = slots + rest

    d_slots = math.prod(dims[i] for i in slots)
    if op.shape != (d_slots, d_slots):
        raise InvariantViolation(
            f"operator of dim {op.shape[0]} does not fit slots {slots} of dims {dims}")

    big = np.kron(op, np.eye(math.prod(dims[i] for i in rest) if rest else 1))
    total = math.prod(dims)
    multi = np.unravel_index(np.arange(total), dims)
    permuted = np.ravel_multi_index([multi[i] for i in order], [dims[i] for i in order])
    return big[np.ix_(permuted, permuted)]
