"""Sufficient-condition checker for when a product-input (POVM) strategy can
reproduce a given general strategy's precision, plus the construction of the
matching measurement unitary.

The condition, for a preparation unitary U on probe ⊗ auxiliary and an
auxiliary unitary U2, asks for some index i that

    U (I ⊗ U2† σi σk U2) = (I ⊗ σi σk) U   for every k.

Any pair built as U = I ⊗ V, U2 = V satisfies it identically. When it holds
with witness i, the positive strategy that prepares with (U1 ⊗ U2) and
measures with the derived unitary reproduces the general strategy's outcome
distribution exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantViolation
from .tensor import PAULIS, dag, is_unitary, kron

EXACT = "exact"
GLOBAL_PHASE = "up-to-global-phase"

#: Measurement rotation reported for the XX-interaction example, normalized
#: by 1/sqrt(2) so it is unitary.
XX_MEASUREMENT = np.array(
    [[1, 0, 0, 1],
     [0, 1, 1, 0],
     [0, 1, -1, 0],
     [1, 0, 0, -1]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class ConditionReport:
    satisfied: bool
    witness: int | None
    residuals: np.ndarray  # (4, 4) operator-norm deviations per (i, k)
    phase_convention: str

    def __str__(self) -> str:
        lines = [f"satisfied: {self.satisfied}"]
        if self.witness is not None:
            lines.append(f"witness i: {self.witness}")
        lines.append(f"phase convention: {self.phase_convention}")
        lines.append("residuals (rows i, columns k):")
        for row in self.residuals:
            lines.append("  " + "  ".join(f"{r:.3e}" for r in row))
        return "\n".join(lines)


def _operator_distance(lhs: np.ndarray, rhs: np.ndarray, phase: str) -> float:
    if phase == GLOBAL_PHASE:
        overlap = np.trace(dag(rhs) @ lhs)
        if abs(overlap) > 1e-30:
            rhs = (overlap / abs(overlap)) * rhs
    return float(np.linalg.norm(lhs - rhs, 2))


def check_sufficient_condition(
    u_prep: np.ndarray,
    u_aux: np.ndarray,
    tol: float = 1e-8,
    phase: str = GLOBAL_PHASE,
) -> ConditionReport:
    """Residual table over (i, k) and the smallest witness row, if any.

    ``u_prep`` acts on probe ⊗ auxiliary (auxiliary second), ``u_aux`` on the
    auxiliary alone; the qubit-auxiliary Pauli instantiation is the one
    implemented.
    """
    if phase not in (EXACT, GLOBAL_PHASE):
        raise DomainError(f"unknown phase convention '{phase}'")
    if u_prep.shape != (4, 4) or u_aux.shape != (2, 2):
        raise InvariantViolation("expected a 4x4 preparation and a 2x2 auxiliary unitary")
    if not is_unitary(u_prep) or not is_unitary(u_aux):
        raise InvariantViolation("condition check requires unitary inputs")

    eye2 = np.eye(2, dtype=complex)
    residuals = np.zeros((4, 4))
    for i, si in enumerate(PAULIS):
        for k, sk in enumerate(PAULIS):
            sandwich = dag(u_aux) @ si @ sk @ u_aux
            lhs = u_prep @ kron(eye2, sandwich)
            rhs = kron(eye2, si @ sk) @ u_prep
            residuals[i, k] = _operator_distance(lhs, rhs, phase)

    witness = None
    for i in range(4):
        if np.all(residuals[i] <= tol):
            witness = i
            break
    return ConditionReport(satisfied=witness is not None, witness=witness,
                           residuals=residuals, phase_convention=phase)


def derive_povm_measurement(
    u_meas: np.ndarray,
    u_prep: np.ndarray,
    u_probe: np.ndarray,
    u_aux: np.ndarray,
    witness: int,
) -> np.ndarray:
    """Measurement unitary for the positive strategy matching the general one:

        U_M (I⊗σi) U (U1⊗U2)† (I⊗σi)

    The defining relation  U_M (I⊗σi) U = result (I⊗σi) (U1⊗U2)  is asserted
    at runtime.
    """
    if witness not in range(4):
        raise DomainError(f"witness index {witness} outside 0..3")
    for name, u in (("u_meas", u_meas), ("u_prep", u_prep)):
        if u.shape != (4, 4) or not is_unitary(u):
            raise InvariantViolation(f"{name} must be a 4x4 unitary")
    for name, u in (("u_probe", u_probe), ("u_aux", u_aux)):
        if u.shape != (2, 2) or not is_unitary(u):
            raise InvariantViolation(f"{name} must be a 2x2 unitary")

    lift = kron(np.eye(2, dtype=complex), PAULIS[witness])
    local = kron(u_probe, u_aux)
    result = u_meas @ lift @ u_prep @ dag(local) @ lift

    if np.max(np.abs(u_meas @ lift @ u_prep - result @ lift @ local)) > 1e-9:
        raise InvariantViolation("derived measurement violates its defining relation")
    return result


def aux_rotation_pair(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(U, U2) = (I ⊗ V, V): satisfies the sufficient condition for any
    unitary V, with every i as a witness."""
    if v.shape != (2, 2) or not is_unitary(v):
        raise InvariantViolation("aux rotation must be a 2x2 unitary")
    return kron(np.eye(2, dtype=complex), v), v
