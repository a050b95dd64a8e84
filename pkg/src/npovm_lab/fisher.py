"""Fisher information: classical FI of outcome distributions, SLD-based
quantum FI, and the closed forms for pure-state unitary families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvariantViolation
from .tensor import dag, eig_hermitian, is_hermitian

# Outcomes with probability below PROB_FLOOR contribute nothing unless their
# derivative is genuinely nonzero, in which case the term is clamped so a real
# FI divergence stays visible instead of turning into inf.
PROB_FLOOR = 1e-12
DERIV_FLOOR = 1e-9
SLD_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class OutcomeDistribution:
    """Outcome probabilities p(i|theta) with their parameter derivatives."""

    probs: np.ndarray
    derivs: np.ndarray

    def validate(self) -> None:
        if self.probs.shape != self.derivs.shape:
            raise InvariantViolation("probs and derivs must have equal length")
        if np.any(self.probs < -1e-9):
            raise InvariantViolation("negative outcome probability")
        if abs(self.probs.sum() - 1.0) > 1e-9:
            raise InvariantViolation(f"probabilities sum to {self.probs.sum()}, not 1")
        if abs(self.derivs.sum()) > 1e-6:
            raise InvariantViolation("derivative sum violates trace preservation")


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues of the generator with the probability weights placed on them."""

    eps: np.ndarray
    weights: np.ndarray


def guarded_fisher(probs: np.ndarray, derivs: np.ndarray) -> float:
    """Σ_i (dp_i)² / p_i with the small-probability guard, no validation."""
    p = np.asarray(probs, dtype=float)
    dp = np.asarray(derivs, dtype=float)
    live = ~((p < PROB_FLOOR) & (np.abs(dp) < DERIV_FLOOR))
    return float(np.sum(dp[live] ** 2 / np.maximum(p[live], PROB_FLOOR)))


def classical_fisher(dist: OutcomeDistribution) -> float:
    """F = Σ_i (dp_i)² / p_i with the small-probability guard above."""
    dist.validate()
    return guarded_fisher(dist.probs, dist.derivs)


def prob_derivative(
    f: Callable[[float], Sequence[float]],
    theta: float,
    step: float = 1e-4,
) -> OutcomeDistribution:
    """Central-difference derivative of an outcome-probability map.

    Domain errors raised by ``f`` at theta ± step propagate to the caller.
    """
    if step <= 0:
        raise InvariantViolation("derivative step must be positive")
    plus = np.asarray(f(theta + step), dtype=float)
    minus = np.asarray(f(theta - step), dtype=float)
    probs = np.asarray(f(theta), dtype=float)
    return OutcomeDistribution(probs=probs, derivs=(plus - minus) / (2.0 * step))


def sld(rho: np.ndarray, drho: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Symmetric logarithmic derivative L solving drho = (L rho + rho L)/2.

    Off the support of rho (eigenvalue pairs below the floor) L is set to 0.
    """
    if not is_hermitian(rho, tol) or not is_hermitian(drho, tol):
        raise InvariantViolation("sld requires Hermitian rho and drho")
    if abs(np.trace(drho)) > 1e-6:
        raise InvariantViolation("drho must be traceless (trace preservation)")
    w, v = eig_hermitian(rho, tol)
    d = dag(v) @ drho @ v
    denom = w[:, None] + w[None, :]
    l_eig = np.zeros_like(d)
    mask = denom > SLD_EIG_FLOOR
    l_eig[mask] = 2.0 * d[mask] / denom[mask]
    return v @ l_eig @ dag(v)


def qfi_sld(rho: np.ndarray, drho: np.ndarray, tol: float = 1e-8) -> float:
    """Tr[rho L²] = Σ_{mn} 2|drho_mn|²/(λm+λn) over the support of rho."""
    if not is_hermitian(rho, tol) or not is_hermitian(drho, tol):
        raise InvariantViolation("qfi_sld requires Hermitian rho and drho")
    w, v = eig_hermitian(rho, tol)
    d = dag(v) @ drho @ v
    denom = w[:, None] + w[None, :]
    mask = denom > SLD_EIG_FLOOR
    return float(np.sum(2.0 * np.abs(d[mask]) ** 2 / denom[mask]))


def qfi_pure_unitary(psi: np.ndarray, hdot: np.ndarray, tol: float = 1e-8) -> float:
    """4·(variance of the generator derivative in the pure input state)."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise InvariantViolation("qfi_pure_unitary requires a normalized state")
    if not is_hermitian(hdot, tol):
        raise InvariantViolation("generator derivative must be Hermitian")
    mean = np.real(np.vdot(psi, hdot @ psi))
    second = np.real(np.vdot(psi, hdot @ (hdot @ psi)))
    return float(4.0 * (second - mean * mean))


def max_qfi_unitary(hdot: np.ndarray, tol: float = 1e-8) -> tuple[float, SpectralData]:
    """Maximum of 4(Σ P_i ε_i² − (Σ P_i ε_i)²) over probability vectors P.

    The maximizer puts weight 1/2 on each extreme eigenvalue, giving
    (ε_max − ε_min)². The closed form is validated against a brute-force
    simplex grid in the test suite.
    """
    eps, _ = eig_hermitian(hdot, tol)
    weights = np.zeros_like(eps)
    weights[0] = weights[-1] = 0.5
    if eps.size == 1:
        weights[0] = 1.0
    value = float((eps[-1] - eps[0]) ** 2)
    return value, SpectralData(eps=eps, weights=weights)
