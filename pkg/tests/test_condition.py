import numpy as np
import pytest

from npovm_lab.condition import (
    EXACT,
    GLOBAL_PHASE,
    XX_MEASUREMENT,
    aux_rotation_pair,
    check_sufficient_condition,
    derive_povm_measurement,
)
from npovm_lab.encodings import amplitude_damping, dephasing, xx_encoding
from npovm_lab.errors import InvariantViolation
from npovm_lab.strategies import (
    GENERAL,
    POSITIVE,
    MeasurementStrategy,
    angles_from_unitary,
    outcome_distribution,
)
from npovm_lab.tensor import PAULIS, dag, is_unitary, kron

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def general_distribution(u_prep, u_meas, enc, theta):
    params = np.concatenate([angles_from_unitary(u_prep), angles_from_unitary(u_meas)])
    return outcome_distribution(MeasurementStrategy(GENERAL, params), enc, theta)


def positive_distribution(u1, u2, u_meas, enc, theta):
    params = np.concatenate([angles_from_unitary(u1), angles_from_unitary(u2),
                             angles_from_unitary(u_meas)])
    return outcome_distribution(MeasurementStrategy(POSITIVE, params), enc, theta)


def test_identity_satisfies():
    report = check_sufficient_condition(I4, I2)
    assert report.satisfied
    assert report.witness == 0
    assert np.max(report.residuals) < 1e-12


def test_cnot_fails_every_witness():
    report = check_sufficient_condition(CNOT, I2)
    assert not report.satisfied
    assert report.witness is None
    # every row has at least one large residual
    assert np.all(report.residuals.max(axis=1) > 0.5)


def test_cnot_residual_matches_direct_norm():
    # i=1, k=2: sigma_x sigma_y = i sigma_z; CNOT does not commute with I⊗sz
    report = check_sufficient_condition(CNOT, I2, phase=EXACT)
    prod = PAULIS[1] @ PAULIS[2]
    direct = np.linalg.norm(CNOT @ kron(I2, prod) - kron(I2, prod) @ CNOT, 2)
    assert np.isclose(report.residuals[1, 2], direct, atol=1e-12)
    assert direct > 1.0


def test_aux_rotation_recipe_satisfies_for_any_unitary():
    rng = np.random.default_rng(0)
    for _ in range(5):
        u_prep, u_aux = aux_rotation_pair(random_unitary(rng, 2))
        report = check_sufficient_condition(u_prep, u_aux)
        assert report.satisfied
        assert report.witness == 0
        assert np.max(report.residuals) < 1e-9


def test_phase_conventions():
    rng = np.random.default_rng(1)
    v = random_unitary(rng, 2)
    u_prep, u_aux = aux_rotation_pair(v)
    u_prep_phased = np.exp(0.31j) * u_prep
    assert check_sufficient_condition(u_prep_phased, u_aux, phase=GLOBAL_PHASE).satisfied
    assert not check_sufficient_condition(u_prep_phased, u_aux, phase=EXACT).satisfied


def test_derive_measurement_collapses_for_product_preparation():
    rng = np.random.default_rng(2)
    u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
    um = random_unitary(rng, 4)
    derived = derive_povm_measurement(um, kron(u1, u2), u1, u2, witness=0)
    assert np.allclose(derived, um, atol=1e-12)


def test_derive_measurement_identity_case():
    for witness in range(4):
        derived = derive_povm_measurement(I4, I4, I2, I2, witness)
        assert np.allclose(derived, I4, atol=1e-12)


def test_derive_measurement_is_unitary():
    rng = np.random.default_rng(3)
    for witness in range(4):
        um = random_unitary(rng, 4)
        u = random_unitary(rng, 4)
        u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
        derived = derive_povm_measurement(um, u, u1, u2, witness)
        assert is_unitary(derived, 1e-10)


def test_rejects_non_unitary_inputs():
    with pytest.raises(InvariantViolation):
        check_sufficient_condition(np.ones((4, 4), dtype=complex), I2)
    with pytest.raises(InvariantViolation):
        derive_povm_measurement(2 * I4, I4, I2, I2, 0)


def test_xx_measurement_is_unitary():
    assert is_unitary(XX_MEASUREMENT, 1e-12)


def test_xx_example_condition_and_equivalence():
    # preparation U = I (uncorrelated), U2 = I: condition holds with i = 0 and
    # the derived measurement equals the given one
    report = check_sufficient_condition(I4, I2)
    assert report.satisfied and report.witness == 0
    derived = derive_povm_measurement(XX_MEASUREMENT, I4, I2, I2, report.witness)
    assert np.allclose(derived, XX_MEASUREMENT, atol=1e-12)

    enc = xx_encoding()
    for theta in (0.2, 0.8, 1.3):
        p_gen = general_distribution(I4, XX_MEASUREMENT, enc, theta)
        p_pos = positive_distribution(I2, I2, derived, enc, theta)
        assert np.allclose(p_gen, p_pos, atol=1e-8)


def test_operational_equivalence_for_recipe_pairs():
    """Condition holds -> derived-measurement positive strategy reproduces the
    general strategy's outcomes, across channels and parameter values."""
    rng = np.random.default_rng(4)
    encodings = [amplitude_damping(), dephasing(), xx_encoding()]
    for trial in range(5):
        v = random_unitary(rng, 2)
        u_prep, u_aux = aux_rotation_pair(v)
        report = check_sufficient_condition(u_prep, u_aux)
        assert report.satisfied
        um = random_unitary(rng, 4)
        u1 = I2  # probe factor of the preparation is the identity
        derived = derive_povm_measurement(um, u_prep, u1, u_aux, report.witness)
        enc = encodings[trial % len(encodings)]
        for theta in rng.uniform(0.05, 0.95, 4):
            p_gen = general_distribution(u_prep, um, enc, float(theta))
            p_pos = positive_distribution(u1, u_aux, derived, enc, float(theta))
            assert np.allclose(p_gen, p_pos, atol=1e-8)


def test_residuals_reproducible():
    rng = np.random.default_rng(5)
    u = random_unitary(rng, 4)
    u2 = random_unitary(rng, 2)
    r1 = check_sufficient_condition(u, u2).residuals
    r2 = check_sufficient_condition(u, u2).residuals
    assert np.array_equal(r1, r2)
