import numpy as np
import pytest

from npovm_lab.encodings import (
    PRESETS,
    amplitude_damping,
    apply_channel,
    dephasing,
    kraus_ops,
    make_encoding,
    mixed_env_state,
    pauli_decompose,
    pauli_reconstruct,
    phase_encoding,
    xx_encoding,
    xy_encoding,
    xy_hamiltonian,
)
from npovm_lab.errors import DomainError, InvariantViolation
from npovm_lab.tensor import (
    SIGMA_X,
    dag,
    expm_unitary,
    is_density,
    kron,
    pure_density,
)


def random_density(rng, dim=2):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ dag(a)
    return rho / np.trace(rho)


def random_pure(rng, dim=2):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return pure_density(v / np.linalg.norm(v))


# --- amplitude damping ------------------------------------------------------

def test_amp_damp_kraus_limits():
    enc = amplitude_damping()
    k0, k1 = kraus_ops(enc, 0.0)
    assert np.allclose(k0, np.eye(2))
    assert np.allclose(k1, 0)
    k0, k1 = kraus_ops(enc, 1.0)
    assert np.allclose(k0, np.diag([0, 1]))  # |1><1|
    assert np.allclose(k1, np.array([[0, 0], [1, 0]]))  # |1><0|


def test_amp_damp_trace_preserving():
    enc = amplitude_damping()
    k0, k1 = kraus_ops(enc, 0.3)
    assert np.allclose(dag(k0) @ k0 + dag(k1) @ k1, np.eye(2), atol=1e-12)


def test_amp_damp_full_damping_maps_to_one():
    enc = amplitude_damping()
    rng = np.random.default_rng(0)
    for _ in range(3):
        out = apply_channel(random_density(rng), enc, 1.0)
        assert np.allclose(out, np.diag([0, 1]), atol=1e-12)


def test_amp_damp_domain():
    with pytest.raises(DomainError):
        kraus_ops(amplitude_damping(), 1.2)


# --- dephasing --------------------------------------------------------------

def test_dephasing_identity_at_zero():
    enc = dephasing()
    rng = np.random.default_rng(1)
    rho = random_density(rng)
    assert np.allclose(apply_channel(rho, enc, 0.0), rho, atol=1e-12)


def test_dephasing_on_plus_state():
    plus = pure_density(np.array([1, 1]) / np.sqrt(2))
    out = apply_channel(plus, dephasing(), 0.3)
    assert np.allclose(np.diag(out), [0.5, 0.5])
    assert np.isclose(out[0, 1], (1 - 0.3) / 2)


def test_dephasing_trace_preserving():
    ks = kraus_ops(dephasing(), 0.5)
    assert np.allclose(sum(dag(k) @ k for k in ks), np.eye(2), atol=1e-12)


# --- xx interaction ---------------------------------------------------------

def test_xx_global_unitary_limits():
    enc = xx_encoding()
    assert np.allclose(enc.global_unitary(0.0), np.eye(4))
    assert np.allclose(enc.global_unitary(np.pi / 2), -1j * kron(SIGMA_X, SIGMA_X),
                       atol=1e-12)


def test_xx_pauli_coefficients():
    co = pauli_decompose(xx_encoding().global_unitary(0.7))
    assert np.isclose(co[0, 0], np.cos(0.7))
    assert np.isclose(co[1, 1], -1j * np.sin(0.7))
    co[0, 0] = co[1, 1] = 0
    assert np.max(np.abs(co)) < 1e-12


def test_xx_swap_example():
    # replacing the interaction with SWAP sends any probe to the env state
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                    dtype=complex)
    enc = xx_encoding()
    enc = type(enc)(kind=enc.kind, label="swap", global_unitary=lambda th: swap,
                    env_state=pure_density([1.0, 0.0]))
    rng = np.random.default_rng(2)
    out = apply_channel(random_density(rng), enc, 0.3)
    assert np.allclose(out, np.diag([1, 0]), atol=1e-12)


# --- xy model ---------------------------------------------------------------

def test_xy_reduces_to_xx():
    xy = xy_encoding("h", J=1.0, gamma=1.0, k=1.0)  # k=1 -> env |0><0|
    assert np.allclose(xy_hamiltonian(0.0, 1.0, 1.0), kron(SIGMA_X, SIGMA_X))
    xx = xx_encoding()
    rng = np.random.default_rng(3)
    rho = random_density(rng)
    # at h=0 the xy_J channel with gamma=1 equals the xx channel at k_x=J
    xyj = xy_encoding("J", h=0.0, gamma=1.0, k=1.0)
    assert np.allclose(apply_channel(rho, xyj, 0.8), apply_channel(rho, xx, 0.8),
                       atol=1e-12)


def test_xy_local_terms_stay_unitary_on_probe():
    # J=0: global unitary is a product of local z-rotations; purity preserved
    enc = xy_encoding("h", J=0.0, gamma=0.3, k=0.4)
    rng = np.random.default_rng(4)
    rho = random_pure(rng)
    out = apply_channel(rho, enc, 0.9)
    assert np.isclose(np.trace(out @ out).real, 1.0, atol=1e-10)


def test_xy_env_state():
    assert np.allclose(mixed_env_state(0.0), np.eye(2) / 2)
    assert np.allclose(mixed_env_state(0.4), np.diag([0.7, 0.3]))
    with pytest.raises(DomainError):
        mixed_env_state(1.2)
    with pytest.raises(DomainError):
        xy_encoding("J", k=-1.01)


# --- generic channel properties --------------------------------------------

@pytest.mark.parametrize("encoding_id,lo,hi", [
    ("amp_damp", 0.0, 1.0),
    ("dephasing", 0.0, 1.0),
    ("xx", 0.0, 1.5),
    ("xy_h", 4.0, 5.0),
    ("xy_J", 0.25, 2.5),
    ("xy_gamma", 0.0, 1.0),
    ("phase", -1.0, 1.0),
])
def test_channels_preserve_density(encoding_id, lo, hi):
    enc = make_encoding(encoding_id, {"k": 0.2} if encoding_id.startswith("xy") else None)
    rng = np.random.default_rng(hash(encoding_id) % 2**32)
    for theta in rng.uniform(lo, hi, 50):
        for _ in range(20):
            out = apply_channel(random_density(rng), enc, float(theta))
            assert is_density(out, 1e-9)


@pytest.mark.parametrize("encoding_id", sorted(PRESETS))
def test_stinespring_consistency(encoding_id):
    """Kraus extraction and the global-unitary route agree on the channel."""
    fixed = {"k": 0.35} if encoding_id.startswith(("xy", "xx")) else None
    enc = make_encoding(encoding_id, fixed)
    lo, hi = enc.domain if enc.domain else (0.1, 1.4)
    rng = np.random.default_rng(11)
    for theta in rng.uniform(lo + 0.01, hi - 0.01, 5):
        rho = random_density(rng)
        via_kraus = sum(k @ rho @ dag(k) for k in kraus_ops(enc, float(theta)))
        via_global = apply_channel(rho, enc, float(theta))
        assert np.allclose(via_kraus, via_global, atol=1e-10)


def test_apply_channel_on_probe_slot_of_joint_state():
    enc = amplitude_damping()
    rng = np.random.default_rng(12)
    rho_s, rho_a = random_density(rng), random_density(rng)
    out = apply_channel(kron(rho_s, rho_a), enc, 0.4, dims=[2, 2], slot=0)
    assert np.allclose(out, kron(apply_channel(rho_s, enc, 0.4), rho_a), atol=1e-12)


def test_non_tp_kraus_rejected():
    from npovm_lab.encodings import KRAUS, EncodingFamily
    bad = EncodingFamily(kind=KRAUS, label="bad",
                         kraus_fn=lambda th: [np.eye(2, dtype=complex) * 0.5])
    with pytest.raises(InvariantViolation):
        kraus_ops(bad, 0.1)


# --- pauli decomposition ----------------------------------------------------

def test_pauli_decompose_trivial():
    co = pauli_decompose(np.eye(4, dtype=complex))
    assert np.isclose(co[0, 0], 1.0)
    co[0, 0] = 0
    assert np.max(np.abs(co)) < 1e-12
    co = pauli_decompose(kron(SIGMA_X, SIGMA_X))
    assert np.isclose(co[1, 1], 1.0)


def test_pauli_decompose_cnot():
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                    dtype=complex)
    co = pauli_decompose(cnot)
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = expected[0, 1] = expected[3, 0] = 0.5
    expected[3, 1] = -0.5
    assert np.allclose(co, expected, atol=1e-12)


def test_pauli_roundtrip_random():
    rng = np.random.default_rng(13)
    for _ in range(50):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert np.allclose(pauli_reconstruct(pauli_decompose(m)), m, atol=1e-10)


def test_unknown_preset():
    with pytest.raises(DomainError):
        make_encoding("nope")
