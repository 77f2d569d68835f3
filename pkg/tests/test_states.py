"""Statevector kernels against dense expm/kron oracles.

The kernels index qubit q at bit q (LSB first); the oracles put the first
site in the leftmost Kronecker slot, so oracle calls below reverse the site
order to line the two conventions up.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fdtc.lattice import surface_code, toric_code
from fdtc.pauli import PauliString
from fdtc.states import (
    NumericsError,
    ResourceLimitError,
    apply_pauli,
    apply_rotation,
    diagonalize,
    evolve_within_period,
    expectation,
    floquet_unitary,
    fold_quasienergy,
    logical_basis_states,
    pauli_matrix,
    plus_y_product_state,
    sector_decompose,
    zero_state,
)

SITES3 = ((1, 1), (2, 1), (1, 2))
KRON3 = list(reversed(SITES3))


@st.composite
def pauli3_st(draw, hermitian=False):
    chosen = draw(st.lists(st.sampled_from(SITES3), unique=True, max_size=3))
    terms = tuple((s, draw(st.sampled_from("XYZ"))) for s in chosen)
    k = draw(st.sampled_from([0, 2]) if hermitian else st.integers(0, 3))
    return PauliString(terms, k)


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@given(pauli3_st(), st.integers(0, 2**31 - 1))
def test_apply_pauli_matches_dense(p, seed):
    psi = random_state(np.random.default_rng(seed), 3)
    got = apply_pauli(p, psi, SITES3)
    want = oracles.dense_pauli(p, KRON3) @ psi
    assert np.allclose(got, want, atol=1e-12)


@given(pauli3_st(hermitian=True), st.floats(-2.0, 2.0), st.integers(0, 2**31 - 1))
def test_apply_rotation_matches_dense(p, theta, seed):
    psi = random_state(np.random.default_rng(seed), 3)
    got = apply_rotation(theta, p, psi, SITES3)
    want = oracles.dense_rotation(theta, p, KRON3) @ psi
    assert np.allclose(got, want, atol=1e-10)


def test_rotation_rejects_imaginary_axis():
    with pytest.raises(ValueError):
        apply_rotation(0.3, PauliString.single((1, 1), "X").times_i(1), zero_state(3), SITES3)


@given(pauli3_st())
def test_pauli_matrix_matches_dense(p):
    assert np.allclose(pauli_matrix(p, SITES3), oracles.dense_pauli(p, KRON3))


def test_expectation_simple():
    psi = zero_state(3)
    assert expectation(PauliString.single((1, 1), "Z"), psi, SITES3) == pytest.approx(1.0)
    assert expectation(PauliString.single((1, 1), "X"), psi, SITES3) == pytest.approx(0.0)


# ----- Floquet unitary -----


def _random_params(code, rng):
    h_x = {s: rng.uniform(-1.5, 1.5) for s in code.sites}
    h_z = {s: rng.uniform(-1.5, 1.5) for s in code.sites}
    js = [rng.uniform(-1.0, 1.0) for _ in code.generators]
    return h_x, h_z, js


def _dense_floquet(code, h_x, h_z, js):
    kron_order = list(reversed(code.sites))
    dim = 2 ** code.n_qubits
    us = np.eye(dim, dtype=complex)
    for g, j in zip(code.generators, js):
        us = oracles.dense_rotation(j, g, kron_order) @ us
    uz = np.eye(dim, dtype=complex)
    for s in code.sites:
        uz = oracles.dense_rotation(h_z[s], PauliString.single(s, "Z"), kron_order) @ uz
    ux = np.eye(dim, dtype=complex)
    for s in code.sites:
        ux = oracles.dense_rotation(h_x[s], PauliString.single(s, "X"), kron_order) @ ux
    return ux @ uz @ us


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_floquet_unitary_matches_dense(seed):
    code = surface_code(2, 2)
    h_x, h_z, js = _random_params(code, np.random.default_rng(seed))
    got = floquet_unitary(code, h_x, h_z, js)
    want = _dense_floquet(code, h_x, h_z, js)
    assert np.allclose(got, want, atol=1e-10)


def test_floquet_layer_order():
    # with only one term per layer the order X.Z.S is visible on |0>
    code = surface_code(2, 2)
    u = floquet_unitary(code, {(1, 1): math.pi / 2}, {}, [0.0] * len(code.generators))
    psi = u @ zero_state(4)
    # e^{-i pi/2 X} = -i X up to the layer structure: |0> -> -i |1> on qubit 0
    want = np.zeros(16, dtype=complex)
    want[1] = -1j
    assert np.allclose(psi, want, atol=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.15, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9, 1.0])
def test_evolve_within_period_endpoints(t):
    code = surface_code(2, 2)
    h_x, h_z, js = _random_params(code, np.random.default_rng(7))
    psi0 = random_state(np.random.default_rng(8), 4)
    psi_t = evolve_within_period(code, h_x, h_z, js, psi0, t)
    assert np.linalg.norm(psi_t) == pytest.approx(1.0, abs=1e-12)
    if t == 0.0:
        assert np.allclose(psi_t, psi0)
    if t == 1.0:
        u = floquet_unitary(code, h_x, h_z, js)
        assert np.allclose(psi_t, u @ psi0, atol=1e-10)


def test_evolve_within_period_is_piecewise():
    # during the first third only the stabilizer layer acts
    code = surface_code(2, 2)
    h_x, h_z, js = _random_params(code, np.random.default_rng(9))
    psi0 = random_state(np.random.default_rng(10), 4)
    t = 0.2
    got = evolve_within_period(code, h_x, h_z, js, psi0, t)
    kron_order = list(reversed(code.sites))
    want = psi0.copy()
    for g, j in zip(code.generators, js):
        want = oracles.dense_rotation(3.0 * j * t, g, kron_order) @ want
    assert np.allclose(got, want, atol=1e-10)
    with pytest.raises(ValueError):
        evolve_within_period(code, h_x, h_z, js, psi0, 1.5)


# ----- diagonalization -----


def test_diagonalize_random_unitary():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    q, _ = np.linalg.qr(a)
    eps, vecs = diagonalize(q)
    assert np.all(np.diff(eps) >= 0)
    assert np.all(eps > -math.pi - 1e-12) and np.all(eps <= math.pi + 1e-12)
    for k in range(16):
        assert np.allclose(q @ vecs[:, k], np.exp(-1j * eps[k]) * vecs[:, k], atol=1e-9)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(16), atol=1e-10)


def test_diagonalize_degenerate_spectrum():
    # X on one qubit of two: each eigenvalue twice; basis must stay orthonormal
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    u = np.kron(np.eye(2), x)
    eps, vecs = diagonalize(u)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-12)
    assert np.allclose(sorted(eps), [0.0, 0.0, math.pi, math.pi], atol=1e-12)


def test_diagonalize_rejects_nonunitary():
    with pytest.raises(NumericsError):
        diagonalize(np.diag([1.0, 0.5]).astype(complex))


def test_fold_quasienergy_zone():
    assert fold_quasienergy(math.pi) == pytest.approx(math.pi)
    assert fold_quasienergy(-math.pi) == pytest.approx(math.pi)
    assert fold_quasienergy(1.5 * math.pi) == pytest.approx(-0.5 * math.pi)
    assert fold_quasienergy(0.25) == pytest.approx(0.25)


# ----- sectors and codewords -----


def test_sector_decompose_zero_state():
    code = surface_code(2, 2)
    sectors = dict(sector_decompose(code, zero_state(4)))
    # generator order: X plaquette, then the two Z pairs
    assert sectors == pytest.approx({(1, 1, 1): 0.5, (-1, 1, 1): 0.5})


def test_sector_decompose_toric_rotated_state():
    # X4 and Z4 both send the all-(Y=+1) product state to the all-(Y=-1)
    # one, so the split is uniform over two fully tied sectors
    code = toric_code(2, 2)
    psi = plus_y_product_state(code)
    weights = dict(sector_decompose(code, psi))
    assert weights == pytest.approx({(1, 1, 1, 1): 0.5, (-1, -1, -1, -1): 0.5})


def test_sector_decompose_codeword_single_sector():
    code = surface_code(2, 2)
    basis = logical_basis_states(code)
    assert dict(sector_decompose(code, basis["0"])) == pytest.approx({(1, 1, 1): 1.0})


def test_sector_weights_sum_to_one():
    code = surface_code(2, 3)
    psi = random_state(np.random.default_rng(11), 6)
    total = sum(w for _, w in sector_decompose(code, psi))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_logical_basis_surface():
    code = surface_code(2, 2)
    basis = logical_basis_states(code)
    z = code.logical_z[0]
    for label, psi in basis.items():
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        for g in code.generators:
            assert expectation(g, psi, code.sites) == pytest.approx(1.0)
        want = 1.0 if label == "0" else -1.0
        assert expectation(z, psi, code.sites) == pytest.approx(want)
    assert abs(np.vdot(basis["0"], basis["1"])) < 1e-12


def test_logical_basis_toric():
    code = toric_code(2, 2)
    basis = logical_basis_states(code)
    assert set(basis) == {"00", "10", "01", "11"}
    z1, z2 = code.logical_z
    for label, psi in basis.items():
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        for g in code.generators:
            assert expectation(g, psi, code.sites) == pytest.approx(1.0)
        assert expectation(z1, psi, code.sites) == pytest.approx(1.0 if label[0] == "0" else -1.0)
        assert expectation(z2, psi, code.sites) == pytest.approx(1.0 if label[1] == "0" else -1.0)
    gram = np.array([[np.vdot(a, b) for b in basis.values()] for a in basis.values()])
    assert np.allclose(gram, np.eye(4), atol=1e-12)


def test_qubit_budget(monkeypatch):
    with pytest.raises(ResourceLimitError):
        zero_state(15)
    monkeypatch.setenv("FDTC_MAX_QUBITS", "16")
    assert zero_state(15).shape == (2**15,)
    monkeypatch.setenv("FDTC_MAX_QUBITS", "soon")
    with pytest.raises(ResourceLimitError):
        zero_state(15)
